#include <doctest.h>

#include <boost/math/distributions/inverse_gaussian.hpp>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "semimarkov/compare.hpp"
#include "semimarkov/error.hpp"
#include "semimarkov/simulate.hpp"

using namespace semimarkov;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

class FixedUniform final : public UniformSource {
 public:
  explicit FixedUniform(double u) : u_(u) {}
  double uniform() override { return u_; }

 private:
  double u_;
};

using Row = TransitionMatrix::Row;

double max_error(const TransitionMatrix& a, const TransitionMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a.prob(i, j) - b.prob(i, j)));
  }
  return worst;
}

// Continuous-time occupancy of a semi-Markov process by plain long-run
// simulation, with its own generator and inverse CDFs.
std::vector<double> long_run_occupancy(const fixtures::Table& table, const std::map<StateIndex, DwellFit>& dwell,
                                       double horizon_s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto u01 = [&] {
    double u;
    do u = unif(gen);
    while (u <= 0.0);
    return u;
  };
  auto draw = [&](const DwellParams& p) {
    if (auto* e = std::get_if<ExponentialParams>(&p)) return -e->mu * std::log(u01());
    if (auto* g = std::get_if<GevParams>(&p)) return g->mu + g->sigma * (std::pow(-std::log(u01()), -g->k) - 1.0) / g->k;
    if (auto* g = std::get_if<GpdParams>(&p)) return g->sigma * (std::pow(u01(), -g->k) - 1.0) / g->k;
    const auto& ig = std::get<InverseGaussianParams>(p);
    return boost::math::quantile(boost::math::inverse_gaussian_distribution<double>(ig.mu, ig.lambda), u01());
  };
  std::vector<double> occupancy(5, 0.0);
  double t = 0.0;
  std::size_t s = 0;
  while (t < horizon_s) {
    double d;
    do d = draw(dwell.at(static_cast<StateIndex>(s)).params);
    while (d <= 0.0);
    d = std::min(d, horizon_s - t);
    occupancy[s] += d;
    t += d;
    double sum = 0.0;
    for (double v : table[s]) sum += v;
    const double u = u01() * sum;
    double cum = 0.0;
    std::size_t next = s;
    for (std::size_t j = 0; j < 5; ++j) {
      if (table[s][j] <= 0.0) continue;
      cum += table[s][j];
      next = j;
      if (u < cum) break;
    }
    s = next;
  }
  for (double& v : occupancy) v /= horizon_s;
  return occupancy;
}

}  // namespace

TEST_CASE("forced alternation") {
  const StateAlphabet ab = build_alphabet({"A", "B"});
  const TransitionMatrix t(ab, ChainKind::SemiMarkov, {Row{{0, 1}}, Row{{1, 0}}});
  std::map<StateIndex, DwellFit> dwell{{0, fixtures::fit_of(ExponentialParams{1.0})},
                                       {1, fixtures::fit_of(ExponentialParams{1.0})}};
  const SemiMarkovModel m(t, dwell);
  SimulationConfig cfg;
  cfg.duration_s = 4.0;
  cfg.output_sampling_rate_hz = 1.0;
  cfg.initial_state = 0;
  FixedUniform u(1.0 - std::exp(-1.0));
  const auto r = simulate_sequence(m, cfg, u);
  CHECK(r.runs() == std::vector<Run>{{0, 1}, {1, 1}, {0, 1}, {1, 1}});
}

TEST_CASE("determinism and structural invariants") {
  const auto model = fixtures::success_model();
  SimulationConfig cfg;
  cfg.seed = 77;
  cfg.duration_s = 123.4;
  cfg.output_sampling_rate_hz = 7.0;
  CHECK(simulate_sequence(model, cfg) == simulate_sequence(model, cfg));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    const auto r = simulate_sequence(model, cfg);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r.runs()[i].state != r.runs()[i - 1].state);
    CHECK(std::abs(r.duration_s() - cfg.duration_s) <= 1.0 / cfg.output_sampling_rate_hz);
  }
  cfg.seed = 1;
  SimulationConfig other = cfg;
  other.seed = 2;
  CHECK_FALSE(simulate_sequence(model, cfg) == simulate_sequence(model, other));
}

TEST_CASE("cohorts") {
  const auto model = fixtures::success_model();
  SimulationConfig cfg;
  cfg.seed = 1234;
  const auto one = simulate_cohort(model, 1, cfg);
  REQUIRE(one.size() == 1);
  CHECK(one[0].runs() == simulate_sequence(model, cfg).runs());
  CHECK(one[0].id() == "patient_0");
  CHECK(simulate_cohort(model, 50, cfg) == simulate_cohort(model, 50, cfg));
  const auto many = simulate_cohort(model, 5, cfg);
  SimulationConfig third = cfg;
  third.seed = cfg.seed + 3;
  CHECK(many[3].runs() == simulate_sequence(model, third).runs());
  CHECK(code_of([&] { simulate_cohort(model, 0, cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("configuration errors") {
  const StateAlphabet abc = build_alphabet({"A", "B", "C"});
  const TransitionMatrix t(abc, ChainKind::SemiMarkov, {Row{{0, 0.5, 0.5}}, Row{{1, 0, 0}}, std::nullopt});
  std::map<StateIndex, DwellFit> dwell{{0, fixtures::fit_of(ExponentialParams{1.0})},
                                       {1, fixtures::fit_of(ExponentialParams{1.0})},
                                       {2, fixtures::fit_of(ExponentialParams{1.0})}};
  const SemiMarkovModel m(t, dwell);
  SimulationConfig cfg;
  CHECK(code_of([&] { simulate_sequence(m, cfg); }) == ErrorCode::UnreachableAbsentRow);
  cfg.initial_state = 2;
  CHECK(code_of([&] { simulate_sequence(m, cfg); }) == ErrorCode::InvalidInitialState);
  cfg.initial_state = 9;
  CHECK(code_of([&] { simulate_sequence(m, cfg); }) == ErrorCode::InvalidInitialState);

  const TransitionMatrix closed(abc, ChainKind::SemiMarkov, {Row{{0, 1, 0}}, Row{{1, 0, 0}}, std::nullopt});
  const SemiMarkovModel ok(closed, dwell);
  cfg.initial_state = 0;
  CHECK_NOTHROW(simulate_sequence(ok, cfg));
  cfg.duration_s = 0.0;
  CHECK(code_of([&] { simulate_sequence(ok, cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("cohort occupancy converges to the long-run oracle") {
  const auto oracle = long_run_occupancy(fixtures::kSuccessTable, fixtures::success_dwell(), 1e5, 2718);
  SimulationConfig cfg;
  cfg.seed = 31415;
  cfg.output_sampling_rate_hz = 10.0;
  const auto runs = simulate_cohort(fixtures::success_model(), 200, cfg);
  std::vector<double> mean(5, 0.0);
  for (const auto& r : runs) {
    const auto f = time_fractions(r, fixtures::patterns());
    for (std::size_t i = 0; i < 5; ++i) mean[i] += f[i] / 200.0;
  }
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(mean[i] - oracle[i]) <= 0.03);
}

TEST_CASE("fit simulate refit converges with cohort size") {
  const auto truth = fixtures::success_model();
  SimulationConfig cfg;
  cfg.seed = 8080;
  cfg.output_sampling_rate_hz = 10.0;
  const auto small = fit_semi_markov_transitions(simulate_cohort(truth, 20, cfg), fixtures::patterns());
  const auto large = fit_semi_markov_transitions(simulate_cohort(truth, 400, cfg), fixtures::patterns());
  CHECK(max_error(large, truth.transitions()) < max_error(small, truth.transitions()));
}

TEST_CASE("multi-chain simulation") {
  const auto s = fixtures::success_model();
  SimulationConfig cfg;
  cfg.seed = 55;
  const MultiChainModel same({s, s}, {150.0});
  CHECK(simulate_multi_chain(same, cfg) == simulate_sequence(s, cfg));

  // Disjoint dominant transitions in each half.
  const StateAlphabet abc = build_alphabet({"A", "B", "C"});
  std::map<StateIndex, DwellFit> dwell{{0, fixtures::fit_of(ExponentialParams{1.0})},
                                       {1, fixtures::fit_of(ExponentialParams{1.5})},
                                       {2, fixtures::fit_of(ExponentialParams{0.8})}};
  const SemiMarkovModel first(TransitionMatrix(abc, ChainKind::SemiMarkov,
                                               {Row{{0, 0.9, 0.1}}, Row{{0.1, 0, 0.9}}, Row{{0.9, 0.1, 0}}}),
                              dwell);
  const SemiMarkovModel second(TransitionMatrix(abc, ChainKind::SemiMarkov,
                                                {Row{{0, 0.1, 0.9}}, Row{{0.9, 0, 0.1}}, Row{{0.1, 0.9, 0}}}),
                               dwell);
  const MultiChainModel mc({first, second}, {150.0});
  cfg.output_sampling_rate_hz = 10.0;
  const auto runs = simulate_multi_chain_cohort(mc, 200, cfg);
  for (const auto& r : runs) {
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r.runs()[i].state != r.runs()[i - 1].state);
  }
  CHECK(runs == simulate_multi_chain_cohort(mc, 200, cfg));
  const auto refit = fit_multi_chain(fixtures::decode_all(runs), 2, abc, {{DwellFamily::Exponential}, ""});
  CHECK(max_error(refit.segments()[0].transitions(), first.transitions()) <= 0.03);
  CHECK(max_error(refit.segments()[1].transitions(), second.transitions()) <= 0.03);
}
