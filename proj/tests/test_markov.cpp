#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "semimarkov/compare.hpp"
#include "semimarkov/error.hpp"
#include "semimarkov/markov.hpp"
#include "semimarkov/simulate.hpp"

using namespace semimarkov;

namespace {

constexpr StateIndex A = 0, B = 1, C = 2;

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

const StateAlphabet ab = build_alphabet({"A", "B"});
const StateAlphabet abc = build_alphabet({"A", "B", "C"});

}  // namespace

TEST_CASE("dtmc worked examples") {
  {
    const std::vector<LabeledSequence> s{LabeledSequence({A, A, B, B, A}, 1.0)};
    const auto fit = fit_dtmc(s, ab);
    CHECK(fit.counts.counts == std::vector<std::int64_t>{1, 1, 1, 1});
    CHECK(fit.matrix.prob(0, 0) == 0.5);
    CHECK(fit.matrix.prob(1, 0) == 0.5);
    CHECK(fit.matrix.kind() == ChainKind::Dtmc);
  }
  {
    const std::vector<LabeledSequence> s{LabeledSequence({A, A, A, A}, 1.0)};
    const auto fit = fit_dtmc(s, ab);
    CHECK(fit.matrix.prob(0, 0) == 1.0);
    CHECK(fit.matrix.prob(0, 1) == 0.0);
    CHECK_FALSE(fit.matrix.row_fitted(1));
  }
  {
    const std::vector<LabeledSequence> s{LabeledSequence({A, B}, 1.0), LabeledSequence({B, A}, 1.0)};
    const auto fit = fit_dtmc(s, ab);
    CHECK(fit.counts.counts == std::vector<std::int64_t>{0, 1, 1, 0});
    CHECK(fit.matrix.prob(0, 1) == 1.0);
    CHECK(fit.matrix.prob(1, 0) == 1.0);
  }
}

TEST_CASE("dtmc errors") {
  CHECK(code_of([] { fit_dtmc(std::vector<LabeledSequence>{}, ab); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { fit_dtmc(std::vector<LabeledSequence>{LabeledSequence({A}, 1.0)}, ab); }) ==
        ErrorCode::SequenceTooShort);
  CHECK(code_of([] {
          fit_dtmc(std::vector<LabeledSequence>{LabeledSequence({A, B}, 1.0), LabeledSequence({A, B}, 2.0)}, ab);
        }) == ErrorCode::MixedSamplingRates);
}

TEST_CASE("dtmc count conservation and row sums") {
  SeededStream s(17);
  std::vector<LabeledSequence> seqs;
  std::int64_t expected = 0;
  for (int i = 0; i < 30; ++i) {
    std::vector<StateIndex> l(2 + s.below(50));
    for (auto& x : l) x = static_cast<StateIndex>(s.below(3));
    expected += static_cast<std::int64_t>(l.size()) - 1;
    seqs.emplace_back(l, 1.0);
  }
  const auto fit = fit_dtmc(seqs, abc);
  CHECK(fit.counts.total() == expected);
  for (std::size_t i = 0; i < 3; ++i) {
    if (!fit.matrix.row_fitted(i)) continue;
    double sum = 0.0;
    for (double v : fit.matrix.row(i)) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("semi-Markov transitions worked examples") {
  const std::vector<RunSequence> rl{RunSequence({{A, 3}, {B, 2}, {A, 2}, {C, 1}}, 1.0)};
  const auto t = fit_semi_markov_transitions(rl, abc);
  CHECK(t.kind() == ChainKind::SemiMarkov);
  CHECK(t.prob(0, 1) == 0.5);
  CHECK(t.prob(0, 2) == 0.5);
  CHECK(t.prob(1, 0) == 1.0);
  CHECK_FALSE(t.row_fitted(2));
  for (std::size_t i = 0; i < 2; ++i) CHECK(t.prob(i, i) == 0.0);

  CHECK(code_of([] { fit_semi_markov_transitions(std::vector<RunSequence>{RunSequence({{A, 5}}, 1.0)}, abc); }) ==
        ErrorCode::NoTransitions);
  CHECK(code_of([] { fit_semi_markov_transitions(std::vector<RunSequence>{}, abc); }) == ErrorCode::EmptyInput);
}

TEST_CASE("transition matrix validation") {
  using Row = TransitionMatrix::Row;
  CHECK_THROWS_AS(TransitionMatrix(ab, ChainKind::SemiMarkov, {Row{{0.5, 0.5}}, Row{{1.0, 0.0}}}), Error);
  CHECK_THROWS_AS(TransitionMatrix(ab, ChainKind::Dtmc, {Row{{0.5, 0.6}}, std::nullopt}), Error);
  const TransitionMatrix ok(ab, ChainKind::Dtmc, {Row{{0.25, 0.75}}, std::nullopt});
  CHECK(ok.row_fitted(0));
  CHECK_FALSE(ok.row_fitted(1));
}

TEST_CASE("table fixture row") {
  const auto t = fixtures::table_matrix(fixtures::kSuccessTable);
  CHECK(t.prob(0, 0) == 0.0);
  CHECK(t.prob(0, 1) == doctest::Approx(0.27).epsilon(1e-12));
  CHECK(t.prob(0, 2) == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(t.prob(0, 3) == doctest::Approx(0.26).epsilon(1e-12));
  CHECK(t.prob(0, 4) == doctest::Approx(0.38).epsilon(1e-12));
}

TEST_CASE("fit semi-Markov model") {
  // Fast switching among three states: about 2000 transitions per row.
  SimulationConfig cfg;
  cfg.seed = 99;
  cfg.output_sampling_rate_hz = 10.0;
  std::map<StateIndex, DwellFit> dwell{{A, fixtures::fit_of(ExponentialParams{1.0})},
                                       {B, fixtures::fit_of(InverseGaussianParams{1.2, 2.0})},
                                       {C, fixtures::fit_of(ExponentialParams{0.8})}};
  using Row = TransitionMatrix::Row;
  const SemiMarkovModel truth(
      TransitionMatrix(abc, ChainKind::SemiMarkov, {Row{{0, 0.7, 0.3}}, Row{{0.4, 0, 0.6}}, Row{{0.5, 0.5, 0}}}), dwell);
  const auto runs = simulate_cohort(truth, 20, cfg);
  const auto seqs = fixtures::decode_all(runs);
  SemiMarkovFitOptions opts;
  opts.cohort_label = "success";
  const auto m = fit_semi_markov(seqs, abc, opts);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(m.transitions().prob(i, i) == 0.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(m.transitions().prob(i, j) - truth.transitions().prob(i, j)) <= 0.03);
  }
  CHECK(m.metadata().cohort_label == "success");
  CHECK(m.metadata().n_sequences == 20);
  CHECK(m.metadata().sampling_rate_hz == 10.0);
  std::int64_t samples = 0;
  for (auto c : m.metadata().sample_counts) samples += c;
  CHECK(samples == 20 * 3000);
  for (StateIndex s = 0; s < 3; ++s) {
    REQUIRE(m.dwell_for(s) != nullptr);
    CHECK(m.dwell_for(s)->n_obs == static_cast<std::size_t>(m.metadata().run_counts[s]));
  }
  // Labels and run input agree.
  const auto from_runs = fit_semi_markov(runs, abc, opts);
  CHECK(from_runs.transitions() == m.transitions());
  CHECK(code_of([&] {
          fit_semi_markov(std::vector<LabeledSequence>{LabeledSequence({A, A, A}, 1.0)}, abc);
        }) == ErrorCode::NoTransitions);
}

TEST_CASE("dwell fit failure downgrades to exponential") {
  // State C is observed in 9 runs of identical length: inverse Gaussian is
  // degenerate and the numerical fits cannot certify a constant sample.
  std::vector<Run> runs;
  for (int i = 0; i < 9; ++i) {
    runs.push_back({A, 1 + i});
    runs.push_back({C, 4});
  }
  const std::vector<RunSequence> rl{RunSequence(runs, 1.0)};
  SemiMarkovFitOptions opts;
  opts.candidates = {DwellFamily::InverseGaussian};
  const auto m = fit_semi_markov(rl, abc, opts);
  REQUIRE(m.dwell_for(C));
  CHECK(m.dwell_for(C)->family() == DwellFamily::Exponential);
  CHECK_FALSE(m.metadata().warnings.empty());
  CHECK(m.dwell_for(A)->family() == DwellFamily::InverseGaussian);
}

TEST_CASE("per-sequence fits") {
  const std::vector<LabeledSequence> seqs{LabeledSequence({A, A, B, B, A}, 1.0), LabeledSequence({B, A, A}, 1.0)};
  const auto models = fit_semi_markov_per_sequence(seqs, ab, {{DwellFamily::Exponential}, "x"});
  REQUIRE(models.size() == 2);
  CHECK(models[0].metadata().n_sequences == 1);
}

TEST_CASE("multi-chain fit") {
  SimulationConfig cfg;
  cfg.seed = 5;
  cfg.output_sampling_rate_hz = 10.0;
  const auto seqs = fixtures::decode_all(simulate_cohort(fixtures::success_model(), 10, cfg));
  const auto mc = fit_multi_chain(seqs, 2, fixtures::patterns());
  REQUIRE(mc.segments().size() == 2);
  CHECK(mc.boundaries_s() == std::vector<double>{150.0});
  CHECK(mc.segments()[0].metadata().segment_index == 0u);
  CHECK(mc.segments()[1].metadata().segment_index == 1u);
  CHECK(mc.segments()[1].metadata().window_s == std::pair{150.0, 300.0});
  std::int64_t s0 = 0;
  for (auto c : mc.segments()[0].metadata().sample_counts) s0 += c;
  CHECK(s0 == 10 * 1500);
  CHECK(mc.segment_at(0.0) == 0);
  CHECK(mc.segment_at(149.99) == 0);
  CHECK(mc.segment_at(150.0) == 1);

  CHECK(code_of([&] { fit_multi_chain(seqs, 1, fixtures::patterns()); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { fit_multi_chain(std::vector<LabeledSequence>{LabeledSequence({A, B, A}, 1.0)}, 2, abc); }) ==
        ErrorCode::SegmentTooShort);
}

TEST_CASE("stationary multi-chain segments stay close") {
  SimulationConfig cfg;
  cfg.seed = 300;
  cfg.output_sampling_rate_hz = 10.0;
  const auto seqs = fixtures::decode_all(simulate_cohort(fixtures::success_model(), 50, cfg));
  const auto mc = fit_multi_chain(seqs, 2, fixtures::patterns());
  CHECK(compare_transition_matrices(mc.segments()[0].transitions(), mc.segments()[1].transitions()).aggregate <= 0.05);
}
