#include "semimarkov/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <thread>

#include "semimarkov/error.hpp"

namespace semimarkov {

namespace {

using ModelAt = std::function<const SemiMarkovModel&(double t_s)>;

bool simulable(const SemiMarkovModel& m, StateIndex s) {
  return m.transitions().row_fitted(s) && m.dwell_for(s) != nullptr;
}

void check_reachable(std::span<const SemiMarkovModel* const> models, StateIndex start) {
  const std::size_t n = models.front()->alphabet().size();
  std::vector<bool> seen(n, false);
  std::deque<StateIndex> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    const StateIndex s = queue.front();
    queue.pop_front();
    for (const auto* m : models) {
      if (!simulable(*m, s)) {
        throw Error(ErrorCode::UnreachableAbsentRow,
                    "state '" + m->alphabet().name(s) + "' is reachable but has no fitted row or dwell fit");
      }
      const auto row = m->transitions().row(s);
      for (std::size_t j = 0; j < n; ++j) {
        if (row[j] > 0.0 && !seen[j]) {
          seen[j] = true;
          queue.push_back(static_cast<StateIndex>(j));
        }
      }
    }
  }
}

StateIndex draw_next(std::span<const double> row, StateIndex current, double u) {
  double cum = 0.0;
  std::size_t last = current;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] <= 0.0) continue;
    cum += row[j];
    last = j;
    if (u < cum) return static_cast<StateIndex>(j);
  }
  return static_cast<StateIndex>(last);
}

RunSequence simulate_impl(std::span<const SemiMarkovModel* const> models, const ModelAt& model_at,
                          const SimulationConfig& config, UniformSource& stream, SimulationStats* stats) {
  if (!(config.duration_s > 0.0) || !std::isfinite(config.duration_s)) {
    throw Error(ErrorCode::InvalidArgument, "simulation duration must be positive");
  }
  const double rate = config.output_sampling_rate_hz;
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::InvalidSamplingRate, "output sampling rate must be positive");
  }
  const auto& first = *models.front();
  const std::size_t n_states = first.alphabet().size();
  const std::int64_t total = std::max<std::int64_t>(1, std::llround(config.duration_s * rate));
  const double sample_period = 1.0 / rate;

  StateIndex state;
  if (config.initial_state) {
    state = *config.initial_state;
    if (state >= n_states || !simulable(first, state)) {
      throw Error(ErrorCode::InvalidInitialState, "initial state has no fitted row or dwell fit");
    }
  } else {
    std::vector<StateIndex> candidates;
    for (std::size_t s = 0; s < n_states; ++s) {
      if (simulable(first, static_cast<StateIndex>(s))) candidates.push_back(static_cast<StateIndex>(s));
    }
    if (candidates.empty()) throw Error(ErrorCode::InvalidInitialState, "model has no simulable state");
    const auto pick = static_cast<std::size_t>(stream.uniform() * static_cast<double>(candidates.size()));
    state = candidates[std::min(pick, candidates.size() - 1)];
  }
  check_reachable(models, state);

  std::vector<Run> runs;
  std::int64_t position = 0;
  while (true) {
    const SemiMarkovModel& now = model_at(static_cast<double>(position) * sample_period);
    bool clamped = false;
    const double dwell = sample_dwell(*now.dwell_for(state), stream, sample_period, &clamped);
    if (clamped && stats) ++stats->clamped_dwell_draws;
    const std::int64_t length = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(dwell * rate + 0.5)));
    if (position + length >= total) {
      runs.push_back({state, total - position});
      break;
    }
    runs.push_back({state, length});
    position += length;
    const SemiMarkovModel& next_model = model_at(static_cast<double>(position) * sample_period);
    state = draw_next(next_model.transitions().row(state), state, stream.uniform());
  }
  return RunSequence(std::move(runs), rate, config.id);
}

template <class Fn>
std::vector<RunSequence> parallel_cohort(std::size_t n_patients, const SimulationConfig& config, Fn simulate_one) {
  if (n_patients < 1) throw Error(ErrorCode::InvalidArgument, "cohort needs at least one patient");
  std::vector<std::optional<RunSequence>> slots(n_patients);
  std::vector<std::exception_ptr> errors(n_patients);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SimulationConfig c = config;
      c.seed = config.seed + i;
      c.id = config.id.empty() ? "patient_" + std::to_string(i) : config.id + "_" + std::to_string(i);
      try {
        slots[i] = simulate_one(c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, n_patients);
  if (workers <= 1) {
    work(0, n_patients);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_patients + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n_patients, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  std::vector<RunSequence> out;
  out.reserve(n_patients);
  for (std::size_t i = 0; i < n_patients; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace

RunSequence simulate_sequence(const SemiMarkovModel& model, const SimulationConfig& config, UniformSource& stream,
                              SimulationStats* stats) {
  const SemiMarkovModel* models[] = {&model};
  return simulate_impl(models, [&](double) -> const SemiMarkovModel& { return model; }, config, stream, stats);
}

RunSequence simulate_sequence(const SemiMarkovModel& model, const SimulationConfig& config) {
  SeededStream stream(config.seed);
  return simulate_sequence(model, config, stream);
}

std::vector<RunSequence> simulate_cohort(const SemiMarkovModel& model, std::size_t n_patients,
                                         const SimulationConfig& config) {
  return parallel_cohort(n_patients, config, [&](const SimulationConfig& c) { return simulate_sequence(model, c); });
}

RunSequence simulate_multi_chain(const MultiChainModel& model, const SimulationConfig& config, UniformSource& stream,
                                 SimulationStats* stats) {
  std::vector<const SemiMarkovModel*> models;
  for (const auto& m : model.segments()) models.push_back(&m);
  return simulate_impl(
      models, [&](double t) -> const SemiMarkovModel& { return model.segments()[model.segment_at(t)]; }, config,
      stream, stats);
}

RunSequence simulate_multi_chain(const MultiChainModel& model, const SimulationConfig& config) {
  SeededStream stream(config.seed);
  return simulate_multi_chain(model, config, stream);
}

std::vector<RunSequence> simulate_multi_chain_cohort(const MultiChainModel& model, std::size_t n_patients,
                                                     const SimulationConfig& config) {
  return parallel_cohort(n_patients, config,
                         [&](const SimulationConfig& c) { return simulate_multi_chain(model, c); });
}

}  // namespace semimarkov
