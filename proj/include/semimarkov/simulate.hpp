#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semimarkov/markov.hpp"
#include "semimarkov/random.hpp"
#include "semimarkov/sequence.hpp"

namespace semimarkov {

struct SimulationConfig {
  double duration_s = 300.0;
  std::optional<StateIndex> initial_state;  // nullopt: uniform over states with fitted rows
  std::uint64_t seed = 0;
  double output_sampling_rate_hz = 10.0;
  std::string id;
};

struct SimulationStats {
  std::size_t clamped_dwell_draws = 0;
};

/// Alternates dwell draws and next-state draws until the configured
/// duration is filled; the final run is truncated to fit. Dwell draws are
/// rounded half-up to whole samples with a minimum of one sample.
RunSequence simulate_sequence(const SemiMarkovModel& model, const SimulationConfig& config);
RunSequence simulate_sequence(const SemiMarkovModel& model, const SimulationConfig& config, UniformSource& stream,
                              SimulationStats* stats = nullptr);

/// Patient i is simulated with seed config.seed + i.
std::vector<RunSequence> simulate_cohort(const SemiMarkovModel& model, std::size_t n_patients,
                                         const SimulationConfig& config);

/// Each run draws its dwell from the segment model active when the run
/// starts; the following state is drawn from the segment model active when
/// the run ends. A run crossing a boundary is never cut.
RunSequence simulate_multi_chain(const MultiChainModel& model, const SimulationConfig& config);
RunSequence simulate_multi_chain(const MultiChainModel& model, const SimulationConfig& config, UniformSource& stream,
                                 SimulationStats* stats = nullptr);

std::vector<RunSequence> simulate_multi_chain_cohort(const MultiChainModel& model, std::size_t n_patients,
                                                     const SimulationConfig& config);

}  // namespace semimarkov
