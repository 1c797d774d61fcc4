#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semimarkov/markov.hpp"
#include "semimarkov/sequence.hpp"

namespace semimarkov {

/// Probabilities over a shared index set; sums to 1 within 1e-12.
class CategoricalDistribution {
 public:
  explicit CategoricalDistribution(std::vector<double> probs);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

/// D_KL(p || q) in nats. Throws UnsupportedPoint when q lacks support for p.
double kl_divergence(const CategoricalDistribution& p, const CategoricalDistribution& q);

/// D_KL(p || q) + D_KL(q || p), evaluated as sum (p_i - q_i)(ln p_i - ln q_i)
/// (bit-identical under swapped arguments).
double symmetric_kl(const CategoricalDistribution& p, const CategoricalDistribution& q);

struct ComparisonReport {
  StateAlphabet alphabet;
  ChainKind kind;
  std::vector<std::pair<StateIndex, double>> per_row;  // ascending state order
  double aggregate;                                    // unweighted mean of per_row; NaN if none
  std::vector<StateIndex> skipped_rows;
  std::vector<StateIndex> smoothed_rows;
  double smoothing_epsilon;
};

inline constexpr double kDefaultSmoothing = 1e-9;

/// Row-by-row symmetric KL. Semi-Markov rows drop their structural zero
/// diagonal and are renormalised over the remaining states; a row pair with
/// any other zero gets `epsilon` added to every entry before renormalising.
/// Rows absent from either matrix are skipped.
ComparisonReport compare_transition_matrices(const TransitionMatrix& a, const TransitionMatrix& b,
                                             double epsilon = kDefaultSmoothing);

/// Fraction of samples spent in each state, indexed by state.
std::vector<double> time_fractions(const LabeledSequence& seq, const StateAlphabet& alphabet);
std::vector<double> time_fractions(const RunSequence& runs, const StateAlphabet& alphabet);

struct FractionSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Patient-level bootstrap of the cohort mean time fraction. Replicate r
/// draws from its own stream seeded with seed + r, so the output does not
/// depend on how replicates are scheduled.
std::vector<FractionSummary> bootstrap_group_fractions(std::span<const std::vector<double>> patient_fractions,
                                                       std::size_t n_replicates, std::uint64_t seed);
std::vector<FractionSummary> bootstrap_group_fractions(std::span<const LabeledSequence> patients,
                                                       const StateAlphabet& alphabet, std::size_t n_replicates,
                                                       std::uint64_t seed);

}  // namespace semimarkov
