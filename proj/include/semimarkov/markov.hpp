#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semimarkov/dwell.hpp"
#include "semimarkov/sequence.hpp"

namespace semimarkov {

enum class ChainKind { Dtmc, SemiMarkov };

std::string_view to_string(ChainKind kind);
std::optional<ChainKind> parse_kind(std::string_view tag);

/// Row-stochastic matrix over an alphabet. Rows of states that were never
/// observed leaving are flagged absent and carry no probabilities.
class TransitionMatrix {
 public:
  using Row = std::optional<std::vector<double>>;

  /// Validates: fitted rows sum to 1 within 1e-12, entries in [0, 1], and a
  /// semi-Markov matrix has an exactly zero diagonal.
  TransitionMatrix(StateAlphabet alphabet, ChainKind kind, std::vector<Row> rows);

  static TransitionMatrix from_counts(StateAlphabet alphabet, ChainKind kind, const TransitionCounts& counts);

  const StateAlphabet& alphabet() const noexcept { return alphabet_; }
  ChainKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return alphabet_.size(); }
  bool row_fitted(std::size_t i) const { return fitted_.at(i); }
  double prob(std::size_t i, std::size_t j) const;
  std::span<const double> row(std::size_t i) const;
  std::vector<Row> rows() const;

  bool operator==(const TransitionMatrix&) const = default;

 private:
  StateAlphabet alphabet_;
  ChainKind kind_;
  std::vector<double> probs_;  // row-major, zeros on absent rows
  std::vector<bool> fitted_;
};

struct ModelMetadata {
  std::string cohort_label;
  std::optional<std::size_t> segment_index;
  std::optional<std::size_t> segment_count;
  std::optional<std::pair<double, double>> window_s;  // segment time window
  std::int64_t total_transitions = 0;
  std::size_t n_sequences = 0;
  std::optional<double> sampling_rate_hz;  // set when all inputs share one rate
  std::vector<std::int64_t> sample_counts;  // per state
  std::vector<std::int64_t> run_counts;     // per state
  std::vector<DwellFamily> candidate_families;
  std::vector<std::string> warnings;

  bool operator==(const ModelMetadata&) const = default;
};

class SemiMarkovModel {
 public:
  SemiMarkovModel(TransitionMatrix transitions, std::map<StateIndex, DwellFit> dwell, ModelMetadata metadata = {});

  const TransitionMatrix& transitions() const noexcept { return transitions_; }
  const StateAlphabet& alphabet() const noexcept { return transitions_.alphabet(); }
  const std::map<StateIndex, DwellFit>& dwell() const noexcept { return dwell_; }
  const DwellFit* dwell_for(StateIndex s) const;
  const ModelMetadata& metadata() const noexcept { return metadata_; }
  ModelMetadata& metadata() noexcept { return metadata_; }

 private:
  TransitionMatrix transitions_;
  std::map<StateIndex, DwellFit> dwell_;
  ModelMetadata metadata_;
};

class MultiChainModel {
 public:
  MultiChainModel(std::vector<SemiMarkovModel> segments, std::vector<double> boundaries_s);

  const std::vector<SemiMarkovModel>& segments() const noexcept { return segments_; }
  const std::vector<double>& boundaries_s() const noexcept { return boundaries_; }
  /// Index of the segment whose window contains time t.
  std::size_t segment_at(double t_s) const;

 private:
  std::vector<SemiMarkovModel> segments_;
  std::vector<double> boundaries_;
};

struct DtmcFit {
  TransitionMatrix matrix;
  TransitionCounts counts;
};

/// Pooled maximum-likelihood DTMC. Sequence boundaries never produce a
/// transition; the initial state is not modelled.
DtmcFit fit_dtmc(std::span<const LabeledSequence> seqs, const StateAlphabet& alphabet);

/// Counts over consecutive run pairs. The last run of each sequence
/// contributes no outgoing transition.
TransitionCounts semi_markov_counts(std::span<const RunSequence> runs_list, const StateAlphabet& alphabet);
TransitionMatrix fit_semi_markov_transitions(std::span<const RunSequence> runs_list, const StateAlphabet& alphabet);

std::vector<DwellFamily> default_candidates();

struct SemiMarkovFitOptions {
  std::vector<DwellFamily> candidates = default_candidates();
  std::string cohort_label;
};

SemiMarkovModel fit_semi_markov(std::span<const RunSequence> runs_list, const StateAlphabet& alphabet,
                                const SemiMarkovFitOptions& options = {});
/// Rejects sequences shorter than two samples.
SemiMarkovModel fit_semi_markov(std::span<const LabeledSequence> seqs, const StateAlphabet& alphabet,
                                const SemiMarkovFitOptions& options = {});

/// One model per sequence instead of a pooled cohort model.
std::vector<SemiMarkovModel> fit_semi_markov_per_sequence(std::span<const LabeledSequence> seqs,
                                                          const StateAlphabet& alphabet,
                                                          const SemiMarkovFitOptions& options = {});

/// Splits every sequence into `n_segments` equal-time parts, pools part k
/// across sequences and fits one semi-Markov model per part.
MultiChainModel fit_multi_chain(std::span<const LabeledSequence> seqs, std::size_t n_segments,
                                const StateAlphabet& alphabet, const SemiMarkovFitOptions& options = {});

}  // namespace semimarkov
