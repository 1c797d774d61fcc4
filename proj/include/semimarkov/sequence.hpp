#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semimarkov {

using StateIndex = std::uint16_t;

/// Ordered set of state names. Position in the list is the row/column index
/// used by every matrix built over this alphabet.
class StateAlphabet {
 public:
  explicit StateAlphabet(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(StateIndex i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<StateIndex> index_of(const std::string& name) const;

  bool operator==(const StateAlphabet&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Throws DuplicateState or TooFewStates.
StateAlphabet build_alphabet(std::vector<std::string> names);

/// Uniformly sampled per-sample labels.
class LabeledSequence {
 public:
  LabeledSequence(std::vector<StateIndex> labels, double sampling_rate_hz, std::string id = {});

  const std::vector<StateIndex>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  double sampling_rate_hz() const noexcept { return rate_; }
  const std::string& id() const noexcept { return id_; }
  double duration_s() const noexcept { return static_cast<double>(labels_.size()) / rate_; }

  bool operator==(const LabeledSequence&) const = default;

 private:
  std::vector<StateIndex> labels_;
  double rate_;
  std::string id_;
};

struct Run {
  StateIndex state;
  std::int64_t length;  // samples

  bool operator==(const Run&) const = default;
};

/// Maximal runs of a labeled sequence. Adjacent runs always differ in state.
class RunSequence {
 public:
  RunSequence(std::vector<Run> runs, double sampling_rate_hz, std::string id = {});

  const std::vector<Run>& runs() const noexcept { return runs_; }
  std::size_t size() const noexcept { return runs_.size(); }
  double sampling_rate_hz() const noexcept { return rate_; }
  const std::string& id() const noexcept { return id_; }
  std::int64_t total_samples() const noexcept;
  double duration_s() const noexcept { return static_cast<double>(total_samples()) / rate_; }

  bool operator==(const RunSequence&) const = default;

 private:
  std::vector<Run> runs_;
  double rate_;
  std::string id_;
};

/// Square count matrix n_ij, row-major.
struct TransitionCounts {
  std::size_t n_states = 0;
  std::vector<std::int64_t> counts;

  explicit TransitionCounts(std::size_t n = 0) : n_states(n), counts(n * n, 0) {}

  std::int64_t& at(std::size_t i, std::size_t j) { return counts[i * n_states + j]; }
  std::int64_t at(std::size_t i, std::size_t j) const { return counts[i * n_states + j]; }
  std::int64_t row_total(std::size_t i) const;
  std::int64_t total() const;

  bool operator==(const TransitionCounts&) const = default;
};

RunSequence encode_runs(const LabeledSequence& seq);
LabeledSequence decode_runs(const RunSequence& runs);

/// Cuts `seq` at the given times (seconds). Intervals are half-open, so the
/// sample sitting exactly on a boundary starts the later segment.
std::vector<LabeledSequence> split_at_time(const LabeledSequence& seq,
                                           std::span<const double> boundaries_s);

/// Equal-time boundaries that split `duration_s` into `n_segments` parts.
std::vector<double> equal_time_boundaries(double duration_s, std::size_t n_segments);

LabeledSequence upsample(const LabeledSequence& seq, std::size_t factor);

/// Per-state run durations in seconds, in temporal order. States that never
/// occur are absent from the map.
std::map<StateIndex, std::vector<double>> durations_by_state(const RunSequence& runs);

/// Throws InvalidLabel if any label is outside the alphabet.
void check_labels(const LabeledSequence& seq, const StateAlphabet& alphabet);

}  // namespace semimarkov
