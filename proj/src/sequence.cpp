#include "semimarkov/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "semimarkov/error.hpp"

namespace semimarkov {

StateAlphabet::StateAlphabet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw Error(ErrorCode::TooFewStates, "an alphabet needs at least 2 states");
  }
  if (names_.size() > std::numeric_limits<StateIndex>::max()) {
    throw Error(ErrorCode::InvalidArgument, "alphabet too large");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw Error(ErrorCode::DuplicateState, "duplicate state '" + n + "'");
  }
}

std::optional<StateIndex> StateAlphabet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<StateIndex>(it - names_.begin());
}

StateAlphabet build_alphabet(std::vector<std::string> names) { return StateAlphabet(std::move(names)); }

namespace {

void check_rate(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::InvalidSamplingRate, "sampling rate must be positive and finite");
  }
}

// Sample index of the first sample at or after time t (seconds). Values that
// land within rounding noise of an integer snap to it.
std::int64_t first_index_at_or_after(double t, double rate) {
  const double x = t * rate;
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

LabeledSequence::LabeledSequence(std::vector<StateIndex> labels, double sampling_rate_hz, std::string id)
    : labels_(std::move(labels)), rate_(sampling_rate_hz), id_(std::move(id)) {
  if (labels_.empty()) throw Error(ErrorCode::EmptyInput, "labeled sequence must have at least one sample");
  check_rate(rate_);
}

RunSequence::RunSequence(std::vector<Run> runs, double sampling_rate_hz, std::string id)
    : runs_(std::move(runs)), rate_(sampling_rate_hz), id_(std::move(id)) {
  if (runs_.empty()) throw Error(ErrorCode::EmptyInput, "run sequence must have at least one run");
  check_rate(rate_);
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (runs_[i].length < 1) throw Error(ErrorCode::NonPositiveDuration, "run duration must be >= 1 sample");
    if (i > 0 && runs_[i].state == runs_[i - 1].state) {
      throw Error(ErrorCode::InvalidArgument, "adjacent runs share a state; runs must be maximal");
    }
  }
}

std::int64_t RunSequence::total_samples() const noexcept {
  std::int64_t total = 0;
  for (const auto& r : runs_) total += r.length;
  return total;
}

std::int64_t TransitionCounts::row_total(std::size_t i) const {
  return std::accumulate(counts.begin() + static_cast<std::ptrdiff_t>(i * n_states),
                         counts.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_states), std::int64_t{0});
}

std::int64_t TransitionCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

RunSequence encode_runs(const LabeledSequence& seq) {
  std::vector<Run> runs;
  for (StateIndex s : seq.labels()) {
    if (!runs.empty() && runs.back().state == s) {
      ++runs.back().length;
    } else {
      runs.push_back({s, 1});
    }
  }
  return RunSequence(std::move(runs), seq.sampling_rate_hz(), seq.id());
}

LabeledSequence decode_runs(const RunSequence& runs) {
  std::vector<StateIndex> labels;
  labels.reserve(static_cast<std::size_t>(runs.total_samples()));
  for (const auto& r : runs.runs()) labels.insert(labels.end(), static_cast<std::size_t>(r.length), r.state);
  return LabeledSequence(std::move(labels), runs.sampling_rate_hz(), runs.id());
}

std::vector<LabeledSequence> split_at_time(const LabeledSequence& seq, std::span<const double> boundaries_s) {
  const auto n = static_cast<std::int64_t>(seq.size());
  std::vector<std::int64_t> cuts;
  cuts.push_back(0);
  double previous = 0.0;
  for (double t : boundaries_s) {
    if (!(t > previous) || !(t < seq.duration_s())) {
      throw Error(ErrorCode::BoundaryOutOfRange,
                  "boundaries must be strictly increasing and inside (0, duration)");
    }
    const std::int64_t idx = first_index_at_or_after(t, seq.sampling_rate_hz());
    if (idx <= cuts.back() || idx >= n) {
      throw Error(ErrorCode::BoundaryOutOfRange, "boundary yields an empty segment");
    }
    cuts.push_back(idx);
    previous = t;
  }
  cuts.push_back(n);

  std::vector<LabeledSequence> out;
  out.reserve(cuts.size() - 1);
  const auto& labels = seq.labels();
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    std::vector<StateIndex> part(labels.begin() + cuts[k], labels.begin() + cuts[k + 1]);
    out.emplace_back(std::move(part), seq.sampling_rate_hz(), seq.id());
  }
  return out;
}

std::vector<double> equal_time_boundaries(double duration_s, std::size_t n_segments) {
  if (n_segments < 1) throw Error(ErrorCode::InvalidArgument, "need at least one segment");
  std::vector<double> b;
  for (std::size_t k = 1; k < n_segments; ++k) {
    b.push_back(duration_s * static_cast<double>(k) / static_cast<double>(n_segments));
  }
  return b;
}

LabeledSequence upsample(const LabeledSequence& seq, std::size_t factor) {
  if (factor < 1) throw Error(ErrorCode::InvalidArgument, "upsampling factor must be >= 1");
  std::vector<StateIndex> labels;
  labels.reserve(seq.size() * factor);
  for (StateIndex s : seq.labels()) labels.insert(labels.end(), factor, s);
  return LabeledSequence(std::move(labels), seq.sampling_rate_hz() * static_cast<double>(factor), seq.id());
}

std::map<StateIndex, std::vector<double>> durations_by_state(const RunSequence& runs) {
  std::map<StateIndex, std::vector<double>> out;
  for (const auto& r : runs.runs()) {
    out[r.state].push_back(static_cast<double>(r.length) / runs.sampling_rate_hz());
  }
  return out;
}

void check_labels(const LabeledSequence& seq, const StateAlphabet& alphabet) {
  for (StateIndex s : seq.labels()) {
    if (s >= alphabet.size()) throw Error(ErrorCode::InvalidLabel, "label outside the alphabet");
  }
}

}  // namespace semimarkov
