#include "semimarkov/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semimarkov/error.hpp"

namespace semimarkov {

std::string_view to_string(ChainKind kind) { return kind == ChainKind::Dtmc ? "dtmc" : "semi_markov"; }

std::optional<ChainKind> parse_kind(std::string_view tag) {
  if (tag == "dtmc") return ChainKind::Dtmc;
  if (tag == "semi_markov") return ChainKind::SemiMarkov;
  return std::nullopt;
}

TransitionMatrix::TransitionMatrix(StateAlphabet alphabet, ChainKind kind, std::vector<Row> rows)
    : alphabet_(std::move(alphabet)), kind_(kind) {
  const std::size_t n = alphabet_.size();
  if (rows.size() != n) throw Error(ErrorCode::InvalidArgument, "row count does not match the alphabet");
  probs_.assign(n * n, 0.0);
  fitted_.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i]) continue;
    const auto& r = *rows[i];
    if (r.size() != n) throw Error(ErrorCode::InvalidArgument, "row length does not match the alphabet");
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(r[j] >= 0.0 && r[j] <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
      sum += r[j];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "row '" + alphabet_.name(static_cast<StateIndex>(i)) +
                                                  "' does not sum to 1");
    }
    if (kind_ == ChainKind::SemiMarkov && r[i] != 0.0) {
      throw Error(ErrorCode::InvalidArgument, "semi-Markov matrix must have a zero diagonal");
    }
    std::copy(r.begin(), r.end(), probs_.begin() + static_cast<std::ptrdiff_t>(i * n));
    fitted_[i] = true;
  }
}

TransitionMatrix TransitionMatrix::from_counts(StateAlphabet alphabet, ChainKind kind,
                                               const TransitionCounts& counts) {
  const std::size_t n = alphabet.size();
  if (counts.n_states != n) throw Error(ErrorCode::InvalidArgument, "count matrix does not match the alphabet");
  std::vector<Row> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t total = counts.row_total(i);
    if (total == 0) continue;
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) {
      r[j] = static_cast<double>(counts.at(i, j)) / static_cast<double>(total);
    }
    rows[i] = std::move(r);
  }
  return TransitionMatrix(std::move(alphabet), kind, std::move(rows));
}

double TransitionMatrix::prob(std::size_t i, std::size_t j) const {
  if (!row_fitted(i)) throw Error(ErrorCode::InvalidArgument, "row is absent");
  return probs_.at(i * size() + j);
}

std::span<const double> TransitionMatrix::row(std::size_t i) const {
  if (!row_fitted(i)) throw Error(ErrorCode::InvalidArgument, "row is absent");
  return std::span<const double>(probs_).subspan(i * size(), size());
}

std::vector<TransitionMatrix::Row> TransitionMatrix::rows() const {
  std::vector<Row> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (fitted_[i]) {
      auto r = row(i);
      out[i] = std::vector<double>(r.begin(), r.end());
    }
  }
  return out;
}

SemiMarkovModel::SemiMarkovModel(TransitionMatrix transitions, std::map<StateIndex, DwellFit> dwell,
                                 ModelMetadata metadata)
    : transitions_(std::move(transitions)), dwell_(std::move(dwell)), metadata_(std::move(metadata)) {
  if (transitions_.kind() != ChainKind::SemiMarkov) {
    throw Error(ErrorCode::KindMismatch, "semi-Markov model needs a semi_markov transition matrix");
  }
  for (const auto& [s, fit] : dwell_) {
    if (s >= alphabet().size()) throw Error(ErrorCode::InvalidLabel, "dwell fit for a state outside the alphabet");
    validate(fit.params);
  }
  for (std::size_t s = 0; s < metadata_.run_counts.size(); ++s) {
    if (metadata_.run_counts[s] > 0 && !dwell_.contains(static_cast<StateIndex>(s))) {
      throw Error(ErrorCode::InvalidArgument, "observed state lacks a dwell fit");
    }
  }
}

const DwellFit* SemiMarkovModel::dwell_for(StateIndex s) const {
  auto it = dwell_.find(s);
  return it == dwell_.end() ? nullptr : &it->second;
}

MultiChainModel::MultiChainModel(std::vector<SemiMarkovModel> segments, std::vector<double> boundaries_s)
    : segments_(std::move(segments)), boundaries_(std::move(boundaries_s)) {
  if (segments_.empty() || segments_.size() != boundaries_.size() + 1) {
    throw Error(ErrorCode::InvalidArgument, "multi-chain model needs one more segment than boundaries");
  }
  double previous = 0.0;
  for (double b : boundaries_) {
    if (!(b > previous)) throw Error(ErrorCode::InvalidArgument, "segment boundaries must increase from 0");
    previous = b;
  }
  for (const auto& m : segments_) {
    if (!(m.alphabet() == segments_.front().alphabet())) {
      throw Error(ErrorCode::AlphabetMismatch, "segments use different alphabets");
    }
  }
}

std::size_t MultiChainModel::segment_at(double t_s) const {
  std::size_t k = 0;
  while (k < boundaries_.size() && t_s >= boundaries_[k]) ++k;
  return k;
}

DtmcFit fit_dtmc(std::span<const LabeledSequence> seqs, const StateAlphabet& alphabet) {
  if (seqs.empty()) throw Error(ErrorCode::EmptyInput, "no sequences");
  const double rate = seqs.front().sampling_rate_hz();
  TransitionCounts counts(alphabet.size());
  for (const auto& s : seqs) {
    if (s.size() < 2) throw Error(ErrorCode::SequenceTooShort, "sequence '" + s.id() + "' has fewer than 2 samples");
    if (s.sampling_rate_hz() != rate) throw Error(ErrorCode::MixedSamplingRates, "sequences differ in sampling rate");
    check_labels(s, alphabet);
    const auto& l = s.labels();
    for (std::size_t t = 1; t < l.size(); ++t) ++counts.at(l[t - 1], l[t]);
  }
  auto matrix = TransitionMatrix::from_counts(alphabet, ChainKind::Dtmc, counts);
  return {std::move(matrix), std::move(counts)};
}

TransitionCounts semi_markov_counts(std::span<const RunSequence> runs_list, const StateAlphabet& alphabet) {
  if (runs_list.empty()) throw Error(ErrorCode::EmptyInput, "no run sequences");
  TransitionCounts counts(alphabet.size());
  for (const auto& seq : runs_list) {
    const auto& runs = seq.runs();
    for (std::size_t k = 0; k < runs.size(); ++k) {
      if (runs[k].state >= alphabet.size()) throw Error(ErrorCode::InvalidLabel, "run state outside the alphabet");
      if (k > 0) ++counts.at(runs[k - 1].state, runs[k].state);
    }
  }
  return counts;
}

TransitionMatrix fit_semi_markov_transitions(std::span<const RunSequence> runs_list, const StateAlphabet& alphabet) {
  const auto counts = semi_markov_counts(runs_list, alphabet);
  if (counts.total() == 0) throw Error(ErrorCode::NoTransitions, "every sequence consists of a single run");
  return TransitionMatrix::from_counts(alphabet, ChainKind::SemiMarkov, counts);
}

std::vector<DwellFamily> default_candidates() { return {std::begin(kAllFamilies), std::end(kAllFamilies)}; }

SemiMarkovModel fit_semi_markov(std::span<const RunSequence> runs_list, const StateAlphabet& alphabet,
                                const SemiMarkovFitOptions& options) {
  if (options.candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no candidate families");
  const auto counts = semi_markov_counts(runs_list, alphabet);
  if (counts.total() == 0) throw Error(ErrorCode::NoTransitions, "every sequence consists of a single run");
  auto transitions = TransitionMatrix::from_counts(alphabet, ChainKind::SemiMarkov, counts);

  ModelMetadata meta;
  meta.cohort_label = options.cohort_label;
  meta.total_transitions = counts.total();
  meta.n_sequences = runs_list.size();
  const double rate = runs_list.front().sampling_rate_hz();
  if (std::all_of(runs_list.begin(), runs_list.end(), [&](const RunSequence& r) { return r.sampling_rate_hz() == rate; })) {
    meta.sampling_rate_hz = rate;
  }
  meta.sample_counts.assign(alphabet.size(), 0);
  meta.run_counts.assign(alphabet.size(), 0);
  meta.candidate_families = options.candidates;

  std::map<StateIndex, std::vector<double>> observations;
  for (const auto& seq : runs_list) {
    for (const auto& r : seq.runs()) {
      meta.sample_counts[r.state] += r.length;
      ++meta.run_counts[r.state];
    }
    for (auto& [state, ds] : durations_by_state(seq)) {
      auto& dst = observations[state];
      dst.insert(dst.end(), ds.begin(), ds.end());
    }
  }

  std::map<StateIndex, DwellFit> dwell;
  for (const auto& [state, xs] : observations) {
    try {
      dwell.emplace(state, select_family(xs, options.candidates));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllFitsFailed) throw;
      DwellFit fallback = fit_exponential(xs);
      fallback.notes.push_back("downgraded to Exponential: all candidate fits failed");
      meta.warnings.push_back("state '" + alphabet.name(state) + "' dwell fit downgraded to Exponential");
      dwell.emplace(state, std::move(fallback));
    }
  }
  return SemiMarkovModel(std::move(transitions), std::move(dwell), std::move(meta));
}

SemiMarkovModel fit_semi_markov(std::span<const LabeledSequence> seqs, const StateAlphabet& alphabet,
                                const SemiMarkovFitOptions& options) {
  if (seqs.empty()) throw Error(ErrorCode::EmptyInput, "no sequences");
  std::vector<RunSequence> runs;
  runs.reserve(seqs.size());
  for (const auto& s : seqs) {
    if (s.size() < 2) throw Error(ErrorCode::SequenceTooShort, "sequence '" + s.id() + "' has fewer than 2 samples");
    check_labels(s, alphabet);
    runs.push_back(encode_runs(s));
  }
  return fit_semi_markov(runs, alphabet, options);
}

std::vector<SemiMarkovModel> fit_semi_markov_per_sequence(std::span<const LabeledSequence> seqs,
                                                          const StateAlphabet& alphabet,
                                                          const SemiMarkovFitOptions& options) {
  std::vector<SemiMarkovModel> out;
  out.reserve(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) out.push_back(fit_semi_markov(seqs.subspan(i, 1), alphabet, options));
  return out;
}

MultiChainModel fit_multi_chain(std::span<const LabeledSequence> seqs, std::size_t n_segments,
                                const StateAlphabet& alphabet, const SemiMarkovFitOptions& options) {
  if (n_segments < 2) throw Error(ErrorCode::InvalidArgument, "multi-chain fitting needs at least 2 segments");
  if (seqs.empty()) throw Error(ErrorCode::EmptyInput, "no sequences");

  std::vector<std::vector<LabeledSequence>> parts(n_segments);
  double total_duration = 0.0;
  for (const auto& s : seqs) {
    const auto boundaries = equal_time_boundaries(s.duration_s(), n_segments);
    std::vector<LabeledSequence> pieces = [&] {
      try {
        return split_at_time(s, boundaries);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BoundaryOutOfRange) throw;
        throw Error(ErrorCode::SegmentTooShort, "sequence '" + s.id() + "' is too short to split");
      }
    }();
    for (std::size_t k = 0; k < n_segments; ++k) {
      if (pieces[k].size() < 2) {
        throw Error(ErrorCode::SegmentTooShort, "sequence '" + s.id() + "' yields a segment under 2 samples");
      }
      parts[k].push_back(std::move(pieces[k]));
    }
    total_duration += s.duration_s();
  }

  // Stored boundaries refer to the mean sequence duration.
  const double mean_duration = total_duration / static_cast<double>(seqs.size());
  const auto boundaries = equal_time_boundaries(mean_duration, n_segments);

  std::vector<SemiMarkovModel> models;
  models.reserve(n_segments);
  for (std::size_t k = 0; k < n_segments; ++k) {
    SemiMarkovModel m = fit_semi_markov(parts[k], alphabet, options);
    m.metadata().segment_index = k;
    m.metadata().segment_count = n_segments;
    m.metadata().window_s = std::pair{k == 0 ? 0.0 : boundaries[k - 1],
                                      k + 1 == n_segments ? mean_duration : boundaries[k]};
    models.push_back(std::move(m));
  }
  return MultiChainModel(std::move(models), boundaries);
}

}  // namespace semimarkov
