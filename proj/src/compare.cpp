#include "semimarkov/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "semimarkov/error.hpp"
#include "semimarkov/random.hpp"

namespace semimarkov {

CategoricalDistribution::CategoricalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(ErrorCode::EmptyInput, "empty distribution");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "probabilities do not sum to 1");
}

double kl_divergence(const CategoricalDistribution& p, const CategoricalDistribution& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::LengthMismatch, "distributions differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) throw Error(ErrorCode::UnsupportedPoint, "q has no mass where p does");
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

double symmetric_kl(const CategoricalDistribution& p, const CategoricalDistribution& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::LengthMismatch, "distributions differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == q[i]) continue;
    if (p[i] == 0.0 || q[i] == 0.0) throw Error(ErrorCode::UnsupportedPoint, "distributions differ in support");
    d += (p[i] - q[i]) * (std::log(p[i]) - std::log(q[i]));
  }
  return d;
}

namespace {

std::vector<double> comparable_row(const TransitionMatrix& m, std::size_t i) {
  const auto r = m.row(i);
  std::vector<double> out;
  double sum = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (m.kind() == ChainKind::SemiMarkov && j == i) continue;
    out.push_back(r[j]);
    sum += r[j];
  }
  for (double& v : out) v /= sum;
  return out;
}

void smooth(std::vector<double>& row, double epsilon) {
  const double total = 1.0 + epsilon * static_cast<double>(row.size());
  for (double& v : row) v = (v + epsilon) / total;
}

}  // namespace

ComparisonReport compare_transition_matrices(const TransitionMatrix& a, const TransitionMatrix& b, double epsilon) {
  if (!(a.alphabet() == b.alphabet())) throw Error(ErrorCode::AlphabetMismatch, "matrices use different alphabets");
  if (a.kind() != b.kind()) throw Error(ErrorCode::KindMismatch, "matrices are of different kinds");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::InvalidArgument, "smoothing epsilon must be non-negative");
  }

  ComparisonReport report{a.alphabet(), a.kind(), {}, std::numeric_limits<double>::quiet_NaN(), {}, {}, epsilon};
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto s = static_cast<StateIndex>(i);
    if (!a.row_fitted(i) || !b.row_fitted(i)) {
      report.skipped_rows.push_back(s);
      continue;
    }
    auto p = comparable_row(a, i);
    auto q = comparable_row(b, i);
    const bool has_zero = std::find(p.begin(), p.end(), 0.0) != p.end() || std::find(q.begin(), q.end(), 0.0) != q.end();
    if (has_zero && epsilon > 0.0) {
      smooth(p, epsilon);
      smooth(q, epsilon);
      report.smoothed_rows.push_back(s);
    }
    const double d = symmetric_kl(CategoricalDistribution(std::move(p)), CategoricalDistribution(std::move(q)));
    report.per_row.emplace_back(s, d);
    sum += d;
  }
  if (!report.per_row.empty()) report.aggregate = sum / static_cast<double>(report.per_row.size());
  return report;
}

std::vector<double> time_fractions(const LabeledSequence& seq, const StateAlphabet& alphabet) {
  check_labels(seq, alphabet);
  std::vector<std::int64_t> counts(alphabet.size(), 0);
  for (StateIndex s : seq.labels()) ++counts[s];
  std::vector<double> out(alphabet.size());
  const auto n = static_cast<double>(seq.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(counts[i]) / n;
  return out;
}

std::vector<double> time_fractions(const RunSequence& runs, const StateAlphabet& alphabet) {
  std::vector<std::int64_t> counts(alphabet.size(), 0);
  for (const auto& r : runs.runs()) {
    if (r.state >= alphabet.size()) throw Error(ErrorCode::InvalidLabel, "run state outside the alphabet");
    counts[r.state] += r.length;
  }
  std::vector<double> out(alphabet.size());
  const auto n = static_cast<double>(runs.total_samples());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(counts[i]) / n;
  return out;
}

std::vector<FractionSummary> bootstrap_group_fractions(std::span<const std::vector<double>> patient_fractions,
                                                       std::size_t n_replicates, std::uint64_t seed) {
  if (patient_fractions.empty()) throw Error(ErrorCode::EmptyInput, "no patients to bootstrap");
  if (n_replicates < 1) throw Error(ErrorCode::InvalidArgument, "need at least one bootstrap replicate");
  const std::size_t n_states = patient_fractions.front().size();
  const std::size_t n_patients = patient_fractions.size();
  for (const auto& f : patient_fractions) {
    if (f.size() != n_states) throw Error(ErrorCode::LengthMismatch, "patients use different state counts");
  }

  // replicate_means[r * n_states + s]
  std::vector<double> replicate_means(n_replicates * n_states, 0.0);
  auto run_replicates = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      SeededStream stream(seed + r);
      double* out = &replicate_means[r * n_states];
      for (std::size_t draw = 0; draw < n_patients; ++draw) {
        const auto& f = patient_fractions[stream.below(n_patients)];
        for (std::size_t s = 0; s < n_states; ++s) out[s] += f[s];
      }
      for (std::size_t s = 0; s < n_states; ++s) out[s] /= static_cast<double>(n_patients);
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, n_replicates / 64));
  if (workers <= 1) {
    run_replicates(0, n_replicates);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_replicates + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n_replicates, begin + chunk);
      if (begin < end) pool.emplace_back(run_replicates, begin, end);
    }
  }

  std::vector<FractionSummary> out(n_states);
  for (std::size_t s = 0; s < n_states; ++s) {
    const double first = replicate_means[s];
    bool constant = true;
    for (std::size_t r = 1; r < n_replicates && constant; ++r) constant = replicate_means[r * n_states + s] == first;
    if (constant) {
      out[s] = {first, 0.0};
      continue;
    }
    double m = 0.0;
    for (std::size_t r = 0; r < n_replicates; ++r) m += replicate_means[r * n_states + s];
    m /= static_cast<double>(n_replicates);
    double v = 0.0;
    for (std::size_t r = 0; r < n_replicates; ++r) {
      const double d = replicate_means[r * n_states + s] - m;
      v += d * d;
    }
    out[s].mean = m;
    out[s].stddev = n_replicates > 1 ? std::sqrt(v / static_cast<double>(n_replicates - 1)) : 0.0;
  }
  return out;
}

std::vector<FractionSummary> bootstrap_group_fractions(std::span<const LabeledSequence> patients,
                                                       const StateAlphabet& alphabet, std::size_t n_replicates,
                                                       std::uint64_t seed) {
  std::vector<std::vector<double>> fractions;
  fractions.reserve(patients.size());
  for (const auto& p : patients) fractions.push_back(time_fractions(p, alphabet));
  return bootstrap_group_fractions(fractions, n_replicates, seed);
}

}  // namespace semimarkov
