#pragma once

#include <array>
#include <map>
#include <vector>

#include "semimarkov/markov.hpp"

namespace fixtures {

using namespace semimarkov;

inline StateAlphabet patterns() { return build_alphabet({"PAU", "ASB", "MVT", "SYB", "UNK"}); }

inline constexpr StateIndex PAU = 0, ASB = 1, MVT = 2, SYB = 3, UNK = 4;

using Table = std::array<std::array<double, 5>, 5>;

// Success population, cross-state transitions as printed (two decimals).
inline constexpr Table kSuccessTable{{{0, 0.27, 0.09, 0.26, 0.38},
                                      {0.10, 0, 0.16, 0.29, 0.45},
                                      {0.12, 0.32, 0, 0.43, 0.14},
                                      {0.06, 0.25, 0.15, 0, 0.54},
                                      {0.13, 0.28, 0.04, 0.55, 0}}};

// Failure population.
inline constexpr Table kFailureTable{{{0, 0.28, 0.06, 0.39, 0.28},
                                      {0.12, 0, 0.21, 0.28, 0.40},
                                      {0.17, 0.41, 0, 0.32, 0.09},
                                      {0.14, 0.21, 0.14, 0, 0.52},
                                      {0.15, 0.30, 0.03, 0.52, 0}}};

// Each row is divided by its sum.
inline TransitionMatrix table_matrix(const Table& t) {
  std::vector<TransitionMatrix::Row> rows;
  for (const auto& r : t) {
    double s = 0.0;
    for (double v : r) s += v;
    std::vector<double> row(r.begin(), r.end());
    for (double& v : row) v /= s;
    rows.emplace_back(std::move(row));
  }
  return TransitionMatrix(patterns(), ChainKind::SemiMarkov, std::move(rows));
}

inline DwellFit fit_of(DwellParams p) {
  DwellFit f;
  f.params = p;
  return f;
}

inline std::map<StateIndex, DwellFit> success_dwell() {
  return {{PAU, fit_of(ExponentialParams{2.51})},
          {ASB, fit_of(GevParams{0.63, 1.30, 1.85})},
          {MVT, fit_of(GpdParams{-0.22, 3.62})},
          {SYB, fit_of(InverseGaussianParams{8.61, 3.61})},
          {UNK, fit_of(GpdParams{-0.07, 2.07})}};
}

inline std::map<StateIndex, DwellFit> failure_dwell() {
  return {{PAU, fit_of(ExponentialParams{2.94})},
          {ASB, fit_of(GevParams{0.65, 1.36, 1.81})},
          {MVT, fit_of(GpdParams{-0.11, 3.31})},
          {SYB, fit_of(InverseGaussianParams{7.83, 3.41})},
          {UNK, fit_of(GpdParams{-0.10, 2.05})}};
}

inline SemiMarkovModel success_model() {
  ModelMetadata m;
  m.cohort_label = "success";
  return SemiMarkovModel(table_matrix(kSuccessTable), success_dwell(), m);
}

inline SemiMarkovModel failure_model() {
  ModelMetadata m;
  m.cohort_label = "failure";
  return SemiMarkovModel(table_matrix(kFailureTable), failure_dwell(), m);
}

inline std::vector<LabeledSequence> decode_all(const std::vector<RunSequence>& runs) {
  std::vector<LabeledSequence> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(decode_runs(r));
  return out;
}

}  // namespace fixtures
