#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semimarkov/compare.hpp"
#include "semimarkov/dwell.hpp"
#include "semimarkov/markov.hpp"
#include "semimarkov/sequence.hpp"

namespace semimarkov::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---- manifests and cohorts ----

struct CohortManifest {
  std::string group_label;
  double sampling_rate_hz = 0.0;
  std::vector<fs::path> patient_files;  // resolved against the manifest directory
  std::vector<std::string> alphabet;
};

/// Accepts a single cohort object or {"cohorts": [cohort | "path", ...]}.
std::vector<CohortManifest> read_manifests(const fs::path& path);
void write_manifest(const CohortManifest& manifest, const fs::path& path);

struct Cohort {
  std::string label;
  StateAlphabet alphabet;
  std::vector<LabeledSequence> sequences;
  std::vector<std::string> warnings;
};

/// Loads every patient file, choosing the parser from the CSV header.
Cohort load_cohort(const CohortManifest& manifest);

// ---- CSV ----

/// Header `time_s,state`; the sampling rate is inferred from the spacing and,
/// when `expected_rate_hz` is given, must agree with it.
LabeledSequence parse_label_csv(const fs::path& path, const StateAlphabet& alphabet,
                                std::optional<double> expected_rate_hz = std::nullopt);

struct RunCsv {
  RunSequence runs;
  std::vector<std::string> warnings;
};

/// Header `state,duration_s`. Durations must be whole multiples of the sample
/// period; repeated states are merged with a warning.
RunCsv parse_runlength_csv(const fs::path& path, const StateAlphabet& alphabet, double sampling_rate_hz);

void write_label_csv(const LabeledSequence& seq, const StateAlphabet& alphabet, const fs::path& path);
void write_runlength_csv(const RunSequence& runs, const StateAlphabet& alphabet, const fs::path& path);

// ---- canonical JSON ----

/// Sorted keys, two-space indent, floats as 17 significant digits.
std::string canonical_json(const json& value);
std::string format_double(double v);
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

// ---- model documents ----

struct ModelDocument {
  int schema_version = kSchemaVersion;
  TransitionMatrix transitions;
  std::map<StateIndex, DwellFit> dwell;
  ModelMetadata metadata;
};

ModelDocument to_document(const SemiMarkovModel& model);
ModelDocument to_document(const DtmcFit& fit, ModelMetadata metadata);
/// Throws KindMismatch for DTMC documents.
SemiMarkovModel to_semi_markov(const ModelDocument& doc);

json document_to_json(const ModelDocument& doc);
ModelDocument document_from_json(const json& j);
std::string serialize_model(const ModelDocument& doc);
ModelDocument parse_model(const std::string& text);

void write_model_json(const ModelDocument& doc, const fs::path& path);
ModelDocument read_model_json(const fs::path& path);

json dwell_fit_to_json(const DwellFit& fit);
DwellFit dwell_fit_from_json(const json& j);

json report_to_json(const ComparisonReport& report);

// ---- histograms ----

struct Histogram {
  double bin_width = 1.0;
  std::vector<double> left;     // bin left edges
  std::vector<double> density;  // sum(density) * bin_width == 1
};

/// Bins are [left, left + width), aligned to multiples of the width and
/// starting at the bin that holds the smallest duration.
Histogram compute_histogram(std::span<const double> durations_s, double bin_width_s);

/// Overlay density of an exponential fit at `x`, scaled by the fraction of
/// `n_total` observations the fit was made on.
double overlay_density(const DwellFit& fit, std::size_t n_total, double x);

void emit_histogram_csv(std::span<const double> durations_s, double bin_width_s, const fs::path& path,
                        const std::optional<DwellFit>& exponential_overlay = std::nullopt);

}  // namespace semimarkov::io
