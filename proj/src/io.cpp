#include "semimarkov/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semimarkov/error.hpp"

namespace semimarkov::io {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvRows {
  std::string header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

CsvRows read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  CsvRows csv;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!have_header) {
      csv.header = line;
      have_header = true;
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != 2) {
      throw Error(ErrorCode::MalformedCsv, path.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
    }
    csv.rows.emplace_back(line_no, std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::MalformedCsv, path.string() + ": empty file");
  return csv;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::MalformedCsv, path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

StateIndex lookup_state(const StateAlphabet& alphabet, const std::string& name, const fs::path& path,
                        std::size_t line_no) {
  auto idx = alphabet.index_of(name);
  if (!idx) {
    throw Error(ErrorCode::UnknownState,
                path.string() + ":" + std::to_string(line_no) + ": state '" + name + "' is not in the alphabet");
  }
  return *idx;
}

void write_canonical(std::string& out, const json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += json(it.key()).dump();
        out += ": ";
        write_canonical(out, it.value(), indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write_canonical(out, v[i], indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write_canonical(out, v[i], indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: out += format_double(v.get<double>()); return;
    default: out += v.dump(); return;
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedJson, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) malformed(std::string("missing field '") + key + "'");
  return j.at(key);
}

double get_double(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) malformed(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

std::vector<std::string> get_strings(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_array()) malformed(std::string("field '") + key + "' is not an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) malformed(std::string("field '") + key + "' has a non-string entry");
    out.push_back(e.get<std::string>());
  }
  return out;
}

json per_state_counts(const StateAlphabet& alphabet, const std::vector<std::int64_t>& counts) {
  json o = json::object();
  for (std::size_t s = 0; s < counts.size() && s < alphabet.size(); ++s) {
    o[alphabet.name(static_cast<StateIndex>(s))] = counts[s];
  }
  return o;
}

std::vector<std::int64_t> per_state_counts_from(const StateAlphabet& alphabet, const json& o) {
  if (!o.is_object()) malformed("per-state counts must be an object");
  if (o.empty()) return {};
  std::vector<std::int64_t> out(alphabet.size(), 0);
  for (auto it = o.begin(); it != o.end(); ++it) {
    auto idx = alphabet.index_of(it.key());
    if (!idx || !it.value().is_number_integer()) malformed("bad per-state count for '" + it.key() + "'");
    out[*idx] = it.value().get<std::int64_t>();
  }
  return out;
}

json metadata_to_json(const ModelMetadata& m, const StateAlphabet& alphabet) {
  json j;
  j["cohort_label"] = m.cohort_label;
  j["segment_index"] = m.segment_index ? json(*m.segment_index) : json(nullptr);
  j["segment_count"] = m.segment_count ? json(*m.segment_count) : json(nullptr);
  j["window_s"] = m.window_s ? json::array({m.window_s->first, m.window_s->second}) : json(nullptr);
  j["total_transitions"] = m.total_transitions;
  j["n_sequences"] = m.n_sequences;
  j["sampling_rate_hz"] = m.sampling_rate_hz ? json(*m.sampling_rate_hz) : json(nullptr);
  j["sample_counts"] = per_state_counts(alphabet, m.sample_counts);
  j["run_counts"] = per_state_counts(alphabet, m.run_counts);
  json fams = json::array();
  for (auto f : m.candidate_families) fams.push_back(std::string(to_string(f)));
  j["candidate_families"] = fams;
  j["warnings"] = m.warnings;
  return j;
}

ModelMetadata metadata_from_json(const json& j, const StateAlphabet& alphabet) {
  ModelMetadata m;
  const auto& label = field(j, "cohort_label");
  if (!label.is_string()) malformed("cohort_label must be a string");
  m.cohort_label = label.get<std::string>();
  if (const auto& v = field(j, "segment_index"); !v.is_null()) m.segment_index = v.get<std::size_t>();
  if (const auto& v = field(j, "segment_count"); !v.is_null()) m.segment_count = v.get<std::size_t>();
  if (const auto& v = field(j, "window_s"); !v.is_null()) {
    if (!v.is_array() || v.size() != 2) malformed("window_s must be a pair");
    m.window_s = std::pair{v[0].get<double>(), v[1].get<double>()};
  }
  m.total_transitions = field(j, "total_transitions").get<std::int64_t>();
  m.n_sequences = field(j, "n_sequences").get<std::size_t>();
  if (const auto& v = field(j, "sampling_rate_hz"); !v.is_null()) m.sampling_rate_hz = v.get<double>();
  m.sample_counts = per_state_counts_from(alphabet, field(j, "sample_counts"));
  m.run_counts = per_state_counts_from(alphabet, field(j, "run_counts"));
  for (const auto& tag : get_strings(j, "candidate_families")) {
    auto f = parse_family(tag);
    if (!f) malformed("unknown family '" + tag + "'");
    m.candidate_families.push_back(*f);
  }
  m.warnings = get_strings(j, "warnings");
  return m;
}

}  // namespace

// ---- manifests ----

namespace {

CohortManifest manifest_from_json(const json& j, const fs::path& base) {
  CohortManifest m;
  try {
    m.group_label = field(j, "group_label").get<std::string>();
    m.sampling_rate_hz = field(j, "sampling_rate_hz").get<double>();
    m.alphabet = get_strings(j, "alphabet");
    for (const auto& f : get_strings(j, "patient_files")) {
      fs::path p(f);
      m.patient_files.push_back(p.is_absolute() ? p : base / p);
    }
  } catch (const json::exception& e) {
    malformed(std::string("manifest: ") + e.what());
  }
  if (m.patient_files.empty()) throw Error(ErrorCode::EmptyInput, "manifest lists no patient files");
  if (!(m.sampling_rate_hz > 0.0)) throw Error(ErrorCode::InvalidSamplingRate, "manifest sampling rate must be positive");
  build_alphabet(m.alphabet);
  return m;
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<CohortManifest> read_manifests(const fs::path& path) {
  const json j = parse_json_file(path);
  const fs::path base = path.parent_path();
  std::vector<CohortManifest> out;
  if (j.is_object() && j.contains("cohorts")) {
    if (!j["cohorts"].is_array() || j["cohorts"].empty()) malformed("'cohorts' must be a non-empty array");
    for (const auto& c : j["cohorts"]) {
      if (c.is_string()) {
        fs::path p(c.get<std::string>());
        auto nested = read_manifests(p.is_absolute() ? p : base / p);
        out.insert(out.end(), nested.begin(), nested.end());
      } else {
        out.push_back(manifest_from_json(c, base));
      }
    }
  } else {
    out.push_back(manifest_from_json(j, base));
  }
  return out;
}

void write_manifest(const CohortManifest& manifest, const fs::path& path) {
  json j;
  j["group_label"] = manifest.group_label;
  j["sampling_rate_hz"] = manifest.sampling_rate_hz;
  j["alphabet"] = manifest.alphabet;
  json files = json::array();
  const fs::path base = path.parent_path();
  for (const auto& f : manifest.patient_files) {
    files.push_back(base.empty() ? f.generic_string() : fs::relative(f, base).generic_string());
  }
  j["patient_files"] = files;
  write_text(path, canonical_json(j) + "\n");
}

Cohort load_cohort(const CohortManifest& manifest) {
  Cohort c{manifest.group_label, build_alphabet(manifest.alphabet), {}, {}};
  for (const auto& file : manifest.patient_files) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + file.string());
    std::string header;
    std::getline(in, header);
    header = trim(header);
    if (header == "time_s,state") {
      c.sequences.push_back(parse_label_csv(file, c.alphabet, manifest.sampling_rate_hz));
    } else if (header == "state,duration_s") {
      auto parsed = parse_runlength_csv(file, c.alphabet, manifest.sampling_rate_hz);
      for (auto& w : parsed.warnings) c.warnings.push_back(std::move(w));
      c.sequences.push_back(decode_runs(parsed.runs));
    } else {
      throw Error(ErrorCode::MalformedCsv, file.string() + ": unrecognised header '" + header + "'");
    }
  }
  return c;
}

// ---- CSV ----

LabeledSequence parse_label_csv(const fs::path& path, const StateAlphabet& alphabet,
                                std::optional<double> expected_rate_hz) {
  const auto csv = read_csv(path);
  if (csv.header != "time_s,state") throw Error(ErrorCode::MalformedCsv, path.string() + ": expected header time_s,state");
  if (csv.rows.empty()) throw Error(ErrorCode::MalformedCsv, path.string() + ": no samples");

  std::vector<double> times;
  std::vector<StateIndex> labels;
  for (const auto& [line_no, fields] : csv.rows) {
    times.push_back(parse_number(fields[0], path, line_no));
    labels.push_back(lookup_state(alphabet, fields[1], path, line_no));
  }

  double rate = 0.0;
  if (times.size() >= 2) {
    const double spacing = times[1] - times[0];
    if (!(spacing > 0.0)) throw Error(ErrorCode::NonUniformSampling, path.string() + ": times must increase");
    for (std::size_t i = 2; i < times.size(); ++i) {
      if (std::abs((times[i] - times[i - 1]) - spacing) > 1e-6) {
        throw Error(ErrorCode::NonUniformSampling,
                    path.string() + ":" + std::to_string(csv.rows[i].first) + ": sample spacing changes");
      }
    }
    const double mean_spacing = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    rate = 1.0 / mean_spacing;
    if (expected_rate_hz) {
      if (std::abs(mean_spacing - 1.0 / *expected_rate_hz) > 1e-6) {
        throw Error(ErrorCode::RateMismatch, path.string() + ": sampling rate differs from the manifest");
      }
      rate = *expected_rate_hz;
    }
  } else {
    if (!expected_rate_hz) {
      throw Error(ErrorCode::MalformedCsv, path.string() + ": one sample and no rate to fall back on");
    }
    rate = *expected_rate_hz;
  }
  return LabeledSequence(std::move(labels), rate, path.stem().string());
}

RunCsv parse_runlength_csv(const fs::path& path, const StateAlphabet& alphabet, double sampling_rate_hz) {
  const auto csv = read_csv(path);
  if (csv.header != "state,duration_s") {
    throw Error(ErrorCode::MalformedCsv, path.string() + ": expected header state,duration_s");
  }
  if (csv.rows.empty()) throw Error(ErrorCode::MalformedCsv, path.string() + ": no runs");
  if (!(sampling_rate_hz > 0.0)) throw Error(ErrorCode::InvalidSamplingRate, "sampling rate must be positive");

  std::vector<Run> runs;
  std::vector<std::string> warnings;
  for (const auto& [line_no, fields] : csv.rows) {
    const StateIndex s = lookup_state(alphabet, fields[0], path, line_no);
    const double d = parse_number(fields[1], path, line_no);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveDuration, where + ": duration must be positive");
    const double samples = d * sampling_rate_hz;
    const double whole = std::round(samples);
    if (whole < 1.0) throw Error(ErrorCode::NonPositiveDuration, where + ": duration is shorter than one sample");
    if (std::abs(samples - whole) > 1e-6 * std::max(1.0, samples)) {
      throw Error(ErrorCode::MalformedCsv, where + ": duration is not a whole number of samples");
    }
    const auto length = static_cast<std::int64_t>(whole);
    if (!runs.empty() && runs.back().state == s) {
      runs.back().length += length;
      warnings.push_back(where + ": merged repeated state '" + alphabet.name(s) + "'");
    } else {
      runs.push_back({s, length});
    }
  }
  return {RunSequence(std::move(runs), sampling_rate_hz, path.stem().string()), std::move(warnings)};
}

void write_label_csv(const LabeledSequence& seq, const StateAlphabet& alphabet, const fs::path& path) {
  std::string out = "time_s,state\n";
  const auto& labels = seq.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += format_double(static_cast<double>(i) / seq.sampling_rate_hz());
    out += ',';
    out += alphabet.name(labels[i]);
    out += '\n';
  }
  write_text(path, out);
}

void write_runlength_csv(const RunSequence& runs, const StateAlphabet& alphabet, const fs::path& path) {
  std::string out = "state,duration_s\n";
  for (const auto& r : runs.runs()) {
    out += alphabet.name(r.state);
    out += ',';
    out += format_double(static_cast<double>(r.length) / runs.sampling_rate_hz());
    out += '\n';
  }
  write_text(path, out);
}

// ---- canonical JSON ----

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string canonical_json(const json& value) {
  std::string out;
  write_canonical(out, value, 0);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- model documents ----

ModelDocument to_document(const SemiMarkovModel& model) {
  return {kSchemaVersion, model.transitions(), model.dwell(), model.metadata()};
}

ModelDocument to_document(const DtmcFit& fit, ModelMetadata metadata) {
  metadata.total_transitions = fit.counts.total();
  return {kSchemaVersion, fit.matrix, {}, std::move(metadata)};
}

SemiMarkovModel to_semi_markov(const ModelDocument& doc) {
  if (doc.transitions.kind() != ChainKind::SemiMarkov) {
    throw Error(ErrorCode::KindMismatch, "model document is not a semi-Markov model");
  }
  return SemiMarkovModel(doc.transitions, doc.dwell, doc.metadata);
}

json dwell_fit_to_json(const DwellFit& fit) {
  json params = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ExponentialParams>) {
          json o{{"mu", p.mu}};
          if (p.origin != 0.0) o["origin"] = p.origin;
          return o;
        } else if constexpr (std::is_same_v<T, GevParams>) {
          return json{{"k", p.k}, {"sigma", p.sigma}, {"mu", p.mu}};
        } else if constexpr (std::is_same_v<T, GpdParams>) {
          return json{{"k", p.k}, {"sigma", p.sigma}};
        } else {
          return json{{"mu", p.mu}, {"lambda", p.lambda}};
        }
      },
      fit.params);
  json j;
  j["family"] = std::string(to_string(fit.family()));
  j["params"] = params;
  j["n_obs"] = fit.n_obs;
  j["log_likelihood"] = number_or_null(fit.log_likelihood);
  j["bic"] = number_or_null(fit.bic);
  j["notes"] = fit.notes;
  return j;
}

DwellFit dwell_fit_from_json(const json& j) {
  const auto& tag = field(j, "family");
  if (!tag.is_string()) malformed("family must be a string");
  auto family = parse_family(tag.get<std::string>());
  if (!family) malformed("unknown dwell family '" + tag.get<std::string>() + "'");
  const auto& p = field(j, "params");
  DwellFit fit;
  switch (*family) {
    case DwellFamily::Exponential:
      fit.params = ExponentialParams{get_double(p, "mu"), p.contains("origin") ? get_double(p, "origin") : 0.0};
      break;
    case DwellFamily::GeneralizedExtremeValue:
      fit.params = GevParams{get_double(p, "k"), get_double(p, "sigma"), get_double(p, "mu")};
      break;
    case DwellFamily::GeneralizedPareto: fit.params = GpdParams{get_double(p, "k"), get_double(p, "sigma")}; break;
    case DwellFamily::InverseGaussian:
      fit.params = InverseGaussianParams{get_double(p, "mu"), get_double(p, "lambda")};
      break;
  }
  validate(fit.params);
  fit.n_obs = field(j, "n_obs").get<std::size_t>();
  fit.log_likelihood = get_double(j, "log_likelihood");
  fit.bic = get_double(j, "bic");
  fit.notes = get_strings(j, "notes");
  return fit;
}

json document_to_json(const ModelDocument& doc) {
  const auto& alphabet = doc.transitions.alphabet();
  json j;
  j["schema_version"] = doc.schema_version;
  j["alphabet"] = alphabet.names();
  j["kind"] = std::string(to_string(doc.transitions.kind()));
  json rows = json::array();
  for (const auto& r : doc.transitions.rows()) rows.push_back(r ? json(*r) : json(nullptr));
  j["transitions"] = rows;
  json dwell = json::object();
  for (const auto& [s, fit] : doc.dwell) dwell[alphabet.name(s)] = dwell_fit_to_json(fit);
  j["dwell"] = dwell;
  j["metadata"] = metadata_to_json(doc.metadata, alphabet);
  return j;
}

ModelDocument document_from_json(const json& j) {
  if (!j.is_object()) malformed("model document must be an object");
  const auto& version = field(j, "schema_version");
  if (!version.is_number_integer()) malformed("schema_version must be an integer");
  if (version.get<int>() != kSchemaVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "schema_version " + version.dump() + " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  try {
    StateAlphabet alphabet = build_alphabet(get_strings(j, "alphabet"));
    const auto kind_tag = field(j, "kind").get<std::string>();
    auto kind = parse_kind(kind_tag);
    if (!kind) malformed("unknown kind '" + kind_tag + "'");
    const auto& rows_json = field(j, "transitions");
    if (!rows_json.is_array() || rows_json.size() != alphabet.size()) malformed("transitions must have one row per state");
    std::vector<TransitionMatrix::Row> rows;
    for (const auto& r : rows_json) {
      if (r.is_null()) {
        rows.emplace_back(std::nullopt);
      } else {
        rows.emplace_back(r.get<std::vector<double>>());
      }
    }
    TransitionMatrix matrix(alphabet, *kind, std::move(rows));
    std::map<StateIndex, DwellFit> dwell;
    const auto& dj = field(j, "dwell");
    if (!dj.is_object()) malformed("dwell must be an object");
    for (auto it = dj.begin(); it != dj.end(); ++it) {
      auto idx = alphabet.index_of(it.key());
      if (!idx) malformed("dwell fit for unknown state '" + it.key() + "'");
      dwell.emplace(*idx, dwell_fit_from_json(it.value()));
    }
    ModelMetadata meta = metadata_from_json(field(j, "metadata"), alphabet);
    return {kSchemaVersion, std::move(matrix), std::move(dwell), std::move(meta)};
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

std::string serialize_model(const ModelDocument& doc) { return canonical_json(document_to_json(doc)) + "\n"; }

ModelDocument parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(e.what());
  }
  return document_from_json(j);
}

void write_model_json(const ModelDocument& doc, const fs::path& path) { write_text(path, serialize_model(doc)); }

ModelDocument read_model_json(const fs::path& path) { return parse_model(read_text(path)); }

json report_to_json(const ComparisonReport& report) {
  json j;
  j["alphabet"] = report.alphabet.names();
  j["kind"] = std::string(to_string(report.kind));
  j["aggregate"] = number_or_null(report.aggregate);
  j["aggregation"] = "unweighted_mean_of_rows";
  j["units"] = "nats";
  json rows = json::object();
  for (const auto& [s, v] : report.per_row) rows[report.alphabet.name(s)] = v;
  j["per_row"] = rows;
  json skipped = json::array();
  for (auto s : report.skipped_rows) skipped.push_back(report.alphabet.name(s));
  j["skipped_rows"] = skipped;
  json smoothed = json::array();
  for (auto s : report.smoothed_rows) smoothed.push_back(report.alphabet.name(s));
  j["smoothed_rows"] = smoothed;
  j["smoothing_epsilon"] = report.smoothing_epsilon;
  return j;
}

// ---- histograms ----

Histogram compute_histogram(std::span<const double> durations_s, double bin_width_s) {
  if (durations_s.empty()) throw Error(ErrorCode::EmptyInput, "no durations to bin");
  if (!(bin_width_s > 0.0) || !std::isfinite(bin_width_s)) {
    throw Error(ErrorCode::InvalidArgument, "bin width must be positive");
  }
  const auto [lo, hi] = std::minmax_element(durations_s.begin(), durations_s.end());
  const auto first = static_cast<std::int64_t>(std::floor(*lo / bin_width_s));
  const auto last = static_cast<std::int64_t>(std::floor(*hi / bin_width_s));
  const auto n_bins = static_cast<std::size_t>(last - first + 1);
  std::vector<std::int64_t> counts(n_bins, 0);
  for (double d : durations_s) {
    const auto b = static_cast<std::int64_t>(std::floor(d / bin_width_s)) - first;
    ++counts[static_cast<std::size_t>(b)];
  }
  Histogram h;
  h.bin_width = bin_width_s;
  const double norm = static_cast<double>(durations_s.size()) * bin_width_s;
  for (std::size_t i = 0; i < n_bins; ++i) {
    h.left.push_back(static_cast<double>(first + static_cast<std::int64_t>(i)) * bin_width_s);
    h.density.push_back(static_cast<double>(counts[i]) / norm);
  }
  return h;
}

double overlay_density(const DwellFit& fit, std::size_t n_total, double x) {
  if (!in_support(fit.params, x)) return 0.0;
  const double share = n_total > 0 ? static_cast<double>(fit.n_obs) / static_cast<double>(n_total) : 1.0;
  return share * std::exp(log_pdf(fit.params, x));
}

void emit_histogram_csv(std::span<const double> durations_s, double bin_width_s, const fs::path& path,
                        const std::optional<DwellFit>& exponential_overlay) {
  if (exponential_overlay && exponential_overlay->family() != DwellFamily::Exponential) {
    throw Error(ErrorCode::InvalidArgument, "histogram overlay must be an exponential fit");
  }
  const Histogram h = compute_histogram(durations_s, bin_width_s);
  std::string out = exponential_overlay ? "bin_left_s,bin_right_s,density,exponential_pdf\n"
                                        : "bin_left_s,bin_right_s,density\n";
  for (std::size_t i = 0; i < h.left.size(); ++i) {
    const double right = h.left[i] + bin_width_s;
    out += format_double(h.left[i]) + "," + format_double(right) + "," + format_double(h.density[i]);
    if (exponential_overlay) {
      const double mid = h.left[i] + 0.5 * bin_width_s;
      out += "," + format_double(overlay_density(*exponential_overlay, durations_s.size(), mid));
    }
    out += '\n';
  }
  write_text(path, out);
}

}  // namespace semimarkov::io
