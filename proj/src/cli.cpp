#include "semimarkov/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "semimarkov/compare.hpp"
#include "semimarkov/error.hpp"
#include "semimarkov/io.hpp"
#include "semimarkov/markov.hpp"
#include "semimarkov/simulate.hpp"

namespace semimarkov::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<DwellFamily> parse_families(const std::vector<std::string>& tags) {
  if (tags.empty()) return default_candidates();
  std::vector<DwellFamily> out;
  for (const auto& t : tags) {
    auto f = parse_family(t);
    if (!f) throw UsageError("unknown dwell family '" + t + "'");
    if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
  }
  return out;
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) { return fs::path(prefix + suffix); }

std::string segment_file(const std::string& prefix, const std::string& label, std::size_t k) {
  return prefix + "_" + label + "_seg" + std::to_string(k) + ".json";
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

// ---- fit ----

struct FitArgs {
  std::string manifest;
  std::string model = "semi-markov";
  std::string out;
  std::string out_prefix;
  std::vector<std::string> families;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto manifests = io::read_manifests(a.manifest);
  if (manifests.size() > 1 && a.out_prefix.empty()) throw UsageError("several cohorts need --out-prefix");
  if (manifests.size() == 1 && a.out.empty() && a.out_prefix.empty()) throw UsageError("--out is required");
  const auto families = parse_families(a.families);

  for (const auto& m : manifests) {
    const io::Cohort cohort = io::load_cohort(m);
    print_warnings(cohort.warnings, err);
    io::ModelDocument doc = [&] {
      if (a.model == "dtmc") {
        const DtmcFit fit = fit_dtmc(cohort.sequences, cohort.alphabet);
        ModelMetadata meta;
        meta.cohort_label = cohort.label;
        meta.n_sequences = cohort.sequences.size();
        meta.sampling_rate_hz = cohort.sequences.front().sampling_rate_hz();
        meta.sample_counts.assign(cohort.alphabet.size(), 0);
        for (const auto& s : cohort.sequences) {
          for (StateIndex l : s.labels()) ++meta.sample_counts[l];
        }
        return io::to_document(fit, std::move(meta));
      }
      SemiMarkovFitOptions options{families, cohort.label};
      const SemiMarkovModel model = fit_semi_markov(cohort.sequences, cohort.alphabet, options);
      print_warnings(model.metadata().warnings, err);
      return io::to_document(model);
    }();
    const fs::path path = (manifests.size() == 1 && !a.out.empty()) ? fs::path(a.out)
                                                                     : with_suffix(a.out_prefix, "_" + cohort.label + ".json");
    io::write_model_json(doc, path);
    out << "wrote " << path.generic_string() << "\n";
  }
  return kExitOk;
}

// ---- split-fit ----

struct SplitFitArgs {
  std::string manifest;
  std::size_t segments = 2;
  std::string out_prefix;
  double epsilon = kDefaultSmoothing;
  std::vector<std::string> families;
};

int cmd_split_fit(const SplitFitArgs& a, std::ostream& out, std::ostream& err) {
  const auto manifests = io::read_manifests(a.manifest);
  const auto families = parse_families(a.families);

  std::vector<std::string> labels;
  std::vector<MultiChainModel> fits;
  for (const auto& m : manifests) {
    const io::Cohort cohort = io::load_cohort(m);
    print_warnings(cohort.warnings, err);
    SemiMarkovFitOptions options{families, cohort.label};
    MultiChainModel mc = fit_multi_chain(cohort.sequences, a.segments, cohort.alphabet, options);
    for (std::size_t k = 0; k < mc.segments().size(); ++k) {
      print_warnings(mc.segments()[k].metadata().warnings, err);
      const fs::path path = segment_file(a.out_prefix, cohort.label, k);
      io::write_model_json(io::to_document(mc.segments()[k]), path);
      out << "wrote " << path.generic_string() << "\n";
    }
    labels.push_back(cohort.label);
    fits.push_back(std::move(mc));
  }

  json summary;
  summary["segments"] = a.segments;
  summary["smoothing_epsilon"] = a.epsilon;
  json cross_segment = json::object();
  for (std::size_t c = 0; c < fits.size(); ++c) {
    json steps = json::array();
    const auto& segs = fits[c].segments();
    for (std::size_t k = 0; k + 1 < segs.size(); ++k) {
      const auto report = compare_transition_matrices(segs[k].transitions(), segs[k + 1].transitions(), a.epsilon);
      steps.push_back(json{{"from_segment", k}, {"to_segment", k + 1}, {"report", io::report_to_json(report)}});
    }
    cross_segment[labels[c]] = steps;
  }
  summary["cross_segment"] = cross_segment;

  json cross_cohort = json::array();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    for (std::size_t j = i + 1; j < fits.size(); ++j) {
      json per_segment = json::array();
      for (std::size_t k = 0; k < a.segments; ++k) {
        const auto report = compare_transition_matrices(fits[i].segments()[k].transitions(),
                                                        fits[j].segments()[k].transitions(), a.epsilon);
        per_segment.push_back(json{{"segment", k}, {"report", io::report_to_json(report)}});
        out << "segment " << k << ": " << labels[i] << " vs " << labels[j]
            << " symmetric KL = " << io::format_double(report.aggregate) << "\n";
      }
      cross_cohort.push_back(json{{"a", labels[i]}, {"b", labels[j]}, {"per_segment", per_segment}});
    }
  }
  summary["cross_cohort"] = cross_cohort;

  const fs::path path = with_suffix(a.out_prefix, "_comparison.json");
  io::write_text(path, io::canonical_json(summary) + "\n");
  out << "wrote " << path.generic_string() << "\n";
  return kExitOk;
}

// ---- compare ----

struct CompareArgs {
  std::string a, b, out;
  double epsilon = kDefaultSmoothing;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream&) {
  const auto da = io::read_model_json(a.a);
  const auto db = io::read_model_json(a.b);
  const auto report = compare_transition_matrices(da.transitions, db.transitions, a.epsilon);
  const std::string text = io::canonical_json(io::report_to_json(report)) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    io::write_text(a.out, text);
    out << "aggregate symmetric KL = " << io::format_double(report.aggregate) << "\n";
  }
  return kExitOk;
}

// ---- simulate ----

struct SimulateArgs {
  std::vector<std::string> inputs;
  std::size_t patients = 1;
  double duration = 300.0;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string out_prefix;
  std::string format = "labels";
  std::string initial;
  std::string label;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<SemiMarkovModel> models;
  for (const auto& path : a.inputs) models.push_back(io::to_semi_markov(io::read_model_json(path)));
  const auto& first = models.front();
  const StateAlphabet& alphabet = first.alphabet();

  SimulationConfig config;
  config.duration_s = a.duration;
  config.seed = a.seed;
  config.output_sampling_rate_hz = a.rate > 0.0 ? a.rate : first.metadata().sampling_rate_hz.value_or(10.0);
  if (!a.initial.empty()) {
    auto idx = alphabet.index_of(a.initial);
    if (!idx) throw Error(ErrorCode::InvalidInitialState, "unknown initial state '" + a.initial + "'");
    config.initial_state = *idx;
  }

  std::vector<RunSequence> cohort;
  if (models.size() == 1) {
    cohort = simulate_cohort(first, a.patients, config);
  } else {
    // Segment windows come from the fitted documents when present.
    std::vector<double> boundaries;
    for (std::size_t k = 0; k + 1 < models.size(); ++k) {
      const auto& w = models[k].metadata().window_s;
      boundaries.push_back(w ? w->second
                             : a.duration * static_cast<double>(k + 1) / static_cast<double>(models.size()));
    }
    MultiChainModel mc(models, boundaries);
    cohort = simulate_multi_chain_cohort(mc, a.patients, config);
  }

  io::CohortManifest manifest;
  manifest.group_label = !a.label.empty() ? a.label
                         : !first.metadata().cohort_label.empty() ? first.metadata().cohort_label
                                                                  : "simulated";
  manifest.sampling_rate_hz = config.output_sampling_rate_hz;
  manifest.alphabet = alphabet.names();
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "_p%03zu.csv", i);
    const fs::path path = with_suffix(a.out_prefix, suffix);
    if (a.format == "runs") {
      io::write_runlength_csv(cohort[i], alphabet, path);
    } else {
      io::write_label_csv(decode_runs(cohort[i]), alphabet, path);
    }
    manifest.patient_files.push_back(path);
  }
  const fs::path manifest_path = with_suffix(a.out_prefix, "_manifest.json");
  io::write_manifest(manifest, manifest_path);
  out << "wrote " << cohort.size() << " sequences and " << manifest_path.generic_string() << "\n";
  (void)err;
  return kExitOk;
}

// ---- report ----

struct ReportArgs {
  std::string manifest;
  std::uint64_t seed = 0;
  std::size_t replicates = 1000;
  double bin_width = 0.5;
  double truncation = 0.0;
  std::size_t segments = 2;
  std::string out_prefix;
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  if (a.segments < 1) throw UsageError("--segments must be >= 1");
  const auto manifests = io::read_manifests(a.manifest);
  json cohorts = json::array();
  for (const auto& m : manifests) {
    const io::Cohort cohort = io::load_cohort(m);
    print_warnings(cohort.warnings, err);
    const auto& alphabet = cohort.alphabet;

    const auto fractions = bootstrap_group_fractions(cohort.sequences, alphabet, a.replicates, a.seed);
    json tf = json::object();
    for (std::size_t s = 0; s < alphabet.size(); ++s) {
      tf[alphabet.name(static_cast<StateIndex>(s))] = json{{"mean", fractions[s].mean}, {"std", fractions[s].stddev}};
    }

    // Pooled per-state durations within each equal-time segment.
    std::vector<std::map<StateIndex, std::vector<double>>> pooled(a.segments);
    for (const auto& seq : cohort.sequences) {
      std::vector<LabeledSequence> parts;
      if (a.segments == 1) {
        parts.push_back(seq);
      } else {
        const auto b = equal_time_boundaries(seq.duration_s(), a.segments);
        parts = split_at_time(seq, b);
      }
      for (std::size_t k = 0; k < parts.size(); ++k) {
        for (auto& [state, ds] : durations_by_state(encode_runs(parts[k]))) {
          auto& dst = pooled[k][state];
          dst.insert(dst.end(), ds.begin(), ds.end());
        }
      }
    }

    json durations = json::object();
    for (std::size_t s = 0; s < alphabet.size(); ++s) {
      const auto state = static_cast<StateIndex>(s);
      json per_segment = json::array();
      for (std::size_t k = 0; k < a.segments; ++k) {
        auto it = pooled[k].find(state);
        if (it == pooled[k].end()) {
          per_segment.push_back(json{{"segment", k}, {"n", 0}});
          continue;
        }
        const auto& xs = it->second;
        double sum = 0.0;
        for (double x : xs) sum += x;
        std::optional<DwellFit> tail;
        try {
          tail = fit_exponential(xs, a.truncation);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::EmptyInput) throw;
        }
        const std::string hist_name = fs::path(a.out_prefix).filename().string() + "_" + cohort.label + "_" +
                                      alphabet.name(state) + "_seg" + std::to_string(k) + ".csv";
        io::emit_histogram_csv(xs, a.bin_width, fs::path(a.out_prefix).parent_path() / hist_name, tail);
        per_segment.push_back(json{{"segment", k},
                                   {"n", xs.size()},
                                   {"mean_s", sum / static_cast<double>(xs.size())},
                                   {"exponential_tail", tail ? io::dwell_fit_to_json(*tail) : json(nullptr)},
                                   {"histogram", hist_name}});
      }
      durations[alphabet.name(state)] = per_segment;
    }

    cohorts.push_back(json{{"label", cohort.label},
                           {"n_patients", cohort.sequences.size()},
                           {"time_fractions", tf},
                           {"durations", durations}});
  }

  json report{{"seed", a.seed},       {"replicates", a.replicates}, {"bin_width_s", a.bin_width},
              {"truncation_s", a.truncation}, {"segments", a.segments},     {"cohorts", cohorts}};
  const fs::path path = with_suffix(a.out_prefix, "_report.json");
  io::write_text(path, io::canonical_json(report) + "\n");
  out << "wrote " << path.generic_string() << "\n";
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit, compare and simulate Markov and semi-Markov models of state sequences"};
  app.name("smm");
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit one model per cohort");
  fit->add_option("--manifest", fit_args.manifest, "Cohort manifest JSON")->required();
  fit->add_option("--model", fit_args.model, "dtmc | semi-markov")
      ->check(CLI::IsMember({"dtmc", "semi-markov"}))
      ->capture_default_str();
  fit->add_option("--out", fit_args.out, "Output model JSON (single cohort)");
  fit->add_option("--out-prefix", fit_args.out_prefix, "Output prefix (one file per cohort)");
  fit->add_option("--families", fit_args.families, "Candidate dwell families")->delimiter(',');

  SplitFitArgs split_args;
  auto* split = app.add_subcommand("split-fit", "Fit a multi-chain semi-Markov model per cohort");
  split->add_option("--manifest", split_args.manifest, "Cohort manifest JSON")->required();
  split->add_option("--segments", split_args.segments, "Number of equal-time segments")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000}))
      ->capture_default_str();
  split->add_option("--out-prefix", split_args.out_prefix, "Output prefix")->required();
  split->add_option("--epsilon", split_args.epsilon, "Smoothing for zero entries")->capture_default_str();
  split->add_option("--families", split_args.families, "Candidate dwell families")->delimiter(',');

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "Symmetric KL between two fitted models");
  cmp->add_option("--a", cmp_args.a, "First model JSON")->required();
  cmp->add_option("--b", cmp_args.b, "Second model JSON")->required();
  cmp->add_option("--epsilon", cmp_args.epsilon, "Smoothing for zero entries")->capture_default_str();
  cmp->add_option("--out", cmp_args.out, "Report JSON (stdout if omitted)");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate sequences from fitted semi-Markov models");
  sim->add_option("--in", sim_args.inputs, "Model JSON; repeat for consecutive segments")->required();
  sim->add_option("--patients", sim_args.patients, "Number of sequences")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim->add_option("--duration", sim_args.duration, "Seconds per sequence")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim->add_option("--rate", sim_args.rate, "Output sampling rate in Hz (default: the model's)");
  sim->add_option("--seed", sim_args.seed, "Base seed; patient i uses seed + i")->required();
  sim->add_option("--out-prefix", sim_args.out_prefix, "Output prefix")->required();
  sim->add_option("--format", sim_args.format, "labels | runs")
      ->check(CLI::IsMember({"labels", "runs"}))
      ->capture_default_str();
  sim->add_option("--initial", sim_args.initial, "Initial state (default: uniform over fitted states)");
  sim->add_option("--label", sim_args.label, "Group label written to the manifest");

  ReportArgs rep_args;
  auto* rep = app.add_subcommand("report", "Time fractions with bootstrap errors and duration histograms");
  rep->add_option("--manifest", rep_args.manifest, "Cohort manifest JSON")->required();
  rep->add_option("--seed", rep_args.seed, "Bootstrap seed")->required();
  rep->add_option("--replicates", rep_args.replicates, "Bootstrap replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rep->add_option("--bin-width", rep_args.bin_width, "Histogram bin width in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rep->add_option("--truncation", rep_args.truncation, "Tail threshold for the exponential overlay")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  rep->add_option("--segments", rep_args.segments, "Equal-time segments for duration histograms")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rep->add_option("--out-prefix", rep_args.out_prefix, "Output prefix")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (*fit) return cmd_fit(fit_args, out, err);
    if (*split) return cmd_split_fit(split_args, out, err);
    if (*cmp) return cmd_compare(cmp_args, out, err);
    if (*sim) return cmd_simulate(sim_args, out, err);
    if (*rep) return cmd_report(rep_args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsageError;
}

}  // namespace semimarkov::cli
