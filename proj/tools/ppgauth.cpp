// ppgauth: synthesize, enroll, verify and evaluate PPG biometric galleries.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ppgauth/config.hpp"
#include "ppgauth/error.hpp"
#include "ppgauth/features.hpp"
#include "ppgauth/io.hpp"
#include "ppgauth/pipeline.hpp"
#include "ppgauth/protocols.hpp"
#include "ppgauth/synthgen.hpp"

namespace fs = std::filesystem;
using namespace ppgauth;

namespace {

constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;
constexpr int kExitReject = 3;

// Command-line overrides layered on top of --config.
struct Overrides {
  std::string config_path;
  std::string method;
  std::optional<std::size_t> m;
  std::optional<double> kernel_sigma;
  std::string aggregation;
  std::optional<double> train_seconds;
  std::vector<std::string> n_test;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<int> scale_index;
  std::vector<double> scale_band;
  std::optional<double> prominence;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--method", method, "cwt-dlda, cwt-lda, cwt-pca, cwt-kpca, cwt-kdda, openset or ac-lda");
    cmd->add_option("--m", m, "Subspace dimension (0: subjects - 1)");
    cmd->add_option("--kernel-sigma", kernel_sigma, "Gaussian kernel width (<= 0: median heuristic)");
    cmd->add_option("--aggregation", aggregation, "Template/test reduction, e.g. min/mean");
    cmd->add_option("--train-seconds", train_seconds, "Enrollment slice length");
    cmd->add_option("--n-test", n_test, "Test segment counts (All or 0 for every segment)")->delimiter(',');
    cmd->add_option("--iterations", iterations, "Random draws per nTest");
    cmd->add_option("--seed", seed, "Protocol RNG seed");
    cmd->add_option("--scale-index", scale_index, "Select the k-th largest CWT scale");
    cmd->add_option("--scale-band", scale_band, "Select the scale nearest the band midpoint")->expected(2);
    cmd->add_option("--prominence", prominence, "Peak prominence as a fraction of the squared range");
  }

  bool any() const {
    return !method.empty() || m || kernel_sigma || !aggregation.empty() || scale_index || !scale_band.empty() ||
           prominence;
  }

  RunConfig apply(RunConfig c) const {
    if (!config_path.empty()) c = load_config(config_path);
    if (!method.empty()) c.method = parse_pipeline_method(method);
    if (m) c.m = *m;
    if (kernel_sigma) c.kernel_sigma = *kernel_sigma;
    if (!aggregation.empty()) c.aggregation = matching::parse_aggregation(aggregation);
    if (train_seconds) c.protocol.train_seconds = *train_seconds;
    if (!n_test.empty()) {
      c.protocol.n_test.clear();
      for (const auto& t : n_test) {
        if (t == "All" || t == "all") {
          c.protocol.n_test.push_back(0);
          continue;
        }
        try {
          c.protocol.n_test.push_back(std::stoul(t));
        } catch (const std::exception&) {
          throw Error(Errc::invalid_config, "invalid --n-test value '" + t + "'");
        }
      }
    }
    if (iterations) c.protocol.iterations = *iterations;
    if (seed) c.protocol.seed = *seed;
    if (scale_index) c.scale = features::ByIndex{*scale_index};
    if (!scale_band.empty()) c.scale = features::ByBand{scale_band[0], scale_band[1]};
    if (prominence) c.prominence_fraction = *prominence;
    c.validate();
    return c;
  }
};

std::vector<RawRecording> select_partition(const std::vector<RawRecording>& recs, const std::string& partition) {
  std::vector<RawRecording> out;
  for (const auto& r : recs) {
    if (r.partition() == partition) out.push_back(r);
  }
  if (out.empty()) throw Error(Errc::invalid_config, "no recordings in partition '" + partition + "'");
  return out;
}

std::string default_partition(const std::vector<RawRecording>& recs) {
  const auto keys = protocols::partitions(recs);
  if (keys.empty()) throw Error(Errc::validation, "dataset has no recordings");
  return keys.front();
}

RawRecording load_single(const std::string& path, double fs, const std::string& subject, const std::string& state) {
  RawRecording rec;
  rec.samples = io::read_samples_csv(path);
  rec.fs = fs;
  rec.subject_id = subject;
  rec.session_id = "s1";
  rec.state = PhysState::parse(state);
  return rec;
}

std::string safe_name(std::string s) {
  for (char& c : s) {
    if (c == ':' || c == '>' || c == '+' || c == '/') c = '_';
  }
  return s;
}

int run_synth(const std::string& out_dir, const synth::DatasetSpec& spec) {
  const auto data = synth::make_dataset(spec);
  std::vector<RawRecording> recs;
  for (const auto& d : data) recs.push_back(d.recording);
  io::write_dataset(out_dir, recs);
  std::printf("wrote %zu recordings for %zu subjects to %s\n", recs.size(), spec.subjects,
              (fs::path(out_dir) / "manifest.csv").c_str());
  return 0;
}

int run_enroll(const Overrides& ov, const std::string& dataset, const std::string& partition_arg,
               const std::string& out) {
  const RunConfig cfg = ov.apply({});
  const auto data = io::load_dataset(dataset);
  const std::string partition = partition_arg.empty() ? default_partition(data.recordings) : partition_arg;
  const auto recs = select_partition(data.recordings, partition);
  const auto e = pipeline::enroll(recs, cfg);
  io::save_enrollment(out, e);
  std::printf("enrolled %zu subjects from %s (method %s, L=%zu, m=%zu, threshold %.6f, fingerprint %s)\n",
              e.model.class_ids.size(), partition.c_str(), std::string(to_string(cfg.method)).c_str(), e.model.L,
              e.model.m, e.threshold, e.fingerprint().c_str());
  return 0;
}

int run_verify(const Overrides& ov, const std::string& model_path, const std::string& recording, double fs,
               const std::string& claim, const std::string& state, std::size_t n_test,
               std::optional<double> threshold) {
  const auto e = io::load_enrollment(model_path);
  if (!ov.config_path.empty() || ov.any()) {
    const RunConfig cfg = ov.apply(e.config);
    if (cfg.fingerprint() != e.fingerprint()) {
      throw Error(Errc::invalid_config, "configuration fingerprint " + cfg.fingerprint() +
                                            " does not match the model's " + e.fingerprint());
    }
  }
  e.model.class_of(claim);
  const auto rec = load_single(recording, fs, claim, state);
  const auto p = pipeline::prepare(rec, e.config);
  const auto rows = pipeline::feature_rows(p, e.config, 0, rec.samples.size());
  if (rows.size() < n_test || rows.empty()) {
    throw Error(Errc::insufficient_signal, "recording yields " + std::to_string(rows.size()) +
                                               " test segments, " + std::to_string(n_test) + " requested");
  }
  const std::size_t count = n_test == 0 ? rows.size() : n_test;
  const auto projected = pipeline::project_rows(e, std::span(rows).first(count));
  const auto score = pipeline::score_claim(e, claim, projected);
  const double t = threshold.value_or(e.threshold);
  const bool accept = matching::decide(score, t) == matching::Decision::accept;
  nlohmann::json j{{"claimed_id", claim},       {"score", score.value}, {"threshold", t},
                   {"decision", accept ? "accept" : "reject"}, {"n_test", count}};
  std::cout << j.dump() << '\n';
  return accept ? 0 : kExitReject;
}

int run_evaluate(Overrides ov, const std::string& dataset, const std::string& out_dir, const std::string& protocol,
                 const std::string& partition_arg, const std::string& train_partition,
                 const std::vector<std::string>& test_partitions, const std::vector<std::string>& methods,
                 const std::string& model_path, bool svg) {
  const auto data = io::load_dataset(dataset);
  std::vector<std::string> method_names = methods;
  if (method_names.empty()) method_names.push_back(ov.method);

  std::vector<protocols::EvalReport> reports;
  for (const auto& name : method_names) {
    ov.method = name;
    const RunConfig cfg = ov.apply({});
    if (!model_path.empty()) {
      const auto e = io::load_enrollment(model_path);
      if (e.fingerprint() != cfg.fingerprint()) {
        throw Error(Errc::invalid_config, "configuration fingerprint " + cfg.fingerprint() +
                                              " does not match the model's " + e.fingerprint());
      }
    }
    if (protocol == "single") {
      const std::string partition = partition_arg.empty() ? default_partition(data.recordings) : partition_arg;
      reports.push_back(protocols::single_session(select_partition(data.recordings, partition), cfg, data.name));
    } else if (protocol == "cross") {
      if (train_partition.empty() || test_partitions.empty()) {
        throw Error(Errc::invalid_config, "cross protocol needs --train-partition and --test-partition");
      }
      reports.push_back(protocols::cross_partition(data.recordings, cfg, {train_partition, test_partitions, {}, {}},
                                                   data.name));
    } else {
      reports.push_back(protocols::cross_rotate(data.recordings, cfg, data.name));
    }
  }

  const fs::path out(out_dir);
  io::write_results_csv(out / "results.csv", reports);
  std::vector<std::pair<std::string, eval::RocCurve>> curves;
  for (const auto& r : reports) {
    for (const auto& c : r.cells) {
      const std::string nt = c.n_test == 0 ? "All" : std::to_string(c.n_test);
      const auto roc = eval::roc_export(c.pooled);
      io::write_roc_csv(out / "roc" / (r.method + "_" + safe_name(c.protocol) + "_" + nt + ".csv"), roc);
      if (c.n_test == 0) curves.emplace_back(r.method + " " + c.protocol, roc);
    }
  }
  if (svg) io::write_roc_svg(out / "roc.svg", curves);

  std::printf("%-10s %-24s %6s %10s %10s %5s\n", "method", "protocol", "nTest", "mean EER%", "std EER%", "iter");
  for (const auto& r : reports) {
    for (const auto& c : r.cells) {
      std::printf("%-10s %-24s %6s %10.3f %10.3f %5zu\n", r.method.c_str(), c.protocol.c_str(),
                  c.n_test == 0 ? "All" : std::to_string(c.n_test).c_str(), 100.0 * c.summary.mean,
                  100.0 * c.summary.std, c.iterations);
    }
    if (!r.excluded.empty()) std::printf("  (%zu exclusions logged)\n", r.excluded.size());
  }
  return 0;
}

int run_dump_scalogram(const Overrides& ov, const std::string& recording, double fs, const std::string& state,
                       std::size_t index, const std::string& out) {
  const RunConfig cfg = ov.apply({});
  const auto rec = load_single(recording, fs, "probe", state);
  const auto p = pipeline::prepare(rec, cfg);
  const auto segments = preprocess::average_pairs(preprocess::segment(p.filtered, p.peaks));
  if (index >= segments.size()) {
    throw Error(Errc::insufficient_signal, "segment " + std::to_string(index) + " requested, " +
                                               std::to_string(segments.size()) + " available");
  }
  const auto grid = features::make_scale_grid(cfg.morse, cfg.grid_min_hz, cfg.grid_max_hz, cfg.voices_per_octave);
  io::write_scalogram_csv(out, features::cwt(segments[index].values, grid, cfg.morse, fs), grid);
  std::printf("wrote %zu x %zu scalogram to %s\n", grid.size(), segments[index].values.size(), out.c_str());
  return 0;
}

void report_error(const std::string& code, const std::string& message) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PPG biometric verification: synthesize, enroll, verify, evaluate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ppgauth 0.1.0");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset (CSV recordings and manifest)");
  std::string synth_out;
  synth::DatasetSpec spec;
  std::vector<std::string> conditions{"relax"};
  double min_sep = spec.cohort.min_separation;
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--subjects", spec.subjects, "Number of subjects")->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed, "Generation seed")->capture_default_str();
  synth_cmd->add_option("--duration", spec.duration_s, "Seconds per recording")->capture_default_str();
  synth_cmd->add_option("--fs", spec.fs, "Sampling rate in Hz")->capture_default_str();
  synth_cmd->add_option("--noise", spec.noise_level, "Noise level relative to the systolic amplitude")
      ->capture_default_str();
  synth_cmd->add_option("--conditions", conditions, "relax, exercise, timelapse, emotion<k>")->delimiter(',');
  synth_cmd->add_option("--min-separation", min_sep, "Minimum normalized profile distance")->capture_default_str();
  synth_cmd->add_flag("--constant-hr", spec.constant_hr, "Disable beat-to-beat HR variability");
  synth_cmd->add_flag("--dicrotic", spec.dicrotic_notch, "Add a dicrotic notch component");
  synth_cmd->add_flag("--motion", spec.motion_artifacts, "Inject motion-artifact bursts");

  auto* enroll_cmd = app.add_subcommand("enroll", "Fit a gallery on the training slice of every subject");
  Overrides enroll_ov;
  enroll_ov.attach(enroll_cmd);
  std::string enroll_dataset, enroll_partition, enroll_out;
  enroll_cmd->add_option("--dataset", enroll_dataset, "Manifest CSV")->required()->check(CLI::ExistingFile);
  enroll_cmd->add_option("--partition", enroll_partition, "session:state to enroll from (default: first)");
  enroll_cmd->add_option("--out", enroll_out, "Model bundle path")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Score one identity claim; exit 0 accept, 3 reject");
  Overrides verify_ov;
  verify_ov.attach(verify_cmd);
  std::string verify_model, verify_recording, verify_claim, verify_state = "relax";
  double verify_fs = 0.0;
  std::size_t verify_n = 2;
  std::optional<double> verify_threshold;
  verify_cmd->add_option("--model", verify_model, "Model bundle")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--recording", verify_recording, "Recording CSV")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--fs", verify_fs, "Sampling rate in Hz")->required();
  verify_cmd->add_option("--claim", verify_claim, "Claimed subject id")->required();
  verify_cmd->add_option("--state", verify_state, "Physiological state of the recording")->capture_default_str();
  verify_cmd->add_option("--segments", verify_n, "Test segments to use (0: all)")->capture_default_str();
  verify_cmd->add_option("--threshold", verify_threshold, "Accept if score <= threshold (default: model's)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Run an evaluation protocol and write results and ROC files");
  Overrides eval_ov;
  eval_ov.attach(eval_cmd);
  std::string eval_dataset, eval_out, eval_protocol = "single", eval_partition, eval_train, eval_model;
  std::vector<std::string> eval_tests, eval_methods;
  bool eval_svg = false;
  eval_cmd->add_option("--dataset", eval_dataset, "Manifest CSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();
  eval_cmd->add_option("--protocol", eval_protocol, "single, cross or rotate")
      ->check(CLI::IsMember({"single", "cross", "rotate"}))
      ->capture_default_str();
  eval_cmd->add_option("--partition", eval_partition, "Partition for the single-session protocol");
  eval_cmd->add_option("--train-partition", eval_train, "Training partition for the cross protocol");
  eval_cmd->add_option("--test-partition", eval_tests, "Test partitions for the cross protocol")->delimiter(',');
  eval_cmd->add_option("--methods", eval_methods, "Evaluate several pipelines in one run")->delimiter(',');
  eval_cmd->add_option("--model", eval_model, "Check the configuration against this model's fingerprint")
      ->check(CLI::ExistingFile);
  eval_cmd->add_flag("--svg", eval_svg, "Also write roc.svg");

  auto* dump_cmd = app.add_subcommand("dump-scalogram", "Write the scalogram of one averaged pulse segment");
  Overrides dump_ov;
  dump_ov.attach(dump_cmd);
  std::string dump_recording, dump_out, dump_state = "relax";
  double dump_fs = 0.0;
  std::size_t dump_index = 0;
  dump_cmd->add_option("--recording", dump_recording, "Recording CSV")->required()->check(CLI::ExistingFile);
  dump_cmd->add_option("--fs", dump_fs, "Sampling rate in Hz")->required();
  dump_cmd->add_option("--state", dump_state, "Physiological state")->capture_default_str();
  dump_cmd->add_option("--segment", dump_index, "Averaged segment index")->capture_default_str();
  dump_cmd->add_option("--out", dump_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth_cmd) {
      std::vector<synth::Condition> parsed;
      for (const auto& c : conditions) parsed.push_back(synth::Condition::parse(c));
      spec.conditions = parsed;
      spec.cohort.min_separation = min_sep;
      return run_synth(synth_out, spec);
    }
    if (*enroll_cmd) return run_enroll(enroll_ov, enroll_dataset, enroll_partition, enroll_out);
    if (*verify_cmd) {
      return run_verify(verify_ov, verify_model, verify_recording, verify_fs, verify_claim, verify_state, verify_n,
                        verify_threshold);
    }
    if (*eval_cmd) {
      return run_evaluate(eval_ov, eval_dataset, eval_out, eval_protocol, eval_partition, eval_train, eval_tests,
                          eval_methods, eval_model, eval_svg);
    }
    if (*dump_cmd) return run_dump_scalogram(dump_ov, dump_recording, dump_fs, dump_state, dump_index, dump_out);
  } catch (const Error& e) {
    report_error(std::string(to_string(e.code())), e.what());
    return kExitPipeline;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitPipeline;
  }
  return kExitUsage;
}
