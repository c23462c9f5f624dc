#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bravo/errors.hpp"
#include "bravo/runner.hpp"
#include "bravo/version.hpp"

namespace {

namespace fs = std::filesystem;

bool quiet_logging() {
  const char* env = std::getenv("BRAVOEVAL_LOG");
  return env != nullptr && std::string(env) == "quiet";
}

void info(const std::string& message) {
  if (!quiet_logging()) std::fprintf(stderr, "%s\n", message.c_str());
}

void report_failures(const std::vector<bravo::ItemFailure>& failures) {
  for (const auto& f : failures) {
    if (f.id.empty())
      std::fprintf(stderr, "error: %s: %s\n", f.subset.c_str(),
                   f.message.c_str());
    else
      std::fprintf(stderr, "error: %s/%s: %s\n", f.subset.c_str(),
                   f.id.c_str(), f.message.c_str());
  }
}

void emit(const std::string& text, const fs::path& out) {
  if (out.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  if (!out.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
  }
  std::ofstream stream(out, std::ios::trunc);
  stream << text;
  stream.flush();
  if (!stream)
    bravo::fail(bravo::ErrorKind::IoFailure, "failed writing " + out.string());
}

bool any_degenerate(const bravo::BenchmarkReport& report) {
  auto bad = [](const bravo::MetricValue& v) { return !v.ok; };
  bool has_semantic = false;
  bool has_ood = false;
  for (const auto& subset : report.subsets) {
    if (bad(subset.harmonic_mean)) return true;
    if (subset.semantic) {
      has_semantic = true;
      const auto& r = *subset.semantic;
      if (bad(r.miou) || bad(r.ece) || bad(r.auroc) || bad(r.fpr95) ||
          bad(r.aupr_success) || bad(r.aupr_error))
        return true;
    }
    if (subset.ood) {
      has_ood = true;
      const auto& r = *subset.ood;
      if (bad(r.auprc) || bad(r.auroc) || bad(r.fpr95)) return true;
    }
  }
  // A summary over a record family the manifest never carried stays marked
  // degenerate in the report, but nothing was suppressed to produce it, so
  // it does not fail the run.
  if (has_semantic && bad(report.semantic_summary)) return true;
  if (has_ood && bad(report.ood_summary)) return true;
  if (has_semantic && has_ood && bad(report.bravo_index)) return true;
  return false;
}

struct CommonArgs {
  std::string manifest;
  std::string out;
  int workers = 1;
  int ece_bins = 15;
  std::string policy = "error";
  std::string format = "json";
  std::string decoder;
};

bravo::RunConfig to_run_config(const CommonArgs& args) {
  bravo::RunConfig config;
  config.manifest = args.manifest;
  config.out = args.out;
  config.workers = args.workers;
  config.ece_bins = args.ece_bins;
  config.policy = bravo::degenerate_policy_from_string(args.policy);
  config.format = args.format == "table" ? bravo::ReportFormat::Text
                                         : bravo::ReportFormat::Json;
  if (!args.decoder.empty())
    config.decoder_override = bravo::decoder_from_string(args.decoder);
  return config;
}

void add_workers_option(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--workers", args.workers, "parallel item workers")
      ->check(CLI::Range(1, 256))
      ->envname("BRAVOEVAL_WORKERS");
}

int do_eval(const CommonArgs& args) {
  bravo::RunConfig config = to_run_config(args);
  bravo::EvalOutcome outcome = bravo::run_eval(config);
  for (const auto& w : outcome.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  report_failures(outcome.failures);
  emit(bravo::render_report(outcome.report, config.format), config.out);
  info("eval: " + std::to_string(outcome.report.subsets.size()) +
       " subsets reported, " + std::to_string(outcome.failures.size()) +
       " item failures");
  if (!outcome.failures.empty()) return 1;
  if (config.policy == bravo::DegeneratePolicy::Error &&
      any_degenerate(outcome.report))
    return 1;
  return 0;
}

int do_fuse(const CommonArgs& args) {
  bravo::RunConfig config = to_run_config(args);
  bravo::FuseOutcome outcome = bravo::run_fuse(config);
  report_failures(outcome.failures);
  info("fuse: wrote " + std::to_string(outcome.written) + " items, manifest " +
       outcome.manifest.string());
  return outcome.failures.empty() ? 0 : 1;
}

struct SynthArgs {
  bravo::SynthConfig config;
  std::string out;
  std::string profile = "calibrated";
  std::string logits = "none";
};

int do_synth(SynthArgs& args) {
  args.config.out = args.out;
  args.config.spec.profile = args.profile == "uniform"
                                 ? bravo::CalibrationProfile::Uniform
                                 : bravo::CalibrationProfile::Calibrated;
  if (args.logits == "linear")
    args.config.logits = bravo::LogitsMode::Linear;
  else if (args.logits == "mask2former")
    args.config.logits = bravo::LogitsMode::Mask2Former;
  const fs::path manifest = bravo::run_synth(args.config);
  info("synth: wrote " + manifest.string());
  return 0;
}

struct SummarizeArgs {
  std::vector<std::string> reports;
  std::string out;
  std::string format = "table";
};

int do_summarize(const SummarizeArgs& args) {
  std::vector<fs::path> paths(args.reports.begin(), args.reports.end());
  const auto format = args.format == "json" ? bravo::ReportFormat::Json
                                            : bravo::ReportFormat::Text;
  emit(bravo::run_summarize(paths, format), args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"converts exported segmentation decoder outputs into class and "
               "confidence maps and scores them with a robustness metric "
               "suite"};
  app.set_version_flag("--version", bravo::kEngineVersion);
  app.require_subcommand(1);

  CommonArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a manifest into a report");
  eval_cmd->add_option("--manifest", eval_args.manifest, "manifest to evaluate")
      ->required();
  eval_cmd->add_option("--out", eval_args.out,
                       "report destination (default stdout)");
  add_workers_option(eval_cmd, eval_args);
  eval_cmd->add_option("--ece-bins", eval_args.ece_bins, "calibration bins")
      ->check(CLI::Range(2, 4096));
  eval_cmd
      ->add_option("--degenerate-policy", eval_args.policy,
                   "what an undefined curve metric becomes")
      ->check(CLI::IsMember({"error", "zero", "one"}));
  eval_cmd->add_option("--format", eval_args.format, "report format")
      ->check(CLI::IsMember({"json", "table"}));
  eval_cmd->add_option("--decoder", eval_args.decoder,
                       "require this decoder kind on logits items")
      ->check(CLI::IsMember({"linear", "mask2former"}));

  CommonArgs fuse_args;
  CLI::App* fuse_cmd = app.add_subcommand(
      "fuse", "decode logits items into class and confidence maps");
  fuse_cmd->add_option("--manifest", fuse_args.manifest, "manifest with logits")
      ->required();
  fuse_cmd->add_option("--out", fuse_args.out, "output root for written maps")
      ->required();
  add_workers_option(fuse_cmd, fuse_args);
  fuse_cmd->add_option("--decoder", fuse_args.decoder,
                       "require this decoder kind on logits items")
      ->check(CLI::IsMember({"linear", "mask2former"}));

  SummarizeArgs summarize_args;
  CLI::App* summarize_cmd = app.add_subcommand(
      "summarize", "compare reports, best bravo index first");
  summarize_cmd
      ->add_option("reports", summarize_args.reports, "report json files")
      ->required();
  summarize_cmd->add_option("--out", summarize_args.out,
                            "table destination (default stdout)");
  summarize_cmd->add_option("--format", summarize_args.format, "output format")
      ->check(CLI::IsMember({"json", "table"}));

  SynthArgs synth_args;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "write a synthetic fixture tree");
  synth_cmd->add_option("--out", synth_args.out, "output root")->required();
  synth_cmd->add_option("--seed", synth_args.config.seed, "generator seed");
  synth_cmd->add_option("--items", synth_args.config.items_per_subset,
                        "items per subset")
      ->check(CLI::Range(1, 100000));
  synth_cmd->add_option("--classes", synth_args.config.spec.class_count,
                        "class count")
      ->check(CLI::Range(2, 255));
  synth_cmd->add_option("--height", synth_args.config.spec.height,
                        "image height")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--width", synth_args.config.spec.width, "image width")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--error-rate", synth_args.config.spec.error_rate,
                        "per-pixel misprediction probability");
  synth_cmd->add_option("--invalid-fraction",
                        synth_args.config.spec.invalid_fraction,
                        "invalid-pixel probability outside the ood subsets");
  synth_cmd->add_option("--ood-invalid-fraction",
                        synth_args.config.ood_invalid_fraction,
                        "invalid-pixel probability in smiyc and synobjs");
  synth_cmd->add_option("--profile", synth_args.profile, "confidence profile")
      ->check(CLI::IsMember({"calibrated", "uniform"}));
  synth_cmd->add_option("--conf-lo", synth_args.config.spec.valid_conf_lo,
                        "uniform profile: valid-pixel confidence lower bound");
  synth_cmd->add_option("--conf-hi", synth_args.config.spec.valid_conf_hi,
                        "uniform profile: valid-pixel confidence upper bound");
  synth_cmd->add_option("--invalid-conf-lo",
                        synth_args.config.spec.invalid_conf_lo,
                        "invalid-pixel confidence lower bound");
  synth_cmd->add_option("--invalid-conf-hi",
                        synth_args.config.spec.invalid_conf_hi,
                        "invalid-pixel confidence upper bound");
  synth_cmd
      ->add_option("--subset", synth_args.config.subsets,
                   "generate only these subsets")
      ->check(CLI::IsMember(std::vector<std::string>(bravo::kSubsetNames.begin(),
                                                     bravo::kSubsetNames.end())));
  synth_cmd->add_option("--logits", synth_args.logits,
                        "emit decoder logits instead of fused maps")
      ->check(CLI::IsMember({"none", "linear", "mask2former"}));
  synth_cmd->add_flag("--conf-tensor", synth_args.config.confidence_tensor,
                      "store confidence as a float tensor instead of png");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*eval_cmd) return do_eval(eval_args);
    if (*fuse_cmd) return do_fuse(fuse_args);
    if (*summarize_cmd) return do_summarize(summarize_args);
    return do_synth(synth_args);
  } catch (const bravo::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
