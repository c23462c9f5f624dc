#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bravo/aggregate.hpp"
#include "bravo/io.hpp"
#include "bravo/metrics.hpp"
#include "bravo/oracle.hpp"

namespace bravo {

struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path out;  // report file (eval) or output root (fuse)
  int workers = 1;
  int ece_bins = 15;
  DegeneratePolicy policy = DegeneratePolicy::Error;
  ReportFormat format = ReportFormat::Json;
  std::optional<DecoderKind> decoder_override;
};

struct ItemFailure {
  std::string subset;
  std::string id;
  std::string message;
};

struct EvalOutcome {
  BenchmarkReport report;
  std::vector<ItemFailure> failures;
  std::vector<std::string> warnings;
};

/// Evaluates every manifest item with a worker pool. Items carrying logits
/// are fused in memory first. Per-item accumulators are merged in canonical
/// subset order then item id order, so the report does not depend on the
/// worker count. Item failures are collected, not thrown.
EvalOutcome run_eval(const RunConfig& config);

struct FuseOutcome {
  std::filesystem::path manifest;
  std::vector<ItemFailure> failures;
  std::size_t written = 0;
};

/// Decodes every logits item and writes the class map and quantized
/// confidence map under the output root, plus a derived manifest pointing
/// at the written maps.
FuseOutcome run_fuse(const RunConfig& config);

enum class LogitsMode { None, Linear, Mask2Former };

struct SynthConfig {
  FixtureSpec spec;
  double ood_invalid_fraction = 0.1;  // applied to smiyc and synobjs
  std::uint64_t seed = 1;
  std::filesystem::path out;
  int items_per_subset = 2;
  std::vector<std::string> subsets;  // empty = all six
  LogitsMode logits = LogitsMode::None;
  bool confidence_tensor = false;  // float tensor instead of quantized png
};

/// Writes a fixture tree (rasters plus manifest) under the output root and
/// returns the manifest path. The same seed writes byte-identical trees.
std::filesystem::path run_synth(const SynthConfig& config);

struct SummaryRow {
  std::string name;
  BenchmarkReport report;
};

/// Loads reports, refuses incomparable configurations, and renders a
/// comparison sorted by bravo index, best first.
std::string run_summarize(const std::vector<std::filesystem::path>& reports,
                          ReportFormat format);

}  // namespace bravo
