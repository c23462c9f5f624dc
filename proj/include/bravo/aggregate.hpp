#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bravo/metrics.hpp"

namespace bravo {

/// One evaluated subset: semantic metrics (absent for smiyc), OOD metrics
/// (present for smiyc and synobjs) and the harmonic mean over the subset's
/// applicable metrics with ECE and FPR@95 reversed.
struct SubsetReport {
  std::string name;
  std::optional<SemanticRecord> semantic;
  std::optional<OodRecord> ood;
  MetricValue harmonic_mean;
  bool operator==(const SubsetReport&) const = default;
};

/// Configuration echo embedded in every report. Two reports are comparable
/// only when everything except the engine version matches.
struct ReportConfig {
  std::string engine;
  int class_count = 19;
  int ece_bins = 15;
  int curve_bins = 256;
  DegeneratePolicy policy = DegeneratePolicy::Error;
  std::string quantization = "8bit/255";

  bool comparable_to(const ReportConfig& other) const {
    return class_count == other.class_count && ece_bins == other.ece_bins &&
           curve_bins == other.curve_bins && policy == other.policy &&
           quantization == other.quantization;
  }
  bool operator==(const ReportConfig&) const = default;
};

struct BenchmarkReport {
  std::vector<SubsetReport> subsets;
  MetricValue semantic_summary;
  MetricValue ood_summary;
  MetricValue bravo_index;
  ReportConfig config;
  bool operator==(const BenchmarkReport&) const = default;
};

enum class ReportFormat { Json, Text };

/// n / sum(1/v) over named values; degenerate when any input is degenerate
/// or not strictly positive (the offending name is reported).
MetricValue harmonic_mean(
    std::span<const std::pair<std::string, MetricValue>> values);

/// 100 - value for lower-is-better metrics; errors outside [0,100].
double reverse_metric(double value);

/// Harmonic mean of {miou, auroc, aupr_success, aupr_error, reverse(ece),
/// reverse(fpr95)}.
MetricValue semantic_summary(const SemanticRecord& record);

/// Harmonic mean of {auprc, auroc, reverse(fpr95)}.
MetricValue ood_summary(const OodRecord& record);

/// Harmonic mean of the two summary indices: the ranking metric.
MetricValue bravo_index(const MetricValue& semantic, const MetricValue& ood);

/// Harmonic mean over every metric the subset carries (6, 3 or 9 values).
MetricValue subset_summary(const SubsetReport& subset);

/// Metric-by-metric arithmetic average across the subsets that carry the
/// record; nullopt when none do. Feeds the summary harmonic means.
std::optional<SemanticRecord> averaged_semantic_record(
    const std::vector<SubsetReport>& subsets);
std::optional<OodRecord> averaged_ood_record(
    const std::vector<SubsetReport>& subsets);

/// Fills per-subset harmonic means and the three summary indices. Subsets
/// are reported in canonical benchmark order.
BenchmarkReport build_report(std::vector<SubsetReport> subsets,
                             ReportConfig config);

std::string render_report(const BenchmarkReport& report, ReportFormat format);
std::string render_report_json(const BenchmarkReport& report);
std::string render_report_text(const BenchmarkReport& report);
BenchmarkReport parse_report_json(const std::string& text);

}  // namespace bravo
