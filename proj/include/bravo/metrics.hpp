#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bravo/types.hpp"

namespace bravo {

/// What to report when a curve metric is undefined (one of the two score
/// populations is empty): raise, or fabricate 0 resp. 100 percent.
enum class DegeneratePolicy { Error, Zero, One };

std::string to_string(DegeneratePolicy policy);
DegeneratePolicy degenerate_policy_from_string(const std::string& name);

/// A metric in percent, or a marked degeneracy with its reason.
struct MetricValue {
  double value = 0.0;
  bool ok = false;
  std::string note;

  static MetricValue of(double v) { return {v, true, {}}; }
  static MetricValue degenerate(std::string reason) {
    return {0.0, false, std::move(reason)};
  }
  bool operator==(const MetricValue&) const = default;
};

struct AccumulatorConfig {
  int class_count = 19;
  int calibration_bins = 15;
  bool operator==(const AccumulatorConfig&) const = default;
};

/// C x C counts; entry (gt, pred) counts valid pixels only.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(int class_count);

  void add(int gt, int pred) { counts_[static_cast<std::size_t>(gt) * classes_ + pred] += 1; }
  std::uint64_t at(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * classes_ + pred];
  }
  int class_count() const { return classes_; }
  std::uint64_t total() const;
  void merge_from(const ConfusionAccumulator& other);

 private:
  int classes_;
  std::vector<std::uint64_t> counts_;
};

/// Positive/negative counts over the 256 quantized score levels. The basis
/// of every ROC / PR metric; exact for 8-bit scores.
class CurveAccumulator {
 public:
  static constexpr int kBins = 256;

  void add(double score, bool positive) { add_bin(quantize255(score), positive); }
  void add_bin(int bin, bool positive, std::uint64_t count = 1) {
    (positive ? pos_ : neg_)[bin] += count;
  }

  std::uint64_t positives() const;
  std::uint64_t negatives() const;
  std::uint64_t pos_at(int bin) const { return pos_[bin]; }
  std::uint64_t neg_at(int bin) const { return neg_[bin]; }

  /// The same population scored by 1 - score/255 with the classes swapped;
  /// turns the correctness curve into the error-detection curve.
  CurveAccumulator reversed() const;

  void merge_from(const CurveAccumulator& other);

 private:
  std::array<std::uint64_t, kBins> pos_{};
  std::array<std::uint64_t, kBins> neg_{};
};

/// Equal-width confidence bins over [0,1]; membership [lo,hi) with the last
/// bin closed. Tracks count, confidence sum and correct count per bin.
class CalibrationAccumulator {
 public:
  explicit CalibrationAccumulator(int bins);

  void add(double confidence, bool correct);

  int bins() const { return static_cast<int>(count_.size()); }
  std::uint64_t count_at(int b) const { return count_[b]; }
  double conf_sum_at(int b) const { return conf_sum_[b]; }
  std::uint64_t correct_at(int b) const { return correct_[b]; }
  std::uint64_t total() const;

  void merge_from(const CalibrationAccumulator& other);

 private:
  std::vector<std::uint64_t> count_;
  std::vector<double> conf_sum_;
  std::vector<std::uint64_t> correct_;
};

/// Everything one subset accumulates: confusion and calibration over valid
/// pixels, the correctness curve (positive = correct, score = confidence)
/// and the OOD curve (positive = invalid, score = 1 - confidence). Pixels
/// with ground truth 255 touch nothing.
struct AccumulatorSet {
  explicit AccumulatorSet(AccumulatorConfig config);

  AccumulatorConfig config;
  ConfusionAccumulator confusion;
  CalibrationAccumulator calibration;
  CurveAccumulator correctness;
  CurveAccumulator ood;
};

void accumulate(const EvalUnit& unit, AccumulatorSet& acc);
AccumulatorSet merge(const AccumulatorSet& a, const AccumulatorSet& b);

struct RocPoint {
  double fpr;
  double tpr;
};

/// Threshold sweep from the highest occupied level down; one vertex per
/// occupied level, (0,0) prepended. Ends at (1,1).
std::vector<RocPoint> roc_curve(const CurveAccumulator& curve);

double miou(const ConfusionAccumulator& confusion);           // percent
double ece(const CalibrationAccumulator& calibration);        // percent
double auroc(const CurveAccumulator& curve);                  // percent
double fpr_at_tpr(const CurveAccumulator& curve, double target_tpr = 0.95);
double average_precision(const CurveAccumulator& curve);      // percent

/// The six semantic metrics {miou, ece, auroc, fpr95, aupr_success,
/// aupr_error}; curve degeneracies resolved per policy.
struct SemanticRecord {
  MetricValue miou, ece, auroc, fpr95, aupr_success, aupr_error;
  bool operator==(const SemanticRecord&) const = default;
};

/// The three OOD metrics {auprc, auroc, fpr95} over the invalid-pixel curve.
struct OodRecord {
  MetricValue auprc, auroc, fpr95;
  bool operator==(const OodRecord&) const = default;
};

SemanticRecord semantic_metrics(const AccumulatorSet& acc,
                                DegeneratePolicy policy);
OodRecord ood_metrics(const AccumulatorSet& acc, DegeneratePolicy policy);

}  // namespace bravo
