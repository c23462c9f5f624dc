#include "bravo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bravo {

std::string to_string(DegeneratePolicy policy) {
  switch (policy) {
    case DegeneratePolicy::Error: return "error";
    case DegeneratePolicy::Zero: return "zero";
    case DegeneratePolicy::One: return "one";
  }
  return "error";
}

DegeneratePolicy degenerate_policy_from_string(const std::string& name) {
  if (name == "error") return DegeneratePolicy::Error;
  if (name == "zero") return DegeneratePolicy::Zero;
  if (name == "one") return DegeneratePolicy::One;
  fail(ErrorKind::InvalidArgument, "unknown degenerate policy '" + name + "'");
}

ConfusionAccumulator::ConfusionAccumulator(int class_count)
    : classes_(class_count),
      counts_(static_cast<std::size_t>(class_count) * class_count, 0) {
  if (class_count < 2) {
    fail(ErrorKind::InvalidArgument, "confusion matrix needs >= 2 classes");
  }
}

std::uint64_t ConfusionAccumulator::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void ConfusionAccumulator::merge_from(const ConfusionAccumulator& other) {
  if (other.classes_ != classes_) {
    fail(ErrorKind::ConfigMismatch, "confusion matrices differ in class count");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t CurveAccumulator::positives() const {
  return std::accumulate(pos_.begin(), pos_.end(), std::uint64_t{0});
}

std::uint64_t CurveAccumulator::negatives() const {
  return std::accumulate(neg_.begin(), neg_.end(), std::uint64_t{0});
}

CurveAccumulator CurveAccumulator::reversed() const {
  CurveAccumulator out;
  for (int b = 0; b < kBins; ++b) {
    out.pos_[kBins - 1 - b] = neg_[b];
    out.neg_[kBins - 1 - b] = pos_[b];
  }
  return out;
}

void CurveAccumulator::merge_from(const CurveAccumulator& other) {
  for (int b = 0; b < kBins; ++b) {
    pos_[b] += other.pos_[b];
    neg_[b] += other.neg_[b];
  }
}

CalibrationAccumulator::CalibrationAccumulator(int bins)
    : count_(bins, 0), conf_sum_(bins, 0.0), correct_(bins, 0) {
  if (bins < 2) {
    fail(ErrorKind::InvalidArgument, "calibration needs >= 2 bins");
  }
}

void CalibrationAccumulator::add(double confidence, bool correct) {
  int b = static_cast<int>(confidence * bins());
  if (b >= bins()) b = bins() - 1;  // score 1.0 belongs to the last bin
  count_[b] += 1;
  conf_sum_[b] += confidence;
  correct_[b] += correct ? 1 : 0;
}

std::uint64_t CalibrationAccumulator::total() const {
  return std::accumulate(count_.begin(), count_.end(), std::uint64_t{0});
}

void CalibrationAccumulator::merge_from(const CalibrationAccumulator& other) {
  if (other.bins() != bins()) {
    fail(ErrorKind::ConfigMismatch, "calibration accumulators differ in bins");
  }
  for (std::size_t b = 0; b < count_.size(); ++b) {
    count_[b] += other.count_[b];
    conf_sum_[b] += other.conf_sum_[b];
    correct_[b] += other.correct_[b];
  }
}

AccumulatorSet::AccumulatorSet(AccumulatorConfig cfg)
    : config(cfg), confusion(cfg.class_count),
      calibration(cfg.calibration_bins) {}

void accumulate(const EvalUnit& unit, AccumulatorSet& acc) {
  if (unit.class_count() != acc.config.class_count) {
    fail(ErrorKind::ConfigMismatch,
         "evaluation unit has " + std::to_string(unit.class_count()) +
             " classes, accumulator expects " +
             std::to_string(acc.config.class_count));
  }
  const auto& gt = unit.gt().labels();
  const auto& pred = unit.pred().labels();
  const auto& conf = unit.conf().scores();
  const auto& valid = unit.validity().flags();
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::uint8_t g = gt[i];
    if (g == kIgnoreLabel) continue;
    const double score = conf[i];
    if (valid[i]) {
      const bool correct = pred[i] == g;
      acc.confusion.add(g, pred[i]);
      acc.calibration.add(score, correct);
      acc.correctness.add(score, correct);
      acc.ood.add(1.0 - score, false);
    } else {
      acc.ood.add(1.0 - score, true);
    }
  }
}

AccumulatorSet merge(const AccumulatorSet& a, const AccumulatorSet& b) {
  if (!(a.config == b.config)) {
    fail(ErrorKind::ConfigMismatch, "accumulator sets differ in configuration");
  }
  AccumulatorSet out = a;
  out.confusion.merge_from(b.confusion);
  out.calibration.merge_from(b.calibration);
  out.correctness.merge_from(b.correctness);
  out.ood.merge_from(b.ood);
  return out;
}

std::vector<RocPoint> roc_curve(const CurveAccumulator& curve) {
  const std::uint64_t total_pos = curve.positives();
  const std::uint64_t total_neg = curve.negatives();
  if (total_pos == 0 || total_neg == 0) {
    fail(ErrorKind::DegenerateCurve,
         total_pos == 0 ? "no positive samples" : "no negative samples");
  }
  std::vector<RocPoint> points;
  points.push_back({0.0, 0.0});
  std::uint64_t cum_pos = 0;
  std::uint64_t cum_neg = 0;
  for (int b = CurveAccumulator::kBins - 1; b >= 0; --b) {
    const std::uint64_t p = curve.pos_at(b);
    const std::uint64_t n = curve.neg_at(b);
    if (p == 0 && n == 0) continue;  // ties collapse into one step per level
    cum_pos += p;
    cum_neg += n;
    points.push_back({static_cast<double>(cum_neg) / total_neg,
                      static_cast<double>(cum_pos) / total_pos});
  }
  return points;
}

double miou(const ConfusionAccumulator& confusion) {
  if (confusion.total() == 0) {
    fail(ErrorKind::EmptyAccumulator, "confusion matrix holds no pixels");
  }
  const int c_n = confusion.class_count();
  double iou_sum = 0.0;
  int counted = 0;
  for (int c = 0; c < c_n; ++c) {
    std::uint64_t row = 0;
    std::uint64_t col = 0;
    for (int k = 0; k < c_n; ++k) {
      row += confusion.at(c, k);
      col += confusion.at(k, c);
    }
    const std::uint64_t diag = confusion.at(c, c);
    const std::uint64_t uni = row + col - diag;
    if (uni == 0) continue;  // class absent from both gt and prediction
    iou_sum += static_cast<double>(diag) / uni;
    counted += 1;
  }
  return 100.0 * iou_sum / counted;
}

double ece(const CalibrationAccumulator& calibration) {
  const std::uint64_t total = calibration.total();
  if (total == 0) {
    fail(ErrorKind::EmptyAccumulator, "calibration accumulator holds no pixels");
  }
  double sum = 0.0;
  for (int b = 0; b < calibration.bins(); ++b) {
    const std::uint64_t n = calibration.count_at(b);
    if (n == 0) continue;
    const double accuracy = static_cast<double>(calibration.correct_at(b)) / n;
    const double confidence = calibration.conf_sum_at(b) / n;
    sum += static_cast<double>(n) / total * std::abs(accuracy - confidence);
  }
  return 100.0 * sum;
}

double auroc(const CurveAccumulator& curve) {
  const std::uint64_t total_pos = curve.positives();
  const std::uint64_t total_neg = curve.negatives();
  if (total_pos == 0 || total_neg == 0) {
    fail(ErrorKind::DegenerateCurve,
         total_pos == 0 ? "no positive samples" : "no negative samples");
  }
  // Rank statistic with ties counted half.  Equals the trapezoidal area
  // under the tie-collapsed curve, but a fully separated sample stays in
  // integer arithmetic and lands on 100 exactly.
  std::uint64_t neg_below = 0;
  double u = 0.0;
  for (int b = 0; b < CurveAccumulator::kBins; ++b) {
    const std::uint64_t p = curve.pos_at(b);
    const std::uint64_t n = curve.neg_at(b);
    if (p > 0) {
      u += static_cast<double>(p) * neg_below + 0.5 * p * n;
    }
    neg_below += n;
  }
  return 100.0 * u /
         (static_cast<double>(total_pos) * static_cast<double>(total_neg));
}

double fpr_at_tpr(const CurveAccumulator& curve, double target_tpr) {
  const auto points = roc_curve(curve);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].tpr >= target_tpr) {
      if (i == 0) return 100.0 * points[0].fpr;
      const auto& lo = points[i - 1];
      const auto& hi = points[i];
      // First crossing lies on a rising segment; interpolate to the target.
      const double t = (target_tpr - lo.tpr) / (hi.tpr - lo.tpr);
      return 100.0 * (lo.fpr + t * (hi.fpr - lo.fpr));
    }
  }
  return 100.0;  // unreachable: the sweep always ends at tpr = 1
}

double average_precision(const CurveAccumulator& curve) {
  const std::uint64_t total_pos = curve.positives();
  if (total_pos == 0) {
    fail(ErrorKind::DegenerateCurve, "no positive samples");
  }
  // Positives weighted by the precision at their threshold, normalised at
  // the end.  Equivalent to summing recall increments times precision, and
  // a fully separated sample lands on 100 exactly.
  std::uint64_t cum_pos = 0;
  std::uint64_t cum_neg = 0;
  double weighted = 0.0;
  for (int b = CurveAccumulator::kBins - 1; b >= 0; --b) {
    const std::uint64_t p = curve.pos_at(b);
    const std::uint64_t n = curve.neg_at(b);
    if (p == 0 && n == 0) continue;
    cum_pos += p;
    cum_neg += n;
    if (p == 0) continue;
    const double precision =
        static_cast<double>(cum_pos) / (cum_pos + cum_neg);
    weighted += static_cast<double>(p) * precision;
  }
  return 100.0 * weighted / total_pos;
}

namespace {

MetricValue guarded(DegeneratePolicy policy, const char* name,
                    double (*fn)(const CurveAccumulator&),
                    const CurveAccumulator& curve) {
  try {
    return MetricValue::of(fn(curve));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateCurve) throw;
    switch (policy) {
      case DegeneratePolicy::Error:
        return MetricValue::degenerate(std::string(name) + ": " + e.what());
      case DegeneratePolicy::Zero:
        return MetricValue::of(0.0);
      case DegeneratePolicy::One:
        return MetricValue::of(100.0);
    }
    return MetricValue::degenerate(name);
  }
}

double fpr95(const CurveAccumulator& curve) { return fpr_at_tpr(curve, 0.95); }

}  // namespace

SemanticRecord semantic_metrics(const AccumulatorSet& acc,
                                DegeneratePolicy policy) {
  if (acc.confusion.total() == 0) {
    fail(ErrorKind::EmptyAccumulator,
         "no valid pixels were accumulated for semantic metrics");
  }
  SemanticRecord record;
  record.miou = MetricValue::of(miou(acc.confusion));
  record.ece = MetricValue::of(ece(acc.calibration));
  record.auroc = guarded(policy, "auroc", auroc, acc.correctness);
  record.fpr95 = guarded(policy, "fpr95", fpr95, acc.correctness);
  record.aupr_success =
      guarded(policy, "aupr_success", average_precision, acc.correctness);
  const CurveAccumulator error_curve = acc.correctness.reversed();
  record.aupr_error =
      guarded(policy, "aupr_error", average_precision, error_curve);
  return record;
}

OodRecord ood_metrics(const AccumulatorSet& acc, DegeneratePolicy policy) {
  if (acc.ood.positives() + acc.ood.negatives() == 0) {
    fail(ErrorKind::EmptyAccumulator,
         "no pixels were accumulated for OOD metrics");
  }
  OodRecord record;
  record.auprc = guarded(policy, "auprc", average_precision, acc.ood);
  record.auroc = guarded(policy, "auroc", auroc, acc.ood);
  record.fpr95 = guarded(policy, "fpr95", fpr95, acc.ood);
  return record;
}

}  // namespace bravo
