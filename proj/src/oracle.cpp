#include "bravo/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "bravo/errors.hpp"

namespace bravo {

ExactCurves exact_curves(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& positives) {
  if (scores.size() != positives.size())
    fail(ErrorKind::DimensionMismatch,
         "scores and labels differ in length: " + std::to_string(scores.size()) +
             " vs " + std::to_string(positives.size()));
  std::size_t total_pos = 0;
  for (std::uint8_t p : positives) total_pos += p ? 1 : 0;
  const std::size_t total_neg = scores.size() - total_pos;
  if (total_pos == 0 || total_neg == 0)
    fail(ErrorKind::DegenerateCurve,
         "curve needs at least one positive and one negative sample");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Tie groups in ascending score order; each appears once below and once
  // (reversed) in the threshold sweep.
  struct Group {
    std::size_t pos = 0;
    std::size_t neg = 0;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < order.size();) {
    Group g;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      positives[order[j]] ? ++g.pos : ++g.neg;
      ++j;
    }
    groups.push_back(g);
    i = j;
  }

  double u = 0.0;
  std::size_t neg_below = 0;
  for (const Group& g : groups) {
    u += static_cast<double>(g.pos) * static_cast<double>(neg_below) +
         0.5 * static_cast<double>(g.pos) * static_cast<double>(g.neg);
    neg_below += g.neg;
  }

  ExactCurves out;
  out.auroc = 100.0 * u /
              (static_cast<double>(total_pos) * static_cast<double>(total_neg));

  struct Vertex {
    double fpr = 0.0;
    double tpr = 0.0;
  };
  std::vector<Vertex> verts{{0.0, 0.0}};
  double ap = 0.0;
  double recall_prev = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    tp += it->pos;
    fp += it->neg;
    const double recall = static_cast<double>(tp) / total_pos;
    verts.push_back({static_cast<double>(fp) / total_neg, recall});
    ap += (recall - recall_prev) *
          (static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall_prev = recall;
  }
  out.ap = 100.0 * ap;

  const double target = 0.95;
  std::size_t k = 1;
  while (verts[k].tpr < target) ++k;
  const Vertex& lo = verts[k - 1];
  const Vertex& hi = verts[k];
  out.fpr95 =
      100.0 * (lo.fpr + (target - lo.tpr) * (hi.fpr - lo.fpr) / (hi.tpr - lo.tpr));
  return out;
}

double brute_miou(const ClassMap& gt, const ClassMap& pred,
                  const ValidityMask& validity, const ClassCatalog& catalog) {
  if (gt.height() != pred.height() || gt.width() != pred.width() ||
      gt.height() != validity.height() || gt.width() != validity.width())
    fail(ErrorKind::DimensionMismatch, "maps differ in size");

  const int classes = catalog.count();
  std::vector<std::set<std::size_t>> gt_pixels(classes);
  std::vector<std::set<std::size_t>> pred_pixels(classes);
  std::size_t included = 0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (gt.at(y, x) == kIgnoreLabel || !validity.at(y, x)) continue;
      const std::size_t index =
          static_cast<std::size_t>(y) * gt.width() + x;
      gt_pixels[gt.at(y, x)].insert(index);
      pred_pixels[pred.at(y, x)].insert(index);
      ++included;
    }
  }
  if (included == 0)
    fail(ErrorKind::EmptyAccumulator, "no pixels left after masking");

  double iou_sum = 0.0;
  int counted = 0;
  for (int c = 0; c < classes; ++c) {
    std::vector<std::size_t> inter;
    std::set_intersection(gt_pixels[c].begin(), gt_pixels[c].end(),
                          pred_pixels[c].begin(), pred_pixels[c].end(),
                          std::back_inserter(inter));
    const std::size_t uni =
        gt_pixels[c].size() + pred_pixels[c].size() - inter.size();
    if (uni == 0) continue;
    iou_sum += static_cast<double>(inter.size()) / static_cast<double>(uni);
    ++counted;
  }
  return 100.0 * iou_sum / counted;
}

double reference_ece(const std::vector<double>& confidences,
                     const std::vector<std::uint8_t>& correct, int bins) {
  if (confidences.size() != correct.size())
    fail(ErrorKind::DimensionMismatch,
         "confidences and correctness flags differ in length");
  if (bins < 2)
    fail(ErrorKind::InvalidArgument, "calibration needs at least 2 bins");
  if (confidences.empty())
    fail(ErrorKind::EmptyAccumulator, "no samples to calibrate");

  std::vector<std::size_t> count(bins, 0);
  std::vector<std::size_t> hits(bins, 0);
  std::vector<double> conf_sum(bins, 0.0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0))
      fail(ErrorKind::OutOfRangeScore, "confidence outside [0,1]");
    const int b = std::min(bins - 1, static_cast<int>(c * bins));
    ++count[b];
    hits[b] += correct[i] ? 1 : 0;
    conf_sum[b] += c;
  }
  double ece = 0.0;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const double accuracy = static_cast<double>(hits[b]) / count[b];
    const double mean_conf = conf_sum[b] / count[b];
    ece += (static_cast<double>(count[b]) / confidences.size()) *
           std::abs(accuracy - mean_conf);
  }
  return 100.0 * ece;
}

Fixture synth_fixture(const FixtureSpec& spec, std::uint64_t seed) {
  auto probability = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
      fail(ErrorKind::InvalidArgument,
           std::string(what) + " " + std::to_string(p) + " outside [0,1]");
  };
  probability(spec.error_rate, "error rate");
  probability(spec.invalid_fraction, "invalid fraction");
  probability(spec.valid_conf_lo, "confidence bound");
  probability(spec.valid_conf_hi, "confidence bound");
  probability(spec.invalid_conf_lo, "confidence bound");
  probability(spec.invalid_conf_hi, "confidence bound");
  if (spec.valid_conf_lo > spec.valid_conf_hi ||
      spec.invalid_conf_lo > spec.invalid_conf_hi)
    fail(ErrorKind::InvalidArgument, "confidence range is inverted");
  if (spec.height <= 0 || spec.width <= 0)
    fail(ErrorKind::InvalidArgument, "fixture extents must be positive");
  if (spec.class_count < 2 || spec.class_count > 255)
    fail(ErrorKind::InvalidArgument, "class count outside 2..255");
  if (spec.profile == CalibrationProfile::Calibrated && spec.error_rate > 0.5)
    fail(ErrorKind::InvalidArgument,
         "calibrated profile needs error rate <= 0.5 so confidences stay in "
         "[0,1]");

  Rng rng(seed);
  const std::size_t pixels =
      static_cast<std::size_t>(spec.height) * spec.width;
  std::vector<std::uint8_t> gt(pixels);
  std::vector<std::uint8_t> pred(pixels);
  std::vector<double> conf(pixels);
  std::vector<std::uint8_t> valid(pixels);

  for (std::size_t i = 0; i < pixels; ++i) {
    const int label = rng.below(spec.class_count);
    gt[i] = static_cast<std::uint8_t>(label);
    const bool is_valid = !rng.bernoulli(spec.invalid_fraction);
    valid[i] = is_valid ? 1 : 0;

    double c;
    bool correct;
    if (!is_valid) {
      c = rng.uniform_in(spec.invalid_conf_lo, spec.invalid_conf_hi);
      correct = rng.bernoulli(1.0 - spec.error_rate);
    } else if (spec.profile == CalibrationProfile::Calibrated) {
      c = rng.uniform_in(1.0 - 2.0 * spec.error_rate, 1.0);
      correct = rng.bernoulli(c);
    } else {
      c = rng.uniform_in(spec.valid_conf_lo, spec.valid_conf_hi);
      correct = rng.bernoulli(1.0 - spec.error_rate);
    }
    conf[i] = c;
    pred[i] = correct ? gt[i]
                      : static_cast<std::uint8_t>(
                            (label + 1 + rng.below(spec.class_count - 1)) %
                            spec.class_count);
  }

  ClassCatalog catalog(spec.class_count);
  return Fixture{spec,
                 seed,
                 ClassMap(spec.height, spec.width, std::move(gt), catalog),
                 ClassMap(spec.height, spec.width, std::move(pred), catalog),
                 ConfidenceMap(spec.height, spec.width, std::move(conf)),
                 ValidityMask(spec.height, spec.width, std::move(valid))};
}

}  // namespace bravo
