#include "bravo/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace bravo {

namespace {

// Half-pixel-center source coordinate for one destination index, clamped to
// the valid sample range.
struct AxisTap {
  int lo;
  int hi;
  double frac;
};

std::vector<AxisTap> axis_taps(int src, int dst) {
  std::vector<AxisTap> taps(dst);
  for (int d = 0; d < dst; ++d) {
    // Rational form of (d + 0.5) * src/dst - 0.5; integer source positions
    // come out exact, so whole-factor upsampling copies the samples.
    double s = static_cast<double>((2LL * d + 1) * src - dst) /
               (2.0 * static_cast<double>(dst));
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(s);
    taps[d] = {lo, std::min(lo + 1, src - 1), s - lo};
  }
  return taps;
}

inline double lerp_tap(const float* row, const AxisTap& t) {
  if (t.frac == 0.0) return row[t.lo];
  return (1.0 - t.frac) * row[t.lo] + t.frac * row[t.hi];
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LogitsTensor linear_decode(const LogitsTensor& features,
                           const std::vector<float>& weights,
                           const std::vector<float>& bias) {
  const int c_out = static_cast<int>(bias.size());
  if (c_out == 0) {
    fail(ErrorKind::ShapeMismatch, "linear decoder needs at least one class");
  }
  if (weights.size() % bias.size() != 0) {
    fail(ErrorKind::ShapeMismatch,
         "weight count " + std::to_string(weights.size()) +
             " is not a multiple of the class count " + std::to_string(c_out));
  }
  const int e = static_cast<int>(weights.size() / bias.size());
  if (e != features.channels()) {
    fail(ErrorKind::ShapeMismatch,
         "decoder expects " + std::to_string(e) + " feature channels, tensor has " +
             std::to_string(features.channels()));
  }
  const int h = features.height();
  const int w = features.width();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<float> out(static_cast<std::size_t>(c_out) * plane);
  const float* f = features.data().data();
  for (int c = 0; c < c_out; ++c) {
    const float* wrow = weights.data() + static_cast<std::size_t>(c) * e;
    float* dst = out.data() + static_cast<std::size_t>(c) * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      double acc = bias[c];
      for (int k = 0; k < e; ++k) {
        acc += static_cast<double>(wrow[k]) * f[static_cast<std::size_t>(k) * plane + p];
      }
      dst[p] = static_cast<float>(acc);
    }
  }
  return LogitsTensor(TensorKind::SegLogits, c_out, h, w, std::move(out));
}

LogitsTensor bilinear_upsample(const LogitsTensor& t, int target_h,
                               int target_w) {
  if (target_h < t.height() || target_w < t.width()) {
    fail(ErrorKind::ShapeMismatch,
         "upsample target " + std::to_string(target_h) + "x" +
             std::to_string(target_w) + " is smaller than source " +
             std::to_string(t.height()) + "x" + std::to_string(t.width()));
  }
  const auto ys = axis_taps(t.height(), target_h);
  const auto xs = axis_taps(t.width(), target_w);
  const std::size_t src_plane =
      static_cast<std::size_t>(t.height()) * t.width();
  const std::size_t dst_plane =
      static_cast<std::size_t>(target_h) * target_w;
  std::vector<float> out(static_cast<std::size_t>(t.channels()) * dst_plane);
  for (int c = 0; c < t.channels(); ++c) {
    const float* src = t.data().data() + static_cast<std::size_t>(c) * src_plane;
    float* dst = out.data() + static_cast<std::size_t>(c) * dst_plane;
    for (int y = 0; y < target_h; ++y) {
      const AxisTap& ty = ys[y];
      const float* row_lo = src + static_cast<std::size_t>(ty.lo) * t.width();
      const float* row_hi = src + static_cast<std::size_t>(ty.hi) * t.width();
      float* drow = dst + static_cast<std::size_t>(y) * target_w;
      if (ty.frac == 0.0) {
        for (int x = 0; x < target_w; ++x) {
          const AxisTap& tx = xs[x];
          // Exact copy when both axes land on a sample.
          drow[x] = tx.frac == 0.0 ? row_lo[tx.lo]
                                   : static_cast<float>(lerp_tap(row_lo, tx));
        }
      } else {
        for (int x = 0; x < target_w; ++x) {
          const AxisTap& tx = xs[x];
          drow[x] = static_cast<float>((1.0 - ty.frac) * lerp_tap(row_lo, tx) +
                                       ty.frac * lerp_tap(row_hi, tx));
        }
      }
    }
  }
  return LogitsTensor(t.kind(), t.channels(), target_h, target_w,
                      std::move(out), t.rank());
}

FusedPrediction linear_fuse(const LogitsTensor& seg_logits, int target_h,
                            int target_w, const ClassCatalog& catalog) {
  if (seg_logits.channels() != catalog.count()) {
    fail(ErrorKind::ShapeMismatch,
         "segmentation logits carry " + std::to_string(seg_logits.channels()) +
             " channels, catalog expects " + std::to_string(catalog.count()));
  }
  const LogitsTensor up = bilinear_upsample(seg_logits, target_h, target_w);
  const int c_n = up.channels();
  const std::size_t plane = static_cast<std::size_t>(target_h) * target_w;
  std::vector<std::uint8_t> labels(plane);
  std::vector<double> conf(plane);
  const float* data = up.data().data();
  for (std::size_t p = 0; p < plane; ++p) {
    int best = 0;
    double best_logit = data[p];
    for (int c = 1; c < c_n; ++c) {
      const double l = data[static_cast<std::size_t>(c) * plane + p];
      if (l > best_logit) {
        best_logit = l;
        best = c;
      }
    }
    // Max-subtracted softmax; the winning score is 1 / sum(exp(l - max)).
    double denom = 0.0;
    for (int c = 0; c < c_n; ++c) {
      denom += std::exp(data[static_cast<std::size_t>(c) * plane + p] - best_logit);
    }
    labels[p] = static_cast<std::uint8_t>(best);
    conf[p] = 1.0 / denom;
  }
  return FusedPrediction{
      ClassMap(target_h, target_w, std::move(labels), catalog),
      ConfidenceMap(target_h, target_w, std::move(conf))};
}

FusedPrediction mask2former_fuse(const LogitsTensor& mask_logits,
                                 const LogitsTensor& class_logits,
                                 int target_h, int target_w,
                                 const ClassCatalog& catalog) {
  const int n_masks = mask_logits.channels();
  if (class_logits.channels() != n_masks) {
    fail(ErrorKind::ShapeMismatch,
         "class logits carry " + std::to_string(class_logits.channels()) +
             " rows for " + std::to_string(n_masks) + " masks");
  }
  if (class_logits.width() != 1) {
    fail(ErrorKind::ShapeMismatch, "class logits must be an N x (C+1) matrix");
  }
  const int c_n = class_logits.height() - 1;  // trailing entry is no-object
  if (c_n != catalog.count()) {
    fail(ErrorKind::ShapeMismatch,
         "class logits carry " + std::to_string(c_n) +
             " classes, catalog expects " + std::to_string(catalog.count()));
  }
  if (target_h < mask_logits.height() || target_w < mask_logits.width()) {
    fail(ErrorKind::ShapeMismatch, "fusion target smaller than mask logits");
  }

  // Class scores per mask: softmax over C+1 entries, no-object dropped.
  std::vector<double> class_scores(static_cast<std::size_t>(n_masks) * c_n);
  for (int n = 0; n < n_masks; ++n) {
    double max_logit = class_logits.at(n, 0, 0);
    for (int k = 1; k <= c_n; ++k) {
      max_logit = std::max(max_logit, static_cast<double>(class_logits.at(n, k, 0)));
    }
    double denom = 0.0;
    for (int k = 0; k <= c_n; ++k) {
      denom += std::exp(class_logits.at(n, k, 0) - max_logit);
    }
    for (int c = 0; c < c_n; ++c) {
      class_scores[static_cast<std::size_t>(n) * c_n + c] =
          std::exp(class_logits.at(n, c, 0) - max_logit) / denom;
    }
  }

  // Stream output rows so the upsampled mask planes are never materialized.
  const auto ys = axis_taps(mask_logits.height(), target_h);
  const auto xs = axis_taps(mask_logits.width(), target_w);
  const std::size_t src_plane =
      static_cast<std::size_t>(mask_logits.height()) * mask_logits.width();
  const std::size_t plane = static_cast<std::size_t>(target_h) * target_w;
  std::vector<std::uint8_t> labels(plane);
  std::vector<double> conf(plane);
  std::vector<double> acc(static_cast<std::size_t>(target_w) * c_n);
  for (int y = 0; y < target_h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const AxisTap& ty = ys[y];
    for (int n = 0; n < n_masks; ++n) {
      const float* src = mask_logits.data().data() + static_cast<std::size_t>(n) * src_plane;
      const float* row_lo = src + static_cast<std::size_t>(ty.lo) * mask_logits.width();
      const float* row_hi = src + static_cast<std::size_t>(ty.hi) * mask_logits.width();
      const double* pc = class_scores.data() + static_cast<std::size_t>(n) * c_n;
      for (int x = 0; x < target_w; ++x) {
        const AxisTap& tx = xs[x];
        const double logit =
            ty.frac == 0.0 ? lerp_tap(row_lo, tx)
                           : (1.0 - ty.frac) * lerp_tap(row_lo, tx) +
                                 ty.frac * lerp_tap(row_hi, tx);
        const double mask_score = sigmoid(logit);
        double* cell = acc.data() + static_cast<std::size_t>(x) * c_n;
        for (int c = 0; c < c_n; ++c) cell[c] += mask_score * pc[c];
      }
    }
    for (int x = 0; x < target_w; ++x) {
      const double* cell = acc.data() + static_cast<std::size_t>(x) * c_n;
      int best = 0;
      double best_score = cell[0];
      for (int c = 1; c < c_n; ++c) {
        if (cell[c] > best_score) {
          best_score = cell[c];
          best = c;
        }
      }
      const std::size_t p = static_cast<std::size_t>(y) * target_w + x;
      labels[p] = static_cast<std::uint8_t>(best);
      conf[p] = std::min(best_score, 1.0);
    }
  }
  return FusedPrediction{
      ClassMap(target_h, target_w, std::move(labels), catalog),
      ConfidenceMap(target_h, target_w, std::move(conf))};
}

ByteRaster quantize_confidence(const ConfidenceMap& conf) {
  ByteRaster raster;
  raster.height = conf.height();
  raster.width = conf.width();
  raster.values.resize(conf.pixels());
  const auto& scores = conf.scores();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    raster.values[i] = static_cast<std::uint8_t>(quantize255(scores[i]));
  }
  return raster;
}

ConfidenceMap dequantize_confidence(const ByteRaster& raster) {
  std::vector<double> scores(raster.values.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = raster.values[i] / 255.0;
  }
  return ConfidenceMap(raster.height, raster.width, std::move(scores));
}

}  // namespace bravo
