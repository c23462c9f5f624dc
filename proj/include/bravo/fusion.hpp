#pragma once

#include <vector>

#include "bravo/types.hpp"

namespace bravo {

/// Per-pixel class decision plus the confidence attached to it.
struct FusedPrediction {
  ClassMap classes;
  ConfidenceMap confidence;
};

/// Applies a per-patch linear classifier: L[c,y,x] = bias[c] + sum_e
/// weights[c,e] * features[e,y,x]. `weights` is row-major C x E with
/// C = bias.size().
LogitsTensor linear_decode(const LogitsTensor& features,
                           const std::vector<float>& weights,
                           const std::vector<float>& bias);

/// Separable bilinear interpolation with half-pixel centers: the source
/// coordinate of destination index d is (d + 0.5) * src/dst - 0.5, clamped
/// to [0, src-1]. Upscaling only.
LogitsTensor bilinear_upsample(const LogitsTensor& t, int target_h,
                               int target_w);

/// Linear-decoder inference: upsample the segmentation logits to the target
/// resolution, then per pixel take the softmax over classes; the class is the
/// argmax (ties to the lowest id) and the confidence its softmax score.
FusedPrediction linear_fuse(const LogitsTensor& seg_logits, int target_h,
                            int target_w, const ClassCatalog& catalog);

/// Mask-classification inference: upsample the N mask logit planes, turn
/// them into mask scores with a sigmoid, convert each class-logit row to
/// class scores with a softmax that drops the trailing no-object entry, and
/// combine: P[c,y,x] = sum_n mask_score[n,y,x] * class_score[n,c].
/// The class is the argmax of P; the confidence is max P clamped to 1 (the
/// combined scores are not normalized over classes).
/// `class_logits` is N x (C+1) x 1 with N = mask_logits.channels().
FusedPrediction mask2former_fuse(const LogitsTensor& mask_logits,
                                 const LogitsTensor& class_logits,
                                 int target_h, int target_w,
                                 const ClassCatalog& catalog);

/// 8-bit storage quantization: level = round(score * 255), halves away from
/// zero. Exact inverse on the 256-level grid is level / 255.
ByteRaster quantize_confidence(const ConfidenceMap& conf);
ConfidenceMap dequantize_confidence(const ByteRaster& raster);

}  // namespace bravo
