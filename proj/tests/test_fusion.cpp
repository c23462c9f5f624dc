#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "bravo/fusion.hpp"
#include "bravo/oracle.hpp"

using namespace bravo;

namespace {

// Plain per-pixel reimplementation of the mask-classification combine:
// materialize the upsampled masks, then loop over masks, classes and pixels
// with a direct softmax. Slow but obviously right for small logits.
struct RefFusion {
  std::vector<std::uint8_t> labels;
  std::vector<double> conf;
  std::vector<double> class_sums;  // per-pixel sum over classes
};

RefFusion ref_mask2former(const LogitsTensor& mask_logits,
                          const LogitsTensor& class_logits, int target_h,
                          int target_w) {
  const int n_masks = mask_logits.channels();
  const int c_n = class_logits.height() - 1;
  const LogitsTensor up = bilinear_upsample(mask_logits, target_h, target_w);

  std::vector<std::vector<double>> class_scores(n_masks,
                                                std::vector<double>(c_n));
  for (int n = 0; n < n_masks; ++n) {
    double denom = 0.0;
    for (int k = 0; k <= c_n; ++k) {
      denom += std::exp(static_cast<double>(class_logits.at(n, k, 0)));
    }
    for (int c = 0; c < c_n; ++c) {
      class_scores[n][c] =
          std::exp(static_cast<double>(class_logits.at(n, c, 0))) / denom;
    }
  }

  RefFusion out;
  for (int y = 0; y < target_h; ++y) {
    for (int x = 0; x < target_w; ++x) {
      std::vector<double> combined(c_n, 0.0);
      for (int n = 0; n < n_masks; ++n) {
        const double m = 1.0 / (1.0 + std::exp(-static_cast<double>(up.at(n, y, x))));
        for (int c = 0; c < c_n; ++c) combined[c] += m * class_scores[n][c];
      }
      int best = 0;
      double total = combined[0];
      for (int c = 1; c < c_n; ++c) {
        total += combined[c];
        if (combined[c] > combined[best]) best = c;
      }
      out.labels.push_back(static_cast<std::uint8_t>(best));
      out.conf.push_back(std::min(combined[best], 1.0));
      out.class_sums.push_back(total);
    }
  }
  return out;
}

LogitsTensor random_tensor(Rng& rng, TensorKind kind, int channels, int height,
                           int width, double lo, double hi, int rank = 3) {
  std::vector<float> data(static_cast<std::size_t>(channels) * height * width);
  for (float& v : data) v = static_cast<float>(rng.uniform_in(lo, hi));
  return LogitsTensor(kind, channels, height, width, std::move(data), rank);
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("linear decoder applies weights and bias per pixel") {
  LogitsTensor features(TensorKind::Features, 2, 1, 1, {3.0f, 4.0f});
  LogitsTensor out = linear_decode(features, {1.0f, 2.0f}, {0.5f});
  CHECK(out.channels() == 1);
  CHECK(out.height() == 1);
  CHECK(out.at(0, 0, 0) == 11.5f);
}

TEST_CASE("identity weights reproduce the features bit for bit") {
  Rng rng(11);
  LogitsTensor features =
      random_tensor(rng, TensorKind::Features, 3, 4, 5, -6.0, 6.0);
  std::vector<float> weights(9, 0.0f);
  for (int i = 0; i < 3; ++i) weights[i * 3 + i] = 1.0f;
  LogitsTensor out = linear_decode(features, weights, {0.0f, 0.0f, 0.0f});
  CHECK(out.data() == features.data());
}

TEST_CASE("linear decoder rejects mismatched shapes") {
  LogitsTensor features(TensorKind::Features, 2, 1, 1, {1.0f, 2.0f});
  try {
    linear_decode(features, {1.0f, 2.0f, 3.0f}, {0.0f, 0.0f});
    FAIL("weight count not a multiple of classes accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeMismatch);
  }
  try {
    linear_decode(features, {1.0f, 2.0f, 3.0f}, {0.0f});
    FAIL("feature count mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeMismatch);
  }
}

TEST_CASE("upsampling a constant plane stays constant") {
  LogitsTensor t(TensorKind::MaskLogits, 1, 1, 1, {3.7f});
  LogitsTensor up = bilinear_upsample(t, 4, 4);
  for (float v : up.data()) CHECK(v == 3.7f);
}

TEST_CASE("upsampling interpolates half-pixel centers") {
  LogitsTensor t(TensorKind::SegLogits, 1, 1, 2, {0.0f, 1.0f});
  LogitsTensor up = bilinear_upsample(t, 1, 4);
  CHECK(up.data() == std::vector<float>{0.0f, 0.25f, 0.75f, 1.0f});
}

TEST_CASE("upsampling to the same size is the identity") {
  LogitsTensor t(TensorKind::SegLogits, 1, 2, 3,
                 {-0.0f, 1.5f, -2.0f, 0.0f, 7.25f, -0.25f});
  LogitsTensor up = bilinear_upsample(t, 2, 3);
  CHECK(std::memcmp(up.data().data(), t.data().data(),
                    t.data().size() * sizeof(float)) == 0);
  CHECK(std::signbit(up.at(0, 0, 0)));
}

TEST_CASE("whole-factor upsampling reproduces the source samples") {
  Rng rng(12);
  LogitsTensor t = random_tensor(rng, TensorKind::SegLogits, 2, 4, 6, -8.0, 8.0);
  LogitsTensor up = bilinear_upsample(t, 12, 18);
  for (int c = 0; c < 2; ++c) {
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 6; ++x) {
        CHECK(up.at(c, 3 * y + 1, 3 * x + 1) == t.at(c, y, x));
      }
    }
  }
}

TEST_CASE("upsampling refuses to shrink") {
  LogitsTensor t(TensorKind::SegLogits, 1, 2, 2, {0.0f, 1.0f, 2.0f, 3.0f});
  try {
    bilinear_upsample(t, 1, 4);
    FAIL("downscale accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeMismatch);
  }
}

TEST_CASE("two-class softmax fusion scores the winning logit") {
  ClassCatalog catalog(2);
  LogitsTensor seg(TensorKind::SegLogits, 2, 1, 1, {2.0f, 0.0f});
  FusedPrediction fused = linear_fuse(seg, 1, 1, catalog);
  CHECK(fused.classes.at(0, 0) == 0);
  CHECK(fused.confidence.at(0, 0) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
  CHECK(fused.confidence.at(0, 0) == doctest::Approx(0.8808).epsilon(1e-4));
}

TEST_CASE("equal logits tie to the lowest class id") {
  ClassCatalog catalog(4);
  LogitsTensor seg(TensorKind::SegLogits, 4, 1, 1, {1.0f, 1.0f, 1.0f, 1.0f});
  FusedPrediction fused = linear_fuse(seg, 1, 1, catalog);
  CHECK(fused.classes.at(0, 0) == 0);
  CHECK(fused.confidence.at(0, 0) == 0.25);
}

TEST_CASE("two-class softmax reduces to a sigmoid of the logit gap") {
  ClassCatalog catalog(2);
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const float a = static_cast<float>(rng.uniform_in(-5.0, 5.0));
    const float b = static_cast<float>(rng.uniform_in(-5.0, 5.0));
    if (a == b) continue;
    LogitsTensor seg(TensorKind::SegLogits, 2, 1, 1, {a, b});
    FusedPrediction fused = linear_fuse(seg, 1, 1, catalog);
    const double gap = std::abs(static_cast<double>(a) - b);
    CHECK(fused.classes.at(0, 0) == (b > a ? 1 : 0));
    CHECK(fused.confidence.at(0, 0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-gap))).epsilon(1e-12));
  }
}

TEST_CASE("softmax fusion is invariant under logit shifts") {
  ClassCatalog catalog(5);
  Rng rng(14);
  LogitsTensor seg = random_tensor(rng, TensorKind::SegLogits, 5, 8, 8, -4.0, 4.0);
  std::vector<float> shifted = seg.data();
  for (float& v : shifted) v += 10.0f;
  LogitsTensor seg_shifted(TensorKind::SegLogits, 5, 8, 8, std::move(shifted));

  FusedPrediction a = linear_fuse(seg, 16, 16, catalog);
  FusedPrediction b = linear_fuse(seg_shifted, 16, 16, catalog);
  CHECK(a.classes.labels() == b.classes.labels());
  for (std::size_t i = 0; i < a.confidence.scores().size(); ++i) {
    CHECK(a.confidence.scores()[i] ==
          doctest::Approx(b.confidence.scores()[i]).epsilon(1e-6));
  }
}

TEST_CASE("uniform single-mask fusion yields confidence one sixth") {
  ClassCatalog catalog(2);
  LogitsTensor mask(TensorKind::MaskLogits, 1, 2, 2, {0.0f, 0.0f, 0.0f, 0.0f});
  LogitsTensor cls(TensorKind::ClassLogits, 1, 3, 1, {0.0f, 0.0f, 0.0f}, 2);
  FusedPrediction fused = mask2former_fuse(mask, cls, 2, 2, catalog);
  for (std::uint8_t label : fused.classes.labels()) CHECK(label == 0);
  for (double c : fused.confidence.scores()) CHECK(c == 1.0 / 6.0);
}

TEST_CASE("a saturated mask passes its class score through") {
  ClassCatalog catalog(2);
  LogitsTensor mask(TensorKind::MaskLogits, 1, 1, 1, {100.0f});
  LogitsTensor cls(TensorKind::ClassLogits, 1, 3, 1, {2.0f, 0.0f, 0.0f}, 2);
  FusedPrediction fused = mask2former_fuse(mask, cls, 1, 1, catalog);
  CHECK(fused.classes.at(0, 0) == 0);
  CHECK(fused.confidence.at(0, 0) ==
        doctest::Approx(1.0 / (1.0 + 2.0 * std::exp(-2.0))).epsilon(1e-12));
  CHECK(fused.confidence.at(0, 0) == doctest::Approx(0.7869).epsilon(1e-3));
}

TEST_CASE("overlapping masks clamp the combined score at one") {
  ClassCatalog catalog(2);
  LogitsTensor mask(TensorKind::MaskLogits, 2, 1, 1, {100.0f, 100.0f});
  LogitsTensor cls(TensorKind::ClassLogits, 2, 3, 1,
                   {0.0f, 20.0f, 0.0f, 0.0f, 20.0f, 0.0f}, 2);
  FusedPrediction fused = mask2former_fuse(mask, cls, 1, 1, catalog);
  CHECK(fused.classes.at(0, 0) == 1);
  CHECK(fused.confidence.at(0, 0) == 1.0);
}

TEST_CASE("mask fusion matches the triple-loop reference") {
  Rng rng(15);
  for (int i = 0; i < 10; ++i) {
    const int n_masks = 1 + rng.below(8);
    const int c_n = 2 + rng.below(4);
    const int src_h = 4 + rng.below(13);
    const int src_w = 4 + rng.below(13);
    const int target_h = src_h + rng.below(3 * src_h);
    const int target_w = src_w + rng.below(3 * src_w);
    ClassCatalog catalog(c_n);

    LogitsTensor mask = random_tensor(rng, TensorKind::MaskLogits, n_masks,
                                      src_h, src_w, -6.0, 6.0);
    LogitsTensor cls = random_tensor(rng, TensorKind::ClassLogits, n_masks,
                                     c_n + 1, 1, -4.0, 4.0, 2);

    FusedPrediction fused =
        mask2former_fuse(mask, cls, target_h, target_w, catalog);
    RefFusion ref = ref_mask2former(mask, cls, target_h, target_w);

    REQUIRE(fused.classes.labels().size() == ref.labels.size());
    for (std::size_t p = 0; p < ref.labels.size(); ++p) {
      CHECK(fused.classes.labels()[p] == ref.labels[p]);
      CHECK(fused.confidence.scores()[p] ==
            doctest::Approx(ref.conf[p]).epsilon(1e-5));
      // Combined class scores are nonnegative and bounded by the mask count.
      CHECK(ref.conf[p] >= 0.0);
      CHECK(ref.class_sums[p] <= n_masks + 1e-9);
    }
  }
}

TEST_CASE("a single mask never needs the clamp") {
  Rng rng(16);
  ClassCatalog catalog(3);
  LogitsTensor mask = random_tensor(rng, TensorKind::MaskLogits, 1, 6, 6, -6.0, 6.0);
  LogitsTensor cls = random_tensor(rng, TensorKind::ClassLogits, 1, 4, 1, -4.0, 4.0, 2);
  FusedPrediction fused = mask2former_fuse(mask, cls, 12, 12, catalog);
  for (double c : fused.confidence.scores()) {
    CHECK(c >= 0.0);
    CHECK(c < 1.0);  // sigmoid times a softmax entry stays below one
  }
}

TEST_CASE("confidence quantization round-trips every level") {
  ConfidenceMap conf(1, 4, {0.0, 0.5, 1.0, 0.2});
  ByteRaster raster = quantize_confidence(conf);
  CHECK(raster.values == std::vector<std::uint8_t>{0, 128, 255, 51});
  ConfidenceMap back = dequantize_confidence(raster);
  CHECK(back.at(0, 3) == 0.2);

  std::vector<std::uint8_t> levels(256);
  for (int q = 0; q <= 255; ++q) levels[q] = static_cast<std::uint8_t>(q);
  ByteRaster all{1, 256, levels};
  CHECK(quantize_confidence(dequantize_confidence(all)).values == levels);
}

}  // TEST_SUITE("fusion")
