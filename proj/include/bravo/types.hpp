#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bravo/errors.hpp"

namespace bravo {

inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Quantizes a confidence score in [0,1] to an 8-bit level, rounding halves
/// away from zero. The inverse mapping is level / 255.
inline int quantize255(double score) {
  return static_cast<int>(std::lround(score * 255.0));
}

// The six benchmark subsets in canonical (reporting) order.
inline constexpr std::array<std::string_view, 6> kSubsetNames = {
    "acdc", "smiyc", "outofcontext", "synflare", "synobjs", "synrain"};

int subset_index(std::string_view name);  // -1 when unknown
bool is_known_subset(std::string_view name);
bool subset_has_semantic(std::string_view name);  // all but smiyc
bool subset_has_ood(std::string_view name);       // smiyc and synobjs

/// Evaluation class catalog: classes are 0..count-1, 255 is the ignore label.
class ClassCatalog {
 public:
  explicit ClassCatalog(int class_count);

  int count() const { return count_; }
  std::uint8_t ignore_id() const { return kIgnoreLabel; }

  bool operator==(const ClassCatalog&) const = default;

 private:
  int count_;
};

enum class TensorKind : std::uint8_t {
  SegLogits,    // C x h x w
  MaskLogits,   // N x h x w
  ClassLogits,  // N x (C+1) x 1
  Features,     // E x h x w
};

/// Rank-3 row-major float tensor. Rank-2 payloads (class logits) keep a
/// trailing extent of 1; `rank` records which layout a file round-trip
/// should reproduce. All elements are finite by construction.
class LogitsTensor {
 public:
  LogitsTensor(TensorKind kind, int channels, int height, int width,
               std::vector<float> data, int rank = 3);

  TensorKind kind() const { return kind_; }
  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int rank() const { return rank_; }

  float at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  const std::vector<float>& data() const { return data_; }

 private:
  TensorKind kind_;
  int channels_;
  int height_;
  int width_;
  int rank_;
  std::vector<float> data_;
};

/// Per-pixel class ids, row-major, origin top-left. Labels are < C or 255.
class ClassMap {
 public:
  ClassMap(int height, int width, std::vector<std::uint8_t> labels,
           const ClassCatalog& catalog);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const { return labels_.size(); }
  std::uint8_t at(int y, int x) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

 private:
  int height_;
  int width_;
  std::vector<std::uint8_t> labels_;
};

/// Per-pixel confidence scores in [0,1], row-major.
class ConfidenceMap {
 public:
  ConfidenceMap(int height, int width, std::vector<double> scores);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const { return scores_.size(); }
  double at(int y, int x) const {
    return scores_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::vector<double>& scores() const { return scores_; }

 private:
  int height_;
  int width_;
  std::vector<double> scores_;
};

/// Per-pixel valid/invalid flags (1 = valid). Invalid pixels are excluded
/// from semantic metrics and form the positive class of the OOD stream.
class ValidityMask {
 public:
  ValidityMask(int height, int width, std::vector<std::uint8_t> valid);

  static ValidityMask all_valid(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  bool at(int y, int x) const {
    return valid_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  const std::vector<std::uint8_t>& flags() const { return valid_; }

 private:
  int height_;
  int width_;
  std::vector<std::uint8_t> valid_;
};

/// 8-bit raster, the storage form of quantized confidence maps.
struct ByteRaster {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;
};

/// Dimension-checked view over one image's rasters, ready for accumulation.
/// Only obtainable through validate_pair; does not own the rasters.
class EvalUnit {
 public:
  const ClassMap& pred() const { return *pred_; }
  const ConfidenceMap& conf() const { return *conf_; }
  const ClassMap& gt() const { return *gt_; }
  const ValidityMask& validity() const { return *validity_; }
  int class_count() const { return class_count_; }
  int height() const { return pred_->height(); }
  int width() const { return pred_->width(); }

 private:
  friend EvalUnit validate_pair(const ClassMap&, const ConfidenceMap&,
                                const ClassMap&, const ValidityMask&,
                                const ClassCatalog&);
  EvalUnit(const ClassMap& pred, const ConfidenceMap& conf, const ClassMap& gt,
           const ValidityMask& validity, int class_count)
      : pred_(&pred), conf_(&conf), gt_(&gt), validity_(&validity),
        class_count_(class_count) {}

  const ClassMap* pred_;
  const ConfidenceMap* conf_;
  const ClassMap* gt_;
  const ValidityMask* validity_;
  int class_count_;
};

/// Checks that the four rasters agree in size and that the prediction holds
/// real class ids (the ignore label is only meaningful in ground truth).
EvalUnit validate_pair(const ClassMap& pred, const ConfidenceMap& conf,
                       const ClassMap& gt, const ValidityMask& validity,
                       const ClassCatalog& catalog);

}  // namespace bravo
