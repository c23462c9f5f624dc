#include "bravo/types.hpp"

#include <algorithm>
#include <cmath>

namespace bravo {

int subset_index(std::string_view name) {
  for (std::size_t i = 0; i < kSubsetNames.size(); ++i) {
    if (kSubsetNames[i] == name) return static_cast<int>(i);
  }
  return -1;
}

bool is_known_subset(std::string_view name) { return subset_index(name) >= 0; }

bool subset_has_semantic(std::string_view name) { return name != "smiyc"; }

bool subset_has_ood(std::string_view name) {
  return name == "smiyc" || name == "synobjs";
}

ClassCatalog::ClassCatalog(int class_count) : count_(class_count) {
  if (class_count < 2) {
    fail(ErrorKind::InvalidArgument,
         "class catalog needs at least 2 classes, got " +
             std::to_string(class_count));
  }
  if (class_count > 255) {
    // 255 is reserved for the ignore label and ids must fit one byte.
    fail(ErrorKind::InvalidArgument,
         "class catalog supports at most 255 classes, got " +
             std::to_string(class_count));
  }
}

LogitsTensor::LogitsTensor(TensorKind kind, int channels, int height, int width,
                           std::vector<float> data, int rank)
    : kind_(kind), channels_(channels), height_(height), width_(width),
      rank_(rank), data_(std::move(data)) {
  if (channels <= 0 || height <= 0 || width <= 0) {
    fail(ErrorKind::ShapeMismatch,
         "tensor extents must be positive, got " + std::to_string(channels) +
             "x" + std::to_string(height) + "x" + std::to_string(width));
  }
  if (rank != 2 && rank != 3) {
    fail(ErrorKind::ShapeMismatch, "tensor rank must be 2 or 3");
  }
  if (rank == 2 && width != 1) {
    fail(ErrorKind::ShapeMismatch, "rank-2 tensor must have width 1");
  }
  const std::size_t expected = static_cast<std::size_t>(channels) * height * width;
  if (data_.size() != expected) {
    fail(ErrorKind::ShapeMismatch,
         "tensor payload holds " + std::to_string(data_.size()) +
             " values, extents require " + std::to_string(expected));
  }
  for (float v : data_) {
    if (!std::isfinite(v)) {
      fail(ErrorKind::NonFiniteData, "tensor contains a non-finite value");
    }
  }
}

ClassMap::ClassMap(int height, int width, std::vector<std::uint8_t> labels,
                   const ClassCatalog& catalog)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (height <= 0 || width <= 0) {
    fail(ErrorKind::DimensionMismatch, "class map extents must be positive");
  }
  if (labels_.size() != static_cast<std::size_t>(height) * width) {
    fail(ErrorKind::DimensionMismatch,
         "class map holds " + std::to_string(labels_.size()) +
             " labels for " + std::to_string(height) + "x" +
             std::to_string(width));
  }
  const int c = catalog.count();
  for (std::uint8_t label : labels_) {
    if (label >= c && label != kIgnoreLabel) {
      fail(ErrorKind::OutOfRangeLabel,
           "label " + std::to_string(label) + " outside 0.." +
               std::to_string(c - 1) + " and not the ignore label");
    }
  }
}

ConfidenceMap::ConfidenceMap(int height, int width, std::vector<double> scores)
    : height_(height), width_(width), scores_(std::move(scores)) {
  if (height <= 0 || width <= 0) {
    fail(ErrorKind::DimensionMismatch,
         "confidence map extents must be positive");
  }
  if (scores_.size() != static_cast<std::size_t>(height) * width) {
    fail(ErrorKind::DimensionMismatch,
         "confidence map holds " + std::to_string(scores_.size()) +
             " scores for " + std::to_string(height) + "x" +
             std::to_string(width));
  }
  for (double s : scores_) {
    if (!(s >= 0.0 && s <= 1.0)) {  // also rejects NaN
      fail(ErrorKind::OutOfRangeScore,
           "confidence score " + std::to_string(s) + " outside [0,1]");
    }
  }
}

ValidityMask::ValidityMask(int height, int width,
                           std::vector<std::uint8_t> valid)
    : height_(height), width_(width), valid_(std::move(valid)) {
  if (height <= 0 || width <= 0) {
    fail(ErrorKind::DimensionMismatch, "validity mask extents must be positive");
  }
  if (valid_.size() != static_cast<std::size_t>(height) * width) {
    fail(ErrorKind::DimensionMismatch,
         "validity mask holds " + std::to_string(valid_.size()) +
             " flags for " + std::to_string(height) + "x" +
             std::to_string(width));
  }
  for (std::uint8_t& v : valid_) v = v ? 1 : 0;
}

ValidityMask ValidityMask::all_valid(int height, int width) {
  return ValidityMask(height, width,
                      std::vector<std::uint8_t>(
                          static_cast<std::size_t>(height) * width, 1));
}

EvalUnit validate_pair(const ClassMap& pred, const ConfidenceMap& conf,
                       const ClassMap& gt, const ValidityMask& validity,
                       const ClassCatalog& catalog) {
  const auto check_dims = [&](int h, int w, const char* which) {
    if (h != pred.height() || w != pred.width()) {
      fail(ErrorKind::DimensionMismatch,
           std::string(which) + " is " + std::to_string(h) + "x" +
               std::to_string(w) + " but prediction is " +
               std::to_string(pred.height()) + "x" +
               std::to_string(pred.width()));
    }
  };
  check_dims(conf.height(), conf.width(), "confidence map");
  check_dims(gt.height(), gt.width(), "ground truth");
  check_dims(validity.height(), validity.width(), "validity mask");

  // Predictions must name an actual class; only ground truth may ignore.
  for (std::uint8_t label : pred.labels()) {
    if (label >= catalog.count()) {
      fail(ErrorKind::OutOfRangeLabel,
           "prediction uses label " + std::to_string(label) +
               " which is not a class id");
    }
  }
  return EvalUnit(pred, conf, gt, validity, catalog.count());
}

}  // namespace bravo
