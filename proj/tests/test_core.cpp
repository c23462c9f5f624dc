#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bravo/errors.hpp"
#include "bravo/types.hpp"

using namespace bravo;

TEST_SUITE("core") {

TEST_CASE("quantization rounds halves away from zero") {
  CHECK(quantize255(0.0) == 0);
  CHECK(quantize255(1.0) == 255);
  CHECK(quantize255(0.5) == 128);
  CHECK(quantize255(0.2) == 51);
  CHECK(quantize255(0.8) == 204);
}

TEST_CASE("quantization is the exact inverse of level / 255") {
  for (int q = 0; q <= 255; ++q) {
    CHECK(quantize255(q / 255.0) == q);
  }
}

TEST_CASE("reversing before quantization is not the same as reversing after") {
  // 0.7 * 255 rounds onto the 178.5 boundary and goes up, while 0.3 * 255
  // stays below 76.5. Flipping the stored level would therefore disagree
  // with quantizing the reversed score, which is why the OOD stream
  // reverses the double score before binning.
  CHECK(quantize255(0.7) == 179);
  CHECK(quantize255(0.3) == 77);
  CHECK(quantize255(1.0 - 0.7) == 77);
  CHECK(quantize255(1.0 - 0.3) == 179);
  CHECK(quantize255(1.0 - 0.7) != 255 - quantize255(0.7));
  CHECK(quantize255(1.0 - 0.3) != 255 - quantize255(0.3));
}

TEST_CASE("subset names are ordered and classified") {
  REQUIRE(kSubsetNames.size() == 6);
  CHECK(subset_index("acdc") == 0);
  CHECK(subset_index("smiyc") == 1);
  CHECK(subset_index("outofcontext") == 2);
  CHECK(subset_index("synflare") == 3);
  CHECK(subset_index("synobjs") == 4);
  CHECK(subset_index("synrain") == 5);
  CHECK(subset_index("cityscapes") == -1);
  CHECK_FALSE(is_known_subset("cityscapes"));
  for (auto name : kSubsetNames) {
    CHECK(is_known_subset(name));
    CHECK(subset_has_semantic(name) == (name != "smiyc"));
    CHECK(subset_has_ood(name) == (name == "smiyc" || name == "synobjs"));
  }
}

TEST_CASE("class catalog bounds the id range") {
  CHECK(ClassCatalog(2).count() == 2);
  CHECK(ClassCatalog(255).count() == 255);
  CHECK(ClassCatalog(19).ignore_id() == 255);
  CHECK_THROWS_AS(ClassCatalog(1), Error);
  CHECK_THROWS_AS(ClassCatalog(256), Error);
}

TEST_CASE("class map accepts class ids and the ignore label only") {
  ClassCatalog catalog(3);
  ClassMap map(1, 3, {0, 2, kIgnoreLabel}, catalog);
  CHECK(map.at(0, 0) == 0);
  CHECK(map.at(0, 2) == kIgnoreLabel);

  try {
    ClassMap(1, 2, {0, 3}, catalog);
    FAIL("out-of-range label accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfRangeLabel);
  }
  try {
    ClassMap(2, 2, {0, 1, 2}, catalog);
    FAIL("wrong payload size accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("confidence map rejects scores outside the unit interval") {
  CHECK_NOTHROW(ConfidenceMap(1, 2, {0.0, 1.0}));
  try {
    ConfidenceMap(1, 2, {0.5, 1.5});
    FAIL("score above 1 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfRangeScore);
  }
  try {
    ConfidenceMap(1, 1, {std::nan("")});
    FAIL("nan score accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfRangeScore);
  }
}

TEST_CASE("validity mask normalizes flags to zero and one") {
  ValidityMask mask(1, 3, {0, 7, 255});
  CHECK(mask.flags() == std::vector<std::uint8_t>{0, 1, 1});
  CHECK_FALSE(mask.at(0, 0));
  CHECK(mask.at(0, 1));

  ValidityMask all = ValidityMask::all_valid(2, 2);
  for (std::uint8_t v : all.flags()) CHECK(v == 1);
}

TEST_CASE("logits tensor checks extents against the payload") {
  LogitsTensor t(TensorKind::SegLogits, 2, 2, 3,
                 {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  CHECK(t.at(0, 0, 0) == 0.0f);
  CHECK(t.at(0, 1, 2) == 5.0f);
  CHECK(t.at(1, 0, 1) == 7.0f);
  CHECK(t.rank() == 3);

  try {
    LogitsTensor(TensorKind::SegLogits, 2, 2, 2, {0, 1, 2});
    FAIL("short payload accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeMismatch);
  }
  try {
    LogitsTensor(TensorKind::ClassLogits, 2, 3, 2, std::vector<float>(12), 2);
    FAIL("rank-2 tensor with width 2 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeMismatch);
  }
  try {
    LogitsTensor(TensorKind::Features, 1, 1, 2,
                 {1.0f, std::numeric_limits<float>::infinity()});
    FAIL("non-finite payload accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteData);
  }
}

TEST_CASE("validate_pair checks sizes and prediction labels") {
  ClassCatalog catalog(2);
  ClassMap pred(2, 2, {0, 1, 1, 0}, catalog);
  ConfidenceMap conf(2, 2, {0.5, 0.5, 0.5, 0.5});
  ClassMap gt(2, 2, {0, kIgnoreLabel, 1, 0}, catalog);
  ValidityMask validity = ValidityMask::all_valid(2, 2);

  EvalUnit unit = validate_pair(pred, conf, gt, validity, catalog);
  CHECK(unit.class_count() == 2);
  CHECK(unit.height() == 2);
  CHECK(unit.gt().at(0, 1) == kIgnoreLabel);

  ClassMap small_gt(1, 2, {0, 1}, catalog);
  try {
    validate_pair(pred, conf, small_gt, validity, catalog);
    FAIL("size mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }

  // The ignore label is only meaningful in ground truth.
  ClassMap ignore_pred(2, 2, {0, kIgnoreLabel, 1, 0}, catalog);
  try {
    validate_pair(ignore_pred, conf, gt, validity, catalog);
    FAIL("ignore label in prediction accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfRangeLabel);
  }
}

}  // TEST_SUITE("core")
