#include <doctest.h>

#include <cstdint>
#include <string>
#include <vector>

#include "bravo/errors.hpp"
#include "bravo/oracle.hpp"

using namespace bravo;

TEST_SUITE("oracle") {

TEST_CASE("the same seed reproduces the raw stream") {
  Rng a(12345);
  Rng b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("value mappings stay inside their ranges") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int n = rng.below(7);
    CHECK(n >= 0);
    CHECK(n < 7);
    const double v = rng.uniform_in(2.0, 3.0);
    CHECK(v >= 2.0);
    CHECK(v < 3.0);
  }
  CHECK_FALSE(rng.bernoulli(0.0));
  CHECK(rng.bernoulli(1.0));
}

TEST_CASE("exact curves reproduce the four-sample example") {
  const ExactCurves c =
      exact_curves({0.9, 0.4, 0.6, 0.1}, {1, 1, 0, 0});
  CHECK(c.auroc == 75.0);
  CHECK(c.fpr95 == 50.0);
  CHECK(c.ap == doctest::Approx(100.0 * 5.0 / 6.0));
}

TEST_CASE("fully separated samples hit the exact endpoints") {
  const ExactCurves c =
      exact_curves({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
  CHECK(c.auroc == 100.0);
  CHECK(c.fpr95 == 0.0);
  CHECK(c.ap == 100.0);
}

TEST_CASE("an all-tied sample degrades to chance level") {
  std::vector<double> scores(12, 0.5);
  std::vector<std::uint8_t> positives(12, 0);
  positives[0] = positives[1] = positives[2] = 1;
  const ExactCurves c = exact_curves(scores, positives);
  CHECK(c.auroc == 50.0);
  CHECK(c.fpr95 == 95.0);
  CHECK(c.ap == 25.0);
}

TEST_CASE("exact curves validate their inputs") {
  try {
    exact_curves({0.5, 0.5}, {1});
    FAIL("length mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  try {
    exact_curves({0.5, 0.6}, {1, 1});
    FAIL("one-sided population accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateCurve);
  }
}

TEST_CASE("brute-force miou matches the hand-worked counts") {
  ClassCatalog catalog(2);
  ClassMap gt(2, 2, {0, 0, 1, 1}, catalog);
  ClassMap pred(2, 2, {0, 1, 1, 1}, catalog);
  ValidityMask all(2, 2, {1, 1, 1, 1});
  CHECK(brute_miou(gt, pred, all, catalog) ==
        doctest::Approx(100.0 * 7.0 / 12.0));
  CHECK(brute_miou(gt, gt, all, catalog) == 100.0);
}

TEST_CASE("brute-force miou drops ignored and invalid pixels") {
  ClassCatalog catalog(2);
  ClassMap gt(1, 3, {0, kIgnoreLabel, 1}, catalog);
  ClassMap pred(1, 3, {0, 1, 0}, catalog);

  // The disagreeing third pixel is masked out, the ignore label never counts.
  ValidityMask masked(1, 3, {1, 1, 0});
  CHECK(brute_miou(gt, pred, masked, catalog) == 100.0);

  ValidityMask none(1, 3, {0, 0, 0});
  try {
    brute_miou(gt, pred, none, catalog);
    FAIL("empty selection accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyAccumulator);
  }
}

TEST_CASE("reference calibration error reproduces the planted gaps") {
  CHECK(reference_ece({0.8, 0.8}, {1, 0}, 2) == doctest::Approx(30.0));
  CHECK(reference_ece({0.9, 0.9, 0.6, 0.6}, {1, 0, 1, 1}, 2) ==
        doctest::Approx(0.0));
  try {
    reference_ece({}, {}, 2);
    FAIL("empty sample list accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyAccumulator);
  }
  try {
    reference_ece({0.5}, {1}, 1);
    FAIL("single bin accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("fixtures regenerate bit for bit from spec and seed") {
  FixtureSpec spec;
  spec.class_count = 7;
  spec.height = 32;
  spec.width = 48;
  spec.invalid_fraction = 0.25;
  const Fixture a = synth_fixture(spec, 99);
  const Fixture b = synth_fixture(spec, 99);
  CHECK(a.gt.labels() == b.gt.labels());
  CHECK(a.pred.labels() == b.pred.labels());
  CHECK(a.conf.scores() == b.conf.scores());
  CHECK(a.validity.flags() == b.validity.flags());

  const Fixture c = synth_fixture(spec, 100);
  CHECK(a.gt.labels() != c.gt.labels());
}

TEST_CASE("fixture specs are validated before any drawing") {
  FixtureSpec spec;
  auto expect_invalid = [](FixtureSpec s, const std::string& fragment) {
    try {
      synth_fixture(s, 1);
      FAIL("bad spec accepted: " << fragment);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidArgument);
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };

  FixtureSpec bad_rate = spec;
  bad_rate.error_rate = 1.5;
  expect_invalid(bad_rate, "error rate 1.5");

  FixtureSpec inverted = spec;
  inverted.valid_conf_lo = 0.9;
  inverted.valid_conf_hi = 0.1;
  expect_invalid(inverted, "inverted");

  FixtureSpec overconfident = spec;
  overconfident.error_rate = 0.6;
  expect_invalid(overconfident, "0.5");

  FixtureSpec flat = spec;
  flat.height = 0;
  expect_invalid(flat, "extents");

  FixtureSpec single = spec;
  single.class_count = 1;
  expect_invalid(single, "class count");
}

TEST_CASE("a zero error rate plants perfect confident predictions") {
  FixtureSpec spec;
  spec.error_rate = 0.0;
  spec.height = 16;
  spec.width = 16;
  const Fixture f = synth_fixture(spec, 5);
  CHECK(f.pred.labels() == f.gt.labels());
  for (double c : f.conf.scores()) CHECK(c == 1.0);
}

TEST_CASE("the calibrated profile lands near zero calibration error") {
  FixtureSpec spec;
  spec.height = 256;
  spec.width = 256;
  spec.error_rate = 0.2;
  const Fixture f = synth_fixture(spec, 21);
  std::vector<std::uint8_t> correct(f.gt.labels().size());
  for (std::size_t i = 0; i < correct.size(); ++i)
    correct[i] = f.gt.labels()[i] == f.pred.labels()[i] ? 1 : 0;
  CHECK(reference_ece(f.conf.scores(), correct, 15) < 1.0);
}

TEST_CASE("the uniform profile plants a known calibration gap") {
  FixtureSpec spec;
  spec.profile = CalibrationProfile::Uniform;
  spec.height = 256;
  spec.width = 256;
  spec.error_rate = 0.5;
  spec.valid_conf_lo = 0.8;
  spec.valid_conf_hi = 0.8;
  const Fixture f = synth_fixture(spec, 33);
  std::vector<std::uint8_t> correct(f.gt.labels().size());
  for (std::size_t i = 0; i < correct.size(); ++i)
    correct[i] = f.gt.labels()[i] == f.pred.labels()[i] ? 1 : 0;
  const double ece = reference_ece(f.conf.scores(), correct, 15);
  CHECK(ece > 29.0);
  CHECK(ece < 31.0);
}

TEST_CASE("disjoint confidence supports separate perfectly after reversal") {
  FixtureSpec spec;
  spec.height = 64;
  spec.width = 64;
  spec.invalid_fraction = 0.3;
  spec.profile = CalibrationProfile::Uniform;
  spec.valid_conf_lo = 0.8;
  spec.valid_conf_hi = 1.0;
  spec.invalid_conf_lo = 0.0;
  spec.invalid_conf_hi = 0.2;
  const Fixture f = synth_fixture(spec, 77);

  std::vector<double> reversed;
  std::vector<std::uint8_t> positives;
  for (std::size_t i = 0; i < f.conf.scores().size(); ++i) {
    reversed.push_back(1.0 - f.conf.scores()[i]);
    positives.push_back(f.validity.flags()[i] ? 0 : 1);
  }
  const ExactCurves c = exact_curves(reversed, positives);
  CHECK(c.auroc == 100.0);
  CHECK(c.fpr95 == 0.0);
  CHECK(c.ap == 100.0);
}

}  // TEST_SUITE("oracle")
