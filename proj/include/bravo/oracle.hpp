#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bravo/types.hpp"

namespace bravo {

/// Seeded generator with hand-rolled value mappings. mt19937_64 output and
/// the mappings below are fully pinned down, so the same seed produces the
/// same stream on every platform; std::uniform_* distributions would not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform_in(double lo, double hi) { return lo + uniform() * (hi - lo); }

  int below(int n) { return static_cast<int>(uniform() * n); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Reference curve metrics computed by full sort with stable tie grouping:
/// Mann-Whitney AUROC (ties count half), polyline-interpolated FPR at 95%
/// TPR, and step-sum average precision. Percent scale.
struct ExactCurves {
  double auroc = 0.0;
  double fpr95 = 0.0;
  double ap = 0.0;
};

ExactCurves exact_curves(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& positives);

/// Per-class intersection / union via explicit pixel sets; pixels with the
/// ignore label or an invalid flag are left out entirely.
double brute_miou(const ClassMap& gt, const ClassMap& pred,
                  const ValidityMask& validity, const ClassCatalog& catalog);

/// Direct expected-calibration-error formula over raw sample lists.
double reference_ece(const std::vector<double>& confidences,
                     const std::vector<std::uint8_t>& correct, int bins);

enum class CalibrationProfile {
  Calibrated,  // conf ~ U[1-2e, 1], correctness ~ Bernoulli(conf)
  Uniform,     // conf ~ U[lo, hi], correctness ~ Bernoulli(1-e)
};

struct FixtureSpec {
  int class_count = 5;
  int height = 64;
  int width = 64;
  double error_rate = 0.2;
  double invalid_fraction = 0.0;
  CalibrationProfile profile = CalibrationProfile::Calibrated;
  double valid_conf_lo = 0.0;
  double valid_conf_hi = 1.0;
  double invalid_conf_lo = 0.0;
  double invalid_conf_hi = 1.0;
};

/// A generated evaluation instance with parameters planted so that some
/// metric targets are known analytically. Same spec and seed regenerate the
/// rasters bit for bit.
struct Fixture {
  FixtureSpec spec;
  std::uint64_t seed = 0;
  ClassMap gt;
  ClassMap pred;
  ConfidenceMap conf;
  ValidityMask validity;
};

Fixture synth_fixture(const FixtureSpec& spec, std::uint64_t seed);

}  // namespace bravo
