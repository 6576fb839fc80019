#ifndef CONFKIT_CALIBRATION_HPP
#define CONFKIT_CALIBRATION_HPP

// Monotone piece-wise linear calibration: fitted on a dev set, applied at
// test time. Fitted mappings are strictly increasing, so the relative order
// of confidence scores (and hence P-R AUC) is preserved exactly.

#include "confkit/metrics.hpp"

namespace confkit {

struct PwlmKnot {
  double x = 0.0;  // raw confidence
  double y = 0.0;  // calibrated confidence

  bool operator==(const PwlmKnot&) const = default;
};

// Knot x strictly increasing from 0 to 1; y non-decreasing, all in [0,1].
struct Pwlm {
  std::vector<PwlmKnot> knots;
};

// Throws if the knot list violates the Pwlm invariants.
void validate(const Pwlm& mapping);

// Equal-population binning by rank: knot x = bin mean confidence, knot y =
// bin accuracy. Adjacent bins whose accuracy does not increase are pooled,
// then a small rank-preserving slope (kRankSlope) is mixed in so the mapping
// is strictly increasing end to end, endpoints extended to x=0 and x=1.
Pwlm fit_pwlm(const ScoredSet& dev, int num_bins = 20);

// Linear interpolation between the surrounding knots; exact at knot x.
// p outside [0,1] throws.
double apply_pwlm(const Pwlm& mapping, double p);

// Weight of the raw confidence mixed into fitted knot y values. Keeps fitted
// mappings strictly increasing even where pooled bin accuracies saturate at
// 0 or 1; the knot y error it introduces is at most kRankSlope.
inline constexpr double kRankSlope = 1e-6;

}  // namespace confkit

#endif  // CONFKIT_CALIBRATION_HPP
