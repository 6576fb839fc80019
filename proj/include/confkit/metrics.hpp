#ifndef CONFKIT_METRICS_HPP
#define CONFKIT_METRICS_HPP

// Quality metrics for confidence scores: binary cross-entropy, normalised
// cross-entropy, precision-recall curves and their area.

#include <vector>

namespace confkit {

// Probabilities are clamped into [kLogClamp, 1-kLogClamp] before any log so
// that perfect 0/1 predictions stay near their limit values.
inline constexpr double kLogClamp = 1e-12;

struct ScoredSet {
  std::vector<int> targets;         // 0/1 per token
  std::vector<double> confidences;  // same length, each in [0,1]
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;

  bool operator==(const PrPoint&) const = default;
};

struct PrCurve {
  std::vector<PrPoint> points;  // ordered by ascending threshold
};

// Mean of -[c log p + (1-c) log(1-p)] in natural log.
double binary_cross_entropy(const ScoredSet& set);

// (H(c) - H(c,p)) / H(c). Throws "entropy zero, NCE undefined" when the
// targets are all 0 or all 1.
double nce(const ScoredSet& set);

// One point per distinct confidence value used as threshold (decision rule
// "p >= threshold"), plus the threshold-0 point. Ties share a point.
PrCurve pr_curve(const ScoredSet& set);

// Area by the average-precision convention: sum over points, thresholds
// ascending, of (recall_i - recall_{i+1}) * precision_i.
double auc(const PrCurve& curve);

}  // namespace confkit

#endif  // CONFKIT_METRICS_HPP
