// metrics.cpp -- confidence-score quality metrics.

#include "confkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confkit/error.hpp"

namespace confkit {

namespace {

void check_set(const ScoredSet& set, const char* op) {
  if (set.targets.size() != set.confidences.size()) {
    throw Error(std::string(op) + ": targets and confidences differ in length");
  }
  if (set.targets.empty()) {
    throw Error(std::string(op) + ": empty set");
  }
  for (std::size_t i = 0; i < set.targets.size(); ++i) {
    if (set.targets[i] != 0 && set.targets[i] != 1) {
      throw Error(std::string(op) + ": target at index " + std::to_string(i) +
                  " is not 0/1");
    }
    const double p = set.confidences[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(std::string(op) + ": confidence at index " +
                  std::to_string(i) + " outside [0, 1]");
    }
  }
}

}  // namespace

double binary_cross_entropy(const ScoredSet& set) {
  check_set(set, "binary_cross_entropy");
  double sum = 0.0;
  for (std::size_t i = 0; i < set.targets.size(); ++i) {
    const double p =
        std::clamp(set.confidences[i], kLogClamp, 1.0 - kLogClamp);
    sum += set.targets[i] ? -std::log(p) : -std::log1p(-p);
  }
  return sum / static_cast<double>(set.targets.size());
}

double nce(const ScoredSet& set) {
  check_set(set, "nce");
  const long n = static_cast<long>(set.targets.size());
  const long pos = std::accumulate(set.targets.begin(), set.targets.end(), 0L);
  if (pos == 0 || pos == n) {
    throw Error("nce: entropy zero, NCE undefined");
  }
  const double q = static_cast<double>(pos) / static_cast<double>(n);
  const double h = -(q * std::log(q) + (1.0 - q) * std::log(1.0 - q));
  return (h - binary_cross_entropy(set)) / h;
}

PrCurve pr_curve(const ScoredSet& set) {
  check_set(set, "pr_curve");
  const long n = static_cast<long>(set.targets.size());
  const long pos = std::accumulate(set.targets.begin(), set.targets.end(), 0L);
  if (pos == 0) {
    throw Error("pr_curve: no positive targets, recall undefined");
  }
  const long neg = n - pos;

  // Sort (confidence, target) ascending so each distinct value can be swept
  // as a threshold with prefix counts of the items below it.
  std::vector<std::pair<double, int>> items(set.targets.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i] = {set.confidences[i], set.targets[i]};
  }
  std::sort(items.begin(), items.end());

  PrCurve curve;
  auto emit = [&](double threshold, long pos_below, long neg_below) {
    const long tp = pos - pos_below;
    const long fp = neg - neg_below;
    const long fn = pos_below;
    curve.points.push_back({threshold,
                            static_cast<double>(tp) /
                                static_cast<double>(tp + fp),
                            static_cast<double>(tp) / static_cast<double>(pos),
                            tp, fp, fn});
  };

  emit(0.0, 0, 0);
  long pos_below = 0, neg_below = 0;
  std::size_t i = 0;
  while (i < items.size()) {
    const double value = items[i].first;
    if (value > 0.0) emit(value, pos_below, neg_below);
    // consume the tied group
    for (; i < items.size() && items[i].first == value; ++i) {
      items[i].second ? ++pos_below : ++neg_below;
    }
  }
  return curve;
}

double auc(const PrCurve& curve) {
  if (curve.points.empty()) {
    throw Error("auc: empty curve");
  }
  double area = 0.0;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const double next_recall =
        i + 1 < curve.points.size() ? curve.points[i + 1].recall : 0.0;
    area += (curve.points[i].recall - next_recall) * curve.points[i].precision;
  }
  return std::clamp(area, 0.0, 1.0);
}

}  // namespace confkit
