// calibration.cpp -- piece-wise linear confidence calibration.

#include "confkit/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confkit/error.hpp"

namespace confkit {

void validate(const Pwlm& mapping) {
  const auto& k = mapping.knots;
  if (k.size() < 2) {
    throw Error("pwlm: needs at least two knots");
  }
  if (k.front().x != 0.0 || k.back().x != 1.0) {
    throw Error("pwlm: knots must span x=0 to x=1");
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(k[i].y >= 0.0 && k[i].y <= 1.0)) {
      throw Error("pwlm: knot y outside [0, 1]");
    }
    if (i > 0 && !(k[i].x > k[i - 1].x)) {
      throw Error("pwlm: knot x not strictly increasing");
    }
    if (i > 0 && k[i].y < k[i - 1].y) {
      throw Error("pwlm: knot y decreases");
    }
  }
}

namespace {

struct Bin {
  double sum_conf = 0.0;
  double sum_target = 0.0;
  long count = 0;

  double x() const { return sum_conf / static_cast<double>(count); }
  // Raw confidence mixed in with weight kRankSlope; see header.
  double y() const {
    return (1.0 - kRankSlope) * (sum_target / static_cast<double>(count)) +
           kRankSlope * x();
  }
  void absorb(const Bin& other) {
    sum_conf += other.sum_conf;
    sum_target += other.sum_target;
    count += other.count;
  }
};

}  // namespace

Pwlm fit_pwlm(const ScoredSet& dev, int num_bins) {
  if (dev.targets.size() != dev.confidences.size()) {
    throw Error("fit_pwlm: targets and confidences differ in length");
  }
  if (dev.targets.empty()) {
    throw Error("fit_pwlm: empty dev set");
  }
  if (num_bins < 1) {
    throw Error("fit_pwlm: num_bins must be >= 1");
  }
  const std::size_t n = dev.targets.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(dev.confidences[i] >= 0.0 && dev.confidences[i] <= 1.0)) {
      throw Error("fit_pwlm: confidence outside [0, 1]");
    }
  }

  // Rank by confidence (index as tie-break keeps the fit deterministic).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dev.confidences[a] != dev.confidences[b]) {
      return dev.confidences[a] < dev.confidences[b];
    }
    return a < b;
  });

  const std::size_t bins = std::min<std::size_t>(num_bins, n);
  std::vector<Bin> pooled;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * n / bins;
    const std::size_t hi = (b + 1) * n / bins;
    Bin bin;
    for (std::size_t r = lo; r < hi; ++r) {
      bin.sum_conf += dev.confidences[order[r]];
      bin.sum_target += dev.targets[order[r]];
      bin.count += 1;
    }
    pooled.push_back(bin);
    // Pool while the new bin fails to increase either coordinate.
    while (pooled.size() >= 2 &&
           (pooled[pooled.size() - 1].x() <= pooled[pooled.size() - 2].x() ||
            pooled[pooled.size() - 1].y() <= pooled[pooled.size() - 2].y())) {
      pooled[pooled.size() - 2].absorb(pooled.back());
      pooled.pop_back();
    }
  }

  Pwlm mapping;
  const Bin& first = pooled.front();
  const Bin& last = pooled.back();
  if (first.x() > 0.0) {
    // Extend to x=0 with the same blend evaluated at x=0.
    double y0 = (1.0 - kRankSlope) *
                (first.sum_target / static_cast<double>(first.count));
    if (y0 >= first.y()) y0 = std::nextafter(first.y(), -1.0);
    mapping.knots.push_back({0.0, std::max(0.0, y0)});
  }
  for (const Bin& bin : pooled) {
    mapping.knots.push_back({bin.x(), bin.y()});
  }
  if (last.x() < 1.0) {
    double y1 = (1.0 - kRankSlope) *
                    (last.sum_target / static_cast<double>(last.count)) +
                kRankSlope;
    if (y1 <= last.y()) y1 = std::nextafter(last.y(), 2.0);
    mapping.knots.push_back({1.0, std::min(1.0, y1)});
  }
  validate(mapping);
  return mapping;
}

double apply_pwlm(const Pwlm& mapping, double p) {
  validate(mapping);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error("apply_pwlm: confidence outside [0, 1]");
  }
  const auto& k = mapping.knots;
  auto it = std::lower_bound(
      k.begin(), k.end(), p,
      [](const PwlmKnot& knot, double value) { return knot.x < value; });
  if (it != k.end() && it->x == p) return it->y;
  const PwlmKnot& hi = *it;
  const PwlmKnot& lo = *(it - 1);
  const double t = (p - lo.x) / (hi.x - lo.x);
  const double y = lo.y + t * (hi.y - lo.y);
  return std::clamp(y, lo.y, hi.y);
}

}  // namespace confkit
