#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ppgauth::eval {

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> imposter;

  // Provenance, carried into reports.
  std::string dataset;
  std::string method;
  std::size_t n_test = 0;  // 0 = all segments
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
};

struct Rates {
  double far = 0.0;
  double frr = 0.0;
};

/// Accept-if-score<=threshold: FAR counts imposter scores <= threshold, FRR
/// counts genuine scores > threshold.
Rates far_frr(const ScoreSet& scores, double threshold);

/// Equal error rate. Thresholds sweep every distinct score (plus -inf);
/// FAR - FRR is non-decreasing along the sweep, and the EER is read where it
/// first reaches zero, interpolating FAR and FRR linearly between the two
/// bracketing thresholds when it jumps over zero. O(n log n).
double eer(const ScoreSet& scores);

struct EerPoint {
  double rate = 0.5;
  double threshold = 0.0;  // interpolated between the bracketing thresholds
};

EerPoint eer_point(const ScoreSet& scores);

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

/// Operating points ordered by increasing threshold. The first point has
/// threshold -inf (FAR 0, FRR 1); the last reaches FAR 1, FRR 0.
struct RocCurve {
  std::vector<RocPoint> points;
};

RocCurve roc_export(const ScoreSet& scores);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

Summary summarize(const std::vector<double>& values);

}  // namespace ppgauth::eval
