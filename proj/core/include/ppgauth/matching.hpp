#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ppgauth/subspace.hpp"

namespace ppgauth::matching {

/// 1 - sample correlation of `a` and `b`, in [0, 2]. Throws
/// Errc::undefined_correlation when either input is constant and
/// Errc::contract_violation on length mismatch or fewer than two entries.
double pearson_distance(std::span<const double> a, std::span<const double> b);
double pearson_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

enum class Metric { pearson, euclidean };
enum class Reduce { min, mean };

/// How per-template and per-test-vector distances combine into one score.
struct Aggregation {
  Reduce over_templates = Reduce::min;
  Reduce over_tests = Reduce::mean;
};

std::string to_string(const Aggregation& agg);  // e.g. "min/mean"
Aggregation parse_aggregation(std::string_view text);

struct MatchScore {
  double value = 0.0;
  std::string claimed_id;
  bool genuine = false;  // ground truth, evaluation only
};

/// Distance of one projected test vector to a gallery class. A constant
/// vector under the Pearson metric counts as no match (distance 2).
double class_distance(const Eigen::MatrixXd& templates, const Eigen::VectorXd& projected, Metric metric,
                      Reduce over_templates);

/// Scores already-projected test vectors against the claimed class.
MatchScore claim_score_projected(const subspace::SubspaceModel& model, std::string_view claimed_id,
                                 std::span<const Eigen::VectorXd> projected, Aggregation agg = {},
                                 Metric metric = Metric::pearson);

/// Projects each test vector (length L) and scores it against the claim.
MatchScore claim_score(const subspace::SubspaceModel& model, std::string_view claimed_id,
                       std::span<const Eigen::VectorXd> test_vectors, Aggregation agg = {},
                       Metric metric = Metric::pearson);

enum class Decision { accept, reject };

/// Accept iff score <= threshold.
Decision decide(const MatchScore& score, double threshold);

}  // namespace ppgauth::matching
