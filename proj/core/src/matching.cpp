#include "ppgauth/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppgauth/error.hpp"

namespace ppgauth::matching {

double pearson_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(Errc::contract_violation, "Pearson distance needs two equal-length vectors of length >= 2");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw Error(Errc::undefined_correlation, "constant vector has no correlation");
  const double d = 1.0 - sab / std::sqrt(saa * sbb);
  return std::clamp(d, 0.0, 2.0);
}

double pearson_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return pearson_distance(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                          std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw Error(Errc::contract_violation, "Euclidean distance needs equal lengths");
  return (a - b).norm();
}

std::string to_string(const Aggregation& agg) {
  auto name = [](Reduce r) { return r == Reduce::min ? "min" : "mean"; };
  return std::string(name(agg.over_templates)) + "/" + name(agg.over_tests);
}

Aggregation parse_aggregation(std::string_view text) {
  auto parse = [&](std::string_view part) {
    if (part == "min") return Reduce::min;
    if (part == "mean") return Reduce::mean;
    throw Error(Errc::invalid_config, "aggregation must be <min|mean>/<min|mean>, got '" + std::string(text) + "'");
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) parse("");
  return {parse(text.substr(0, slash)), parse(text.substr(slash + 1))};
}

double class_distance(const Eigen::MatrixXd& templates, const Eigen::VectorXd& projected, Metric metric,
                      Reduce over_templates) {
  if (templates.cols() == 0) throw Error(Errc::contract_violation, "class has no gallery templates");
  double best = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (Eigen::Index j = 0; j < templates.cols(); ++j) {
    double d;
    if (metric == Metric::euclidean) {
      d = euclidean_distance(templates.col(j), projected);
    } else {
      try {
        d = pearson_distance(templates.col(j), projected);
      } catch (const Error& e) {
        if (e.code() != Errc::undefined_correlation) throw;
        d = 2.0;
      }
    }
    best = std::min(best, d);
    total += d;
  }
  return over_templates == Reduce::min ? best : total / static_cast<double>(templates.cols());
}

MatchScore claim_score_projected(const subspace::SubspaceModel& model, std::string_view claimed_id,
                                 std::span<const Eigen::VectorXd> projected, Aggregation agg, Metric metric) {
  const std::size_t k = model.class_of(claimed_id);
  if (projected.empty()) throw Error(Errc::contract_violation, "a claim needs at least one test vector");
  double best = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& p : projected) {
    const double d = class_distance(model.gallery[k], p, metric, agg.over_templates);
    best = std::min(best, d);
    total += d;
  }
  MatchScore s;
  s.claimed_id = std::string(claimed_id);
  s.value = agg.over_tests == Reduce::min ? best : total / static_cast<double>(projected.size());
  return s;
}

MatchScore claim_score(const subspace::SubspaceModel& model, std::string_view claimed_id,
                       std::span<const Eigen::VectorXd> test_vectors, Aggregation agg, Metric metric) {
  std::vector<Eigen::VectorXd> projected;
  projected.reserve(test_vectors.size());
  for (const auto& v : test_vectors) projected.push_back(subspace::project(model, v));
  return claim_score_projected(model, claimed_id, projected, agg, metric);
}

Decision decide(const MatchScore& score, double threshold) {
  return score.value <= threshold ? Decision::accept : Decision::reject;
}

}  // namespace ppgauth::matching
