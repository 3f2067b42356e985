#include <doctest.h>

#include <random>
#include <vector>

#include "ppgauth/error.hpp"
#include "ppgauth/matching.hpp"

using namespace ppgauth;
using namespace ppgauth::matching;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

subspace::SubspaceModel gallery(std::vector<std::vector<VectorXd>> classes) {
  subspace::SubspaceModel m;
  m.method = subspace::Method::identity;
  m.L = m.m = static_cast<std::size_t>(classes.front().front().size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    m.class_ids.push_back("C" + std::to_string(k));
    Eigen::MatrixXd t(classes[k].front().size(), static_cast<Eigen::Index>(classes[k].size()));
    for (std::size_t j = 0; j < classes[k].size(); ++j) t.col(static_cast<Eigen::Index>(j)) = classes[k][j];
    m.gallery.push_back(t);
  }
  return m;
}

}  // namespace

TEST_CASE("pearson distance examples") {
  CHECK(pearson_distance(vec({1, 2, 3}), vec({1, 2, 3})) == doctest::Approx(0.0));
  CHECK(pearson_distance(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(2.0));
  CHECK(pearson_distance(vec({1, 0, 0, 1}), vec({1, 1, 0, 0})) == doctest::Approx(1.0));
}

TEST_CASE("pearson distance errors") {
  try {
    pearson_distance(vec({1, 1, 1}), vec({1, 2, 3}));
    FAIL("expected undefined correlation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::undefined_correlation);
  }
  CHECK_THROWS_AS(pearson_distance(vec({1, 2}), vec({1, 2, 3})), Error);
  CHECK_THROWS_AS(pearson_distance(vec({1}), vec({1})), Error);
}

TEST_CASE("pearson distance properties") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    VectorXd a(12), b(12);
    for (Eigen::Index i = 0; i < 12; ++i) {
      a(i) = g(rng);
      b(i) = g(rng);
    }
    const double d = pearson_distance(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 2.0);
    CHECK(d == pearson_distance(b, a));
    const VectorXd affine = (3.7 * a).array() + 11.0;
    CHECK(pearson_distance(affine, b) == doctest::Approx(d).epsilon(1e-12));
  }
}

TEST_CASE("euclidean distance") {
  CHECK(euclidean_distance(vec({0, 0}), vec({3, 4})) == 5.0);
  CHECK_THROWS_AS(euclidean_distance(vec({0}), vec({3, 4})), Error);
}

TEST_CASE("claim scoring") {
  const auto m = gallery({{vec({1, -1, 0, 0}), vec({0, 1, 2, 0})}, {vec({5, 1, 2, 3})}});
  SUBCASE("copy of a template scores zero") {
    const std::vector<VectorXd> t{vec({0, 1, 2, 0}), vec({1, -1, 0, 0})};
    CHECK(claim_score(m, "C0", t).value == doctest::Approx(0.0));
  }
  SUBCASE("correlation 0.5 scores 0.5") {
    const auto one = gallery({{vec({1, -1, 0, 0})}, {vec({0, 0, 1, -1})}});
    const std::vector<VectorXd> t{vec({1, 0, -1, 0})};
    CHECK(claim_score(one, "C0", t).value == doctest::Approx(0.5));
  }
  SUBCASE("aggregation policies") {
    const std::vector<VectorXd> t{vec({1, -1, 0, 0}), vec({0, 0, 1, -1})};
    const double d1 = 0.0;
    const double d2 = std::min(pearson_distance(vec({1, -1, 0, 0}), vec({0, 0, 1, -1})),
                               pearson_distance(vec({0, 1, 2, 0}), vec({0, 0, 1, -1})));
    CHECK(claim_score(m, "C0", t).value == doctest::Approx((d1 + d2) / 2.0));
    CHECK(claim_score(m, "C0", t, {Reduce::min, Reduce::min}).value == doctest::Approx(0.0));
    const double mean_t2 = (pearson_distance(vec({1, -1, 0, 0}), vec({0, 0, 1, -1})) +
                            pearson_distance(vec({0, 1, 2, 0}), vec({0, 0, 1, -1}))) / 2.0;
    const double mean_t1 = (0.0 + pearson_distance(vec({0, 1, 2, 0}), vec({1, -1, 0, 0}))) / 2.0;
    CHECK(claim_score(m, "C0", t, {Reduce::mean, Reduce::mean}).value == doctest::Approx((mean_t1 + mean_t2) / 2.0));
  }
  SUBCASE("constant test vector counts as no match") {
    const std::vector<VectorXd> t{vec({2, 2, 2, 2})};
    CHECK(claim_score(m, "C1", t).value == 2.0);
  }
  SUBCASE("euclidean metric") {
    const std::vector<VectorXd> t{vec({5, 1, 2, 7})};
    CHECK(claim_score(m, "C1", t, {}, Metric::euclidean).value == 4.0);
  }
  SUBCASE("errors") {
    const std::vector<VectorXd> t{vec({1, 2, 3, 4})};
    try {
      claim_score(m, "C9", t);
      FAIL("expected unknown identity");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::unknown_identity);
    }
    CHECK_THROWS_AS(claim_score(m, "C0", std::vector<VectorXd>{}), Error);
  }
}

TEST_CASE("decide is inclusive and monotone") {
  MatchScore s;
  s.value = 0.0;
  CHECK(decide(s, 0.3) == Decision::accept);
  s.value = 0.31;
  CHECK(decide(s, 0.3) == Decision::reject);
  s.value = 0.3;
  CHECK(decide(s, 0.3) == Decision::accept);
  for (double v = 0.0; v < 2.0; v += 0.01) {
    s.value = v;
    if (decide(s, 0.7) == Decision::accept) {
      MatchScore lower = s;
      lower.value = v - 0.5;
      CHECK(decide(lower, 0.7) == Decision::accept);
    }
  }
}

TEST_CASE("aggregation parsing") {
  CHECK(to_string(parse_aggregation("mean/min")) == "mean/min");
  CHECK(to_string(Aggregation{}) == "min/mean");
  CHECK_THROWS_AS(parse_aggregation("max/mean"), Error);
  CHECK_THROWS_AS(parse_aggregation("min"), Error);
}
