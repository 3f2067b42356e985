#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "ppgauth/error.hpp"
#include "ppgauth/features.hpp"

using namespace ppgauth;
using namespace ppgauth::features;

namespace {

std::vector<double> tone(double hz, std::size_t n, double fs, double shift = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(2.0 * std::numbers::pi * hz * (static_cast<double>(i) - shift) / fs);
  return x;
}

}  // namespace

TEST_CASE("Morse response shape") {
  const MorseParams p;
  CHECK(morse_response(p, 0.0) == 0.0);
  CHECK(morse_response(p, -1.0) == 0.0);
  const double wp = morse_peak_frequency(p);
  CHECK(wp == doctest::Approx(std::cbrt(20.0 / 3.0)));
  CHECK(morse_response(p, wp) == doctest::Approx(2.0));
  CHECK(morse_response(p, wp * 0.999) < morse_response(p, wp));
  CHECK(morse_response(p, wp * 1.001) < morse_response(p, wp));
  // d/dw [w^beta exp(-w^gamma)] = 0 at w^gamma = beta / gamma
  const double h = 1e-6;
  CHECK((morse_response(p, wp + h) - morse_response(p, wp - h)) / (2 * h) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("morse_wavelet is analytic") {
  const auto w = morse_wavelet(3.0, 20.0, 0.2, 256, 300.0);
  REQUIRE(w.size() == 256);
  CHECK(w[0] == std::complex<double>(0.0, 0.0));
  for (std::size_t k = 128; k < 256; ++k) CHECK(w[k] == std::complex<double>(0.0, 0.0));
  for (std::size_t k = 1; k < 128; ++k) CHECK(w[k].real() >= 0.0);
  CHECK_THROWS_AS(morse_wavelet(0.0, 20.0, 0.2, 16, 300.0), Error);
  CHECK_THROWS_AS(morse_wavelet(3.0, 20.0, 0.2, 0, 300.0), Error);
}

TEST_CASE("scale grid") {
  const MorseParams p;
  const auto g = make_scale_grid(p);
  REQUIRE(g.size() == 41);
  CHECK(g.center_frequencies.front() == doctest::Approx(0.25));
  CHECK(g.center_frequencies.back() == doctest::Approx(8.0));
  for (std::size_t j = 1; j < g.size(); ++j) {
    CHECK(g.scales[j] < g.scales[j - 1]);
    CHECK(g.center_frequencies[j] * g.scales[j] == doctest::Approx(g.center_frequencies[0] * g.scales[0]));
  }
  CHECK(center_frequency(p, scale_for_frequency(p, 1.7)) == doctest::Approx(1.7));
  CHECK_THROWS_AS(make_scale_grid(p, 1.0, 8.0), Error);
}

TEST_CASE("select_scale") {
  const auto g = make_scale_grid(MorseParams{});
  CHECK(select_scale(g, ByIndex{1}) == 0);
  CHECK(g.scales[select_scale(g, ByIndex{1})] == g.scales.front());
  CHECK(select_scale(g, ByIndex{3}) == 2);
  const auto k = select_scale(g, ByBand{1.0, 2.0});
  CHECK(k == 21);
  CHECK(g.center_frequencies[k] == doctest::Approx(0.25 * std::exp2(21.0 / 8.0)));

  ScaleGrid hand;
  for (double f : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    hand.center_frequencies.push_back(f);
    hand.scales.push_back(1.0 / f);
  }
  CHECK(hand.center_frequencies[select_scale(hand, ByBand{1.0, 2.0})] == 1.5);

  ScaleGrid high;
  for (double f : {3.0, 4.0, 6.0, 8.0}) {
    high.center_frequencies.push_back(f);
    high.scales.push_back(1.0 / f);
  }
  CHECK_THROWS_AS(select_scale(high, ByBand{1.0, 2.0}), Error);
  CHECK_THROWS_AS(select_scale(g, ByIndex{0}), Error);
  CHECK_THROWS_AS(select_scale(g, ByIndex{42}), Error);
}

TEST_CASE("cwt trivial properties") {
  const MorseParams p;
  const auto g = make_scale_grid(p);
  const std::vector<double> zero(200, 0.0);
  const auto z = cwt(zero, g, p, 300.0);
  CHECK(z.coefficients.rows() == 41);
  CHECK(z.coefficients.cols() == 200);
  CHECK(z.coefficients.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<double> x(300), x2(300);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    x2[i] = 2.0 * x[i];
  }
  const auto a = cwt(x, g, p, 300.0), b = cwt(x2, g, p, 300.0);
  CHECK((b.coefficients - 2.0 * a.coefficients).cwiseAbs().maxCoeff() <= 1e-12 * b.coefficients.cwiseAbs().maxCoeff());
  CHECK(a.coefficients.allFinite());
  CHECK_THROWS_AS(cwt(std::vector<double>(15, 1.0), g, p, 300.0), Error);
}

TEST_CASE("cwt matches the direct discretization") {
  const MorseParams p;
  const auto g = make_scale_grid(p);
  oracle::DirectCwt direct(p.gamma, p.beta, 300.0);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n;
  for (std::size_t len : {16u, 97u, 256u}) {
    std::vector<double> x(len);
    for (double& v : x) v = n(rng);
    const auto fast = cwt(x, g, p, 300.0).coefficients;
    const auto ref = direct(x, g.scales);
    CHECK((fast - ref).norm() / ref.norm() <= 1e-6);
  }
}

TEST_CASE("1.5 Hz tone peaks at the nearest-centre scale") {
  const MorseParams p;
  const auto g = make_scale_grid(p);
  const auto x = tone(1.5, 1200, 300.0);
  const auto s = cwt(x, g, p, 300.0);
  Eigen::Index best = 0;
  s.coefficients.cwiseAbs().rowwise().mean().maxCoeff(&best);
  std::size_t nearest = 0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (std::abs(g.center_frequencies[j] - 1.5) < std::abs(g.center_frequencies[nearest] - 1.5)) nearest = j;
  }
  CHECK(static_cast<std::size_t>(best) == nearest);
  // unit cosine at the centre frequency: |W| = sqrt(a) Psi(w_p) / 2 = sqrt(a) away from the edges
  const auto row = cwt_row(tone(g.center_frequencies[nearest], 6000, 300.0), g.scales[nearest], p, 300.0);
  CHECK(std::abs(row[3000]) == doctest::Approx(std::sqrt(g.scales[nearest])).epsilon(1e-6));
}

TEST_CASE("magnitude is shift-covariant for a pure tone") {
  const MorseParams p;
  const double a = scale_for_frequency(p, 2.0);
  const auto x = tone(2.0, 6000, 300.0);
  const auto y = tone(2.0, 6000, 300.0, 37.0);
  const auto rx = cwt_row(x, a, p, 300.0), ry = cwt_row(y, a, p, 300.0);
  for (std::size_t b = 2800; b < 3200; ++b) CHECK(std::abs(ry[b + 37]) == doctest::Approx(std::abs(rx[b])).epsilon(1e-6));
}

TEST_CASE("to_feature_vector and fit_length") {
  const std::vector<std::complex<double>> row{{3.0, 4.0}, {0.0, 0.0}};
  const auto v = to_feature_vector(row, 4, "A");
  CHECK(v.values.size() == 4);
  CHECK(v.values(0) == 5.0);
  CHECK(v.values(1) == 0.0);
  CHECK(v.values(2) == 0.0);
  CHECK(v.label == "A");

  std::vector<double> r1200(1200, 1.0);
  const auto padded = fit_length(r1200, 1210);
  CHECK(padded.head(1200).minCoeff() == 1.0);
  CHECK(padded.tail(10).cwiseAbs().maxCoeff() == 0.0);

  std::vector<double> ramp(10);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  const auto cut = fit_length(ramp, 6);
  CHECK(cut(0) == 2.0);
  CHECK(cut(5) == 7.0);

  const std::vector<std::complex<double>> same{{1.0, -1.0}, {0.0, 2.0}, {-3.0, 0.0}};
  const auto id = to_feature_vector(same, 3);
  CHECK(id.values(0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(id.values(1) == 2.0);
  CHECK(id.values(2) == 3.0);
}

TEST_CASE("feature extraction is bit-identical on repeat") {
  const MorseParams p;
  const auto g = make_scale_grid(p);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> x(801);
  for (double& v : x) v = n(rng);
  const auto a = to_feature_vector(cwt(x, g, p, 300.0), 21, 900);
  const auto b = to_feature_vector(cwt(x, g, p, 300.0), 21, 900);
  CHECK(a.values == b.values);
}
