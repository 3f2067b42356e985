#include "ppgauth/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ppgauth/error.hpp"

namespace ppgauth::preprocess {

namespace {

using cplx = std::complex<double>;

cplx section_response(const Biquad& s, cplx zinv) {
  const cplx num = s.b0 + zinv * (s.b1 + zinv * s.b2);
  const cplx den = 1.0 + zinv * (s.a1 + zinv * s.a2);
  return num / den;
}

}  // namespace

SosFilter::SosFilter(std::vector<Biquad> sections, double fs) : sections_(std::move(sections)), fs_(fs) {}

std::complex<double> SosFilter::response(double hz) const {
  const double w = 2.0 * std::numbers::pi * hz / fs_;
  const cplx zinv = std::polar(1.0, -w);
  cplx h = 1.0;
  for (const auto& s : sections_) h *= section_response(s, zinv);
  return h;
}

std::vector<double> SosFilter::apply(std::span<const double> input) const {
  std::vector<double> y(input.begin(), input.end());
  for (const auto& s : sections_) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double x = v;
      const double out = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * out + z2;
      z2 = s.b2 * x - s.a2 * out;
      v = out;
    }
  }
  return y;
}

SosFilter butterworth_bandpass(double low_hz, double high_hz, int order, double fs) {
  if (!(fs > 0.0)) throw Error(Errc::invalid_config, "sampling rate must be positive");
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0)) {
    throw Error(Errc::invalid_config, "band edges must satisfy 0 < low < high < fs/2");
  }
  if (order < 2 || order % 2 != 0) {
    throw Error(Errc::invalid_config, "band-pass order must be a positive even integer");
  }

  const int n = order / 2;
  const double pi = std::numbers::pi;
  const double k2 = 2.0 * fs;
  const double w1 = k2 * std::tan(pi * low_hz / fs);
  const double w2 = k2 * std::tan(pi * high_hz / fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Analog prototype poles -> band-pass poles -> z-plane.
  std::vector<cplx> zpoles;
  zpoles.reserve(2 * n);
  for (int k = 0; k < n; ++k) {
    const cplx p = std::polar(1.0, pi * (2.0 * k + n + 1.0) / (2.0 * n));
    const cplx pb = p * bw;
    const cplx disc = std::sqrt(pb * pb - 4.0 * w0sq);
    for (const cplx s : {(pb + disc) / 2.0, (pb - disc) / 2.0}) {
      zpoles.push_back((k2 + s) / (k2 - s));
    }
  }

  // Pair conjugates; real poles are paired with each other.
  std::vector<Biquad> sections;
  std::vector<double> real_poles;
  constexpr double kRealTol = 1e-12;
  for (const cplx& z : zpoles) {
    if (std::abs(z.imag()) <= kRealTol) {
      real_poles.push_back(z.real());
    } else if (z.imag() > 0.0) {
      sections.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
    }
  }
  std::sort(real_poles.begin(), real_poles.end());
  if (real_poles.size() % 2 != 0) {
    throw Error(Errc::numeric_instability, "unpaired real pole in band-pass design");
  }
  for (std::size_t i = 0; i < real_poles.size(); i += 2) {
    const double r1 = real_poles[i], r2 = real_poles[i + 1];
    sections.push_back({1.0, 0.0, -1.0, -(r1 + r2), r1 * r2});
  }

  for (const cplx& z : zpoles) {
    if (std::abs(z) >= 1.0) throw Error(Errc::numeric_instability, "designed pole outside the unit circle");
  }

  // Unit gain per section at the digital image of the analog centre frequency.
  const double wc = 2.0 * std::atan(std::sqrt(w0sq) / k2);
  const cplx zinv = std::polar(1.0, -wc);
  for (auto& s : sections) {
    const double g = 1.0 / std::abs(section_response(s, zinv));
    s.b0 *= g;
    s.b1 *= g;
    s.b2 *= g;
  }
  return SosFilter(std::move(sections), fs);
}

}  // namespace ppgauth::preprocess
