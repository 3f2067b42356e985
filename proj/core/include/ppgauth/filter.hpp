#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ppgauth::preprocess {

/// One normalized second-order section:
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Cascade of biquads run in transposed direct form II.
class SosFilter {
 public:
  SosFilter() = default;
  SosFilter(std::vector<Biquad> sections, double fs);

  std::span<const Biquad> sections() const { return sections_; }
  double fs() const { return fs_; }
  int order() const { return 2 * static_cast<int>(sections_.size()); }

  /// Complex frequency response of the whole cascade at `hz`.
  std::complex<double> response(double hz) const;

  /// Zero initial state, causal. Output has the input's length.
  std::vector<double> apply(std::span<const double> input) const;

 private:
  std::vector<Biquad> sections_;
  double fs_ = 0.0;
};

/// Digital Butterworth band-pass of total order `order` (even; the low-pass
/// prototype has order/2 poles) via the bilinear transform with pre-warped
/// band edges. Each pole pair becomes one biquad with zeros at z = +1 and
/// z = -1, scaled to unit gain at the geometric centre frequency.
SosFilter butterworth_bandpass(double low_hz, double high_hz, int order, double fs);

}  // namespace ppgauth::preprocess
