#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ppgauth::features {

/// Generalized Morse wavelet family, Psi(w) = a * w^beta * exp(-w^gamma)
/// for w > 0 and zero otherwise, with `a` chosen so the peak value is 2
/// (a unit cosine at the centre frequency yields unit-magnitude coefficients).
struct MorseParams {
  double gamma = 3.0;
  double beta = 20.0;
};

/// Peak frequency (beta/gamma)^(1/gamma) of the mother wavelet, in rad per
/// unit of the scaled time axis.
double morse_peak_frequency(const MorseParams& p);

/// Psi(w) of the mother wavelet; zero for w <= 0.
double morse_response(const MorseParams& p, double w);

/// Frequency-domain samples Psi(scale * 2*pi*f_k) on the n DFT bins
/// f_k = k fs / n. Bins at or above fs/2 (the negative half) are exactly zero.
/// `scale` is in seconds.
std::vector<std::complex<double>> morse_wavelet(double gamma, double beta, double scale, std::size_t n,
                                                double fs);

/// Centre frequency in Hz of a wavelet at `scale` seconds.
double center_frequency(const MorseParams& p, double scale);
double scale_for_frequency(const MorseParams& p, double hz);

struct ScaleGrid {
  std::vector<double> scales;             // seconds, strictly descending
  std::vector<double> center_frequencies; // Hz, strictly ascending
  int voices_per_octave = 8;

  std::size_t size() const { return scales.size(); }
};

/// Log-spaced grid from `min_hz` up to `max_hz` (inclusive when on-grid),
/// `voices` scales per octave, largest scale first.
ScaleGrid make_scale_grid(const MorseParams& p, double min_hz = 0.25, double max_hz = 8.0, int voices = 8);

struct Scalogram {
  Eigen::MatrixXcd coefficients;  // rows: scales, columns: translations
  std::size_t source_length = 0;
};

/// One CWT row: for every translation b in [0, n),
///   W(a, b) = (1/sqrt(a)) * sum_k x[k] psi*((k/fs - b/fs) / a) / fs
/// evaluated as a zero-padded FFT product with sqrt(a) * Psi(a w).
std::vector<std::complex<double>> cwt_row(std::span<const double> segment, double scale, const MorseParams& p,
                                          double fs);

/// Full scalogram over a grid. Segments must have at least 16 samples.
Scalogram cwt(std::span<const double> segment, const ScaleGrid& grid, const MorseParams& p, double fs);

struct ByBand {
  double low_hz = 1.0;
  double high_hz = 2.0;
};
struct ByIndex {
  int k = 1;  // 1-based, counted from the largest scale
};
using ScalePolicy = std::variant<ByBand, ByIndex>;

/// Index into `grid` selected by `policy`. ByBand picks the scale whose
/// centre frequency lies in the band and is nearest its midpoint.
std::size_t select_scale(const ScaleGrid& grid, const ScalePolicy& policy);

struct FeatureVector {
  Eigen::VectorXd values;
  std::string label;
};

/// |row| zero-padded (or centre-truncated) to length L.
FeatureVector to_feature_vector(std::span<const std::complex<double>> row, std::size_t L, std::string label = {});
FeatureVector to_feature_vector(const Scalogram& s, std::size_t scale_index, std::size_t L, std::string label = {});

/// Pads or centre-truncates an already real feature row to L.
Eigen::VectorXd fit_length(std::span<const double> row, std::size_t L);

}  // namespace ppgauth::features
