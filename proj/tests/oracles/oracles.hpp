#pragma once

// Independent reference implementations the library is checked against.
// None of these share code with the library.

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// |H(f)|^2 of the analog Butterworth band-pass prototype (order n_proto
/// low-pass, band edges pre-warped for the bilinear transform at fs).
double butterworth_mag2(double hz, double low_hz, double high_hz, int n_proto, double fs);

/// Time-domain Morse wavelet psi(t) = (1/2pi) int_0^inf Psi(w) e^{iwt} dw by
/// trapezoid quadrature, with Psi(w) = 2 (e gamma / beta)^(beta/gamma)
/// w^beta exp(-w^gamma).
std::complex<double> morse_psi(double gamma, double beta, double t);

/// Direct discretization of the wavelet transform: for every scale a (s)
/// and translation b,
///   W(a, b) = (1/sqrt(a)) sum_n x[n] conj(psi((n - b) / (a fs))) / fs.
/// Wavelet samples are cached per scale, so repeated calls are cheap.
class DirectCwt {
 public:
  DirectCwt(double gamma, double beta, double fs) : gamma_(gamma), beta_(beta), fs_(fs) {}

  Eigen::MatrixXcd operator()(std::span<const double> x, std::span<const double> scales);

 private:
  const std::vector<std::complex<double>>& lags(double scale, long n);

  double gamma_, beta_, fs_;
  std::vector<std::pair<double, std::vector<std::complex<double>>>> cache_;
  std::vector<double> w_, psi_;
};

struct GeneralizedEig {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // matching columns
};

/// Eigen-decomposition of S_w^{-1} S_b with a general (non-symmetric) solver.
GeneralizedEig brute_generalized_eig(const Eigen::MatrixXd& sb, const Eigen::MatrixXd& sw);

/// Largest principal angle (radians) between the column spans of a and b.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// EER by evaluating FAR and FRR from scratch at every candidate threshold
/// (-inf and each distinct score, ascending). The EER is read at the first
/// threshold where FAR >= FRR, interpolating linearly from the previous one.
double brute_eer(std::span<const double> genuine, std::span<const double> imposter);

/// Biased normalized autocorrelation by direct summation.
std::vector<double> direct_autocorr(std::span<const double> x, std::size_t M);

/// Between/within scatter by explicit outer-product sums.
void brute_scatter(const std::vector<std::vector<Eigen::VectorXd>>& classes, Eigen::MatrixXd& sb, Eigen::MatrixXd& sw);

}  // namespace oracle
