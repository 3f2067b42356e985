#include "ppgauth/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "ppgauth/error.hpp"

namespace ppgauth::features {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Beyond this many scale units the mother wavelet's envelope is below 1e-8
// of its peak for the default family; padding by it makes the circular FFT
// product equal the linear sum to well below 1e-6.
double support_half_width(const MorseParams& p) {
  const double duration = std::sqrt(p.beta * p.gamma) / morse_peak_frequency(p);
  return std::max(25.0, 6.0 * duration);
}

void validate(const MorseParams& p) {
  if (!(p.gamma > 0.0) || !(p.beta > 0.0)) {
    throw Error(Errc::invalid_config, "Morse parameters gamma and beta must be positive");
  }
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// fftw_plan_* is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer alloc_buffer(std::size_t n) {
  return FftwBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

class Plan {
 public:
  Plan(std::size_t n, fftw_complex* in, fftw_complex* out, int sign) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

// Runs the FFT of the padded input once and evaluates each requested scale.
class RowEngine {
 public:
  RowEngine(std::span<const double> x, double max_scale, const MorseParams& p, double fs)
      : n_(x.size()), fs_(fs), params_(p) {
    const double pad = std::ceil(support_half_width(p) * max_scale * fs);
    size_ = next_pow2(n_ + static_cast<std::size_t>(pad) + 1);
    spectrum_ = alloc_buffer(size_);
    work_ = alloc_buffer(size_);
    auto in = alloc_buffer(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      in[i][0] = i < n_ ? x[i] : 0.0;
      in[i][1] = 0.0;
    }
    Plan forward(size_, in.get(), spectrum_.get(), FFTW_FORWARD);
    forward.execute();
    inverse_ = std::make_unique<Plan>(size_, work_.get(), work_.get(), FFTW_BACKWARD);
  }

  std::vector<std::complex<double>> row(double scale) {
    const double gain = std::sqrt(scale) / static_cast<double>(size_);
    const std::size_t half = size_ / 2;
    for (std::size_t k = 0; k < size_; ++k) {
      double h = 0.0;
      if (k > 0 && k <= half) {
        const double w = kTwoPi * static_cast<double>(k) * fs_ / static_cast<double>(size_);
        h = gain * morse_response(params_, scale * w);
      }
      work_[k][0] = spectrum_[k][0] * h;
      work_[k][1] = spectrum_[k][1] * h;
    }
    inverse_->execute();
    std::vector<std::complex<double>> out(n_);
    for (std::size_t b = 0; b < n_; ++b) out[b] = {work_[b][0], work_[b][1]};
    return out;
  }

 private:
  std::size_t n_;
  double fs_;
  MorseParams params_;
  std::size_t size_ = 0;
  FftwBuffer spectrum_;
  FftwBuffer work_;
  std::unique_ptr<Plan> inverse_;
};

void check_segment(std::span<const double> segment, double fs) {
  if (segment.size() < 16) throw Error(Errc::contract_violation, "CWT needs a segment of at least 16 samples");
  if (!(fs > 0.0)) throw Error(Errc::invalid_config, "sampling rate must be positive");
}

}  // namespace

double morse_peak_frequency(const MorseParams& p) { return std::pow(p.beta / p.gamma, 1.0 / p.gamma); }

double morse_response(const MorseParams& p, double w) {
  if (!(w > 0.0)) return 0.0;
  // 2 * (e*gamma/beta)^(beta/gamma) * w^beta * exp(-w^gamma), in log form.
  const double log_a = std::log(2.0) + (p.beta / p.gamma) * (1.0 + std::log(p.gamma / p.beta));
  return std::exp(log_a + p.beta * std::log(w) - std::pow(w, p.gamma));
}

std::vector<std::complex<double>> morse_wavelet(double gamma, double beta, double scale, std::size_t n, double fs) {
  const MorseParams p{gamma, beta};
  validate(p);
  if (n < 1) throw Error(Errc::invalid_config, "wavelet length must be at least 1");
  if (!(scale > 0.0) || !(fs > 0.0)) throw Error(Errc::invalid_config, "scale and sampling rate must be positive");
  std::vector<std::complex<double>> out(n, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    if (2 * k >= n) break;  // [fs/2, fs) are the negative frequencies
    const double w = kTwoPi * static_cast<double>(k) * fs / static_cast<double>(n);
    out[k] = morse_response(p, scale * w);
  }
  return out;
}

double center_frequency(const MorseParams& p, double scale) { return morse_peak_frequency(p) / (kTwoPi * scale); }

double scale_for_frequency(const MorseParams& p, double hz) { return morse_peak_frequency(p) / (kTwoPi * hz); }

ScaleGrid make_scale_grid(const MorseParams& p, double min_hz, double max_hz, int voices) {
  validate(p);
  if (!(min_hz > 0.0 && min_hz < max_hz) || voices < 1) {
    throw Error(Errc::invalid_config, "scale grid needs 0 < min_hz < max_hz and at least one voice per octave");
  }
  if (min_hz > 0.5 || max_hz < 5.0) {
    throw Error(Errc::invalid_config, "scale grid must span at least 0.5-5 Hz");
  }
  ScaleGrid g;
  g.voices_per_octave = voices;
  const double octaves = std::log2(max_hz / min_hz);
  const auto count = static_cast<std::size_t>(std::floor(octaves * voices + 1e-9)) + 1;
  for (std::size_t j = 0; j < count; ++j) {
    const double f = min_hz * std::exp2(static_cast<double>(j) / voices);
    g.center_frequencies.push_back(f);
    g.scales.push_back(scale_for_frequency(p, f));
  }
  return g;
}

std::vector<std::complex<double>> cwt_row(std::span<const double> segment, double scale, const MorseParams& p,
                                          double fs) {
  validate(p);
  check_segment(segment, fs);
  if (!(scale > 0.0)) throw Error(Errc::invalid_config, "scale must be positive");
  RowEngine engine(segment, scale, p, fs);
  return engine.row(scale);
}

Scalogram cwt(std::span<const double> segment, const ScaleGrid& grid, const MorseParams& p, double fs) {
  validate(p);
  check_segment(segment, fs);
  Scalogram s;
  s.source_length = segment.size();
  s.coefficients.resize(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(segment.size()));
  if (grid.size() == 0) return s;
  const double max_scale = *std::max_element(grid.scales.begin(), grid.scales.end());
  RowEngine engine(segment, max_scale, p, fs);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto row = engine.row(grid.scales[j]);
    for (std::size_t b = 0; b < row.size(); ++b) {
      s.coefficients(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) = row[b];
    }
  }
  return s;
}

std::size_t select_scale(const ScaleGrid& grid, const ScalePolicy& policy) {
  if (const auto* band = std::get_if<ByBand>(&policy)) {
    const double mid = 0.5 * (band->low_hz + band->high_hz);
    std::size_t best = grid.size();
    double best_dist = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double f = grid.center_frequencies[j];
      if (f < band->low_hz || f > band->high_hz) continue;
      const double d = std::abs(f - mid);
      if (best == grid.size() || d < best_dist) {
        best = j;
        best_dist = d;
      }
    }
    if (best == grid.size()) {
      throw Error(Errc::invalid_config, "no scale has its centre frequency inside the requested band");
    }
    return best;
  }
  const int k = std::get<ByIndex>(policy).k;
  if (k < 1 || static_cast<std::size_t>(k) > grid.size()) {
    throw Error(Errc::invalid_config, "scale index out of range for the grid");
  }
  // Grid is stored largest scale first.
  return static_cast<std::size_t>(k - 1);
}

Eigen::VectorXd fit_length(std::span<const double> row, std::size_t L) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L));
  std::size_t skip = 0;
  std::size_t count = row.size();
  if (count > L) {
    skip = (count - L) / 2;
    count = L;
  }
  for (std::size_t i = 0; i < count; ++i) v(static_cast<Eigen::Index>(i)) = row[skip + i];
  return v;
}

FeatureVector to_feature_vector(std::span<const std::complex<double>> row, std::size_t L, std::string label) {
  std::vector<double> mags(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) mags[i] = std::abs(row[i]);
  return {fit_length(mags, L), std::move(label)};
}

FeatureVector to_feature_vector(const Scalogram& s, std::size_t scale_index, std::size_t L, std::string label) {
  if (scale_index >= static_cast<std::size_t>(s.coefficients.rows())) {
    throw Error(Errc::contract_violation, "scale index outside the scalogram");
  }
  const Eigen::VectorXcd row = s.coefficients.row(static_cast<Eigen::Index>(scale_index)).transpose();
  return to_feature_vector(std::span<const std::complex<double>>(row.data(), static_cast<std::size_t>(row.size())),
                           L, std::move(label));
}

}  // namespace ppgauth::features
