#include "ppgauth/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppgauth/error.hpp"

namespace ppgauth::preprocess {

std::vector<double> filter_samples(std::span<const double> samples, const SosFilter& filter) {
  const std::size_t head =
      std::min<std::size_t>(samples.size(), std::max<std::size_t>(1, static_cast<std::size_t>(filter.fs())));
  double offset = 0.0;
  for (std::size_t i = 0; i < head; ++i) offset += samples[i];
  offset = head > 0 ? offset / static_cast<double>(head) : 0.0;

  std::vector<double> centred(samples.begin(), samples.end());
  for (double& v : centred) v -= offset;
  auto out = filter.apply(centred);
  for (double v : out) {
    if (!std::isfinite(v)) throw Error(Errc::numeric_instability, "band-pass output is not finite");
  }
  return out;
}

void normalize_range(std::vector<double>& values, std::size_t from) {
  if (from >= values.size()) return;
  const auto [lo, hi] = std::minmax_element(values.begin() + static_cast<std::ptrdiff_t>(from), values.end());
  const double min = *lo, range = *hi - *lo;
  if (!(range > 0.0)) return;
  for (double& v : values) v = (v - min) / range;
}

RawRecording bandpass_filter(const RawRecording& rec, const FilterConfig& config) {
  const auto filter = butterworth_bandpass(config.low_hz, config.high_hz, config.order, rec.fs);
  RawRecording out = rec;
  out.samples = filter_samples(rec.samples, filter);
  out.settled_from = std::min(out.samples.size(), static_cast<std::size_t>(std::lround(config.settle_s * rec.fs)));
  normalize_range(out.samples, out.settled_from);
  return out;
}

PeakList detect_peaks(const RawRecording& rec, double prominence_fraction) {
  PeakList peaks;
  const auto& x = rec.samples;
  const std::size_t begin = rec.settled_from;
  const std::size_t n = x.size();
  if (n < begin + 3) return peaks;

  std::vector<double> sq(n);
  for (std::size_t i = begin; i < n; ++i) sq[i] = x[i] * x[i];
  const auto [lo, hi] = std::minmax_element(sq.begin() + static_cast<std::ptrdiff_t>(begin), sq.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return peaks;
  const double threshold = prominence_fraction * range;

  std::size_t i = begin + 1;
  while (i + 1 < n) {
    if (sq[i] > sq[i - 1]) {
      // Walk across a possible plateau.
      std::size_t j = i;
      while (j + 1 < n && sq[j + 1] == sq[i]) ++j;
      if (j + 1 < n && sq[j + 1] < sq[i]) {
        const std::size_t peak = i + (j - i) / 2;
        const double v = sq[peak];

        double left_min = v;
        for (std::size_t k = i; k-- > begin;) {
          if (sq[k] > v) break;
          left_min = std::min(left_min, sq[k]);
        }
        double right_min = v;
        for (std::size_t k = j + 1; k < n; ++k) {
          if (sq[k] > v) break;
          right_min = std::min(right_min, sq[k]);
        }
        const double prominence = v - std::max(left_min, right_min);
        if (prominence > threshold) {
          peaks.indices.push_back(peak);
          peaks.prominences.push_back(prominence);
        }
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  return peaks;
}

HrBand default_hr_band(PhysState state) {
  if (state.kind == PhysState::Kind::exercise) return {40.0, 200.0};
  return {40.0, 140.0};
}

PeakList remove_false_peaks(const PeakList& peaks, double fs, HrBand band) {
  PeakList out = peaks;
  if (out.prominences.size() != out.indices.size()) out.prominences.assign(out.indices.size(), 0.0);

  auto bpm = [fs](std::size_t a, std::size_t b) { return 60.0 * fs / static_cast<double>(b - a); };
  auto too_fast = [&](std::size_t a, std::size_t b) { return bpm(a, b) > band.max_bpm; };

  auto erase_at = [&out](std::size_t k) {
    out.indices.erase(out.indices.begin() + static_cast<std::ptrdiff_t>(k));
    out.prominences.erase(out.prominences.begin() + static_cast<std::ptrdiff_t>(k));
  };

  std::size_t k = 0;
  while (k + 1 < out.indices.size()) {
    const auto& idx = out.indices;
    if (!too_fast(idx[k], idx[k + 1])) {
      ++k;
      continue;
    }
    // Would dropping the left (k) or right (k+1) peak leave plausible pairs?
    const bool left_ok = k == 0 || !too_fast(idx[k - 1], idx[k + 1]);
    const bool right_ok = k + 2 >= idx.size() || !too_fast(idx[k], idx[k + 2]);
    std::size_t victim;
    if (left_ok != right_ok) {
      victim = left_ok ? k : k + 1;
    } else {
      victim = out.prominences[k] < out.prominences[k + 1] ? k : k + 1;
    }
    erase_at(victim);
    if (k > 0) --k;  // the new pair to the left must be re-checked
  }
  return out;
}

std::size_t median_spacing(const PeakList& peaks) {
  if (peaks.size() < 2) throw Error(Errc::insufficient_signal, "at least two peaks are needed to estimate r");
  std::vector<std::size_t> gaps(peaks.size() - 1);
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) gaps[i] = peaks.indices[i + 1] - peaks.indices[i];
  std::sort(gaps.begin(), gaps.end());
  const std::size_t m = gaps.size() / 2;
  if (gaps.size() % 2 == 1) return gaps[m];
  return static_cast<std::size_t>(std::lround((static_cast<double>(gaps[m - 1]) + static_cast<double>(gaps[m])) / 2.0));
}

std::vector<PulseSegment> segment(const RawRecording& rec, const PeakList& peaks) {
  return segment(rec, peaks, median_spacing(peaks), rec.settled_from, rec.samples.size());
}

std::vector<PulseSegment> segment(const RawRecording& rec, const PeakList& peaks, std::size_t r,
                                  std::size_t begin, std::size_t end) {
  end = std::min(end, rec.samples.size());
  if (r == 0) throw Error(Errc::insufficient_signal, "median peak spacing is zero");
  const std::size_t len = 4 * r + 1;
  if (begin >= end || len > end - begin) {
    throw Error(Errc::insufficient_signal,
                "segment length " + std::to_string(len) + " exceeds the available signal");
  }
  std::vector<PulseSegment> out;
  for (std::size_t i : peaks.indices) {
    if (i < begin + 2 * r || i + 2 * r >= end) continue;
    PulseSegment s;
    s.r = r;
    s.center_peak_index = i;
    const auto first = rec.samples.begin() + static_cast<std::ptrdiff_t>(i - 2 * r);
    s.values.assign(first, first + static_cast<std::ptrdiff_t>(len));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PulseSegment> average_pairs(std::span<const PulseSegment> segments) {
  if (segments.size() < 2) throw Error(Errc::insufficient_signal, "need at least two segments to average");
  std::vector<PulseSegment> out;
  out.reserve(segments.size() / 2);
  for (std::size_t j = 0; j + 1 < segments.size(); j += 2) {
    const auto& a = segments[j];
    const auto& b = segments[j + 1];
    if (a.values.size() != b.values.size()) {
      throw Error(Errc::contract_violation, "segments to average differ in length");
    }
    PulseSegment s;
    s.r = a.r;
    s.center_peak_index = a.center_peak_index;
    s.values.resize(a.values.size());
    for (std::size_t t = 0; t < s.values.size(); ++t) s.values[t] = 0.5 * (a.values[t] + b.values[t]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ppgauth::preprocess
