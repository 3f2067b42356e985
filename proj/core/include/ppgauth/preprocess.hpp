#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ppgauth/filter.hpp"
#include "ppgauth/recording.hpp"

namespace ppgauth::preprocess {

struct FilterConfig {
  double low_hz = 0.5;
  double high_hz = 5.0;
  int order = 38;
  double settle_s = 2.0;  // causal start-up transient excluded downstream
};

/// Removes the initial offset (mean of the first second) and runs the
/// band-pass. No normalization: this stage is linear in the input.
std::vector<double> filter_samples(std::span<const double> samples, const SosFilter& filter);

/// Full filtering stage: offset removal, causal band-pass, then min/max
/// normalization of the settled part into [0, 1]. Sets `settled_from`.
/// A flat output (zero range) is returned unscaled.
RawRecording bandpass_filter(const RawRecording& rec, const FilterConfig& config = {});

/// Maps values[from..] affinely onto [0, 1] using their own min and max;
/// samples before `from` are scaled with the same map. Zero range is a no-op.
void normalize_range(std::vector<double>& values, std::size_t from = 0);

struct PeakList {
  std::vector<std::size_t> indices;  // strictly increasing
  std::vector<double> prominences;   // parallel to indices

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

/// Squares the signal and keeps local maxima whose topographic prominence
/// exceeds `prominence_fraction` times the squared signal's range. Only
/// samples at or after `rec.settled_from` are considered.
PeakList detect_peaks(const RawRecording& rec, double prominence_fraction = 0.25);

struct HrBand {
  double min_bpm = 40.0;
  double max_bpm = 140.0;
};

/// Relax and emotion recordings: [40, 140] bpm; exercise: [40, 200] bpm.
HrBand default_hr_band(PhysState state);

/// Drops peaks that imply a heart rate above the band. For an offending
/// adjacent pair, the peak whose removal makes its new neighbours plausible
/// is removed; if both or neither qualify, the lower-prominence one goes.
/// Gaps slower than the band (missed beats) cannot be repaired by removal and
/// are kept. Idempotent.
PeakList remove_false_peaks(const PeakList& peaks, double fs, HrBand band);

struct PulseSegment {
  std::vector<double> values;  // 4r + 1 samples
  std::size_t r = 0;
  std::size_t center_peak_index = 0;
};

/// Median spacing of adjacent peaks in samples, rounded to the nearest
/// integer. Throws Errc::insufficient_signal for fewer than two peaks.
std::size_t median_spacing(const PeakList& peaks);

/// One window [i - 2r, i + 2r] per peak, with r the median peak spacing.
/// Windows leaving [rec.settled_from, size) are skipped.
std::vector<PulseSegment> segment(const RawRecording& rec, const PeakList& peaks);

/// As above with explicit r and an explicit sample range [begin, end) that
/// every window must lie inside.
std::vector<PulseSegment> segment(const RawRecording& rec, const PeakList& peaks, std::size_t r,
                                  std::size_t begin, std::size_t end);

/// Element-wise mean of segments (2j, 2j+1); a trailing odd segment is dropped.
std::vector<PulseSegment> average_pairs(std::span<const PulseSegment> segments);

}  // namespace ppgauth::preprocess
