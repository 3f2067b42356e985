#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ppgauth/recording.hpp"

namespace ppgauth::synth {

/// Per-subject pulse morphology. Positions and widths are fractions of the
/// beat period; each beat is the sum of a systolic and a diastolic Gaussian.
struct SubjectProfile {
  std::string subject_id;
  double systolic_amplitude = 1.0;
  double systolic_width = 0.08;
  double systolic_position = 0.2;
  double diastolic_amplitude = 0.4;
  double diastolic_width = 0.14;
  double diastolic_position = 0.55;
  double base_hr_bpm = 70.0;
  double hr_variability_bpm = 2.0;

  double exercise_gain = 0.45;     // fractional HR increase after exercise
  double exercise_compress = 0.2;  // shrinks systolic->diastolic spacing
  double drift_gain = 0.04;        // relative morphology jitter after time lapse
  double emotion_gain = 0.01;      // relative morphology jitter per emotion

  /// Throws Errc::validation when amplitudes, positions or HR are out of range.
  void validate() const;
};

/// Parameter box the cohort is sampled from, and the minimum separation
/// (Euclidean, in box-normalized identity-parameter space) between subjects.
struct CohortConfig {
  double systolic_width[2] = {0.06, 0.11};
  double systolic_position[2] = {0.15, 0.28};
  double diastolic_amplitude[2] = {0.25, 0.6};
  double diastolic_width[2] = {0.10, 0.20};
  double diastolic_position[2] = {0.45, 0.65};
  double base_hr_bpm[2] = {55.0, 95.0};
  double hr_variability_bpm[2] = {1.0, 3.0};
  double exercise_gain[2] = {0.3, 0.6};
  double exercise_compress[2] = {0.1, 0.3};
  double drift_gain[2] = {0.03, 0.08};
  double emotion_gain[2] = {0.005, 0.02};
  double min_separation = 0.15;
  std::size_t max_attempts = 100000;
};

/// Number of identity-bearing parameters the separation is measured over.
inline constexpr std::size_t kIdentityParams = 6;

/// Box-normalized distance between two profiles' identity parameters.
double profile_distance(const SubjectProfile& a, const SubjectProfile& b, const CohortConfig& config = {});

/// Rejection-samples `n` (>= 2) pairwise-separated profiles named
/// "S01", "S02", ... Errc::invalid_config when the separation is infeasible.
std::vector<SubjectProfile> sample_cohort(std::size_t n, std::uint64_t seed, const CohortConfig& config = {});

/// Recording condition. time_lapse is a relax recording made weeks later.
struct Condition {
  enum class Kind { relax, exercise, time_lapse, emotion };
  Kind kind = Kind::relax;
  int emotion_index = 0;

  PhysState state() const;
  std::string default_session() const;  // "s1" or "s2" for time_lapse
  std::string to_string() const;
  static Condition parse(const std::string& text);
};

struct RenderOptions {
  double duration_s = 60.0;
  double fs = 300.0;
  Condition condition;
  double noise_level = 0.0;     // white noise std and wander amplitude, relative to systolic amplitude
  double baseline_hz = 0.2;
  double dc_offset = 2.0;
  bool constant_hr = false;     // disable per-beat HR variability
  bool dicrotic_notch = false;  // third, negative Gaussian between the two waves
  bool motion_artifacts = false;
  std::uint64_t seed = 0;
  std::string session_id;       // empty: condition default
};

struct SynthRecording {
  RawRecording recording;
  std::vector<std::size_t> beat_peaks;  // ground-truth systolic sample indices
};

/// Pure function of (profile, options): identical inputs give bit-identical samples.
SynthRecording render(const SubjectProfile& profile, const RenderOptions& options);

/// A whole synthetic dataset: every subject rendered under every condition.
struct DatasetSpec {
  std::size_t subjects = 10;
  std::uint64_t seed = 1;
  double duration_s = 60.0;
  double fs = 300.0;
  double noise_level = 0.0;
  std::vector<Condition> conditions{Condition{}};
  bool constant_hr = false;
  bool dicrotic_notch = false;
  bool motion_artifacts = false;
  CohortConfig cohort;
};

/// Recordings ordered by condition, then subject. Each recording's noise
/// stream is seeded from (seed, subject, condition).
std::vector<SynthRecording> make_dataset(const DatasetSpec& spec);

}  // namespace ppgauth::synth
