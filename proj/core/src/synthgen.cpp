#include "ppgauth/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "ppgauth/error.hpp"

namespace ppgauth::synth {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::array<double, kIdentityParams> identity_params(const SubjectProfile& p, const CohortConfig& c) {
  auto norm = [](double v, const double (&range)[2]) { return (v - range[0]) / (range[1] - range[0]); };
  return {norm(p.systolic_width, c.systolic_width),         norm(p.systolic_position, c.systolic_position),
          norm(p.diastolic_amplitude, c.diastolic_amplitude), norm(p.diastolic_width, c.diastolic_width),
          norm(p.diastolic_position, c.diastolic_position), norm(p.base_hr_bpm, c.base_hr_bpm)};
}

double gaussian(double t, double centre, double width) {
  const double z = (t - centre) / width;
  return std::exp(-0.5 * z * z);
}

struct Morphology {
  double sys_amp, sys_width, sys_pos, dia_amp, dia_width, dia_pos;
};

Morphology perturbed(const SubjectProfile& p, const Condition& c) {
  Morphology m{p.systolic_amplitude,  p.systolic_width,  p.systolic_position,
               p.diastolic_amplitude, p.diastolic_width, p.diastolic_position};
  double gain = 0.0;
  std::uint64_t stream = 0;
  if (c.kind == Condition::Kind::time_lapse) {
    gain = p.drift_gain;
    stream = 0x7153;
  } else if (c.kind == Condition::Kind::emotion) {
    gain = p.emotion_gain;
    stream = 0xE000 + static_cast<std::uint64_t>(c.emotion_index);
  }
  if (gain > 0.0) {
    // The jitter depends on the subject and condition only, so every
    // recording of that condition shares it.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : p.subject_id) h = (h ^ ch) * 1099511628211ull;
    auto rng = make_rng(h, stream);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (double* v : {&m.sys_amp, &m.sys_width, &m.sys_pos, &m.dia_amp, &m.dia_width, &m.dia_pos}) {
      *v *= 1.0 + gain * n01(rng);
    }
    m.sys_pos = std::clamp(m.sys_pos, 0.05, 0.45);
    m.dia_pos = std::clamp(m.dia_pos, m.sys_pos + 0.1, 0.9);
  }
  if (c.kind == Condition::Kind::exercise) {
    m.dia_pos = m.sys_pos + (m.dia_pos - m.sys_pos) * (1.0 - p.exercise_compress);
  }
  return m;
}

}  // namespace

void SubjectProfile::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(Errc::validation, "profile '" + subject_id + "': " + what);
  };
  if (!(systolic_amplitude > 0.0 && diastolic_amplitude > 0.0)) fail("amplitudes must be positive");
  if (!(systolic_width > 0.0 && diastolic_width > 0.0)) fail("widths must be positive");
  for (double pos : {systolic_position, diastolic_position}) {
    if (!(pos > 0.0 && pos < 1.0)) fail("positions must lie in (0, 1)");
  }
  if (!(systolic_position < diastolic_position)) fail("systolic wave must precede the diastolic wave");
  if (!(base_hr_bpm >= 40.0 && base_hr_bpm <= 200.0)) fail("base heart rate must lie in [40, 200] bpm");
  if (hr_variability_bpm < 0.0) fail("heart-rate variability must be non-negative");
}

double profile_distance(const SubjectProfile& a, const SubjectProfile& b, const CohortConfig& config) {
  const auto pa = identity_params(a, config);
  const auto pb = identity_params(b, config);
  double d2 = 0.0;
  for (std::size_t i = 0; i < kIdentityParams; ++i) d2 += (pa[i] - pb[i]) * (pa[i] - pb[i]);
  return std::sqrt(d2);
}

std::vector<SubjectProfile> sample_cohort(std::size_t n, std::uint64_t seed, const CohortConfig& config) {
  if (n < 2) throw Error(Errc::invalid_config, "a cohort needs at least two subjects");
  const double diameter = std::sqrt(static_cast<double>(kIdentityParams));
  if (config.min_separation > diameter) {
    throw Error(Errc::invalid_config, "minimum separation exceeds the parameter-box diameter");
  }
  auto rng = make_rng(seed, 0xC0407);
  auto draw = [&rng](const double (&range)[2]) {
    return std::uniform_real_distribution<double>(range[0], range[1])(rng);
  };

  std::vector<SubjectProfile> cohort;
  std::size_t attempts = 0;
  while (cohort.size() < n) {
    if (++attempts > config.max_attempts) {
      throw Error(Errc::invalid_config, "cannot place " + std::to_string(n) + " subjects with separation " +
                                            std::to_string(config.min_separation));
    }
    SubjectProfile p;
    p.systolic_amplitude = 1.0;
    p.systolic_width = draw(config.systolic_width);
    p.systolic_position = draw(config.systolic_position);
    p.diastolic_amplitude = draw(config.diastolic_amplitude);
    p.diastolic_width = draw(config.diastolic_width);
    p.diastolic_position = draw(config.diastolic_position);
    p.base_hr_bpm = draw(config.base_hr_bpm);
    p.hr_variability_bpm = draw(config.hr_variability_bpm);
    p.exercise_gain = draw(config.exercise_gain);
    p.exercise_compress = draw(config.exercise_compress);
    p.drift_gain = draw(config.drift_gain);
    p.emotion_gain = draw(config.emotion_gain);
    bool ok = true;
    for (const auto& q : cohort) {
      if (profile_distance(p, q, config) < config.min_separation) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    char name[24];
    std::snprintf(name, sizeof name, "S%02zu", cohort.size() + 1);
    p.subject_id = name;
    p.validate();
    cohort.push_back(p);
  }
  return cohort;
}

PhysState Condition::state() const {
  switch (kind) {
    case Kind::exercise: return PhysState::exercise();
    case Kind::emotion: return PhysState::emotion(emotion_index);
    default: return PhysState::relax();
  }
}

std::string Condition::default_session() const { return kind == Kind::time_lapse ? "s2" : "s1"; }

std::string Condition::to_string() const {
  switch (kind) {
    case Kind::relax: return "relax";
    case Kind::exercise: return "exercise";
    case Kind::time_lapse: return "timelapse";
    case Kind::emotion: return "emotion" + std::to_string(emotion_index);
  }
  return "relax";
}

Condition Condition::parse(const std::string& text) {
  if (text == "relax") return {};
  if (text == "exercise") return {Kind::exercise, 0};
  if (text == "timelapse") return {Kind::time_lapse, 0};
  const PhysState s = PhysState::parse(text);
  if (s.kind == PhysState::Kind::emotion) return {Kind::emotion, s.emotion_index};
  throw Error(Errc::invalid_config, "unknown condition '" + text + "'");
}

SynthRecording render(const SubjectProfile& profile, const RenderOptions& opt) {
  profile.validate();
  if (!(opt.fs > 0.0)) throw Error(Errc::invalid_config, "sampling rate must be positive");
  if (opt.duration_s < 10.0) throw Error(Errc::invalid_config, "synthetic recordings must last at least 10 s");

  const auto n = static_cast<std::size_t>(std::llround(opt.duration_s * opt.fs));
  const Morphology m = perturbed(profile, opt.condition);
  double hr = profile.base_hr_bpm;
  if (opt.condition.kind == Condition::Kind::exercise) hr *= 1.0 + profile.exercise_gain;
  if (opt.condition.kind == Condition::Kind::emotion) {
    hr *= 1.0 + 0.5 * profile.emotion_gain * std::sin(1.7 * (opt.condition.emotion_index + 1));
  }

  auto rng = make_rng(opt.seed, 0xBEA7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Heart-rate variability: a respiratory sinus arrhythmia carrying most of
  // the variance plus a small independent beat-to-beat jitter.
  const double hrv = opt.constant_hr ? 0.0 : profile.hr_variability_bpm;
  const double rsa_amp = std::sqrt(2.0 * 0.9) * hrv;
  const double rsa_hz = 0.2 + 0.1 * unit(rng);
  const double rsa_phase = 2.0 * std::numbers::pi * unit(rng);
  std::normal_distribution<double> hr_jitter(0.0, std::sqrt(0.1) * hrv);

  SynthRecording out;
  auto& rec = out.recording;
  rec.fs = opt.fs;
  rec.subject_id = profile.subject_id;
  rec.session_id = opt.session_id.empty() ? opt.condition.default_session() : opt.session_id;
  rec.state = opt.condition.state();
  rec.samples.assign(n, 0.0);

  const double dt = 1.0 / opt.fs;
  double onset = -unit(rng) * 60.0 / hr;
  while (onset < opt.duration_s) {
    const double rsa = rsa_amp * std::sin(2.0 * std::numbers::pi * rsa_hz * onset + rsa_phase);
    const double beat_hr = std::clamp(hr + rsa + (hrv > 0.0 ? hr_jitter(rng) : 0.0), 30.0, 220.0);
    const double period = 60.0 / beat_hr;
    const double t_sys = onset + m.sys_pos * period;
    const double t_dia = onset + m.dia_pos * period;
    const double w_sys = m.sys_width * period, w_dia = m.dia_width * period;
    const double t_notch = 0.5 * (t_sys + t_dia), w_notch = 0.04 * period;

    const double lo_t = onset - 5.0 * std::max(w_sys, w_dia);
    const double hi_t = onset + period + 5.0 * std::max(w_sys, w_dia);
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(std::max(0.0, lo_t) * opt.fs));
    const auto hi = std::min(static_cast<std::ptrdiff_t>(n) - 1, static_cast<std::ptrdiff_t>(std::ceil(hi_t * opt.fs)));
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      const double t = static_cast<double>(i) * dt;
      double v = m.sys_amp * gaussian(t, t_sys, w_sys) + m.dia_amp * gaussian(t, t_dia, w_dia);
      if (opt.dicrotic_notch) v -= 0.15 * m.dia_amp * gaussian(t, t_notch, w_notch);
      rec.samples[static_cast<std::size_t>(i)] += v;
    }
    const double peak_sample = std::round(t_sys * opt.fs);
    if (peak_sample >= 0.0 && peak_sample < static_cast<double>(n)) {
      out.beat_peaks.push_back(static_cast<std::size_t>(peak_sample));
    }
    onset += period;
  }

  const double amp = profile.systolic_amplitude * opt.noise_level;
  std::normal_distribution<double> white(0.0, 1.0);
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    double v = rec.samples[i] + opt.dc_offset;
    if (amp > 0.0) {
      v += amp * white(rng);
      v += amp * std::sin(2.0 * std::numbers::pi * opt.baseline_hz * t + phase);
    }
    rec.samples[i] = v;
  }

  if (opt.motion_artifacts) {
    // Short high-amplitude bursts, roughly one every 20 s.
    const auto bursts = static_cast<std::size_t>(opt.duration_s / 20.0);
    for (std::size_t b = 0; b < bursts; ++b) {
      const auto start = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
      const auto len = static_cast<std::size_t>(0.3 * opt.fs);
      for (std::size_t i = start; i < std::min(n, start + len); ++i) {
        rec.samples[i] += 1.5 * profile.systolic_amplitude * std::sin(2.0 * std::numbers::pi * 7.0 * (i - start) * dt);
      }
    }
  }
  return out;
}

std::vector<SynthRecording> make_dataset(const DatasetSpec& spec) {
  const auto cohort = sample_cohort(spec.subjects, spec.seed, spec.cohort);
  std::vector<SynthRecording> out;
  out.reserve(cohort.size() * spec.conditions.size());
  for (std::size_t c = 0; c < spec.conditions.size(); ++c) {
    for (std::size_t s = 0; s < cohort.size(); ++s) {
      std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                        static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(c)};
      std::uint32_t words[2];
      seq.generate(words, words + 2);
      RenderOptions opt;
      opt.duration_s = spec.duration_s;
      opt.fs = spec.fs;
      opt.condition = spec.conditions[c];
      opt.noise_level = spec.noise_level;
      opt.constant_hr = spec.constant_hr;
      opt.dicrotic_notch = spec.dicrotic_notch;
      opt.motion_artifacts = spec.motion_artifacts;
      opt.seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
      out.push_back(render(cohort[s], opt));
    }
  }
  return out;
}

}  // namespace ppgauth::synth
