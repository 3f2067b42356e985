#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ppgauth {

/// Physiological state a recording was captured in.
struct PhysState {
  enum class Kind { relax, exercise, emotion };

  Kind kind = Kind::relax;
  int emotion_index = 0;  // meaningful only for Kind::emotion

  static PhysState relax() { return {}; }
  static PhysState exercise() { return {Kind::exercise, 0}; }
  static PhysState emotion(int index) { return {Kind::emotion, index}; }

  /// Accepts "relax", "exercise", "emotion<k>" (e.g. "emotion7").
  static PhysState parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const PhysState&, const PhysState&) = default;
};

/// A sampled PPG trace plus its labels.
///
/// `settled_from` marks the first sample not affected by the filter's start-up
/// transient; it is zero for unfiltered recordings. Downstream stages ignore
/// everything before it.
struct RawRecording {
  std::vector<double> samples;
  double fs = 0.0;
  std::string subject_id;
  std::string session_id;
  PhysState state;
  std::size_t settled_from = 0;

  double duration_s() const { return fs > 0.0 ? static_cast<double>(samples.size()) / fs : 0.0; }

  /// Partition key used by the cross-partition protocols: "<session>:<state>".
  std::string partition() const { return session_id + ":" + state.to_string(); }

  /// Throws Errc::validation unless fs > 0, every sample is finite and the
  /// trace holds at least `min_seconds` of signal.
  void validate(double min_seconds = 10.0) const;
};

}  // namespace ppgauth
