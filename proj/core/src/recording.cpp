#include "ppgauth/recording.hpp"

#include <charconv>
#include <cmath>

#include "ppgauth/error.hpp"

namespace ppgauth {

PhysState PhysState::parse(std::string_view text) {
  if (text == "relax") return relax();
  if (text == "exercise") return exercise();
  constexpr std::string_view prefix = "emotion";
  if (text.starts_with(prefix)) {
    auto digits = text.substr(prefix.size());
    int index = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty() && index >= 0) {
      return emotion(index);
    }
  }
  throw Error(Errc::validation, "unrecognised state '" + std::string(text) + "'");
}

std::string PhysState::to_string() const {
  switch (kind) {
    case Kind::relax: return "relax";
    case Kind::exercise: return "exercise";
    case Kind::emotion: return "emotion" + std::to_string(emotion_index);
  }
  return "relax";
}

void RawRecording::validate(double min_seconds) const {
  const std::string who = "recording of subject '" + subject_id + "'";
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw Error(Errc::validation, who + ": sampling rate must be positive");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error(Errc::validation, who + ": non-finite sample");
  }
  if (static_cast<double>(samples.size()) < min_seconds * fs) {
    throw Error(Errc::validation, who + ": shorter than " + std::to_string(min_seconds) + " s");
  }
}

}  // namespace ppgauth
