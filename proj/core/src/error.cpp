#include "ppgauth/error.hpp"

#include <atomic>
#include <iostream>

namespace ppgauth {

namespace {

void stderr_sink(std::string_view message) {
  std::cerr << "warning: " << message << '\n';
}

std::atomic<WarningSink> g_sink{&stderr_sink};

}  // namespace

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_config: return "invalid-config";
    case Errc::numeric_instability: return "numeric-instability";
    case Errc::insufficient_signal: return "insufficient-signal";
    case Errc::small_sample_size: return "small-sample-size";
    case Errc::degenerate_training: return "degenerate-training";
    case Errc::undefined_correlation: return "undefined-correlation";
    case Errc::undefined_normalization: return "undefined-normalization";
    case Errc::unknown_identity: return "unknown-identity";
    case Errc::contract_violation: return "contract-violation";
    case Errc::validation: return "validation";
    case Errc::io: return "io";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void set_warning_sink(WarningSink sink) noexcept {
  g_sink.store(sink != nullptr ? sink : &stderr_sink);
}

void warn(std::string_view message) { g_sink.load()(message); }

}  // namespace ppgauth
