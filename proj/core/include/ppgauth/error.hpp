#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ppgauth {

/// Failure categories surfaced by the library. The CLI maps these to exit
/// codes and to the `error` field of its structured error record.
enum class Errc {
  invalid_config,
  numeric_instability,
  insufficient_signal,
  small_sample_size,
  degenerate_training,
  undefined_correlation,
  undefined_normalization,
  unknown_identity,
  contract_violation,
  validation,
  io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Optional sink for non-fatal diagnostics (reduced dimension, clipped
/// eigenvalues, excluded subjects). Defaults to standard error.
using WarningSink = void (*)(std::string_view message);

void set_warning_sink(WarningSink sink) noexcept;
void warn(std::string_view message);

}  // namespace ppgauth
