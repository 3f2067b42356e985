#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppgauth/features.hpp"
#include "ppgauth/matching.hpp"
#include "ppgauth/preprocess.hpp"
#include "ppgauth/subspace.hpp"

namespace ppgauth {

/// End-to-end verification pipelines selectable with `--method`.
enum class PipelineMethod { cwt_dlda, cwt_lda, cwt_pca, cwt_kpca, cwt_kdda, openset, ac_lda };

std::string_view to_string(PipelineMethod m);
PipelineMethod parse_pipeline_method(std::string_view text);
const std::vector<PipelineMethod>& all_pipeline_methods();

/// Subspace learner behind each pipeline. cwt-lda and ac-lda run Fisher LDA
/// after a PCA step that makes the within-class scatter invertible.
subspace::Method subspace_method(PipelineMethod m);
matching::Metric match_metric(PipelineMethod m);
bool uses_autocorrelation(PipelineMethod m);

struct ProtocolConfig {
  double train_seconds = 45.0;
  std::vector<std::size_t> n_test{2, 5, 10, 20, 30, 40, 50, 100, 0};  // 0 = all segments
  std::size_t iterations = 50;
  std::uint64_t seed = 1;
};

struct RunConfig {
  preprocess::FilterConfig filter;
  double prominence_fraction = 0.25;
  preprocess::HrBand hr_relax{40.0, 140.0};
  preprocess::HrBand hr_exercise{40.0, 200.0};
  preprocess::HrBand hr_emotion{40.0, 140.0};

  features::MorseParams morse;
  double grid_min_hz = 0.25;
  double grid_max_hz = 8.0;
  int voices_per_octave = 8;
  features::ScalePolicy scale = features::ByBand{1.0, 2.0};

  PipelineMethod method = PipelineMethod::cwt_dlda;
  std::size_t m = 0;          // 0: number of enrolled subjects minus one
  double kernel_sigma = 0.0;  // <= 0: median pairwise training distance
  matching::Aggregation aggregation;

  double ac_window_s = 5.0;
  double ac_overlap = 0.5;
  std::size_t ac_lags = 0;       // 0: round(1.2 * fs / typical HR in Hz)
  double ac_typical_hr_bpm = 75.0;

  ProtocolConfig protocol;

  preprocess::HrBand hr_band(PhysState state) const;
  std::size_t autocorr_lags(double fs) const;

  /// Throws Errc::invalid_config when a value violates its stage's precondition.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);

  /// Stable 16-hex-digit hash over everything that shapes a gallery
  /// (preprocessing, features, method, dimensions, matching); protocol
  /// settings are excluded.
  std::string fingerprint() const;
  nlohmann::json enrollment_json() const;
};

RunConfig load_config(const std::filesystem::path& path);

}  // namespace ppgauth
