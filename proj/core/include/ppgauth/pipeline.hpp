#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ppgauth/config.hpp"
#include "ppgauth/matching.hpp"
#include "ppgauth/preprocess.hpp"
#include "ppgauth/recording.hpp"
#include "ppgauth/subspace.hpp"

namespace ppgauth::pipeline {

/// A recording after filtering, peak detection and false-peak removal.
struct Prepared {
  RawRecording filtered;
  preprocess::PeakList peaks;
  std::size_t r = 0;  // median peak spacing in samples
};

Prepared prepare(const RawRecording& raw, const RunConfig& config);

/// Sample index where the training slice (the first train_seconds) ends.
std::size_t train_end(const RawRecording& rec, const RunConfig& config);

/// Unpadded feature rows for the units lying inside [begin, end), in time
/// order. CWT pipelines emit one |CWT| row per pair-averaged pulse segment at
/// the configured scale; ac-lda emits one autocorrelation per blind window.
/// Too little signal yields an empty result.
std::vector<std::vector<double>> feature_rows(const Prepared& p, const RunConfig& config, std::size_t begin,
                                              std::size_t end);

/// Index of the CWT scale the configuration selects.
std::size_t selected_scale(const RunConfig& config);

struct SubjectRows {
  std::string subject_id;
  std::vector<std::vector<double>> rows;
};

/// A fitted gallery plus everything needed to score claims against it.
struct Enrollment {
  RunConfig config;
  subspace::SubspaceModel model;
  Eigen::VectorXd offset;  // subtracted from feature vectors before projection
  double threshold = 0.0;  // equal-error operating point on the training data

  std::string fingerprint() const { return config.fingerprint(); }
  matching::Metric metric() const { return match_metric(config.method); }
};

/// Fits the configured subspace on the subjects' rows. L is the longest
/// training row; shorter rows are zero-padded. For linear subspaces the rows
/// are centred on their grand mean first, so projections carry no common
/// component for the Pearson distance to trip over. Subjects with fewer than
/// two rows make the enrollment fail with Errc::degenerate_training.
Enrollment fit_enrollment(std::span<const SubjectRows> subjects, const RunConfig& config);

/// Prepares each recording (one per subject) and enrolls on its training slice.
Enrollment enroll(std::span<const RawRecording> recordings, const RunConfig& config);

/// Pads or truncates rows to the model's L, removes the offset and projects.
std::vector<Eigen::VectorXd> project_rows(const Enrollment& e, std::span<const std::vector<double>> rows);

matching::MatchScore score_claim(const Enrollment& e, std::string_view claimed_id,
                                 std::span<const Eigen::VectorXd> projected);

/// Distances of every projected vector to every gallery class (K x n),
/// reduced over templates. Scores of consecutive runs follow from
/// `reduce_columns` without touching the gallery again.
Eigen::MatrixXd class_distances(const Enrollment& e, std::span<const Eigen::VectorXd> projected);
double reduce_columns(const Eigen::MatrixXd& distances, std::size_t class_index, std::size_t start, std::size_t count,
                      matching::Reduce over_tests);

}  // namespace ppgauth::pipeline
