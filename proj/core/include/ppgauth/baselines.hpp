#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ppgauth/matching.hpp"
#include "ppgauth/recording.hpp"
#include "ppgauth/subspace.hpp"

namespace ppgauth::baselines {

struct Window {
  std::size_t start = 0;  // sample offset into the recording
  std::vector<double> values;
};

/// Fixed-length windows at stride round((1 - overlap) * win_len_s * fs)
/// samples, tiled from `begin` while they fit before `end`. No peak
/// detection is involved.
std::vector<Window> blind_windows(const RawRecording& rec, double win_len_s, double overlap, std::size_t begin,
                                  std::size_t end);
std::vector<Window> blind_windows(const RawRecording& rec, double win_len_s, double overlap);

/// Normalized autocorrelation for lags 0..M-1:
///   R[m] = sum_{i=0}^{N-m-1} x[i] x[i+m] / sum_i x[i]^2
/// (biased, no 1/(N-m) correction). R[0] is exactly 1.
struct AcWindow {
  std::vector<double> values;
  std::size_t source_start = 0;
  std::size_t source_length = 0;
};

AcWindow normalized_autocorr(std::span<const double> window, std::size_t M);

/// Fits the AC/LDA gallery (PCA followed by Fisher LDA) on labeled AC vectors.
subspace::SubspaceModel acda_fit(const subspace::TrainingSet& ts, std::size_t lda_dim = 0);

/// Euclidean-distance claim score for AC/LDA.
matching::MatchScore acda_score(const subspace::SubspaceModel& model, std::string_view claimed_id,
                                std::span<const Eigen::VectorXd> test_vectors, matching::Aggregation agg = {});

/// Open-set validation: CWT feature vectors stored without reduction and
/// matched by Pearson distance with the usual aggregation policy.
subspace::SubspaceModel openset_gallery(const subspace::TrainingSet& ts);
matching::MatchScore openset_match(const subspace::SubspaceModel& gallery, std::string_view claimed_id,
                                   std::span<const Eigen::VectorXd> test_vectors, matching::Aggregation agg = {});

}  // namespace ppgauth::baselines
