#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ppgauth/features.hpp"

namespace ppgauth::subspace {

/// Labeled training vectors, one column per sample.
struct TrainingSet {
  Eigen::MatrixXd samples;                // L x N
  std::vector<std::size_t> class_index;   // N entries into class_ids
  std::vector<std::string> class_ids;     // K identities, first-seen order

  /// Groups by label. All vectors must share one length.
  static TrainingSet from_vectors(std::span<const features::FeatureVector> vectors);

  std::size_t dim() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t count() const { return static_cast<std::size_t>(samples.cols()); }
  std::size_t classes() const { return class_ids.size(); }
  std::vector<std::size_t> class_counts() const;

  /// K >= 2 and (when `two_per_class`) every class has at least two samples.
  void validate(bool two_per_class = true) const;
};

struct ScatterPair {
  Eigen::MatrixXd between;      // S_b, L x L
  Eigen::MatrixXd within;       // S_w, L x L
  Eigen::MatrixXd class_means;  // L x K
  Eigen::VectorXd grand_mean;   // L
};

/// Between- and within-class scatter, symmetrized.
ScatterPair scatter_matrices(const TrainingSet& ts);

enum class Method {
  lda,       // Fisher LDA, requires invertible S_w
  dlda,      // direct LDA (null space of S_b discarded first)
  pca,
  kpca,      // Gaussian-kernel PCA
  kdda,      // direct LDA in a Gaussian-kernel feature space
  pca_lda,   // PCA to at most N-K dimensions followed by Fisher LDA
  identity,  // no reduction; gallery holds raw feature vectors
};

std::string_view to_string(Method m);
Method parse_method(std::string_view text);
bool is_kernel(Method m);

struct SubspaceModel {
  Method method = Method::identity;
  std::size_t L = 0;
  std::size_t m = 0;

  /// Linear methods: L x m projection. Kernel methods: N x m coefficients
  /// applied to kernel evaluations against `training`.
  Eigen::MatrixXd W;
  Eigen::VectorXd eigenvalues;  // spectrum that ordered the kept directions
  Eigen::VectorXd mean;         // grand training mean

  Eigen::MatrixXd training;      // kernel methods only, L x N
  double sigma = 0.0;            // kernel width
  Eigen::VectorXd kernel_col_mean;  // mean training kernel column (centring)
  double kernel_mean = 0.0;

  std::vector<std::string> class_ids;
  std::vector<Eigen::MatrixXd> gallery;  // per class: m x N_k projected templates

  /// Index of `id` in class_ids; throws Errc::unknown_identity.
  std::size_t class_of(std::string_view id) const;
};

struct FitOptions {
  double eps_b = 1e-10;  // relative to the largest S_b eigenvalue
  double eps_w = 1e-10;  // relative to the largest S_w eigenvalue
};

/// m = 0 selects the default dimension: K-1 for discriminant methods, K-1
/// (number of subjects minus one) for PCA/KPCA.
SubspaceModel fit_lda(const TrainingSet& ts, std::size_t m = 0);
SubspaceModel fit_dlda(const TrainingSet& ts, std::size_t m = 0, const FitOptions& opts = {});
SubspaceModel fit_pca(const TrainingSet& ts, std::size_t m = 0);
SubspaceModel fit_kpca(const TrainingSet& ts, std::size_t m = 0, double sigma = 0.0);
SubspaceModel fit_kdda(const TrainingSet& ts, std::size_t m = 0, double sigma = 0.0, const FitOptions& opts = {});
SubspaceModel fit_pca_lda(const TrainingSet& ts, std::size_t m = 0);
SubspaceModel fit_identity(const TrainingSet& ts);

/// Dispatch on `method`. `sigma` <= 0 means the median heuristic.
SubspaceModel fit(Method method, const TrainingSet& ts, std::size_t m = 0, double sigma = 0.0);

/// Median Euclidean distance over all training pairs.
double median_pairwise_distance(const TrainingSet& ts);

/// W^T v for linear methods, v for identity, and kernel evaluations against
/// the training vectors (centred in feature space) for KPCA/KDDA. Length m.
Eigen::VectorXd project(const SubspaceModel& model, const Eigen::VectorXd& v);

/// Flips each column so its largest-magnitude entry is positive.
void fix_signs(Eigen::MatrixXd& columns);

}  // namespace ppgauth::subspace
