#include "ppgauth/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>

#include "ppgauth/error.hpp"

namespace ppgauth::subspace {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::size_t resolve_dim(std::size_t m, std::size_t default_dim) { return m == 0 ? default_dim : m; }

// Phi_b: columns sqrt(N_k) (mu_k - mu), so S_b = Phi_b Phi_b^T.
MatrixXd between_factor(const TrainingSet& ts, const MatrixXd& means, const VectorXd& grand) {
  const auto counts = ts.class_counts();
  MatrixXd phi(ts.dim(), idx(ts.classes()));
  for (std::size_t k = 0; k < ts.classes(); ++k) {
    phi.col(idx(k)) = std::sqrt(static_cast<double>(counts[k])) * (means.col(idx(k)) - grand);
  }
  return phi;
}

// Phi_w: columns z_i - mu_{c(i)}, so S_w = Phi_w Phi_w^T.
MatrixXd within_factor(const TrainingSet& ts, const MatrixXd& means) {
  MatrixXd phi = ts.samples;
  for (std::size_t i = 0; i < ts.count(); ++i) phi.col(idx(i)) -= means.col(idx(ts.class_index[i]));
  return phi;
}

MatrixXd class_means(const TrainingSet& ts) {
  const auto counts = ts.class_counts();
  MatrixXd means = MatrixXd::Zero(ts.dim(), idx(ts.classes()));
  for (std::size_t i = 0; i < ts.count(); ++i) means.col(idx(ts.class_index[i])) += ts.samples.col(idx(i));
  for (std::size_t k = 0; k < ts.classes(); ++k) means.col(idx(k)) /= static_cast<double>(counts[k]);
  return means;
}

void normalize_columns(MatrixXd& w) {
  for (Index j = 0; j < w.cols(); ++j) {
    const double n = w.col(j).norm();
    if (n > 0.0) w.col(j) /= n;
  }
}

void check_columns(const MatrixXd& w) {
  for (Index j = 0; j < w.cols(); ++j) {
    if (!w.col(j).allFinite() || w.col(j).squaredNorm() == 0.0) {
      throw Error(Errc::numeric_instability, "projection column " + std::to_string(j) + " is zero or non-finite");
    }
  }
}

void build_gallery(SubspaceModel& model, const TrainingSet& ts) {
  model.class_ids = ts.class_ids;
  const auto counts = ts.class_counts();
  model.gallery.assign(ts.classes(), MatrixXd());
  for (std::size_t k = 0; k < ts.classes(); ++k) model.gallery[k].resize(idx(model.m), idx(counts[k]));
  std::vector<Index> fill(ts.classes(), 0);
  for (std::size_t i = 0; i < ts.count(); ++i) {
    const std::size_t k = ts.class_index[i];
    model.gallery[k].col(fill[k]++) = project(model, ts.samples.col(idx(i)));
  }
}

MatrixXd gaussian_gram(const MatrixXd& x, double sigma) {
  const Index n = x.cols();
  const VectorXd sq = x.colwise().squaredNorm().transpose();
  MatrixXd d2 = -2.0 * (x.transpose() * x);
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  MatrixXd k(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) k(i, j) = i == j ? 1.0 : std::exp(-std::max(0.0, d2(i, j)) * inv);
  }
  return 0.5 * (k + k.transpose());
}

VectorXd kernel_column(const MatrixXd& training, const VectorXd& v, double sigma) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  VectorXd k(training.cols());
  for (Index i = 0; i < training.cols(); ++i) k(i) = std::exp(-(training.col(i) - v).squaredNorm() * inv);
  return k;
}

double resolve_sigma(const TrainingSet& ts, double sigma) {
  if (sigma > 0.0) return sigma;
  const double s = median_pairwise_distance(ts);
  if (!(s > 0.0)) throw Error(Errc::degenerate_training, "all training vectors coincide; kernel width undefined");
  return s;
}

}  // namespace

TrainingSet TrainingSet::from_vectors(std::span<const features::FeatureVector> vectors) {
  TrainingSet ts;
  if (vectors.empty()) return ts;
  const Index L = vectors.front().values.size();
  ts.samples.resize(L, idx(vectors.size()));
  std::map<std::string, std::size_t> lookup;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& v = vectors[i];
    if (v.values.size() != L) throw Error(Errc::contract_violation, "training vectors differ in length");
    auto [it, inserted] = lookup.try_emplace(v.label, ts.class_ids.size());
    if (inserted) ts.class_ids.push_back(v.label);
    ts.class_index.push_back(it->second);
    ts.samples.col(idx(i)) = v.values;
  }
  return ts;
}

std::vector<std::size_t> TrainingSet::class_counts() const {
  std::vector<std::size_t> counts(classes(), 0);
  for (std::size_t c : class_index) ++counts[c];
  return counts;
}

void TrainingSet::validate(bool two_per_class) const {
  if (classes() < 2) throw Error(Errc::degenerate_training, "training needs at least two classes");
  if (class_index.size() != count()) throw Error(Errc::contract_violation, "class index does not match samples");
  if (two_per_class) {
    const auto counts = class_counts();
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] < 2) {
        throw Error(Errc::degenerate_training, "class '" + class_ids[k] + "' has fewer than two training vectors");
      }
    }
  }
  if (!samples.allFinite()) throw Error(Errc::contract_violation, "training vectors contain non-finite values");
}

ScatterPair scatter_matrices(const TrainingSet& ts) {
  ScatterPair s;
  s.class_means = class_means(ts);
  s.grand_mean = ts.samples.rowwise().mean();
  const MatrixXd pb = between_factor(ts, s.class_means, s.grand_mean);
  const MatrixXd pw = within_factor(ts, s.class_means);
  s.between = pb * pb.transpose();
  s.within = pw * pw.transpose();
  s.between = 0.5 * (s.between + s.between.transpose()).eval();
  s.within = 0.5 * (s.within + s.within.transpose()).eval();
  return s;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::lda: return "lda";
    case Method::dlda: return "dlda";
    case Method::pca: return "pca";
    case Method::kpca: return "kpca";
    case Method::kdda: return "kdda";
    case Method::pca_lda: return "pca-lda";
    case Method::identity: return "identity";
  }
  return "identity";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::lda, Method::dlda, Method::pca, Method::kpca, Method::kdda, Method::pca_lda,
                   Method::identity}) {
    if (to_string(m) == text) return m;
  }
  throw Error(Errc::invalid_config, "unknown subspace method '" + std::string(text) + "'");
}

bool is_kernel(Method m) { return m == Method::kpca || m == Method::kdda; }

std::size_t SubspaceModel::class_of(std::string_view id) const {
  for (std::size_t k = 0; k < class_ids.size(); ++k) {
    if (class_ids[k] == id) return k;
  }
  throw Error(Errc::unknown_identity, "identity '" + std::string(id) + "' is not enrolled");
}

void fix_signs(MatrixXd& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    Index arg = 0;
    columns.col(j).cwiseAbs().maxCoeff(&arg);
    if (columns(arg, j) < 0.0) columns.col(j) = -columns.col(j);
  }
}

SubspaceModel fit_lda(const TrainingSet& ts, std::size_t m) {
  ts.validate();
  m = resolve_dim(m, ts.classes() - 1);
  if (m > ts.dim()) throw Error(Errc::invalid_config, "LDA dimension exceeds the feature length");
  const auto s = scatter_matrices(ts);

  Eigen::SelfAdjointEigenSolver<MatrixXd> sw(s.within, Eigen::EigenvaluesOnly);
  const double top = sw.eigenvalues().maxCoeff();
  if (!(top > 0.0) || sw.eigenvalues().minCoeff() <= 1e-10 * top) {
    throw Error(Errc::small_sample_size,
                "within-class scatter is singular (" + std::to_string(ts.count()) + " samples, " +
                    std::to_string(ts.dim()) + " features); use DLDA");
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ge(s.between, s.within);
  if (ge.info() != Eigen::Success) throw Error(Errc::numeric_instability, "generalized eigensolve failed");
  const Index L = idx(ts.dim());
  SubspaceModel model;
  model.method = Method::lda;
  model.L = ts.dim();
  model.m = m;
  model.mean = s.grand_mean;
  model.W.resize(L, idx(m));
  model.eigenvalues.resize(idx(m));
  for (std::size_t j = 0; j < m; ++j) {
    model.W.col(idx(j)) = ge.eigenvectors().col(L - 1 - idx(j));
    model.eigenvalues(idx(j)) = ge.eigenvalues()(L - 1 - idx(j));
  }
  normalize_columns(model.W);
  fix_signs(model.W);
  check_columns(model.W);
  build_gallery(model, ts);
  return model;
}

SubspaceModel fit_dlda(const TrainingSet& ts, std::size_t m, const FitOptions& opts) {
  ts.validate();
  m = resolve_dim(m, ts.classes() - 1);
  const MatrixXd means = class_means(ts);
  const VectorXd grand = ts.samples.rowwise().mean();
  const MatrixXd pb = between_factor(ts, means, grand);

  // Eigenvectors of S_b from the K x K Gram matrix of its factor.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eb(pb.transpose() * pb);
  const VectorXd& lb = eb.eigenvalues();
  const double lb_max = lb.maxCoeff();
  if (!(lb_max > 0.0)) throw Error(Errc::degenerate_training, "between-class scatter is zero");
  std::vector<Index> keep;
  for (Index j = lb.size() - 1; j >= 0; --j) {
    if (lb(j) > opts.eps_b * lb_max) keep.push_back(j);
  }
  const Index q = idx(keep.size());
  // Z = Phi_b E Lambda^-1 spans range(S_b) and whitens it: Z^T S_b Z = I.
  MatrixXd z(ts.dim(), q);
  for (Index j = 0; j < q; ++j) z.col(j) = pb * eb.eigenvectors().col(keep[j]) / lb(keep[j]);

  const MatrixXd t = z.transpose() * within_factor(ts, means);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ew(t * t.transpose());
  VectorXd dw = ew.eigenvalues();  // ascending: most discriminative first
  const double floor = opts.eps_w * std::max(dw.maxCoeff(), 1.0);
  for (Index j = 0; j < dw.size(); ++j) dw(j) = std::max(dw(j), floor);

  if (m > static_cast<std::size_t>(q)) {
    warn("DLDA dimension reduced from " + std::to_string(m) + " to rank(S_b) = " + std::to_string(q));
    m = static_cast<std::size_t>(q);
  }
  SubspaceModel model;
  model.method = Method::dlda;
  model.L = ts.dim();
  model.m = m;
  model.mean = grand;
  model.W = z * ew.eigenvectors().leftCols(idx(m)) * dw.head(idx(m)).cwiseSqrt().cwiseInverse().asDiagonal();
  model.eigenvalues = dw.head(idx(m));
  fix_signs(model.W);
  check_columns(model.W);
  build_gallery(model, ts);
  return model;
}

SubspaceModel fit_pca(const TrainingSet& ts, std::size_t m) {
  ts.validate(false);
  m = resolve_dim(m, ts.classes() - 1);
  const VectorXd mean = ts.samples.rowwise().mean();
  const MatrixXd xc = ts.samples.colwise() - mean;
  const double n = static_cast<double>(ts.count());

  MatrixXd vectors;
  VectorXd values;
  if (ts.count() < ts.dim()) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(xc.transpose() * xc / n);
    values = es.eigenvalues().reverse();
    vectors = xc * es.eigenvectors().rowwise().reverse();
    for (Index j = 0; j < vectors.cols(); ++j) {
      const double norm = vectors.col(j).norm();
      if (norm > 0.0) vectors.col(j) /= norm;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(xc * xc.transpose() / n);
    values = es.eigenvalues().reverse();
    vectors = es.eigenvectors().rowwise().reverse();
  }
  const double top = values.size() > 0 ? values(0) : 0.0;
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(values.size()) && values(idx(rank)) > 1e-10 * top) ++rank;
  const bool full_basis = ts.count() >= ts.dim() && m == ts.dim();
  if (!full_basis && m > rank) {
    warn("PCA dimension reduced from " + std::to_string(m) + " to data rank " + std::to_string(rank));
    m = rank;
  }
  if (m == 0) throw Error(Errc::degenerate_training, "training data has zero variance");

  SubspaceModel model;
  model.method = Method::pca;
  model.L = ts.dim();
  model.m = m;
  model.mean = mean;
  model.W = vectors.leftCols(idx(m));
  model.eigenvalues = values.head(idx(m));
  fix_signs(model.W);
  check_columns(model.W);
  build_gallery(model, ts);
  return model;
}

SubspaceModel fit_kpca(const TrainingSet& ts, std::size_t m, double sigma) {
  ts.validate(false);
  m = resolve_dim(m, ts.classes() - 1);
  sigma = resolve_sigma(ts, sigma);
  const MatrixXd k = gaussian_gram(ts.samples, sigma);
  const VectorXd col_mean = k.colwise().mean().transpose();
  const double all_mean = k.mean();
  MatrixXd kc = k;
  kc.rowwise() -= col_mean.transpose();
  kc.colwise() -= col_mean;
  kc.array() += all_mean;
  kc = 0.5 * (kc + kc.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(kc);
  VectorXd values = es.eigenvalues().reverse();
  MatrixXd vectors = es.eigenvectors().rowwise().reverse();
  if (values.minCoeff() < -1e-10 * std::abs(values(0))) {
    warn("centred Gram matrix has negative eigenvalues; clipped at zero");
  }
  values = values.cwiseMax(0.0);
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(values.size()) && values(idx(rank)) > 1e-10 * values(0)) ++rank;
  if (m > rank) {
    warn("KPCA dimension reduced from " + std::to_string(m) + " to " + std::to_string(rank));
    m = rank;
  }
  if (m == 0) throw Error(Errc::degenerate_training, "kernel matrix has zero variance after centring");

  SubspaceModel model;
  model.method = Method::kpca;
  model.L = ts.dim();
  model.m = m;
  model.sigma = sigma;
  model.training = ts.samples;
  model.kernel_col_mean = col_mean;
  model.kernel_mean = all_mean;
  model.mean = ts.samples.rowwise().mean();
  model.W = vectors.leftCols(idx(m)) * values.head(idx(m)).cwiseSqrt().cwiseInverse().asDiagonal();
  model.eigenvalues = values.head(idx(m));
  fix_signs(model.W);
  check_columns(model.W);
  build_gallery(model, ts);
  return model;
}

SubspaceModel fit_kdda(const TrainingSet& ts, std::size_t m, double sigma, const FitOptions& opts) {
  ts.validate();
  m = resolve_dim(m, ts.classes() - 1);
  sigma = resolve_sigma(ts, sigma);
  const Index n = idx(ts.count());
  const Index kc = idx(ts.classes());
  const auto counts = ts.class_counts();
  const MatrixXd k = gaussian_gram(ts.samples, sigma);

  // Feature-space factors expressed as coefficient matrices on Phi:
  // Phi_b = Phi B and Phi_w = Phi C.
  MatrixXd b = MatrixXd::Constant(n, kc, 0.0);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < kc; ++c) {
      const double nk = static_cast<double>(counts[static_cast<std::size_t>(c)]);
      const double in_class = ts.class_index[static_cast<std::size_t>(i)] == static_cast<std::size_t>(c) ? 1.0 / nk : 0.0;
      b(i, c) = std::sqrt(nk) * (in_class - 1.0 / static_cast<double>(n));
    }
  }
  MatrixXd cw = MatrixXd::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    const std::size_t cj = ts.class_index[static_cast<std::size_t>(j)];
    const double inv = 1.0 / static_cast<double>(counts[cj]);
    for (Index i = 0; i < n; ++i) {
      if (ts.class_index[static_cast<std::size_t>(i)] == cj) cw(i, j) -= inv;
    }
  }

  MatrixXd gb = b.transpose() * k * b;
  gb = 0.5 * (gb + gb.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eb(gb);
  const VectorXd& lb = eb.eigenvalues();
  const double lb_max = lb.maxCoeff();
  if (!(lb_max > 0.0)) throw Error(Errc::degenerate_training, "kernel between-class scatter is zero");
  std::vector<Index> keep;
  for (Index j = lb.size() - 1; j >= 0; --j) {
    if (lb(j) > opts.eps_b * lb_max) keep.push_back(j);
  }
  const Index q = idx(keep.size());
  MatrixXd a(n, q);  // Z = Phi A
  for (Index j = 0; j < q; ++j) a.col(j) = b * eb.eigenvectors().col(keep[j]) / lb(keep[j]);

  const MatrixXd t = a.transpose() * k * cw;
  MatrixXd sw = t * t.transpose();
  sw = 0.5 * (sw + sw.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> ew(sw);
  VectorXd dw = ew.eigenvalues();
  const double floor = opts.eps_w * std::max(dw.maxCoeff(), 1.0);
  for (Index j = 0; j < dw.size(); ++j) dw(j) = std::max(dw(j), floor);

  if (m > static_cast<std::size_t>(q)) {
    warn("KDDA dimension reduced from " + std::to_string(m) + " to " + std::to_string(q));
    m = static_cast<std::size_t>(q);
  }
  SubspaceModel model;
  model.method = Method::kdda;
  model.L = ts.dim();
  model.m = m;
  model.sigma = sigma;
  model.training = ts.samples;
  model.mean = ts.samples.rowwise().mean();
  model.kernel_col_mean = k.rowwise().mean();
  model.W = a * ew.eigenvectors().leftCols(idx(m)) * dw.head(idx(m)).cwiseSqrt().cwiseInverse().asDiagonal();
  model.eigenvalues = dw.head(idx(m));
  fix_signs(model.W);
  check_columns(model.W);
  build_gallery(model, ts);
  return model;
}

SubspaceModel fit_pca_lda(const TrainingSet& ts, std::size_t m) {
  ts.validate();
  m = resolve_dim(m, ts.classes() - 1);
  // Reduce to at most N-K dimensions so the within-class scatter can be full rank.
  const std::size_t cap = std::min(ts.count() - ts.classes(), ts.dim());
  SubspaceModel pca = fit_pca(ts, std::max<std::size_t>(cap, 1));
  std::size_t keep = pca.m;
  while (true) {
    TrainingSet reduced;
    reduced.class_ids = ts.class_ids;
    reduced.class_index = ts.class_index;
    reduced.samples = pca.W.leftCols(idx(keep)).transpose() * ts.samples;
    try {
      SubspaceModel lda = fit_lda(reduced, std::min(m, keep));
      SubspaceModel model;
      model.method = Method::pca_lda;
      model.L = ts.dim();
      model.m = lda.m;
      model.mean = pca.mean;
      model.W = pca.W.leftCols(idx(keep)) * lda.W;
      model.eigenvalues = lda.eigenvalues;
      normalize_columns(model.W);
      fix_signs(model.W);
      check_columns(model.W);
      build_gallery(model, ts);
      return model;
    } catch (const Error& e) {
      if (e.code() != Errc::small_sample_size || keep <= 1) throw;
      keep = keep * 3 / 4;  // drop the weakest principal directions and retry
    }
  }
}

SubspaceModel fit_identity(const TrainingSet& ts) {
  ts.validate(false);
  SubspaceModel model;
  model.method = Method::identity;
  model.L = ts.dim();
  model.m = ts.dim();
  model.mean = ts.samples.rowwise().mean();
  build_gallery(model, ts);
  return model;
}

SubspaceModel fit(Method method, const TrainingSet& ts, std::size_t m, double sigma) {
  switch (method) {
    case Method::lda: return fit_lda(ts, m);
    case Method::dlda: return fit_dlda(ts, m);
    case Method::pca: return fit_pca(ts, m);
    case Method::kpca: return fit_kpca(ts, m, sigma);
    case Method::kdda: return fit_kdda(ts, m, sigma);
    case Method::pca_lda: return fit_pca_lda(ts, m);
    case Method::identity: return fit_identity(ts);
  }
  throw Error(Errc::invalid_config, "unhandled subspace method");
}

double median_pairwise_distance(const TrainingSet& ts) {
  const Index n = idx(ts.count());
  if (n < 2) return 0.0;
  const VectorXd sq = ts.samples.colwise().squaredNorm().transpose();
  const MatrixXd g = ts.samples.transpose() * ts.samples;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) d.push_back(std::sqrt(std::max(0.0, sq(i) + sq(j) - 2.0 * g(i, j))));
  }
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

Eigen::VectorXd project(const SubspaceModel& model, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != model.L) {
    throw Error(Errc::contract_violation, "vector length " + std::to_string(v.size()) + " does not match model L = " +
                                              std::to_string(model.L));
  }
  switch (model.method) {
    case Method::identity:
      return v;
    case Method::kpca: {
      VectorXd kx = kernel_column(model.training, v, model.sigma);
      const double mean_kx = kx.mean();
      kx = (kx - model.kernel_col_mean).array() - mean_kx + model.kernel_mean;
      return model.W.transpose() * kx;
    }
    case Method::kdda:
      return model.W.transpose() * (kernel_column(model.training, v, model.sigma) - model.kernel_col_mean);
    default:
      return model.W.transpose() * v;
  }
}

}  // namespace ppgauth::subspace
