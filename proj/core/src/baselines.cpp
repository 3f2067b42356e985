#include "ppgauth/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ppgauth/error.hpp"

namespace ppgauth::baselines {

std::vector<Window> blind_windows(const RawRecording& rec, double win_len_s, double overlap, std::size_t begin,
                                  std::size_t end) {
  if (!(win_len_s > 0.0) || !(overlap >= 0.0 && overlap < 1.0)) {
    throw Error(Errc::invalid_config, "window length must be positive and overlap in [0, 1)");
  }
  end = std::min(end, rec.samples.size());
  const auto len = static_cast<std::size_t>(std::lround(win_len_s * rec.fs));
  if (len == 0 || begin >= end || len > end - begin) {
    throw Error(Errc::insufficient_signal, "window longer than the available signal");
  }
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround((1.0 - overlap) * win_len_s * rec.fs)));
  std::vector<Window> out;
  for (std::size_t s = begin; s + len <= end; s += stride) {
    Window w;
    w.start = s;
    w.values.assign(rec.samples.begin() + static_cast<std::ptrdiff_t>(s),
                    rec.samples.begin() + static_cast<std::ptrdiff_t>(s + len));
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Window> blind_windows(const RawRecording& rec, double win_len_s, double overlap) {
  return blind_windows(rec, win_len_s, overlap, rec.settled_from, rec.samples.size());
}

AcWindow normalized_autocorr(std::span<const double> window, std::size_t M) {
  const std::size_t n = window.size();
  if (M < 1 || M > n) throw Error(Errc::contract_violation, "lag count must satisfy 1 <= M <= window length");
  double r0 = 0.0;
  for (double v : window) r0 += v * v;
  if (!(r0 > 0.0)) throw Error(Errc::undefined_normalization, "all-zero window has no autocorrelation");
  AcWindow ac;
  ac.source_length = n;
  ac.values.resize(M);
  ac.values[0] = 1.0;
  for (std::size_t m = 1; m < M; ++m) {
    double acc = 0.0;
    for (std::size_t i = 0; i + m < n; ++i) acc += window[i] * window[i + m];
    ac.values[m] = acc / r0;
  }
  return ac;
}

subspace::SubspaceModel acda_fit(const subspace::TrainingSet& ts, std::size_t lda_dim) {
  return subspace::fit_pca_lda(ts, lda_dim);
}

matching::MatchScore acda_score(const subspace::SubspaceModel& model, std::string_view claimed_id,
                                std::span<const Eigen::VectorXd> test_vectors, matching::Aggregation agg) {
  return matching::claim_score(model, claimed_id, test_vectors, agg, matching::Metric::euclidean);
}

subspace::SubspaceModel openset_gallery(const subspace::TrainingSet& ts) { return subspace::fit_identity(ts); }

matching::MatchScore openset_match(const subspace::SubspaceModel& gallery, std::string_view claimed_id,
                                   std::span<const Eigen::VectorXd> test_vectors, matching::Aggregation agg) {
  if (gallery.method != subspace::Method::identity) {
    throw Error(Errc::contract_violation, "open-set matching needs an unreduced gallery");
  }
  return matching::claim_score(gallery, claimed_id, test_vectors, agg, matching::Metric::pearson);
}

}  // namespace ppgauth::baselines
