#include "ppgauth/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ppgauth/baselines.hpp"
#include "ppgauth/error.hpp"
#include "ppgauth/eval.hpp"
#include "ppgauth/features.hpp"

namespace ppgauth::pipeline {

using Eigen::Index;

Prepared prepare(const RawRecording& raw, const RunConfig& config) {
  raw.validate();
  Prepared p;
  p.filtered = preprocess::bandpass_filter(raw, config.filter);
  const auto peaks = preprocess::detect_peaks(p.filtered, config.prominence_fraction);
  p.peaks = preprocess::remove_false_peaks(peaks, raw.fs, config.hr_band(raw.state));
  p.r = preprocess::median_spacing(p.peaks);
  return p;
}

std::size_t train_end(const RawRecording& rec, const RunConfig& config) {
  const auto n = static_cast<std::size_t>(std::llround(config.protocol.train_seconds * rec.fs));
  return std::min(n, rec.samples.size());
}

std::size_t selected_scale(const RunConfig& config) {
  const auto grid = features::make_scale_grid(config.morse, config.grid_min_hz, config.grid_max_hz,
                                              config.voices_per_octave);
  return features::select_scale(grid, config.scale);
}

std::vector<std::vector<double>> feature_rows(const Prepared& p, const RunConfig& config, std::size_t begin,
                                              std::size_t end) {
  const auto& rec = p.filtered;
  begin = std::max(begin, rec.settled_from);
  end = std::min(end, rec.samples.size());
  std::vector<std::vector<double>> rows;
  if (begin >= end) return rows;

  if (uses_autocorrelation(config.method)) {
    const auto len = static_cast<std::size_t>(std::lround(config.ac_window_s * rec.fs));
    if (len == 0 || len > end - begin) return rows;
    const std::size_t lags = std::min(config.autocorr_lags(rec.fs), len);
    for (auto& w : baselines::blind_windows(rec, config.ac_window_s, config.ac_overlap, begin, end)) {
      const double mean = std::accumulate(w.values.begin(), w.values.end(), 0.0) / static_cast<double>(w.values.size());
      for (double& v : w.values) v -= mean;
      try {
        rows.push_back(baselines::normalized_autocorr(w.values, lags).values);
      } catch (const Error& e) {
        if (e.code() != Errc::undefined_normalization) throw;
      }
    }
    return rows;
  }

  if (end - begin < 4 * p.r + 1) return rows;
  const auto segments = preprocess::segment(rec, p.peaks, p.r, begin, end);
  if (segments.size() < 2) return rows;
  const auto averaged = preprocess::average_pairs(segments);
  const auto grid = features::make_scale_grid(config.morse, config.grid_min_hz, config.grid_max_hz,
                                              config.voices_per_octave);
  const double scale = grid.scales[features::select_scale(grid, config.scale)];
  rows.reserve(averaged.size());
  for (const auto& s : averaged) {
    const auto coeffs = features::cwt_row(s.values, scale, config.morse, rec.fs);
    std::vector<double> mag(coeffs.size());
    std::transform(coeffs.begin(), coeffs.end(), mag.begin(), [](const auto& c) { return std::abs(c); });
    rows.push_back(std::move(mag));
  }
  return rows;
}

namespace {

// Leave-one-out scores of the training templates: each template against its
// own class without itself (genuine) and against every other class.
double calibrate_threshold(const Enrollment& e) {
  const auto& model = e.model;
  const auto metric = e.metric();
  const auto over = e.config.aggregation.over_templates;
  eval::ScoreSet scores;
  for (std::size_t k = 0; k < model.gallery.size(); ++k) {
    const auto& own = model.gallery[k];
    for (Index j = 0; j < own.cols(); ++j) {
      const Eigen::VectorXd v = own.col(j);
      if (own.cols() > 1) {
        Eigen::MatrixXd rest(own.rows(), own.cols() - 1);
        rest << own.leftCols(j), own.rightCols(own.cols() - j - 1);
        scores.genuine.push_back(matching::class_distance(rest, v, metric, over));
      }
      for (std::size_t c = 0; c < model.gallery.size(); ++c) {
        if (c != k) scores.imposter.push_back(matching::class_distance(model.gallery[c], v, metric, over));
      }
    }
  }
  if (scores.genuine.empty() || scores.imposter.empty()) return 0.0;
  return eval::eer_point(scores).threshold;
}

}  // namespace

Enrollment fit_enrollment(std::span<const SubjectRows> subjects, const RunConfig& config) {
  config.validate();
  std::string short_subjects;
  std::size_t L = 0;
  for (const auto& s : subjects) {
    if (s.rows.size() < 2) short_subjects += (short_subjects.empty() ? "" : ", ") + s.subject_id;
    for (const auto& r : s.rows) L = std::max(L, r.size());
  }
  if (!short_subjects.empty()) {
    throw Error(Errc::degenerate_training, "fewer than two usable training segments for: " + short_subjects);
  }
  if (subjects.size() < 2) throw Error(Errc::degenerate_training, "enrollment needs at least two subjects");

  std::vector<features::FeatureVector> vectors;
  for (const auto& s : subjects) {
    for (const auto& r : s.rows) vectors.push_back({features::fit_length(r, L), s.subject_id});
  }
  auto ts = subspace::TrainingSet::from_vectors(vectors);
  if (ts.classes() != subjects.size()) throw Error(Errc::degenerate_training, "duplicate subject ids in enrollment");

  Enrollment e;
  e.config = config;
  const auto method = subspace_method(config.method);
  e.offset = Eigen::VectorXd::Zero(static_cast<Index>(L));
  if (method != subspace::Method::identity && !subspace::is_kernel(method)) {
    e.offset = ts.samples.rowwise().mean();
    ts.samples.colwise() -= e.offset;
  }
  e.model = subspace::fit(method, ts, config.m, config.kernel_sigma);
  if (e.metric() == matching::Metric::pearson && e.model.m < 2) {
    throw Error(Errc::invalid_config, "Pearson matching needs at least two projected dimensions, got m=" +
                                          std::to_string(e.model.m) + "; enroll three or more subjects or raise m");
  }
  e.threshold = calibrate_threshold(e);
  return e;
}

Enrollment enroll(std::span<const RawRecording> recordings, const RunConfig& config) {
  std::vector<SubjectRows> subjects;
  std::string failed;
  for (const auto& rec : recordings) {
    try {
      const auto p = prepare(rec, config);
      subjects.push_back({rec.subject_id, feature_rows(p, config, 0, train_end(rec, config))});
    } catch (const Error& e) {
      failed += (failed.empty() ? "" : "; ") + rec.subject_id + " (" + e.what() + ")";
    }
  }
  if (!failed.empty()) throw Error(Errc::degenerate_training, "enrollment failed for: " + failed);
  return fit_enrollment(subjects, config);
}

std::vector<Eigen::VectorXd> project_rows(const Enrollment& e, std::span<const std::vector<double>> rows) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(subspace::project(e.model, features::fit_length(r, e.model.L) - e.offset));
  return out;
}

matching::MatchScore score_claim(const Enrollment& e, std::string_view claimed_id,
                                 std::span<const Eigen::VectorXd> projected) {
  return matching::claim_score_projected(e.model, claimed_id, projected, e.config.aggregation, e.metric());
}

Eigen::MatrixXd class_distances(const Enrollment& e, std::span<const Eigen::VectorXd> projected) {
  const auto& gallery = e.model.gallery;
  Eigen::MatrixXd d(static_cast<Index>(gallery.size()), static_cast<Index>(projected.size()));
  for (std::size_t k = 0; k < gallery.size(); ++k) {
    for (std::size_t j = 0; j < projected.size(); ++j) {
      d(static_cast<Index>(k), static_cast<Index>(j)) =
          matching::class_distance(gallery[k], projected[j], e.metric(), e.config.aggregation.over_templates);
    }
  }
  return d;
}

double reduce_columns(const Eigen::MatrixXd& distances, std::size_t class_index, std::size_t start, std::size_t count,
                      matching::Reduce over_tests) {
  if (count == 0 || start + count > static_cast<std::size_t>(distances.cols())) {
    throw Error(Errc::contract_violation, "test run outside the available vectors");
  }
  const auto row = distances.row(static_cast<Index>(class_index)).segment(static_cast<Index>(start),
                                                                           static_cast<Index>(count));
  if (over_tests == matching::Reduce::min) return row.minCoeff();
  // Same summation order as claim_score_projected, so both paths agree bitwise.
  double total = 0.0;
  for (Index j = 0; j < row.size(); ++j) total += row(j);
  return total / static_cast<double>(count);
}

}  // namespace ppgauth::pipeline
