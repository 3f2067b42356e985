#include "ppgauth/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ppgauth/error.hpp"

namespace ppgauth::eval {

namespace {

void require_scores(const ScoreSet& s) {
  if (s.genuine.empty() || s.imposter.empty()) {
    throw Error(Errc::contract_violation, "genuine and imposter score sets must both be non-empty");
  }
}

// Walks sorted genuine/imposter scores and reports (threshold, FAR, FRR)
// after every distinct score, starting from -inf.
template <typename Visit>
void sweep(const ScoreSet& s, Visit&& visit) {
  std::vector<double> g = s.genuine, im = s.imposter;
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  const double ng = static_cast<double>(g.size()), ni = static_cast<double>(im.size());
  std::size_t gi = 0, ii = 0;
  if (!visit(-std::numeric_limits<double>::infinity(), 0.0, 1.0)) return;
  while (gi < g.size() || ii < im.size()) {
    double t;
    if (ii >= im.size()) t = g[gi];
    else if (gi >= g.size()) t = im[ii];
    else t = std::min(g[gi], im[ii]);
    while (gi < g.size() && g[gi] <= t) ++gi;
    while (ii < im.size() && im[ii] <= t) ++ii;
    const double far = static_cast<double>(ii) / ni;
    const double frr = static_cast<double>(g.size() - gi) / ng;
    if (!visit(t, far, frr)) return;
  }
}

}  // namespace

Rates far_frr(const ScoreSet& scores, double threshold) {
  require_scores(scores);
  std::size_t accepted_imposters = 0, rejected_genuine = 0;
  for (double v : scores.imposter) accepted_imposters += v <= threshold ? 1 : 0;
  for (double v : scores.genuine) rejected_genuine += v > threshold ? 1 : 0;
  return {static_cast<double>(accepted_imposters) / static_cast<double>(scores.imposter.size()),
          static_cast<double>(rejected_genuine) / static_cast<double>(scores.genuine.size())};
}

EerPoint eer_point(const ScoreSet& scores) {
  require_scores(scores);
  double prev_far = 0.0, prev_frr = 1.0;
  double prev_t = -std::numeric_limits<double>::infinity();
  EerPoint result;
  sweep(scores, [&](double t, double far, double frr) {
    const double d = far - frr;
    if (d >= 0.0) {
      const double prev_d = prev_far - prev_frr;
      if (d == 0.0) {
        result = {far, t};
      } else {
        const double alpha = -prev_d / (d - prev_d);
        result.rate = prev_far + alpha * (far - prev_far);
        result.threshold = std::isfinite(prev_t) ? prev_t + alpha * (t - prev_t) : t;
      }
      return false;
    }
    prev_far = far;
    prev_frr = frr;
    prev_t = t;
    return true;
  });
  return result;
}

double eer(const ScoreSet& scores) { return eer_point(scores).rate; }

RocCurve roc_export(const ScoreSet& scores) {
  require_scores(scores);
  RocCurve roc;
  sweep(scores, [&](double t, double far, double frr) {
    roc.points.push_back({t, far, frr});
    return true;
  });
  return roc;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  const bool constant = std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>()) == values.end();
  if (constant) s.mean = values.front();
  if (values.size() > 1 && !constant) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace ppgauth::eval
