#include "ppgauth/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "ppgauth/error.hpp"

namespace ppgauth {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw Error(Errc::invalid_config, std::string(where) + " must be a JSON object");
  const std::set<std::string_view> keys(allowed);
  for (const auto& [key, _] : j.items()) {
    if (!keys.contains(key)) {
      throw Error(Errc::invalid_config, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::invalid_config, std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

json band_json(const preprocess::HrBand& b) { return json::array({b.min_bpm, b.max_bpm}); }

preprocess::HrBand band_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(Errc::invalid_config, "heart-rate band must be [min, max]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string_view to_string(PipelineMethod m) {
  switch (m) {
    case PipelineMethod::cwt_dlda: return "cwt-dlda";
    case PipelineMethod::cwt_lda: return "cwt-lda";
    case PipelineMethod::cwt_pca: return "cwt-pca";
    case PipelineMethod::cwt_kpca: return "cwt-kpca";
    case PipelineMethod::cwt_kdda: return "cwt-kdda";
    case PipelineMethod::openset: return "openset";
    case PipelineMethod::ac_lda: return "ac-lda";
  }
  return "cwt-dlda";
}

const std::vector<PipelineMethod>& all_pipeline_methods() {
  static const std::vector<PipelineMethod> all{PipelineMethod::cwt_dlda, PipelineMethod::cwt_lda,
                                               PipelineMethod::cwt_pca,  PipelineMethod::cwt_kpca,
                                               PipelineMethod::cwt_kdda, PipelineMethod::openset,
                                               PipelineMethod::ac_lda};
  return all;
}

PipelineMethod parse_pipeline_method(std::string_view text) {
  for (PipelineMethod m : all_pipeline_methods()) {
    if (to_string(m) == text) return m;
  }
  throw Error(Errc::invalid_config, "unknown method '" + std::string(text) + "'");
}

subspace::Method subspace_method(PipelineMethod m) {
  switch (m) {
    case PipelineMethod::cwt_dlda: return subspace::Method::dlda;
    case PipelineMethod::cwt_lda: return subspace::Method::pca_lda;
    case PipelineMethod::cwt_pca: return subspace::Method::pca;
    case PipelineMethod::cwt_kpca: return subspace::Method::kpca;
    case PipelineMethod::cwt_kdda: return subspace::Method::kdda;
    case PipelineMethod::openset: return subspace::Method::identity;
    case PipelineMethod::ac_lda: return subspace::Method::pca_lda;
  }
  return subspace::Method::dlda;
}

matching::Metric match_metric(PipelineMethod m) {
  return m == PipelineMethod::ac_lda ? matching::Metric::euclidean : matching::Metric::pearson;
}

bool uses_autocorrelation(PipelineMethod m) { return m == PipelineMethod::ac_lda; }

preprocess::HrBand RunConfig::hr_band(PhysState state) const {
  switch (state.kind) {
    case PhysState::Kind::exercise: return hr_exercise;
    case PhysState::Kind::emotion: return hr_emotion;
    case PhysState::Kind::relax: break;
  }
  return hr_relax;
}

std::size_t RunConfig::autocorr_lags(double fs) const {
  if (ac_lags > 0) return ac_lags;
  return static_cast<std::size_t>(std::lround(1.2 * fs / (ac_typical_hr_bpm / 60.0)));
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::invalid_config, what); };
  if (!(filter.low_hz > 0.0 && filter.low_hz < filter.high_hz)) fail("filter band must satisfy 0 < low < high");
  if (filter.order < 2 || filter.order % 2 != 0) fail("filter order must be a positive even integer");
  if (!(filter.settle_s >= 0.0)) fail("filter settle time must be non-negative");
  if (!(prominence_fraction > 0.0 && prominence_fraction < 1.0)) fail("prominence fraction must lie in (0, 1)");
  for (const auto& b : {hr_relax, hr_exercise, hr_emotion}) {
    if (!(b.min_bpm > 0.0 && b.min_bpm < b.max_bpm)) fail("heart-rate bands must satisfy 0 < min < max");
  }
  if (!(morse.gamma > 0.0 && morse.beta > 0.0)) fail("Morse gamma and beta must be positive");
  if (!(grid_min_hz > 0.0 && grid_min_hz < grid_max_hz) || voices_per_octave < 1) fail("invalid scale grid");
  if (const auto* band = std::get_if<features::ByBand>(&scale); band && !(band->low_hz < band->high_hz)) {
    fail("scale band must satisfy low < high");
  }
  if (!(ac_window_s > 0.0) || !(ac_overlap >= 0.0 && ac_overlap < 1.0)) fail("invalid autocorrelation windowing");
  if (!(ac_typical_hr_bpm > 0.0)) fail("typical heart rate must be positive");
  if (!(protocol.train_seconds > 0.0)) fail("train_seconds must be positive");
  if (protocol.iterations < 1) fail("iterations must be at least 1");
}

json RunConfig::enrollment_json() const {
  json scale_json;
  if (const auto* band = std::get_if<features::ByBand>(&scale)) {
    scale_json = {{"policy", "band"}, {"low_hz", band->low_hz}, {"high_hz", band->high_hz}};
  } else {
    scale_json = {{"policy", "index"}, {"k", std::get<features::ByIndex>(scale).k}};
  }
  return {
      {"filter",
       {{"low_hz", filter.low_hz}, {"high_hz", filter.high_hz}, {"order", filter.order}, {"settle_s", filter.settle_s}}},
      {"peaks",
       {{"prominence_fraction", prominence_fraction},
        {"hr_band",
         {{"relax", band_json(hr_relax)}, {"exercise", band_json(hr_exercise)}, {"emotion", band_json(hr_emotion)}}}}},
      {"features",
       {{"gamma", morse.gamma},
        {"beta", morse.beta},
        {"min_hz", grid_min_hz},
        {"max_hz", grid_max_hz},
        {"voices_per_octave", voices_per_octave},
        {"scale", scale_json}}},
      {"method", std::string(to_string(method))},
      {"m", m},
      {"kernel_sigma", kernel_sigma},
      {"aggregation", matching::to_string(aggregation)},
      {"ac",
       {{"window_s", ac_window_s}, {"overlap", ac_overlap}, {"lags", ac_lags}, {"typical_hr_bpm", ac_typical_hr_bpm}}},
  };
}

json RunConfig::to_json() const {
  json j = enrollment_json();
  j["protocol"] = {{"train_seconds", protocol.train_seconds},
                   {"n_test", protocol.n_test},
                   {"iterations", protocol.iterations},
                   {"seed", protocol.seed}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  reject_unknown(j, {"filter", "peaks", "features", "method", "m", "kernel_sigma", "aggregation", "ac", "protocol"},
                 "config");
  if (j.contains("filter")) {
    const auto& f = j["filter"];
    reject_unknown(f, {"low_hz", "high_hz", "order", "settle_s"}, "filter");
    read(f, "low_hz", c.filter.low_hz);
    read(f, "high_hz", c.filter.high_hz);
    read(f, "order", c.filter.order);
    read(f, "settle_s", c.filter.settle_s);
  }
  if (j.contains("peaks")) {
    const auto& p = j["peaks"];
    reject_unknown(p, {"prominence_fraction", "hr_band"}, "peaks");
    read(p, "prominence_fraction", c.prominence_fraction);
    if (p.contains("hr_band")) {
      const auto& b = p["hr_band"];
      reject_unknown(b, {"relax", "exercise", "emotion"}, "peaks.hr_band");
      if (b.contains("relax")) c.hr_relax = band_from(b["relax"]);
      if (b.contains("exercise")) c.hr_exercise = band_from(b["exercise"]);
      if (b.contains("emotion")) c.hr_emotion = band_from(b["emotion"]);
    }
  }
  if (j.contains("features")) {
    const auto& f = j["features"];
    reject_unknown(f, {"gamma", "beta", "min_hz", "max_hz", "voices_per_octave", "scale"}, "features");
    read(f, "gamma", c.morse.gamma);
    read(f, "beta", c.morse.beta);
    read(f, "min_hz", c.grid_min_hz);
    read(f, "max_hz", c.grid_max_hz);
    read(f, "voices_per_octave", c.voices_per_octave);
    if (f.contains("scale")) {
      const auto& s = f["scale"];
      const std::string policy = s.value("policy", "band");
      if (policy == "band") {
        reject_unknown(s, {"policy", "low_hz", "high_hz"}, "features.scale");
        features::ByBand band;
        read(s, "low_hz", band.low_hz);
        read(s, "high_hz", band.high_hz);
        c.scale = band;
      } else if (policy == "index") {
        reject_unknown(s, {"policy", "k"}, "features.scale");
        features::ByIndex index;
        read(s, "k", index.k);
        c.scale = index;
      } else {
        throw Error(Errc::invalid_config, "scale policy must be 'band' or 'index'");
      }
    }
  }
  if (j.contains("method")) c.method = parse_pipeline_method(j["method"].get<std::string>());
  read(j, "m", c.m);
  read(j, "kernel_sigma", c.kernel_sigma);
  if (j.contains("aggregation")) c.aggregation = matching::parse_aggregation(j["aggregation"].get<std::string>());
  if (j.contains("ac")) {
    const auto& a = j["ac"];
    reject_unknown(a, {"window_s", "overlap", "lags", "typical_hr_bpm"}, "ac");
    read(a, "window_s", c.ac_window_s);
    read(a, "overlap", c.ac_overlap);
    read(a, "lags", c.ac_lags);
    read(a, "typical_hr_bpm", c.ac_typical_hr_bpm);
  }
  if (j.contains("protocol")) {
    const auto& p = j["protocol"];
    reject_unknown(p, {"train_seconds", "n_test", "iterations", "seed"}, "protocol");
    read(p, "train_seconds", c.protocol.train_seconds);
    read(p, "n_test", c.protocol.n_test);
    read(p, "iterations", c.protocol.iterations);
    read(p, "seed", c.protocol.seed);
  }
  c.validate();
  return c;
}

std::string RunConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(enrollment_json().dump())));
  return buf;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return RunConfig::from_json(j);
}

}  // namespace ppgauth
