#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "ppgauth/config.hpp"
#include "ppgauth/error.hpp"
#include "ppgauth/io.hpp"
#include "ppgauth/pipeline.hpp"
#include "ppgauth/synthgen.hpp"

using namespace ppgauth;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("ppgauth_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::validation;
}

std::vector<RawRecording> cohort(std::size_t n, double noise = 0.0) {
  synth::DatasetSpec spec;
  spec.subjects = n;
  spec.noise_level = noise;
  std::vector<RawRecording> out;
  for (auto& s : synth::make_dataset(spec)) out.push_back(std::move(s.recording));
  return out;
}

}  // namespace

TEST_CASE("config json round trip") {
  RunConfig c;
  c.method = PipelineMethod::cwt_kdda;
  c.kernel_sigma = 3.5;
  c.scale = features::ByIndex{3};
  c.protocol.n_test = {2, 0};
  c.aggregation = matching::parse_aggregation("mean/min");
  const auto back = RunConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.fingerprint() == c.fingerprint());
  CHECK(c.fingerprint().size() == 16);

  RunConfig other = c;
  other.protocol.iterations = 3;
  CHECK(other.fingerprint() == c.fingerprint());
  other.morse.beta = 10.0;
  CHECK(other.fingerprint() != c.fingerprint());
}

TEST_CASE("config validation") {
  CHECK(code_of([] { RunConfig::from_json({{"bogus", 1}}); }) == Errc::invalid_config);
  CHECK(code_of([] { RunConfig::from_json({{"filter", {{"order", 37}}}}); }) == Errc::invalid_config);
  CHECK(code_of([] { RunConfig::from_json({{"method", "svm"}}); }) == Errc::invalid_config);
  CHECK(code_of([] { RunConfig::from_json({{"peaks", {{"prominence_fraction", 1.5}}}}); }) == Errc::invalid_config);
  CHECK(code_of([] { RunConfig::from_json({{"protocol", {{"iterations", 0}}}}); }) == Errc::invalid_config);
  const auto c = RunConfig::from_json({{"method", "ac-lda"}, {"protocol", {{"seed", 9}}}});
  CHECK(c.method == PipelineMethod::ac_lda);
  CHECK(c.protocol.seed == 9);
  CHECK(c.protocol.train_seconds == 45.0);
  CHECK(c.autocorr_lags(300.0) == 288);
  for (auto m : all_pipeline_methods()) CHECK(parse_pipeline_method(to_string(m)) == m);

  TempDir d;
  write_text(d.path / "c.json", R"({"method": "cwt-pca", "m": 4})");
  CHECK(load_config(d.path / "c.json").m == 4);
  write_text(d.path / "bad.json", "{ nope");
  CHECK(code_of([&] { load_config(d.path / "bad.json"); }) == Errc::invalid_config);
  CHECK(code_of([&] { load_config(d.path / "missing.json"); }) == Errc::io);
}

TEST_CASE("recording csv") {
  TempDir d;
  write_text(d.path / "a.csv", "t,ppg\n0,1.5\n0.1,2.5\n0.2,-3\n");
  CHECK(io::read_samples_csv(d.path / "a.csv") == std::vector<double>{1.5, 2.5, -3.0});
  write_text(d.path / "b.csv", "1\n2\n3.25\n");
  CHECK(io::read_samples_csv(d.path / "b.csv") == std::vector<double>{1.0, 2.0, 3.25});
  write_text(d.path / "c.csv", "1\nx\n3\n");
  try {
    io::read_samples_csv(d.path / "c.csv");
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::validation);
    CHECK(std::string(e.what()).find("c.csv:2:") != std::string::npos);
  }
}

TEST_CASE("manifest parsing") {
  TempDir d;
  write_text(d.path / "r1.csv", "0.5\n");
  write_text(d.path / "r2.csv", "0.5\n");
  write_text(d.path / "ok.csv", "file,subject,session,state,fs\nr1.csv,A,s1,relax,300\nr2.csv,B,s1,emotion2,300\n");
  const auto m = io::read_manifest(d.path / "ok.csv");
  REQUIRE(m.size() == 2);
  CHECK(m[1].state == PhysState::emotion(2));
  CHECK(m[0].file == d.path / "r1.csv");

  write_text(d.path / "fs0.csv", "file,subject,session,state,fs\nr1.csv,A,s1,relax,300\nr2.csv,B,s1,relax,0\n");
  try {
    io::read_manifest(d.path / "fs0.csv");
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::validation);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  write_text(d.path / "dup.csv", "file,subject,session,state,fs\nr1.csv,A,s1,relax,300\nr1.csv,A,s1,relax,300\n");
  CHECK(code_of([&] { io::read_manifest(d.path / "dup.csv"); }) == Errc::validation);
  write_text(d.path / "hdr.csv", "path,subject\nr1.csv,A\n");
  CHECK(code_of([&] { io::read_manifest(d.path / "hdr.csv"); }) == Errc::validation);
  write_text(d.path / "gone.csv", "file,subject,session,state,fs\nnothere.csv,A,s1,relax,300\n");
  try {
    io::load_dataset(d.path / "gone.csv");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
    CHECK(std::string(e.what()).find("nothere.csv") != std::string::npos);
  }
}

TEST_CASE("synthetic dataset round trip") {
  TempDir d;
  synth::DatasetSpec spec;
  spec.subjects = 2;
  spec.duration_s = 12.0;
  spec.noise_level = 0.3;
  spec.conditions = {synth::Condition{}, synth::Condition::parse("timelapse")};
  std::vector<RawRecording> recs;
  for (auto& s : synth::make_dataset(spec)) recs.push_back(s.recording);
  io::write_dataset(d.path / "set", recs);
  const auto ds = io::load_dataset(d.path / "set" / "manifest.csv");
  CHECK(ds.name == "set");
  REQUIRE(ds.recordings.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(ds.recordings[i].samples == recs[i].samples);
    CHECK(ds.recordings[i].partition() == recs[i].partition());
    CHECK(ds.recordings[i].subject_id == recs[i].subject_id);
    CHECK(ds.recordings[i].fs == recs[i].fs);
  }
}

TEST_CASE("enrollment: shape, persistence and determinism") {
  TempDir d;
  const auto recs = cohort(10);
  RunConfig cfg;
  const auto e = pipeline::enroll(recs, cfg);
  CHECK(e.model.class_ids.size() == 10);
  CHECK(e.model.m == 9);

  io::save_enrollment(d.path / "a.model", e);
  io::save_enrollment(d.path / "b.model", pipeline::enroll(recs, cfg));
  CHECK(read_bytes(d.path / "a.model") == read_bytes(d.path / "b.model"));

  const auto back = io::load_enrollment(d.path / "a.model");
  CHECK(back.fingerprint() == e.fingerprint());
  CHECK(back.threshold == e.threshold);
  CHECK(back.model.W == e.model.W);
  CHECK(back.offset == e.offset);
  for (std::size_t k = 0; k < e.model.gallery.size(); ++k) CHECK(back.model.gallery[k] == e.model.gallery[k]);

  const auto p = pipeline::prepare(recs[3], cfg);
  const auto rows = pipeline::feature_rows(p, cfg, pipeline::train_end(recs[3], cfg), recs[3].samples.size());
  REQUIRE(!rows.empty());
  const auto x = pipeline::project_rows(e, rows), y = pipeline::project_rows(back, rows);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK((x[i] - y[i]).cwiseAbs().maxCoeff() <= 1e-15);

  SUBCASE("kernel models persist their training vectors") {
    RunConfig k = cfg;
    k.method = PipelineMethod::cwt_kdda;
    std::vector<RawRecording> few(recs.begin(), recs.begin() + 4);
    const auto ek = pipeline::enroll(few, k);
    io::save_enrollment(d.path / "k.model", ek);
    const auto kb = io::load_enrollment(d.path / "k.model");
    const auto a = pipeline::project_rows(ek, rows), b = pipeline::project_rows(kb, rows);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("corrupt bundles are rejected") {
    auto bytes = read_bytes(d.path / "a.model");
    std::ofstream(d.path / "t.model", std::ios::binary) << bytes << "x";
    CHECK_THROWS_AS(io::load_enrollment(d.path / "t.model"), Error);
    bytes[0] = 'Q';
    std::ofstream(d.path / "m.model", std::ios::binary) << bytes;
    CHECK_THROWS_AS(io::load_enrollment(d.path / "m.model"), Error);
  }
}

TEST_CASE("enrollment rejects a subject without usable segments") {
  auto recs = cohort(3);
  recs[1].samples.assign(recs[1].samples.size(), 0.25);
  try {
    pipeline::enroll(recs, RunConfig{});
    FAIL("expected enrollment failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(recs[1].subject_id) != std::string::npos);
  }
}

TEST_CASE("results and roc writers") {
  protocols::EvalReport r;
  r.dataset = "synth";
  r.method = "cwt-dlda";
  protocols::Cell c;
  c.protocol = "single-session";
  c.n_test = 2;
  c.summary = {0.0125, 0.003};
  c.iterations = 50;
  r.cells.push_back(c);
  c.n_test = 0;
  c.summary = {0.004, 0.0};
  c.iterations = 1;
  r.cells.push_back(c);
  const std::vector<protocols::EvalReport> reports{r};
  CHECK(io::results_csv(reports) ==
        "dataset,method,protocol,nTest,mean_eer,std_eer,iterations\n"
        "synth,cwt-dlda,single-session,2,0.012500,0.003000,50\n"
        "synth,cwt-dlda,single-session,All,0.004000,0.000000,1\n");

  TempDir d;
  eval::ScoreSet s;
  s.genuine = {0.1, 0.3};
  s.imposter = {0.2, 0.9};
  io::write_roc_csv(d.path / "roc.csv", eval::roc_export(s));
  const auto text = read_bytes(d.path / "roc.csv");
  CHECK(text.rfind("threshold,far,frr\n-inf,0,1\n", 0) == 0);
  const std::vector<std::pair<std::string, eval::RocCurve>> curves{{"a", eval::roc_export(s)}};
  io::write_roc_svg(d.path / "roc.svg", curves);
  CHECK(read_bytes(d.path / "roc.svg").find("<polyline") != std::string::npos);
}
