#include <doctest.h>

#include <numeric>
#include <string>
#include <vector>

#include "ppgauth/error.hpp"
#include "ppgauth/pipeline.hpp"
#include "ppgauth/protocols.hpp"
#include "ppgauth/synthgen.hpp"

using namespace ppgauth;
using namespace ppgauth::protocols;

namespace {

void quiet(std::string_view) {}

std::vector<RawRecording> dataset(std::size_t subjects, double noise, std::vector<std::string> conditions,
                                  double duration = 60.0, std::uint64_t seed = 1) {
  synth::DatasetSpec spec;
  spec.subjects = subjects;
  spec.noise_level = noise;
  spec.duration_s = duration;
  spec.seed = seed;
  spec.conditions.clear();
  for (const auto& c : conditions) spec.conditions.push_back(synth::Condition::parse(c));
  std::vector<RawRecording> out;
  for (auto& s : synth::make_dataset(spec)) out.push_back(std::move(s.recording));
  return out;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST_CASE("single-session trial counts, determinism and the All cell") {
  set_warning_sink(quiet);
  const auto recs = dataset(5, 0.1, {"relax"});
  RunConfig cfg;
  cfg.protocol.n_test = {2, 0};
  cfg.protocol.iterations = 4;
  const auto a = single_session(recs, cfg, "toy");
  const auto b = single_session(recs, cfg, "toy");
  REQUIRE(a.cells.size() == 2);
  CHECK(a.cells[0].protocol == "single-session");
  CHECK(a.cells[0].iterations == 4);
  CHECK(a.cells[0].pooled.genuine.size() == 5 * 4);
  CHECK(a.cells[0].pooled.imposter.size() == 5 * 4 * 4);
  CHECK(a.cells[0].eers == b.cells[0].eers);
  CHECK(a.cells[0].pooled.genuine == b.cells[0].pooled.genuine);
  CHECK(a.cells[1].iterations == 1);
  CHECK(a.cells[1].summary.std == 0.0);
  CHECK(a.cells[1].pooled.genuine.size() == 5);

  cfg.protocol.iterations = 1;
  const auto one = single_session(recs, cfg);
  CHECK(one.cells[0].summary.std == 0.0);
  CHECK(one.cells[0].eers.size() == 1);

  cfg.protocol.seed = 77;
  cfg.protocol.iterations = 4;
  CHECK(single_session(recs, cfg).cells[0].pooled.genuine != a.cells[0].pooled.genuine);
  set_warning_sink(nullptr);
}

TEST_CASE("genuine claims score below imposter claims") {
  set_warning_sink(quiet);
  const auto recs = dataset(10, 0.1, {"relax"});
  RunConfig cfg;
  cfg.protocol.n_test = {2};
  cfg.protocol.iterations = 12;
  const auto r = single_session(recs, cfg);
  const auto& s = r.cells[0].pooled;
  CHECK(s.genuine.size() + s.imposter.size() >= 1000);
  CHECK(mean(s.genuine) < mean(s.imposter));
  set_warning_sink(nullptr);
}

TEST_CASE("cross-partition trial counts on a 3 subject x 2 emotion toy set") {
  set_warning_sink(quiet);
  const auto recs = dataset(3, 0.05, {"emotion1", "emotion2"});
  CHECK(partitions(recs) == std::vector<std::string>{"s1:emotion1", "s1:emotion2"});
  RunConfig cfg;
  cfg.protocol.n_test = {0, 3};

  const auto one = cross_partition(recs, cfg, {"s1:emotion1", {"s1:emotion2"}, ImposterPool::test_partitions, {}});
  REQUIRE(one.cells.size() == 2);
  CHECK(one.cells[0].protocol == "cross:s1:emotion1>s1:emotion2");
  CHECK(one.cells[0].iterations == 1);
  CHECK(one.cells[0].pooled.genuine.size() == 3);
  CHECK(one.cells[0].pooled.imposter.size() == 3 * 2);

  const auto wide = cross_partition(recs, cfg, {"s1:emotion1", {"s1:emotion2"}, ImposterPool::all_partitions, "x"});
  CHECK(wide.cells[0].protocol == "x");
  CHECK(wide.cells[0].pooled.genuine.size() == 3);
  CHECK(wide.cells[0].pooled.imposter.size() == 3 * 2 * 2);

  // Per subject and training partition: genuine = P - 1, imposters = (S - 1) P.
  const auto rot = cross_rotate(recs, cfg);
  CHECK(rot.cells[0].protocol == "cross-rotate");
  CHECK(rot.cells[0].iterations == 2);
  CHECK(rot.cells[0].eers.size() == 2);
  CHECK(rot.cells[0].pooled.genuine.size() == 2 * 3 * 1);
  CHECK(rot.cells[0].pooled.imposter.size() == 2 * 3 * 2 * 2);
  set_warning_sink(nullptr);
}

TEST_CASE("cross-partition guards") {
  set_warning_sink(quiet);
  const auto recs = dataset(3, 0.0, {"relax", "exercise"}, 30.0);
  RunConfig cfg;
  cfg.protocol.n_test = {0};
  try {
    cross_partition(recs, cfg, {"s1:relax", {"s1:relax"}, {}, {}});
    FAIL("expected invalid config");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_config);
  }
  CHECK_THROWS_AS(cross_partition(recs, cfg, {"s1:relax", {"s9:relax"}, {}, {}}), Error);
  CHECK_THROWS_AS(cross_partition(recs, cfg, {"s1:relax", {}, {}, {}}), Error);

  std::vector<RawRecording> missing(recs.begin(), recs.end() - 1);
  const auto r = cross_partition(missing, cfg, {"s1:relax", {"s1:exercise"}, {}, {}});
  bool logged = false;
  for (const auto& line : r.excluded) logged = logged || line.find(recs.back().subject_id) != std::string::npos;
  CHECK(logged);
  CHECK(r.cells[0].pooled.genuine.size() == 2);
  set_warning_sink(nullptr);
}

TEST_CASE("short recordings are excluded and logged") {
  set_warning_sink(quiet);
  auto recs = dataset(4, 0.0, {"relax"});
  recs[2].samples.resize(static_cast<std::size_t>(46.0 * recs[2].fs));
  RunConfig cfg;
  cfg.protocol.n_test = {2};
  cfg.protocol.iterations = 2;
  const auto r = single_session(recs, cfg);
  REQUIRE(!r.excluded.empty());
  CHECK(r.excluded.front().find(recs[2].subject_id) != std::string::npos);
  CHECK(r.cells[0].pooled.genuine.size() == 3 * 2);
  set_warning_sink(nullptr);
}

TEST_CASE("AC/LDA reports a non-zero EER across sessions") {
  set_warning_sink(quiet);
  const auto recs = dataset(10, 0.1, {"relax", "timelapse"});
  RunConfig cfg;
  cfg.method = PipelineMethod::ac_lda;
  cfg.protocol.n_test = {5};
  const auto r = cross_partition(recs, cfg, {"s1:relax", {"s2:relax"}, {}, {}});
  CHECK(r.method == "ac-lda");
  CHECK(r.cells[0].summary.mean > 0.0);
  set_warning_sink(nullptr);
}

TEST_CASE("a two-subject gallery leaves Pearson matching too few dimensions") {
  set_warning_sink(quiet);
  const auto recs = dataset(3, 0.0, {"relax"});
  RunConfig cfg;
  try {
    pipeline::enroll(std::span(recs).first(2), cfg);
    FAIL("expected invalid config");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_config);
  }
  CHECK(pipeline::enroll(recs, cfg).model.m == 2);
  cfg.method = PipelineMethod::openset;
  CHECK_NOTHROW(pipeline::enroll(std::span(recs).first(2), cfg));
  set_warning_sink(nullptr);
}

TEST_CASE("cells without usable trials are skipped and logged") {
  set_warning_sink(quiet);
  const auto recs = dataset(4, 0.0, {"relax", "timelapse"});
  RunConfig cfg;
  cfg.protocol.n_test = {2, 500};
  cfg.protocol.iterations = 3;
  auto skipped = [](const EvalReport& r) {
    bool found = false;
    for (const auto& line : r.excluded) found = found || line.find("nTest=500: no usable trials") != std::string::npos;
    return found;
  };
  const auto cross = cross_partition(recs, cfg, {"s1:relax", {"s2:relax"}, {}, {}});
  REQUIRE(cross.cells.size() == 1);
  CHECK(cross.cells[0].n_test == 2);
  CHECK(cross.cells[0].iterations == 1);
  CHECK(skipped(cross));

  const auto single = single_session(recs, cfg);
  REQUIRE(single.cells.size() == 1);
  CHECK(single.cells[0].iterations == 3);
  CHECK(skipped(single));

  const auto rot = cross_rotate(recs, cfg);
  REQUIRE(rot.cells.size() == 1);
  CHECK(rot.cells[0].iterations == 2);
  set_warning_sink(nullptr);
}
