#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("ppgauth_cli_" + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  Run run(const std::string& args) const {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + PPGAUTH_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }
};

}  // namespace

TEST_CASE("help and usage errors") {
  Workspace w;
  CHECK(w.run("--help").code == 0);
  const auto help = w.run("evaluate --help");
  CHECK(help.code == 0);
  CHECK(help.out.find("--n-test") != std::string::npos);
  CHECK(w.run("frobnicate").code == 2);
  CHECK(w.run("enroll --out x").code == 2);
}

TEST_CASE("synth, enroll, verify and evaluate") {
  Workspace w;
  const auto data = w.dir / "data";
  const auto model = w.dir / "model.bin";
  REQUIRE(w.run("synth --out \"" + data.string() + "\" --subjects 6 --seed 3 --duration 60").code == 0);
  REQUIRE(fs::exists(data / "manifest.csv"));

  const auto enroll = w.run("enroll --dataset \"" + (data / "manifest.csv").string() + "\" --out \"" + model.string() + "\"");
  REQUIRE_MESSAGE(enroll.code == 0, enroll.err);
  REQUIRE(fs::exists(model));

  const std::string probe = "--model \"" + model.string() + "\" --recording \"" + (data / "S01_s1_relax.csv").string() +
                            "\" --fs 300 --segments 5";
  const auto genuine = w.run("verify " + probe + " --claim S01");
  CHECK(genuine.code == 0);
  const auto j = nlohmann::json::parse(genuine.out);
  CHECK(j["claimed_id"] == "S01");
  CHECK(j["decision"] == "accept");
  CHECK(j["n_test"] == 5);

  const auto imposter = w.run("verify " + probe + " --claim S04");
  CHECK(imposter.code == 3);
  CHECK(nlohmann::json::parse(imposter.out)["decision"] == "reject");

  const auto unknown = w.run("verify " + probe + " --claim S99");
  CHECK(unknown.code == 1);
  CHECK(nlohmann::json::parse(unknown.err).contains("error"));

  const auto mismatch = w.run("verify " + probe + " --claim S01 --method cwt-pca");
  CHECK(mismatch.code == 1);
  const auto e = nlohmann::json::parse(mismatch.err);
  CHECK(e["error"] == "invalid-config");
  CHECK(e["message"].get<std::string>().find("fingerprint") != std::string::npos);

  const auto out = w.dir / "eval";
  const auto ev = w.run("evaluate --dataset \"" + (data / "manifest.csv").string() + "\" --out \"" + out.string() +
                        "\" --n-test 2,All --iterations 3 --svg");
  REQUIRE_MESSAGE(ev.code == 0, ev.err);
  const auto csv = slurp(out / "results.csv");
  CHECK(csv.find("single-session") != std::string::npos);
  CHECK(csv.find(",All,") != std::string::npos);
  CHECK(fs::exists(out / "roc.svg"));
  CHECK(!fs::is_empty(out / "roc"));

  const auto bad = w.run("evaluate --dataset \"" + (data / "manifest.csv").string() + "\" --out \"" + out.string() +
                         "\" --method cwt-lda --model \"" + model.string() + "\"");
  CHECK(bad.code == 1);
  CHECK(nlohmann::json::parse(bad.err)["error"] == "invalid-config");
}
