#include "ppgauth/protocols.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "ppgauth/error.hpp"
#include "ppgauth/pipeline.hpp"

namespace ppgauth::protocols {

namespace {

using pipeline::Enrollment;

std::string n_test_name(std::size_t n) { return n == 0 ? "All" : std::to_string(n); }

void exclude(EvalReport& report, std::string message) {
  warn(message);
  report.excluded.push_back(std::move(message));
}

std::uint64_t stream_seed(std::uint64_t seed, std::size_t n_test, std::size_t iteration, std::size_t subject) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n_test), static_cast<std::uint32_t>(iteration),
                    static_cast<std::uint32_t>(subject)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

// Test material of one recording scored against every enrolled class.
struct Trial {
  std::string subject_id;
  std::optional<std::size_t> class_index;  // claimant's own gallery class
  Eigen::MatrixXd distances;               // K x n
  bool genuine_source = false;
  bool imposter_source = false;
  std::string partition;

  std::size_t units() const { return static_cast<std::size_t>(distances.cols()); }
};

Trial make_trial(const Enrollment& e, const pipeline::Prepared& p, std::size_t begin, std::size_t end) {
  Trial t;
  t.subject_id = p.filtered.subject_id;
  t.partition = p.filtered.partition();
  const auto rows = pipeline::feature_rows(p, e.config, begin, end);
  const auto projected = pipeline::project_rows(e, rows);
  t.distances = pipeline::class_distances(e, projected);
  const auto& ids = e.model.class_ids;
  const auto it = std::find(ids.begin(), ids.end(), t.subject_id);
  if (it != ids.end()) t.class_index = static_cast<std::size_t>(it - ids.begin());
  return t;
}

// Scores of one iteration: genuine from the claimant's own class, imposter
// from every other class. `start_of` picks the run start per trial.
template <typename StartOf>
void score_trials(const std::vector<Trial>& trials, std::size_t count, matching::Reduce over_tests,
                  StartOf&& start_of, eval::ScoreSet& out) {
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    if (t.units() < count || t.units() == 0) continue;
    const std::size_t n = count == 0 ? t.units() : count;
    const std::size_t start = start_of(i, t.units() - n);
    for (Eigen::Index k = 0; k < t.distances.rows(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const bool own = t.class_index && *t.class_index == kk;
      if (own && t.genuine_source) out.genuine.push_back(pipeline::reduce_columns(t.distances, kk, start, n, over_tests));
      if (!own && t.imposter_source) {
        out.imposter.push_back(pipeline::reduce_columns(t.distances, kk, start, n, over_tests));
      }
    }
  }
}

void log_short_trials(EvalReport& report, const std::vector<Trial>& trials, std::size_t count,
                      const std::string& protocol) {
  for (const auto& t : trials) {
    if (t.units() == 0) continue;
    if (count > 0 && t.units() < count) {
      exclude(report, protocol + " nTest=" + std::to_string(count) + ": " + t.subject_id + " (" + t.partition +
                          ") has only " + std::to_string(t.units()) + " test segments");
    }
  }
}

void finish_cell(Cell& cell) { cell.summary = eval::summarize(cell.eers); }

// Keeps the cells that produced at least one EER; the rest are logged.
std::vector<Cell> scored_cells(std::vector<Cell> cells, EvalReport& report) {
  std::vector<Cell> out;
  for (auto& c : cells) {
    if (c.eers.empty()) {
      exclude(report, c.protocol + " nTest=" + n_test_name(c.n_test) + ": no usable trials, cell skipped");
      continue;
    }
    c.iterations = c.eers.size();
    finish_cell(c);
    out.push_back(std::move(c));
  }
  return out;
}

struct PreparedSet {
  std::vector<pipeline::Prepared> items;
};

PreparedSet prepare_all(std::span<const RawRecording> recordings, const RunConfig& config, EvalReport& report) {
  PreparedSet out;
  for (const auto& rec : recordings) {
    try {
      out.items.push_back(pipeline::prepare(rec, config));
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_signal && e.code() != Errc::validation) throw;
      exclude(report, rec.subject_id + " (" + rec.partition() + ") unusable: " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> partitions(std::span<const RawRecording> recordings) {
  std::vector<std::string> keys;
  for (const auto& r : recordings) {
    const auto k = r.partition();
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  return keys;
}

EvalReport single_session(std::span<const RawRecording> recordings, const RunConfig& config,
                          const std::string& dataset) {
  config.validate();
  EvalReport report{dataset, std::string(to_string(config.method)), {}, {}};
  const std::string protocol = "single-session";

  std::set<std::string> seen;
  std::vector<RawRecording> chosen;
  for (const auto& r : recordings) {
    if (seen.insert(r.subject_id).second) chosen.push_back(r);
  }
  auto prepared = prepare_all(chosen, config, report);

  std::vector<pipeline::SubjectRows> train;
  std::vector<const pipeline::Prepared*> usable;
  for (const auto& p : prepared.items) {
    const auto split = pipeline::train_end(p.filtered, config);
    auto rows = pipeline::feature_rows(p, config, 0, split);
    if (rows.size() < 2) {
      exclude(report, p.filtered.subject_id + ": fewer than two training segments");
      continue;
    }
    if (pipeline::feature_rows(p, config, split, p.filtered.samples.size()).empty()) {
      exclude(report, p.filtered.subject_id + ": no test segments after the training slice");
      continue;
    }
    train.push_back({p.filtered.subject_id, std::move(rows)});
    usable.push_back(&p);
  }
  const Enrollment e = pipeline::fit_enrollment(train, config);

  std::vector<Trial> trials;
  for (const auto* p : usable) {
    auto t = make_trial(e, *p, pipeline::train_end(p->filtered, config), p->filtered.samples.size());
    t.genuine_source = t.imposter_source = true;
    trials.push_back(std::move(t));
  }

  const auto over_tests = config.aggregation.over_tests;
  for (const std::size_t n_test : config.protocol.n_test) {
    Cell cell;
    cell.protocol = protocol;
    cell.n_test = n_test;
    cell.iterations = n_test == 0 ? 1 : config.protocol.iterations;
    log_short_trials(report, trials, n_test, protocol);
    for (std::size_t it = 0; it < cell.iterations; ++it) {
      eval::ScoreSet scores;
      auto start_of = [&](std::size_t subject, std::size_t max_start) -> std::size_t {
        if (n_test == 0) return 0;
        std::mt19937_64 rng(stream_seed(config.protocol.seed, n_test, it, subject));
        return std::uniform_int_distribution<std::size_t>(0, max_start)(rng);
      };
      score_trials(trials, n_test, over_tests, start_of, scores);
      if (scores.genuine.empty() || scores.imposter.empty()) break;
      cell.eers.push_back(eval::eer(scores));
      cell.pooled.genuine.insert(cell.pooled.genuine.end(), scores.genuine.begin(), scores.genuine.end());
      cell.pooled.imposter.insert(cell.pooled.imposter.end(), scores.imposter.begin(), scores.imposter.end());
    }
    cell.pooled.dataset = dataset;
    cell.pooled.method = report.method;
    cell.pooled.n_test = n_test;
    cell.pooled.seed = config.protocol.seed;
    if (cell.eers.empty()) {
      exclude(report, protocol + " nTest=" + n_test_name(n_test) + ": no usable trials, cell skipped");
      continue;
    }
    finish_cell(cell);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

namespace {

// One enrollment on `train_partition` and the non-random test cells for it.
// Appends one EER per nTest to `cells` (parallel to config.protocol.n_test).
void cross_iteration(const std::vector<pipeline::Prepared>& prepared, const RunConfig& config,
                     const std::string& train_partition, const std::set<std::string>& test_partitions,
                     ImposterPool pool, const std::string& protocol, EvalReport& report, std::vector<Cell>& cells) {
  std::vector<pipeline::SubjectRows> train;
  std::set<std::string> enrolled;
  for (const auto& p : prepared) {
    if (p.filtered.partition() != train_partition || enrolled.count(p.filtered.subject_id)) continue;
    auto rows = pipeline::feature_rows(p, config, 0, pipeline::train_end(p.filtered, config));
    if (rows.size() < 2) {
      exclude(report, protocol + ": " + p.filtered.subject_id + " has fewer than two training segments in " +
                          train_partition);
      continue;
    }
    enrolled.insert(p.filtered.subject_id);
    train.push_back({p.filtered.subject_id, std::move(rows)});
  }
  const Enrollment e = pipeline::fit_enrollment(train, config);

  std::vector<Trial> trials;
  std::set<std::string> tested;
  for (const auto& p : prepared) {
    const auto& rec = p.filtered;
    if (!enrolled.count(rec.subject_id)) continue;
    const bool in_test = test_partitions.count(rec.partition()) > 0;
    const bool imposter_source = pool == ImposterPool::all_partitions || in_test;
    if (!in_test && !imposter_source) continue;
    auto t = make_trial(e, p, 0, rec.samples.size());
    t.genuine_source = in_test;
    t.imposter_source = imposter_source;
    if (in_test) tested.insert(rec.subject_id);
    trials.push_back(std::move(t));
  }
  for (const auto& id : enrolled) {
    if (!tested.count(id)) exclude(report, protocol + ": " + id + " has no recording in the test partitions");
  }

  const auto over_tests = config.aggregation.over_tests;
  for (std::size_t c = 0; c < config.protocol.n_test.size(); ++c) {
    const std::size_t n_test = config.protocol.n_test[c];
    log_short_trials(report, trials, n_test, protocol);
    eval::ScoreSet scores;
    score_trials(trials, n_test, over_tests, [](std::size_t, std::size_t) { return std::size_t{0}; }, scores);
    if (scores.genuine.empty() || scores.imposter.empty()) continue;
    cells[c].eers.push_back(eval::eer(scores));
    cells[c].pooled.genuine.insert(cells[c].pooled.genuine.end(), scores.genuine.begin(), scores.genuine.end());
    cells[c].pooled.imposter.insert(cells[c].pooled.imposter.end(), scores.imposter.begin(), scores.imposter.end());
  }
}

std::vector<Cell> empty_cells(const RunConfig& config, const std::string& protocol, const std::string& dataset,
                              const std::string& method) {
  std::vector<Cell> cells(config.protocol.n_test.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    cells[c].protocol = protocol;
    cells[c].n_test = config.protocol.n_test[c];
    cells[c].pooled.dataset = dataset;
    cells[c].pooled.method = method;
    cells[c].pooled.n_test = cells[c].n_test;
    cells[c].pooled.seed = config.protocol.seed;
  }
  return cells;
}

}  // namespace

EvalReport cross_partition(std::span<const RawRecording> recordings, const RunConfig& config, const CrossSpec& spec,
                           const std::string& dataset) {
  config.validate();
  if (spec.test_partitions.empty()) throw Error(Errc::invalid_config, "no test partition given");
  const std::set<std::string> tests(spec.test_partitions.begin(), spec.test_partitions.end());
  if (tests.count(spec.train_partition)) {
    throw Error(Errc::invalid_config, "train partition '" + spec.train_partition + "' is also a test partition");
  }
  const auto keys = partitions(recordings);
  for (const auto& k : tests) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw Error(Errc::invalid_config, "partition '" + k + "' does not occur in the dataset");
    }
  }
  if (std::find(keys.begin(), keys.end(), spec.train_partition) == keys.end()) {
    throw Error(Errc::invalid_config, "partition '" + spec.train_partition + "' does not occur in the dataset");
  }

  std::string protocol = spec.label;
  if (protocol.empty()) {
    protocol = "cross:" + spec.train_partition + ">";
    for (std::size_t i = 0; i < spec.test_partitions.size(); ++i) {
      protocol += (i ? "+" : "") + spec.test_partitions[i];
    }
  }
  EvalReport report{dataset, std::string(to_string(config.method)), {}, {}};
  auto prepared = prepare_all(recordings, config, report);
  auto cells = empty_cells(config, protocol, dataset, report.method);
  cross_iteration(prepared.items, config, spec.train_partition, tests, spec.pool, protocol, report, cells);
  report.cells = scored_cells(std::move(cells), report);
  return report;
}

EvalReport cross_rotate(std::span<const RawRecording> recordings, const RunConfig& config,
                        const std::string& dataset) {
  config.validate();
  const auto keys = partitions(recordings);
  if (keys.size() < 2) throw Error(Errc::invalid_config, "rotation needs at least two partitions");
  const std::string protocol = "cross-rotate";
  EvalReport report{dataset, std::string(to_string(config.method)), {}, {}};
  auto prepared = prepare_all(recordings, config, report);
  auto cells = empty_cells(config, protocol, dataset, report.method);
  for (const auto& train : keys) {
    std::set<std::string> tests(keys.begin(), keys.end());
    tests.erase(train);
    cross_iteration(prepared.items, config, train, tests, ImposterPool::all_partitions, protocol, report, cells);
  }
  report.cells = scored_cells(std::move(cells), report);
  return report;
}

}  // namespace ppgauth::protocols
