#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ppgauth/config.hpp"
#include "ppgauth/eval.hpp"
#include "ppgauth/recording.hpp"

namespace ppgauth::protocols {

/// One table cell: a protocol at one nTest value.
struct Cell {
  std::string protocol;
  std::size_t n_test = 0;  // 0 = all segments
  eval::Summary summary;
  std::size_t iterations = 0;
  std::vector<double> eers;  // per iteration
  eval::ScoreSet pooled;     // every iteration's scores, for ROC export
};

struct EvalReport {
  std::string dataset;
  std::string method;
  std::vector<Cell> cells;
  std::vector<std::string> excluded;  // human-readable exclusion log
};

/// Enrolls every subject on the first train_seconds of its first recording
/// and verifies with nTest consecutive test segments drawn at random from the
/// rest of that recording. Each subject makes one genuine claim and is used
/// as an imposter against every other identity. nTest = 0 uses all remaining
/// segments in a single iteration.
EvalReport single_session(std::span<const RawRecording> recordings, const RunConfig& config,
                          const std::string& dataset = {});

enum class ImposterPool {
  test_partitions,  // other subjects' recordings in the test partitions
  all_partitions,   // other subjects' recordings in every partition
};

struct CrossSpec {
  std::string train_partition;               // "<session>:<state>"
  std::vector<std::string> test_partitions;  // must not contain the train partition
  ImposterPool pool = ImposterPool::test_partitions;
  std::string label;                         // protocol column; derived when empty
};

/// Enrolls on the train partition and tests, non-randomly from the start of
/// each recording, on the test partitions. A single iteration.
EvalReport cross_partition(std::span<const RawRecording> recordings, const RunConfig& config, const CrossSpec& spec,
                           const std::string& dataset = {});

/// Uses each partition in turn as the training partition and all others as
/// test partitions, with imposters drawn from every partition. One iteration
/// per training partition.
EvalReport cross_rotate(std::span<const RawRecording> recordings, const RunConfig& config,
                        const std::string& dataset = {});

/// Partition keys in first-seen order.
std::vector<std::string> partitions(std::span<const RawRecording> recordings);

}  // namespace ppgauth::protocols
