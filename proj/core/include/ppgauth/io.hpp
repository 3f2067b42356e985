#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppgauth/eval.hpp"
#include "ppgauth/features.hpp"
#include "ppgauth/pipeline.hpp"
#include "ppgauth/protocols.hpp"
#include "ppgauth/recording.hpp"

namespace ppgauth::io {

/// Samples from a recording CSV: either a `t,ppg` header followed by two
/// columns, or a single headerless column.
std::vector<double> read_samples_csv(const std::filesystem::path& path);

/// Writes `t,ppg` with round-trip precision.
void write_recording_csv(const std::filesystem::path& path, const RawRecording& rec);

struct ManifestEntry {
  std::filesystem::path file;  // relative entries resolve against the manifest's directory
  std::string subject;
  std::string session;
  PhysState state;
  double fs = 0.0;
};

/// Parses `file,subject,session,state,fs`. Malformed rows raise
/// Errc::validation naming the line number.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

struct Dataset {
  std::string name;  // manifest's directory name
  std::vector<ManifestEntry> entries;
  std::vector<RawRecording> recordings;  // parallel to entries
};

/// Loads every recording a manifest lists. A missing file is an Errc::io error.
Dataset load_dataset(const std::filesystem::path& manifest);

/// Writes one CSV per recording plus `manifest.csv` into `dir`.
void write_dataset(const std::filesystem::path& dir, std::span<const RawRecording> recordings);

/// Versioned binary bundle: magic, format version, a JSON header (method, L,
/// m, fingerprint, full configuration, class ids, array shapes) and the raw
/// little-endian doubles of every array.
void save_enrollment(const std::filesystem::path& path, const pipeline::Enrollment& e);
pipeline::Enrollment load_enrollment(const std::filesystem::path& path);

/// `dataset,method,protocol,nTest,mean_eer,std_eer,iterations`; EERs as fractions.
std::string results_csv(std::span<const protocols::EvalReport> reports);
void write_results_csv(const std::filesystem::path& path, std::span<const protocols::EvalReport> reports);

void write_roc_csv(const std::filesystem::path& path, const eval::RocCurve& roc);

/// FRR against FAR, one polyline per labeled curve.
void write_roc_svg(const std::filesystem::path& path,
                   std::span<const std::pair<std::string, eval::RocCurve>> curves);

/// |W| with one row per scale: `center_hz,scale_s,<translations...>`.
void write_scalogram_csv(const std::filesystem::path& path, const features::Scalogram& s,
                         const features::ScaleGrid& grid);

}  // namespace ppgauth::io
