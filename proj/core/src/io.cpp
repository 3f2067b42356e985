#include "ppgauth/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "ppgauth/error.hpp"

namespace ppgauth::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'P', 'P', 'G', 'A', 'U', 'T', 'H', '\0'};
constexpr std::uint32_t kVersion = 1;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  return out;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    const int c = in.get();
    if (c == EOF) throw Error(Errc::io, "model bundle is truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

template <typename Derived>
void put_array(std::ostream& out, const Eigen::DenseBase<Derived>& a) {
  // Column-major, matching Eigen's default storage.
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) put_u64(out, std::bit_cast<std::uint64_t>(static_cast<double>(a(r, c))));
  }
}

Eigen::MatrixXd get_array(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) a(r, c) = std::bit_cast<double>(get_u64(in));
  }
  return a;
}

json shape(const Eigen::MatrixXd& m) { return json::array({m.rows(), m.cols()}); }
json shape(const Eigen::VectorXd& v) { return json::array({v.size(), 1}); }

}  // namespace

std::vector<double> read_samples_csv(const fs::path& path) {
  auto in = open_in(path);
  std::vector<double> samples;
  std::string line;
  std::size_t line_no = 0;
  int column = -1;  // index of the ppg column once the layout is known
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split(t);
    if (column < 0) {
      if (fields.size() == 2 && fields[0] == "t" && fields[1] == "ppg") {
        column = 1;
        continue;
      }
      if (fields.size() != 1) {
        throw Error(Errc::validation, path.string() + ":" + std::to_string(line_no) +
                                          ": expected a 't,ppg' header or a single column");
      }
      column = 0;
    }
    if (fields.size() != static_cast<std::size_t>(column + 1)) {
      throw Error(Errc::validation, path.string() + ":" + std::to_string(line_no) + ": wrong number of columns");
    }
    double v;
    if (!parse_double(fields[static_cast<std::size_t>(column)], v) || !std::isfinite(v)) {
      throw Error(Errc::validation, path.string() + ":" + std::to_string(line_no) + ": invalid sample value");
    }
    samples.push_back(v);
  }
  return samples;
}

void write_recording_csv(const fs::path& path, const RawRecording& rec) {
  auto out = open_out(path);
  out << "t,ppg\n";
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    out << format_double(static_cast<double>(i) / rec.fs) << ',' << format_double(rec.samples[i]) << '\n';
  }
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  auto in = open_in(path);
  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fail = [&](const std::string& what) {
      throw Error(Errc::validation, path.string() + " row " + std::to_string(line_no) + ": " + what);
    };
    const auto f = split(t);
    if (!header) {
      if (f != std::vector<std::string>{"file", "subject", "session", "state", "fs"}) {
        fail("expected header 'file,subject,session,state,fs'");
      }
      header = true;
      continue;
    }
    if (f.size() != 5) fail("expected 5 columns, found " + std::to_string(f.size()));
    ManifestEntry e;
    e.file = f[0];
    if (e.file.empty()) fail("empty file name");
    if (e.file.is_relative()) e.file = base / e.file;
    e.subject = f[1];
    e.session = f[2];
    if (e.subject.empty() || e.session.empty()) fail("subject and session must be non-empty");
    try {
      e.state = PhysState::parse(f[3]);
    } catch (const Error&) {
      fail("unknown state '" + f[3] + "'");
    }
    if (!parse_double(f[4], e.fs) || !(e.fs > 0.0) || !std::isfinite(e.fs)) fail("fs must be a positive number");
    if (!seen.insert({e.subject, e.session, e.state.to_string(), e.file.lexically_normal().string()}).second) {
      fail("duplicate entry");
    }
    entries.push_back(std::move(e));
  }
  if (!header) throw Error(Errc::validation, path.string() + ": empty manifest");
  return entries;
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries) {
  auto out = open_out(path);
  out << "file,subject,session,state,fs\n";
  for (const auto& e : entries) {
    out << e.file.generic_string() << ',' << e.subject << ',' << e.session << ',' << e.state.to_string() << ','
        << format_double(e.fs) << '\n';
  }
}

Dataset load_dataset(const fs::path& manifest) {
  Dataset d;
  const auto dir = fs::absolute(manifest).parent_path();
  d.name = dir.filename().string();
  d.entries = read_manifest(manifest);
  for (const auto& e : d.entries) {
    if (!fs::exists(e.file)) throw Error(Errc::io, "recording file not found: " + e.file.string());
    RawRecording rec;
    rec.samples = read_samples_csv(e.file);
    rec.fs = e.fs;
    rec.subject_id = e.subject;
    rec.session_id = e.session;
    rec.state = e.state;
    d.recordings.push_back(std::move(rec));
  }
  return d;
}

void write_dataset(const fs::path& dir, std::span<const RawRecording> recordings) {
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (const auto& rec : recordings) {
    const std::string name = rec.subject_id + "_" + rec.session_id + "_" + rec.state.to_string() + ".csv";
    write_recording_csv(dir / name, rec);
    entries.push_back({name, rec.subject_id, rec.session_id, rec.state, rec.fs});
  }
  write_manifest(dir / "manifest.csv", entries);
}

void save_enrollment(const fs::path& path, const pipeline::Enrollment& e) {
  const auto& m = e.model;
  json header;
  header["format"] = "ppgauth-model";
  header["version"] = kVersion;
  header["method"] = to_string(e.config.method);
  header["subspace"] = subspace::to_string(m.method);
  header["L"] = m.L;
  header["m"] = m.m;
  header["fingerprint"] = e.fingerprint();
  header["threshold"] = e.threshold;
  header["sigma"] = m.sigma;
  header["kernel_mean"] = m.kernel_mean;
  header["class_ids"] = m.class_ids;
  header["config"] = e.config.to_json();
  json arrays = json::array();
  arrays.push_back({{"name", "W"}, {"shape", shape(m.W)}});
  arrays.push_back({{"name", "eigenvalues"}, {"shape", shape(m.eigenvalues)}});
  arrays.push_back({{"name", "mean"}, {"shape", shape(m.mean)}});
  arrays.push_back({{"name", "training"}, {"shape", shape(m.training)}});
  arrays.push_back({{"name", "kernel_col_mean"}, {"shape", shape(m.kernel_col_mean)}});
  arrays.push_back({{"name", "offset"}, {"shape", shape(e.offset)}});
  for (std::size_t k = 0; k < m.gallery.size(); ++k) {
    arrays.push_back({{"name", "gallery:" + m.class_ids[k]}, {"shape", shape(m.gallery[k])}});
  }
  header["arrays"] = arrays;
  const std::string text = header.dump();

  auto out = open_out(path, std::ios::binary);
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, kVersion);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_array(out, m.W);
  put_array(out, m.eigenvalues);
  put_array(out, m.mean);
  put_array(out, m.training);
  put_array(out, m.kernel_col_mean);
  put_array(out, e.offset);
  for (const auto& g : m.gallery) put_array(out, g);
  if (!out) throw Error(Errc::io, "failed writing '" + path.string() + "'");
}

pipeline::Enrollment load_enrollment(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(Errc::io, "'" + path.string() + "' is not a ppgauth model bundle");
  const auto version = get_u64(in);
  if (version != kVersion) {
    throw Error(Errc::io, "unsupported model bundle version " + std::to_string(version));
  }
  const auto len = get_u64(in);
  if (len > (1u << 30)) throw Error(Errc::io, "model bundle header is implausibly large");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error(Errc::io, "model bundle is truncated");

  pipeline::Enrollment e;
  try {
    const json header = json::parse(text);
    e.config = RunConfig::from_json(header.at("config"));
    if (header.at("fingerprint").get<std::string>() != e.config.fingerprint()) {
      throw Error(Errc::io, "model bundle fingerprint does not match its embedded configuration");
    }
    auto& m = e.model;
    m.method = subspace::parse_method(header.at("subspace").get<std::string>());
    m.L = header.at("L").get<std::size_t>();
    m.m = header.at("m").get<std::size_t>();
    m.sigma = header.at("sigma").get<double>();
    m.kernel_mean = header.at("kernel_mean").get<double>();
    m.class_ids = header.at("class_ids").get<std::vector<std::string>>();
    e.threshold = header.at("threshold").get<double>();
    const auto& arrays = header.at("arrays");
    if (arrays.size() != 6 + m.class_ids.size()) throw Error(Errc::io, "model bundle array table is inconsistent");
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& a : arrays) {
      const auto rows = a.at("shape").at(0).get<Eigen::Index>();
      const auto cols = a.at("shape").at(1).get<Eigen::Index>();
      if (rows < 0 || cols < 0) throw Error(Errc::io, "negative array shape in model bundle");
      mats.push_back(get_array(in, rows, cols));
    }
    m.W = mats[0];
    m.eigenvalues = mats[1].reshaped();
    m.mean = mats[2].reshaped();
    m.training = mats[3];
    m.kernel_col_mean = mats[4].reshaped();
    e.offset = mats[5].reshaped();
    m.gallery.assign(mats.begin() + 6, mats.end());
  } catch (const json::exception& ex) {
    throw Error(Errc::io, std::string("malformed model bundle header: ") + ex.what());
  }
  if (in.peek() != EOF) throw Error(Errc::io, "trailing bytes after model bundle payload");
  return e;
}

std::string results_csv(std::span<const protocols::EvalReport> reports) {
  std::ostringstream out;
  out << "dataset,method,protocol,nTest,mean_eer,std_eer,iterations\n";
  char buf[64];
  for (const auto& r : reports) {
    for (const auto& c : r.cells) {
      out << r.dataset << ',' << r.method << ',' << c.protocol << ',' << (c.n_test == 0 ? "All" : std::to_string(c.n_test));
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f,", c.summary.mean, c.summary.std);
      out << buf << c.iterations << '\n';
    }
  }
  return out.str();
}

void write_results_csv(const fs::path& path, std::span<const protocols::EvalReport> reports) {
  auto out = open_out(path);
  out << results_csv(reports);
}

void write_roc_csv(const fs::path& path, const eval::RocCurve& roc) {
  auto out = open_out(path);
  out << "threshold,far,frr\n";
  for (const auto& p : roc.points) {
    out << (std::isinf(p.threshold) ? std::string("-inf") : format_double(p.threshold)) << ',' << format_double(p.far)
        << ',' << format_double(p.frr) << '\n';
  }
}

void write_roc_svg(const fs::path& path, std::span<const std::pair<std::string, eval::RocCurve>> curves) {
  constexpr double W = 480, H = 480, pad = 50;
  static constexpr std::array<const char*, 8> colors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  auto out = open_out(path);
  char buf[128];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + 180 << "\" height=\"" << H << "\">\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                pad, pad / 2, W - 1.5 * pad, H - 1.5 * pad);
  out << buf;
  const double pw = W - 1.5 * pad, ph = H - 1.5 * pad;
  out << "<line x1=\"" << pad << "\" y1=\"" << pad / 2 + ph << "\" x2=\"" << pad + pw << "\" y2=\"" << pad / 2
      << "\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n";
  out << "<text x=\"" << pad + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">FAR</text>\n";
  out << "<text x=\"15\" y=\"" << pad / 2 + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 15 "
      << pad / 2 + ph / 2 << ")\">FRR</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = colors[c % colors.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : curves[c].second.points) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", pad + p.far * pw, pad / 2 + (1.0 - p.frr) * ph);
      out << buf;
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - pad / 2 + 10 << "\" y=\"" << pad / 2 + 16 * (c + 1) << "\" fill=\"" << color
        << "\" font-size=\"12\">" << curves[c].first << "</text>\n";
  }
  out << "</svg>\n";
}

void write_scalogram_csv(const fs::path& path, const features::Scalogram& s, const features::ScaleGrid& grid) {
  auto out = open_out(path);
  out << "center_hz,scale_s";
  for (Eigen::Index b = 0; b < s.coefficients.cols(); ++b) out << ',' << b;
  out << '\n';
  for (Eigen::Index k = 0; k < s.coefficients.rows(); ++k) {
    out << format_double(grid.center_frequencies[static_cast<std::size_t>(k)]) << ','
        << format_double(grid.scales[static_cast<std::size_t>(k)]);
    for (Eigen::Index b = 0; b < s.coefficients.cols(); ++b) out << ',' << format_double(std::abs(s.coefficients(k, b)));
    out << '\n';
  }
}

}  // namespace ppgauth::io
