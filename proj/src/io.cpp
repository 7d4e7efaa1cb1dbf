#include "xsd/io.hpp"

#include "xsd/glm.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace xsd {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001B3ull;

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFF) << (8 * (7 - i));
    return r;
  }
  return v;
}

struct Fnv {
  std::uint64_t h = kFnvOffset;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= kFnvPrime;
    }
  }
  void u64(std::uint64_t v) {
    v = to_le(v);
    bytes(&v, sizeof v);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

std::string subject_stem(SubjectId id) { return "sub-" + std::to_string(id); }

Labels read_labels(const fs::path& path) {
  Labels out;
  const std::string text = read_file(path);
  for (const auto& line : split(text, '\n')) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto v = parse_ints(line.substr(first, line.find_last_not_of(" \t\r") - first + 1));
    if (v.size() != 1) throw Error("malformed label line in " + path.string());
    out.push_back(v[0]);
  }
  return out;
}

std::string labels_text(std::span<const int> labels) {
  std::string out;
  for (int y : labels) out += std::to_string(y) + '\n';
  return out;
}

}  // namespace

std::uint64_t fingerprint(const MultiSubjectDataset& dataset) {
  Fnv fnv;
  fnv.bytes("xsd-dataset", 11);
  fnv.u64(dataset.dim());
  for (const auto& s : dataset.subjects()) {
    fnv.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(s.subject_id())));
    fnv.u64(s.size());
    for (int y : s.labels()) fnv.u64(static_cast<std::uint64_t>(y));
    const Matrix& x = s.features();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) fnv.f64(x(i, j));
    }
  }
  return fnv.h;
}

std::string fingerprint_hex(std::uint64_t fp) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, fp >>= 4) out[static_cast<std::size_t>(i)] = kHex[fp & 0xF];
  return out;
}

void write_f64_le(const fs::path& path, std::span<const double> values) {
  std::string buf(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t v = to_le(std::bit_cast<std::uint64_t>(values[i]));
    std::memcpy(buf.data() + 8 * i, &v, 8);
  }
  write_file(path, buf);
}

std::vector<double> read_f64_le(const fs::path& path) {
  const std::string buf = read_file(path);
  if (buf.size() % 8 != 0) {
    throw Error(path.string() + ": size " + std::to_string(buf.size()) + " is not a multiple of 8");
  }
  std::vector<double> out(buf.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t v;
    std::memcpy(&v, buf.data() + 8 * i, 8);
    out[i] = std::bit_cast<double>(to_le(v));
  }
  return out;
}

void save_dataset(const MultiSubjectDataset& dataset, const fs::path& dir, PayloadFormat format,
                  const DatasetInfo& info) {
  if (info.channels && info.timepoints && *info.channels * *info.timepoints != dataset.dim()) {
    throw Error("channels x timepoints does not equal the feature dimensionality");
  }
  fs::create_directories(dir);
  KeyValues kv;
  kv.set("format", "xsd-dataset");
  kv.set("version", "1");
  kv.set("d", std::to_string(dataset.dim()));
  if (info.channels) kv.set("channels", std::to_string(*info.channels));
  if (info.timepoints) kv.set("timepoints", std::to_string(*info.timepoints));
  kv.set("payload", format == PayloadFormat::binary ? "binary" : "csv");
  kv.set("preprocessing", "inputs assumed high-pass filtered and epoched upstream");
  if (!info.window.empty()) kv.set("window", info.window);
  if (!info.sampling.empty()) kv.set("sampling", info.sampling);
  if (!info.source.empty()) kv.set("source", info.source);
  kv.set("n_subjects", std::to_string(dataset.size()));

  std::size_t idx = 0;
  for (const auto& s : dataset.subjects()) {
    const std::string key = "subject." + std::to_string(idx++);
    const std::string stem = subject_stem(s.subject_id());
    kv.set(key + ".id", std::to_string(s.subject_id()));
    kv.set(key + ".trials", std::to_string(s.size()));
    if (format == PayloadFormat::binary) {
      const Matrix& x = s.features();
      write_f64_le(dir / (stem + ".f64"), std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
      write_file(dir / (stem + ".labels"), labels_text(s.labels()));
      kv.set(key + ".features", stem + ".f64");
      kv.set(key + ".labels", stem + ".labels");
    } else {
      std::string csv;
      for (std::size_t i = 0; i < s.size(); ++i) {
        csv += std::to_string(s.labels()[i]);
        for (Eigen::Index j = 0; j < s.features().cols(); ++j) {
          csv += ',' + format_double(s.features()(static_cast<Eigen::Index>(i), j));
        }
        csv += '\n';
      }
      write_file(dir / (stem + ".csv"), csv);
      kv.set(key + ".features", stem + ".csv");
    }
  }
  kv.set("fingerprint", fingerprint_hex(fingerprint(dataset)));
  kv.save(dir / "manifest.txt");
}

LoadedDataset load_dataset(const fs::path& dir) {
  const auto kv = KeyValues::load(dir / "manifest.txt");
  if (kv.get("format") != "xsd-dataset") throw Error(dir.string() + " is not an xsd dataset");
  const auto d = static_cast<std::size_t>(kv.get_int("d"));
  if (kv.has("channels") != kv.has("timepoints")) {
    throw Error("manifest gives only one of channels / timepoints");
  }
  if (kv.has("channels") &&
      static_cast<std::size_t>(kv.get_int("channels") * kv.get_int("timepoints")) != d) {
    throw Error("manifest channels x timepoints does not equal d");
  }
  const bool binary = kv.get("payload") == "binary";
  if (!binary && kv.get("payload") != "csv") throw Error("unknown payload '" + kv.get("payload") + "'");

  const auto n_subjects = kv.get_int("n_subjects");
  std::vector<SubjectDataset> subjects;
  for (long long s = 0; s < n_subjects; ++s) {
    const std::string key = "subject." + std::to_string(s);
    const auto id = static_cast<SubjectId>(kv.get_int(key + ".id"));
    const auto trials = static_cast<std::size_t>(kv.get_int(key + ".trials"));
    const std::string what = "subject " + std::to_string(id);
    const fs::path features = dir / kv.get(key + ".features");
    if (!fs::exists(features)) throw Error(what + ": missing file " + features.string());

    Matrix x;
    Labels y;
    if (binary) {
      const auto values = read_f64_le(features);
      if (values.size() != trials * d) {
        throw Error(what + ": manifest lists " + std::to_string(trials) + " trials of dimension " +
                    std::to_string(d) + " but the payload holds " + std::to_string(values.size()) +
                    " values");
      }
      x = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(trials),
                                   static_cast<Eigen::Index>(d));
      const fs::path labels = dir / kv.get(key + ".labels");
      if (!fs::exists(labels)) throw Error(what + ": missing file " + labels.string());
      y = read_labels(labels);
    } else {
      std::vector<std::vector<double>> rows;
      for (const auto& line : split(read_file(features), '\n')) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != d + 1) {
          throw Error(what + ": CSV row with " + std::to_string(cells.size() - 1) +
                      " features, expected " + std::to_string(d));
        }
        y.push_back(parse_ints(cells[0]).at(0));
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = parse_double(cells[j + 1]);
        rows.push_back(std::move(row));
      }
      x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    if (static_cast<std::size_t>(x.rows()) != trials || y.size() != trials) {
      throw Error(what + ": manifest lists " + std::to_string(trials) + " trials but found " +
                  std::to_string(x.rows()) + " feature rows and " + std::to_string(y.size()) +
                  " labels");
    }
    subjects.emplace_back(id, std::move(x), std::move(y));
  }

  LoadedDataset out{MultiSubjectDataset(std::move(subjects)), kv, 0, true};
  out.fingerprint = fingerprint(out.data);
  if (kv.has("fingerprint")) out.fingerprint_ok = kv.get("fingerprint") == fingerprint_hex(out.fingerprint);
  return out;
}

void write_epoched(const EpochedTensor& tensor, const fs::path& dir, const std::string& window) {
  tensor.validate();
  fs::create_directories(dir);
  const std::string stem = subject_stem(tensor.subject_id);
  KeyValues kv;
  kv.set("format", "xsd-epoched");
  kv.set("version", "1");
  kv.set("subject_id", std::to_string(tensor.subject_id));
  kv.set("trials", std::to_string(tensor.trials));
  kv.set("channels", std::to_string(tensor.channels));
  kv.set("timepoints", std::to_string(tensor.timepoints));
  kv.set("layout", "trial,channel,time");
  kv.set("dtype", "float64-le");
  kv.set("payload", stem + ".f64");
  kv.set("labels", stem + ".labels");
  if (!window.empty()) kv.set("window", window);
  write_f64_le(dir / (stem + ".f64"), tensor.data);
  write_file(dir / (stem + ".labels"), labels_text(tensor.labels));
  kv.save(dir / (stem + ".hdr"));
}

EpochedTensor read_epoched(const fs::path& header) {
  const auto kv = KeyValues::load(header);
  if (kv.get("format") != "xsd-epoched") throw Error(header.string() + " is not an epoched tensor header");
  if (kv.get_or("layout", "trial,channel,time") != "trial,channel,time") {
    throw Error(header.string() + ": unsupported layout '" + kv.get("layout") + "'");
  }
  if (kv.get_or("dtype", "float64-le") != "float64-le") {
    throw Error(header.string() + ": unsupported dtype '" + kv.get("dtype") + "'");
  }
  EpochedTensor t;
  t.subject_id = static_cast<SubjectId>(kv.get_int("subject_id"));
  t.trials = static_cast<std::size_t>(kv.get_int("trials"));
  t.channels = static_cast<std::size_t>(kv.get_int("channels"));
  t.timepoints = static_cast<std::size_t>(kv.get_int("timepoints"));
  const fs::path base = header.parent_path();
  t.data = read_f64_le(base / kv.get("payload"));
  t.labels = read_labels(base / kv.get("labels"));
  t.validate();
  return t;
}

std::vector<EpochedTensor> read_tensor_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("tensor directory " + dir.string() + " does not exist");
  std::vector<fs::path> headers;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".hdr") headers.push_back(entry.path());
  }
  std::sort(headers.begin(), headers.end());
  std::vector<EpochedTensor> out;
  for (const auto& h : headers) out.push_back(read_epoched(h));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.subject_id < b.subject_id; });
  if (out.empty()) throw Error("no *.hdr tensor headers in " + dir.string());
  return out;
}

}  // namespace xsd
