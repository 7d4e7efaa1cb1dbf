#pragma once

#include "xsd/core_data.hpp"
#include "xsd/manifest.hpp"
#include "xsd/preprocess.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace xsd {

/// FNV-1a 64 over subject ids, labels, and the little-endian bytes of every feature.
std::uint64_t fingerprint(const MultiSubjectDataset& dataset);
std::string fingerprint_hex(std::uint64_t fp);

enum class PayloadFormat { binary, csv };

/// Free-form descriptive fields recorded in the dataset manifest.
struct DatasetInfo {
  std::optional<std::size_t> channels;
  std::optional<std::size_t> timepoints;
  std::string window;    // epoch window, as given by the producer
  std::string sampling;  // informational
  std::string source;
};

/// Writes `manifest.txt` plus one payload per subject. Binary payloads are raw
/// float64 little-endian (row-major n x d) with labels in a text file; CSV
/// payloads hold `label,f0,...,f{d-1}` per line in shortest round-trip form.
void save_dataset(const MultiSubjectDataset& dataset, const std::filesystem::path& dir,
                  PayloadFormat format = PayloadFormat::binary, const DatasetInfo& info = {});

struct LoadedDataset {
  MultiSubjectDataset data;
  KeyValues manifest;
  std::uint64_t fingerprint = 0;
  bool fingerprint_ok = true;  // false: content hash differs from the manifest's
};

LoadedDataset load_dataset(const std::filesystem::path& dir);

/// Epoched tensors: `sub-<id>.hdr` (key=value shape header), `sub-<id>.f64`
/// payload in trial, channel, time order, `sub-<id>.labels` one label per line.
void write_epoched(const EpochedTensor& tensor, const std::filesystem::path& dir,
                   const std::string& window = {});
EpochedTensor read_epoched(const std::filesystem::path& header);
/// Every `*.hdr` in `dir`, ordered by subject id.
std::vector<EpochedTensor> read_tensor_dir(const std::filesystem::path& dir);

void write_f64_le(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64_le(const std::filesystem::path& path);

}  // namespace xsd
