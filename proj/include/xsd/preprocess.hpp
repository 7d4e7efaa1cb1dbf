#pragma once

#include "xsd/core_data.hpp"

#include <vector>

namespace xsd {

/// Epoched recording of one subject: trials x channels x timepoints, stored
/// flat in that order (timepoint fastest).
struct EpochedTensor {
  SubjectId subject_id = 0;
  std::size_t trials = 0;
  std::size_t channels = 0;
  std::size_t timepoints = 0;
  std::vector<double> data;
  Labels labels;

  double at(std::size_t trial, std::size_t channel, std::size_t time) const {
    return data[(trial * channels + channel) * timepoints + time];
  }
  void validate() const;
};

/// Block-mean decimation over `decimate` consecutive timepoints (a trailing
/// remainder is dropped), then channel-major flattening:
/// feature index = channel * t' + timepoint.
SubjectDataset vectorize(const EpochedTensor& tensor, int decimate);

/// Timepoints that `vectorize` drops for this decimation factor.
std::size_t dropped_timepoints(const EpochedTensor& tensor, int decimate);

/// Per-feature affine map estimated on training data only.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const MultiSubjectDataset& train);
  static Standardizer fit(const Matrix& train);

  Matrix apply(const Matrix& x) const;
  SubjectDataset apply(const SubjectDataset& s) const;
  MultiSubjectDataset apply(const MultiSubjectDataset& d) const;
};

struct Standardized {
  std::vector<MultiSubjectDataset> datasets;
  Standardizer params;
};

/// Fits on `train` and applies the same parameters to every entry of `apply_to`.
Standardized standardize(const MultiSubjectDataset& train,
                         const std::vector<MultiSubjectDataset>& apply_to);

}  // namespace xsd
