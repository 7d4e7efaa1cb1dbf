#include "xsd/preprocess.hpp"

#include <cmath>

namespace xsd {

void EpochedTensor::validate() const {
  const std::string what = "tensor for subject " + std::to_string(subject_id);
  if (trials * channels * timepoints != data.size()) {
    throw Error(what + ": header shape " + std::to_string(trials) + "x" + std::to_string(channels) +
                "x" + std::to_string(timepoints) + " does not match payload of " +
                std::to_string(data.size()) + " values");
  }
  if (labels.size() != trials) {
    throw Error(what + ": " + std::to_string(labels.size()) + " labels for " +
                std::to_string(trials) + " trials");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(what + ": label " + std::to_string(y) + " not in {0,1}");
  }
}

std::size_t dropped_timepoints(const EpochedTensor& tensor, int decimate) {
  if (decimate < 1) throw Error("decimate must be >= 1");
  return tensor.timepoints % static_cast<std::size_t>(decimate);
}

SubjectDataset vectorize(const EpochedTensor& tensor, int decimate) {
  tensor.validate();
  if (decimate < 1) throw Error("decimate must be >= 1");
  const auto step = static_cast<std::size_t>(decimate);
  const std::size_t kept = tensor.timepoints / step;
  if (kept == 0) {
    throw Error("decimate " + std::to_string(decimate) + " exceeds " +
                std::to_string(tensor.timepoints) + " timepoints");
  }
  Matrix x(static_cast<Eigen::Index>(tensor.trials),
           static_cast<Eigen::Index>(tensor.channels * kept));
  for (std::size_t tr = 0; tr < tensor.trials; ++tr) {
    for (std::size_t ch = 0; ch < tensor.channels; ++ch) {
      for (std::size_t b = 0; b < kept; ++b) {
        const double first = tensor.at(tr, ch, b * step);
        double acc = 0.0;
        bool constant = true;
        for (std::size_t u = 0; u < step; ++u) {
          const double v = tensor.at(tr, ch, b * step + u);
          acc += v;
          constant = constant && v == first;
        }
        // A constant block keeps its exact value; the rounded mean may not.
        x(static_cast<Eigen::Index>(tr), static_cast<Eigen::Index>(ch * kept + b)) =
            constant ? first : acc / static_cast<double>(step);
      }
    }
  }
  return SubjectDataset(tensor.subject_id, std::move(x), tensor.labels);
}

Standardizer Standardizer::fit(const Matrix& train) {
  if (train.rows() == 0) throw Error("cannot standardize on an empty training set");
  Standardizer s;
  s.mean = train.colwise().mean().transpose();
  s.scale.resize(train.cols());
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    if (train.col(j).minCoeff() == train.col(j).maxCoeff()) {
      // Constant column: pin the mean to the exact value so it maps to 0.
      s.mean[j] = train(0, j);
      s.scale[j] = 1.0;
      continue;
    }
    const double sd = std::sqrt((train.col(j).array() - s.mean[j]).square().mean());
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::fit(const MultiSubjectDataset& train) {
  return fit(pool(train).design.values);
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw Error("standardizer dimensionality mismatch");
  Matrix out = x;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    out.col(j) = (out.col(j).array() - mean[j]) / scale[j];
  }
  return out;
}

SubjectDataset Standardizer::apply(const SubjectDataset& s) const {
  return SubjectDataset(s.subject_id(), apply(s.features()), s.labels());
}

MultiSubjectDataset Standardizer::apply(const MultiSubjectDataset& d) const {
  std::vector<SubjectDataset> out;
  out.reserve(d.size());
  for (const auto& s : d.subjects()) out.push_back(apply(s));
  return MultiSubjectDataset(std::move(out));
}

Standardized standardize(const MultiSubjectDataset& train,
                         const std::vector<MultiSubjectDataset>& apply_to) {
  Standardized out{{}, Standardizer::fit(train)};
  out.datasets.reserve(apply_to.size());
  for (const auto& d : apply_to) out.datasets.push_back(out.params.apply(d));
  return out;
}

}  // namespace xsd
