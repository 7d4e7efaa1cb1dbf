#pragma once

#include "xsd/core_data.hpp"
#include "xsd/decoders.hpp"
#include "xsd/manifest.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>

namespace xsd {

struct EvaluationOptions {
  int k = 6;                // folds for the within-subject "single" column
  bool standardize = true;  // train-side statistics per split
};

/// A table cell: an accuracy, or the error that prevented computing it.
struct Cell {
  std::optional<double> accuracy;
  std::string error;
};

/// Per-subject accuracy for each method. The "single" column comes from
/// within-subject k-fold CV; the others from leave-one-subject-out.
struct ResultsTable {
  std::vector<SubjectId> subjects;
  std::vector<Method> methods;
  std::map<SubjectId, std::map<Method, Cell>> rows;
  KeyValues metadata;

  /// Arithmetic mean over the cells present in each column.
  std::map<Method, double> means() const;
  const Cell* cell(SubjectId subject, Method method) const;

  /// Header `subject,single,pool,sg,sg_cs`; absent cells are empty; last row `mean`.
  std::string to_csv() const;
  /// Aligned text rendering with the protocol of each column spelled out.
  std::string to_text() const;
};

double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Mean held-out accuracy over a stratified k-fold split of one subject.
double kfold_single(const SubjectDataset& subject, int k, const DecoderSpec& spec,
                    std::uint64_t seed, bool standardize = true);

/// Leave-one-subject-out over every subject for each non-single spec; the
/// single spec (if given) is evaluated by kfold_single inside each subject.
/// Held-out labels reach only `accuracy`.
ResultsTable loso(const MultiSubjectDataset& dataset, std::span<const DecoderSpec> specs,
                  std::uint64_t seed, const EvaluationOptions& opts = {});

/// Mean accuracy of `spec`'s method under independent within-subject label
/// permutations, one entry per permutation.
std::vector<double> permutation_check(const MultiSubjectDataset& dataset, const DecoderSpec& spec,
                                      int n_permutations, std::uint64_t seed,
                                      const EvaluationOptions& opts = {});

}  // namespace xsd
