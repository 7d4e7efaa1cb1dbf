#include "xsd/core_data.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

namespace xsd {
namespace {

SubjectDataset make_subject(SubjectId id, int n, int positives, double offset = 0.0) {
  Matrix x(n, 2);
  Labels y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x(i, 0) = offset + i;
    x(i, 1) = offset - 0.5 * i;
    y[static_cast<std::size_t>(i)] = i < positives ? 1 : 0;
  }
  return SubjectDataset(id, x, y);
}

TEST(SubjectDataset, RejectsBadLabels) {
  Matrix x = Matrix::Zero(3, 1);
  EXPECT_THROW(SubjectDataset(1, x, {0, 1, 2}), Error);
  EXPECT_THROW(SubjectDataset(1, x, {0, 1}), Error);
  EXPECT_THROW(SubjectDataset(1, x, {1, 1, 1}), Error);
}

TEST(SubjectDataset, RejectsNonFinite) {
  Matrix x = Matrix::Zero(2, 1);
  x(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SubjectDataset(1, x, {0, 1}), Error);
}

TEST(SubjectDataset, TrialsRoundTrip) {
  const auto s = make_subject(4, 6, 3);
  std::vector<Trial> trials;
  for (std::size_t i = 0; i < s.size(); ++i) trials.push_back(s.trial(i));
  const auto back = SubjectDataset::from_trials(4, trials);
  EXPECT_EQ(back.features(), s.features());
  EXPECT_EQ(back.labels(), s.labels());
  EXPECT_EQ(s.trial(2).subject_id, 4);
}

TEST(MultiSubjectDataset, SortsAndValidates) {
  MultiSubjectDataset d({make_subject(3, 4, 2), make_subject(1, 4, 2)});
  EXPECT_EQ(d.subject_ids(), (std::vector<SubjectId>{1, 3}));
  EXPECT_THROW(MultiSubjectDataset({make_subject(1, 4, 2), make_subject(1, 4, 2)}), Error);
  Matrix x = Matrix::Zero(2, 3);
  EXPECT_THROW(MultiSubjectDataset({make_subject(1, 4, 2), SubjectDataset(2, x, {0, 1})}), Error);
  EXPECT_THROW(MultiSubjectDataset({make_subject(1, 4, 2)}).without(1), Error);
}

TEST(Pool, ExcludeOneOfThree) {
  MultiSubjectDataset d({make_subject(1, 10, 5), make_subject(2, 10, 5), make_subject(3, 10, 5)});
  const auto p = pool(d, {2});
  EXPECT_EQ(p.design.rows(), 20u);
  EXPECT_EQ(std::count(p.row_subject.begin(), p.row_subject.end(), 2), 0);
}

TEST(Pool, ExcludeNothingKeepsEveryRow) {
  MultiSubjectDataset d({make_subject(1, 7, 3), make_subject(2, 9, 4), make_subject(5, 5, 2)});
  EXPECT_EQ(pool(d).design.rows(), d.total_trials());
  EXPECT_EQ(d.total_trials(), 21u);
}

TEST(Pool, PreservesMultisetOfRows) {
  std::vector<SubjectDataset> subjects;
  for (int s = 1; s <= 16; ++s) subjects.push_back(make_subject(s, 8 + s, 4, 0.37 * s));
  MultiSubjectDataset d(subjects);
  const auto p = pool(d, {1});

  std::multiset<std::uint64_t> expected, got;
  std::size_t recount = 0;
  for (const auto& s : d.subjects()) {
    if (s.subject_id() == 1) continue;
    recount += s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
      expected.insert(oracle::row_hash(s.features().row(static_cast<Eigen::Index>(i)).data(), s.dim(), s.labels()[i]));
    }
  }
  for (std::size_t i = 0; i < p.design.rows(); ++i) {
    got.insert(oracle::row_hash(p.design.values.row(static_cast<Eigen::Index>(i)).data(), p.design.cols(), p.labels[i]));
  }
  EXPECT_EQ(p.design.rows(), recount);
  EXPECT_EQ(expected, got);
}

TEST(SplitKfold, TwelveTrialsSixFolds) {
  const auto s = make_subject(1, 12, 6);
  const auto folds = split_kfold(s, 6, 5);
  ASSERT_EQ(folds.size(), 6u);
  for (const auto& f : folds) {
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(s.labels()[f[0]] + s.labels()[f[1]], 1);
  }
}

TEST(SplitKfold, ThirteenTrialsSizes) {
  const auto s = make_subject(1, 13, 7);
  const auto folds = split_kfold(s, 6, 5);
  std::vector<std::size_t> sizes;
  for (const auto& f : folds) sizes.push_back(f.size());
  std::sort(sizes.rbegin(), sizes.rend());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 2, 2, 2, 2, 2}));
}

TEST(SplitKfold, SameSeedSameFolds) {
  const auto s = make_subject(1, 40, 17);
  EXPECT_EQ(split_kfold(s, 6, 99), split_kfold(s, 6, 99));
  EXPECT_NE(split_kfold(s, 6, 99), split_kfold(s, 6, 100));
}

TEST(SplitKfold, RejectsBadArguments) {
  const auto s = make_subject(1, 12, 6);
  EXPECT_THROW(split_kfold(s, 1, 0), Error);
  EXPECT_THROW(split_kfold(s, 13, 0), Error);
  EXPECT_THROW(split_kfold(make_subject(1, 12, 1), 2, 0), Error);
  EXPECT_NO_THROW(split_kfold(s, 12, 0));
}

// Partition and stratification over a sweep of sizes, class balances, and k.
TEST(SplitKfold, PartitionAndStratificationProperties) {
  for (int n = 12; n <= 60; n += 7) {
    for (int pos = 2; pos <= n - 2; pos += 5) {
      for (int k : {2, 3, 6}) {
        if (std::min(pos, n - pos) < 2) continue;
        const auto s = make_subject(1, n, pos);
        const auto folds = split_kfold(s, k, static_cast<std::uint64_t>(n * 31 + pos));
        std::vector<int> hits(static_cast<std::size_t>(n), 0);
        std::size_t lo = SIZE_MAX, hi = 0;
        for (const auto& f : folds) {
          lo = std::min(lo, f.size());
          hi = std::max(hi, f.size());
          int c1 = 0;
          for (auto i : f) {
            ++hits[i];
            c1 += s.labels()[i];
          }
          // class-1 share per fold stays within one trial of proportional
          const double expect1 = static_cast<double>(pos) / k;
          EXPECT_LE(std::abs(c1 - expect1), 1.0) << n << ' ' << pos << ' ' << k;
        }
        EXPECT_LE(hi - lo, 1u);
        for (int h : hits) EXPECT_EQ(h, 1);
      }
    }
  }
}

TEST(Folds, FoldOfAndTrainingIndices) {
  const FoldIndices folds = {{0, 3}, {1, 4}, {2}};
  EXPECT_EQ(fold_of(folds, 5), (std::vector<int>{0, 1, 2, 0, 1}));
  EXPECT_EQ(training_indices(folds, 1, 5), (std::vector<std::size_t>{0, 2, 3}));
}

TEST(DesignMatrix, WeightValidation) {
  Matrix x = Matrix::Ones(3, 2);
  EXPECT_NO_THROW(DesignMatrix(x, Vector::Ones(3)).validate());
  EXPECT_THROW(DesignMatrix(x, Vector::Ones(2)).validate(), Error);
  Vector neg = Vector::Ones(3);
  neg(1) = -1;
  EXPECT_THROW(DesignMatrix(x, neg).validate(), Error);
}

}  // namespace
}  // namespace xsd
