#include "xsd/stacking.hpp"

#include "xsd/manifest.hpp"
#include "xsd/parallel.hpp"
#include "xsd/random.hpp"

#include <algorithm>

namespace xsd {

void StackingOptions::validate() const {
  if (k < 2) throw Error("stacking needs k >= 2 folds");
  first_level.validate();
  combiner.validate();
  solver.validate();
  shift.validate();
}

std::vector<SubjectId> FirstLevelBank::subject_ids() const {
  std::vector<SubjectId> ids;
  for (const auto& [id, m] : models) ids.push_back(id);
  return ids;
}

std::size_t FirstLevelBank::dim() const {
  if (models.empty()) throw Error("empty first-level bank");
  return models.begin()->second.dim();
}

FirstLevelBank fit_first_level(const MultiSubjectDataset& train, int k, std::uint64_t seed,
                               const Regularization& reg, const FitOptions& solver) {
  if (k < 2) throw Error("k must be at least 2");
  for (const auto& s : train.subjects()) {
    for (int c : {0, 1}) {
      if (s.count(c) < static_cast<std::size_t>(k)) {
        throw Error("subject " + std::to_string(s.subject_id()) + " has " +
                    std::to_string(s.count(c)) + " trials of class " + std::to_string(c) +
                    ", fewer than k=" + std::to_string(k));
      }
    }
  }

  struct Fitted {
    LinearModel full;
    std::vector<FoldModel> folds;
    std::vector<int> assignment;
  };
  const auto& subjects = train.subjects();
  std::vector<Fitted> fitted(subjects.size());
  parallel_for(subjects.size(), [&](std::size_t si) {
    const auto& s = subjects[si];
    // Keyed by subject id, so a subject's models do not depend on which
    // other subjects are present.
    const std::uint64_t subject_seed =
        derive_seed(seed, {0x5354u, static_cast<std::uint64_t>(s.subject_id())});
    FitOptions opts = solver;
    opts.seed = subject_seed;
    Fitted& out = fitted[si];
    out.full = fit_regularized(DesignMatrix(s.features()), s.labels(), reg, opts);
    const auto folds = split_kfold(s, k, subject_seed);
    out.assignment = fold_of(folds, s.size());
    for (int f = 0; f < k; ++f) {
      FoldModel fm;
      fm.fold = f;
      fm.trained_on = training_indices(folds, f, s.size());
      fm.model = fit_regularized(DesignMatrix(select_rows(s.features(), fm.trained_on)),
                                 select(s.labels(), fm.trained_on), reg, opts);
      out.folds.push_back(std::move(fm));
    }
  });

  FirstLevelBank bank;
  bank.k = k;
  bank.seed = seed;
  for (std::size_t si = 0; si < subjects.size(); ++si) {
    const auto id = subjects[si].subject_id();
    bank.models.emplace(id, std::move(fitted[si].full));
    bank.oof_models.emplace(id, std::move(fitted[si].folds));
    bank.fold_assignment.emplace(id, std::move(fitted[si].assignment));
  }
  return bank;
}

SecondLevelDataset build_second_level_train(const FirstLevelBank& bank,
                                            const MultiSubjectDataset& trials) {
  SecondLevelDataset out;
  out.columns = bank.subject_ids();
  const std::size_t cols = out.columns.size();
  const std::size_t n = trials.total_trials();
  out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  out.provenance.resize(n * cols);
  out.labels.reserve(n);
  out.row_subject.reserve(n);
  out.row_trial.reserve(n);

  std::size_t row0 = 0;
  for (const auto& s : trials.subjects()) {
    const auto own = bank.models.find(s.subject_id());
    if (own == bank.models.end()) {
      throw Error("train-mode trial from subject " + std::to_string(s.subject_id()) +
                  ", which has no first-level model");
    }
    const auto& assignment = bank.fold_assignment.at(s.subject_id());
    if (assignment.size() != s.size()) {
      throw Error("subject " + std::to_string(s.subject_id()) + " has " +
                  std::to_string(s.size()) + " trials but the bank recorded " +
                  std::to_string(assignment.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const SubjectId col_subject = out.columns[c];
      if (col_subject != s.subject_id()) {
        const Vector p = predict_proba(bank.models.at(col_subject), s.features());
        for (std::size_t i = 0; i < s.size(); ++i) {
          out.features(static_cast<Eigen::Index>(row0 + i), static_cast<Eigen::Index>(c)) =
              p[static_cast<Eigen::Index>(i)];
          out.provenance[(row0 + i) * cols + c] = CellSource{col_subject, -1};
        }
        continue;
      }
      for (const auto& fm : bank.oof_models.at(col_subject)) {
        std::vector<std::size_t> held;
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (assignment[i] == fm.fold) held.push_back(i);
        }
        const Vector p = predict_proba(fm.model, select_rows(s.features(), held));
        for (std::size_t h = 0; h < held.size(); ++h) {
          out.features(static_cast<Eigen::Index>(row0 + held[h]), static_cast<Eigen::Index>(c)) =
              p[static_cast<Eigen::Index>(h)];
          out.provenance[(row0 + held[h]) * cols + c] = CellSource{col_subject, fm.fold};
        }
      }
    }
    out.labels.insert(out.labels.end(), s.labels().begin(), s.labels().end());
    out.row_subject.insert(out.row_subject.end(), s.size(), s.subject_id());
    for (std::size_t i = 0; i < s.size(); ++i) out.row_trial.push_back(i);
    row0 += s.size();
  }
  return out;
}

SecondLevelDataset build_second_level_test(const FirstLevelBank& bank, const Matrix& features) {
  SecondLevelDataset out;
  out.columns = bank.subject_ids();
  const std::size_t cols = out.columns.size();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n > 0 && static_cast<std::size_t>(features.cols()) != bank.dim()) {
    throw Error("trials have " + std::to_string(features.cols()) + " features, bank expects " +
                std::to_string(bank.dim()));
  }
  out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  out.provenance.resize(n * cols);
  for (std::size_t c = 0; c < cols; ++c) {
    if (n == 0) break;
    out.features.col(static_cast<Eigen::Index>(c)) =
        predict_proba(bank.models.at(out.columns[c]), features);
    for (std::size_t i = 0; i < n; ++i) out.provenance[i * cols + c] = CellSource{out.columns[c], -1};
  }
  return out;
}

StackedModel fit_stacked(FirstLevelBank bank, const MultiSubjectDataset& train,
                         const Matrix* target_features, const StackingOptions& opts) {
  opts.validate();
  SecondLevelDataset second = build_second_level_train(bank, train);

  StackedModel model;
  std::optional<Vector> row_weights;
  if (target_features != nullptr) {
    ShiftOptions shift = opts.shift;
    shift.seed = derive_seed(opts.seed, {0x4353u});
    if (shift.space == ShiftSpace::second_level) {
      const SecondLevelDataset target = build_second_level_test(bank, *target_features);
      model.weights = estimate_weights(second.features, target.features, shift);
    } else {
      model.weights = estimate_weights(pool(train).design.values, *target_features, shift);
    }
    row_weights = model.weights->weights;
    model.used_weights = true;
  }

  FitOptions solver = opts.solver;
  solver.seed = derive_seed(opts.seed, {0x434Fu});
  model.combiner = fit_regularized(DesignMatrix(second.features, row_weights), second.labels,
                                   opts.combiner, solver);
  model.bank = std::move(bank);
  return model;
}

StackedModel fit_stacked(const MultiSubjectDataset& train, const StackingOptions& opts) {
  opts.validate();
  return fit_stacked(fit_first_level(train, opts.k, opts.seed, opts.first_level, opts.solver),
                     train, nullptr, opts);
}

StackedModel fit_stacked(const MultiSubjectDataset& train, const Matrix& target_features,
                         const StackingOptions& opts) {
  opts.validate();
  return fit_stacked(fit_first_level(train, opts.k, opts.seed, opts.first_level, opts.solver),
                     train, &target_features, opts);
}

Vector predict_stacked(const StackedModel& model, const Matrix& features) {
  if (features.rows() == 0) return Vector(0);
  const SecondLevelDataset second = build_second_level_test(model.bank, features);
  return predict_proba(model.combiner, second.features);
}

namespace {

std::string subject_stem(SubjectId id) { return "sub-" + std::to_string(id); }

}  // namespace

void save_stacked(const StackedModel& model, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "first_level");
  KeyValues kv;
  kv.set("format", "xsd-stacked");
  kv.set("version", "1");
  kv.set("k", std::to_string(model.bank.k));
  kv.set("seed", std::to_string(model.bank.seed));
  kv.set("subjects", join_ints(model.bank.subject_ids()));
  kv.set("dim", std::to_string(model.bank.dim()));
  kv.set("used_weights", model.used_weights ? "true" : "false");
  kv.set("combiner", "combiner.txt");
  if (model.weights) {
    kv.set("weights.clip_lo", format_double(model.weights->clip_lo));
    kv.set("weights.clip_hi", format_double(model.weights->clip_hi));
    kv.set("weights.raw_mean", format_double(model.weights->raw_mean));
    kv.set("weights.domain_lambda", format_double(model.weights->domain_lambda));
  }
  save_model(model.combiner, dir / "combiner.txt");
  for (const auto& [id, m] : model.bank.models) {
    const auto stem = subject_stem(id);
    save_model(m, dir / "first_level" / (stem + ".full.txt"));
    for (const auto& fm : model.bank.oof_models.at(id)) {
      save_model(fm.model, dir / "first_level" / (stem + ".fold-" + std::to_string(fm.fold) + ".txt"));
    }
    kv.set(stem + ".folds", join_ints(model.bank.fold_assignment.at(id)));
  }
  kv.save(dir / "manifest.txt");
}

StackedModel load_stacked(const std::filesystem::path& dir) {
  const auto kv = KeyValues::load(dir / "manifest.txt");
  if (kv.get("format") != "xsd-stacked") throw Error(dir.string() + " is not a stacked model");
  StackedModel model;
  model.bank.k = static_cast<int>(kv.get_int("k"));
  model.bank.seed = static_cast<std::uint64_t>(std::stoull(kv.get("seed")));
  model.used_weights = kv.get("used_weights") == "true";
  model.combiner = load_model(dir / kv.get("combiner"));
  for (SubjectId id : parse_ints(kv.get("subjects"))) {
    const auto stem = subject_stem(id);
    model.bank.models.emplace(id, load_model(dir / "first_level" / (stem + ".full.txt")));
    auto assignment = parse_ints(kv.get(stem + ".folds"));
    std::vector<FoldModel> folds;
    for (int f = 0; f < model.bank.k; ++f) {
      FoldModel fm;
      fm.fold = f;
      fm.model = load_model(dir / "first_level" / (stem + ".fold-" + std::to_string(f) + ".txt"));
      for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != f) fm.trained_on.push_back(i);
      }
      folds.push_back(std::move(fm));
    }
    model.bank.oof_models.emplace(id, std::move(folds));
    model.bank.fold_assignment.emplace(id, std::move(assignment));
  }
  if (model.combiner.dim() != model.bank.models.size()) {
    throw Error("combiner dimensionality does not match the number of first-level models");
  }
  return model;
}

}  // namespace xsd
