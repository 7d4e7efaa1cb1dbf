#include "xsd/evaluation.hpp"

#include "xsd/io.hpp"
#include "xsd/parallel.hpp"
#include "xsd/preprocess.hpp"
#include "xsd/random.hpp"

#include <algorithm>
#include <cstdio>

namespace xsd {

namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string column_title(Method m) {
  switch (m) {
    case Method::single: return "single";
    case Method::pool: return "pool";
    case Method::sg: return "SG";
    case Method::sg_cs: return "SG+CS";
  }
  return "?";
}

bool same_regularization(const Regularization& a, const Regularization& b) {
  return a.mode == b.mode && a.ratio == b.ratio && a.grid == b.grid && a.folds == b.folds;
}

bool same_first_level(const DecoderSpec& a, const DecoderSpec& b) {
  return a.k == b.k && same_regularization(a.regularization, b.regularization) &&
         a.solver.tol == b.solver.tol && a.solver.max_iter == b.solver.max_iter;
}

std::string describe(const Regularization& r) {
  if (r.mode == Regularization::Mode::fixed) return "fixed:" + format_double(r.ratio) + "*lambda_max";
  return "cv:" + std::to_string(r.folds) + "-fold";
}

}  // namespace

std::map<Method, double> ResultsTable::means() const {
  std::map<Method, double> out;
  for (Method m : methods) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& [id, row] : rows) {
      const auto it = row.find(m);
      if (it != row.end() && it->second.accuracy) {
        acc += *it->second.accuracy;
        ++n;
      }
    }
    if (n > 0) out[m] = acc / static_cast<double>(n);
  }
  return out;
}

const Cell* ResultsTable::cell(SubjectId subject, Method method) const {
  const auto r = rows.find(subject);
  if (r == rows.end()) return nullptr;
  const auto c = r->second.find(method);
  return c == r->second.end() ? nullptr : &c->second;
}

std::string ResultsTable::to_csv() const {
  std::string out = "subject";
  for (Method m : kAllMethods) out += ',' + std::string(to_string(m));
  out += '\n';
  for (SubjectId id : subjects) {
    out += std::to_string(id);
    for (Method m : kAllMethods) {
      out += ',';
      const Cell* c = cell(id, m);
      if (c && c->accuracy) out += fixed6(*c->accuracy);
    }
    out += '\n';
  }
  const auto mean = means();
  out += "mean";
  for (Method m : kAllMethods) {
    out += ',';
    if (const auto it = mean.find(m); it != mean.end()) out += fixed6(it->second);
  }
  out += '\n';
  return out;
}

std::string ResultsTable::to_text() const {
  auto cell_text = [](const Cell* c) -> std::string {
    if (c == nullptr) return "-";
    if (!c->accuracy) return "failed";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", *c->accuracy);
    return buf;
  };
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  const bool has_single = std::find(methods.begin(), methods.end(), Method::single) != methods.end();
  std::vector<Method> cross;
  for (Method m : methods) {
    if (m != Method::single) cross.push_back(m);
  }

  std::string out;
  std::string header = pad("Subj.", 6) + " |";
  if (has_single) header += pad("single", 7) + " ||";
  for (Method m : cross) header += pad(column_title(m), 7) + " |";
  out += header + '\n' + std::string(header.size(), '-') + '\n';
  for (SubjectId id : subjects) {
    std::string line = pad(std::to_string(id), 6) + " |";
    if (has_single) line += pad(cell_text(cell(id, Method::single)), 7) + " ||";
    for (Method m : cross) line += pad(cell_text(cell(id, m)), 7) + " |";
    out += line + '\n';
  }
  out += std::string(header.size(), '=') + '\n';
  const auto mean = means();
  auto mean_text = [&](Method m) -> std::string {
    const auto it = mean.find(m);
    if (it == mean.end()) return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", it->second);
    return buf;
  };
  std::string line = pad("mean", 6) + " |";
  if (has_single) line += pad(mean_text(Method::single), 7) + " ||";
  for (Method m : cross) line += pad(mean_text(m), 7) + " |";
  out += line + "\n\n";
  if (has_single) out += "single: within-subject " + metadata.get_or("k", "?") + "-fold cross-validation\n";
  if (!cross.empty()) out += "pool, SG, SG+CS: leave-one-subject-out\n";
  for (SubjectId id : subjects) {
    for (Method m : methods) {
      const Cell* c = cell(id, m);
      if (c && !c->accuracy) {
        out += "subject " + std::to_string(id) + " " + std::string(to_string(m)) + ": " + c->error + '\n';
      }
    }
  }
  for (const auto& [k, v] : metadata.entries()) out += k + ": " + v + '\n';
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw Error("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw Error("accuracy: empty label vector");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double kfold_single(const SubjectDataset& subject, int k, const DecoderSpec& spec,
                    std::uint64_t seed, bool standardize) {
  const auto folds = split_kfold(subject, k, seed);
  DecoderSpec single = spec;
  single.method = Method::single;
  double total = 0.0;
  for (int f = 0; f < k; ++f) {
    const auto train_idx = training_indices(folds, f, subject.size());
    const auto& test_idx = folds[static_cast<std::size_t>(f)];
    SubjectDataset train = subject.subset(train_idx);
    Matrix test = select_rows(subject.features(), test_idx);
    if (standardize) {
      const auto st = Standardizer::fit(train.features());
      train = st.apply(train);
      test = st.apply(test);
    }
    single.seed = derive_seed(seed, {static_cast<std::uint64_t>(f)});
    const auto decoder = fit_decoder(single, MultiSubjectDataset({std::move(train)}));
    const auto pred = predict_decoder(decoder, test);
    total += accuracy(pred.labels, select(subject.labels(), test_idx));
  }
  return total / static_cast<double>(k);
}

ResultsTable loso(const MultiSubjectDataset& dataset, std::span<const DecoderSpec> specs,
                  std::uint64_t seed, const EvaluationOptions& opts) {
  if (dataset.size() < 2) throw Error("leave-one-subject-out needs at least 2 subjects");
  ResultsTable table;
  table.subjects = dataset.subject_ids();
  for (const auto& spec : specs) {
    spec.validate();
    if (std::find(table.methods.begin(), table.methods.end(), spec.method) != table.methods.end()) {
      throw Error("method '" + std::string(to_string(spec.method)) + "' requested twice");
    }
    table.methods.push_back(spec.method);
  }

  table.metadata.set("seed", std::to_string(seed));
  table.metadata.set("k", std::to_string(opts.k));
  table.metadata.set("standardize", opts.standardize ? "train-side" : "off");
  table.metadata.set("fingerprint", fingerprint_hex(fingerprint(dataset)));
  for (const auto& spec : specs) {
    const std::string m(to_string(spec.method));
    table.metadata.set(m + ".lambda", describe(spec.regularization));
    if (spec.method == Method::sg || spec.method == Method::sg_cs) {
      table.metadata.set(m + ".combiner_lambda", describe(spec.combiner));
    }
    if (spec.method == Method::sg_cs) {
      table.metadata.set(m + ".shift_space", std::string(to_string(spec.shift.space)));
      table.metadata.set(m + ".clip", format_double(spec.shift.clip_lo) + "," + format_double(spec.shift.clip_hi));
    }
  }

  const auto& subjects = dataset.subjects();
  const std::size_t n = subjects.size();
  // One task per (subject, single) plus one per held-out subject for the rest.
  std::vector<std::map<Method, Cell>> results(n);
  parallel_for(n, [&](std::size_t si) {
    const auto& held = subjects[si];
    const auto held_id = static_cast<std::uint64_t>(held.subject_id());
    auto& row = results[si];

    for (const auto& spec : specs) {
      if (spec.method != Method::single) continue;
      try {
        row[Method::single].accuracy =
            kfold_single(held, opts.k, spec, derive_seed(seed, {0x53u, held_id}), opts.standardize);
      } catch (const std::exception& e) {
        row[Method::single].error = e.what();
      }
    }

    MultiSubjectDataset train = dataset.without(held.subject_id());
    Matrix test = held.features();
    if (opts.standardize) {
      const auto st = Standardizer::fit(train);
      train = st.apply(train);
      test = st.apply(test);
    }
    const std::uint64_t fold_seed = derive_seed(seed, {0x4Cu, held_id});

    std::optional<FirstLevelBank> shared_bank;
    const DecoderSpec* bank_spec = nullptr;
    for (const auto& spec : specs) {
      if (spec.method == Method::single) continue;
      Cell& cell = row[spec.method];
      try {
        DecoderSpec fold_spec = spec;
        fold_spec.seed = fold_seed;
        const bool stacked = spec.method == Method::sg || spec.method == Method::sg_cs;
        const FirstLevelBank* bank = nullptr;
        if (stacked) {
          if (!shared_bank) {
            const auto so = fold_spec.stacking();
            shared_bank = fit_first_level(train, so.k, so.seed, so.first_level, so.solver);
            bank_spec = &spec;
          }
          if (same_first_level(*bank_spec, spec)) bank = &*shared_bank;
        }
        const auto decoder = fit_decoder(fold_spec, train, &test, bank);
        const auto pred = predict_decoder(decoder, test);
        cell.accuracy = accuracy(pred.labels, held.labels());
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  });

  for (std::size_t si = 0; si < n; ++si) table.rows[subjects[si].subject_id()] = std::move(results[si]);
  return table;
}

std::vector<double> permutation_check(const MultiSubjectDataset& dataset, const DecoderSpec& spec,
                                      int n_permutations, std::uint64_t seed,
                                      const EvaluationOptions& opts) {
  if (n_permutations < 1) throw Error("need at least one permutation");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_permutations));
  for (int p = 0; p < n_permutations; ++p) {
    std::vector<SubjectDataset> permuted;
    for (const auto& s : dataset.subjects()) {
      Labels y = s.labels();
      RandomStream rng(derive_seed(seed, {0x50u, static_cast<std::uint64_t>(p)}),
                       static_cast<std::uint64_t>(s.subject_id()));
      shuffle(std::span<int>(y), rng);
      permuted.push_back(s.with_labels(std::move(y)));
    }
    const MultiSubjectDataset shuffled(std::move(permuted));
    const auto table = loso(shuffled, std::span<const DecoderSpec>(&spec, 1),
                            derive_seed(seed, {0x51u, static_cast<std::uint64_t>(p)}), opts);
    const auto means = table.means();
    const auto it = means.find(spec.method);
    if (it == means.end()) {
      throw Error("permutation " + std::to_string(p) + ": every cell failed");
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace xsd
