// Command-line driver: synthetic data, tensor ingest, evaluation, weight
// export and the permutation sanity harness.

#include "xsd/covariate_shift.hpp"
#include "xsd/decoders.hpp"
#include "xsd/evaluation.hpp"
#include "xsd/io.hpp"
#include "xsd/preprocess.hpp"
#include "xsd/stacking.hpp"
#include "xsd/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace {

struct ModelFlags {
  int k = 6;
  std::string lambda_mode = "fixed";
  double lambda_ratio = 0.01;
  std::string shift_space = "second_level";
  std::string clip = "0.1,10";
  std::uint64_t seed = 0;
  bool no_standardize = false;

  void add_to(CLI::App* cmd, bool with_shift) {
    cmd->add_option("--k", k, "Within-subject folds")->check(CLI::Range(2, 1000));
    cmd->add_option("--lambda-mode", lambda_mode, "fixed | cv")
        ->check(CLI::IsMember({"fixed", "cv"}));
    cmd->add_option("--lambda-ratio", lambda_ratio, "lambda / lambda_max in fixed mode")
        ->check(CLI::NonNegativeNumber);
    if (with_shift) {
      cmd->add_option("--shift-space", shift_space, "second_level | original")
          ->check(CLI::IsMember({"second_level", "original"}));
      cmd->add_option("--clip", clip, "Weight clipping range lo,hi");
    }
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_flag("--no-standardize", no_standardize, "Disable train-side standardization");
  }

  xsd::DecoderSpec spec(xsd::Method method) const {
    xsd::DecoderSpec s;
    s.method = method;
    s.k = k;
    s.regularization.mode =
        lambda_mode == "cv" ? xsd::Regularization::Mode::cv : xsd::Regularization::Mode::fixed;
    s.regularization.ratio = lambda_ratio;
    s.combiner = s.regularization;
    s.shift.space = xsd::parse_shift_space(shift_space);
    const auto parts = xsd::split(clip, ',');
    if (parts.size() != 2) throw xsd::Error("--clip expects lo,hi (got '" + clip + "')");
    s.shift.clip_lo = xsd::parse_double(parts[0]);
    s.shift.clip_hi = xsd::parse_double(parts[1]);
    s.seed = seed;
    s.validate();
    return s;
  }

  xsd::EvaluationOptions evaluation() const { return {k, !no_standardize}; }
};

void echo(const xsd::KeyValues& kv) {
  std::cout << "# resolved configuration\n";
  for (const auto& [k, v] : kv.entries()) std::cout << "#   " << k << " = " << v << '\n';
}

xsd::LoadedDataset load_checked(const std::string& path) {
  auto loaded = xsd::load_dataset(path);
  if (!loaded.fingerprint_ok) {
    std::cerr << "warning: dataset content hash " << xsd::fingerprint_hex(loaded.fingerprint)
              << " differs from manifest\n";
  }
  return loaded;
}

int run_synth(const xsd::SynthConfig& cfg, const std::string& out, const std::string& payload) {
  xsd::KeyValues kv;
  kv.set("command", "synth");
  kv.set("subjects", std::to_string(cfg.n_subjects));
  kv.set("trials", std::to_string(cfg.trials_per_subject));
  kv.set("dim", std::to_string(cfg.dim));
  kv.set("mu", xsd::format_double(cfg.mu));
  kv.set("sigma", xsd::format_double(cfg.sigma));
  kv.set("gamma", xsd::format_double(cfg.gamma));
  kv.set("tau", xsd::format_double(cfg.tau));
  kv.set("seed", std::to_string(cfg.seed));
  kv.set("out", out);
  echo(kv);
  const auto synth = xsd::generate(cfg);
  xsd::DatasetInfo info;
  info.source = "synthetic linear-Gaussian: mu=" + xsd::format_double(cfg.mu) +
                " sigma=" + xsd::format_double(cfg.sigma) + " gamma=" + xsd::format_double(cfg.gamma) +
                " tau=" + xsd::format_double(cfg.tau) + " seed=" + std::to_string(cfg.seed);
  xsd::save_dataset(synth.data, out,
                    payload == "csv" ? xsd::PayloadFormat::csv : xsd::PayloadFormat::binary, info);
  xsd::save_params(synth.params, fs::path(out) / "params");
  for (const auto& p : synth.params) {
    std::cout << "subject " << p.subject_id << " bayes_accuracy "
              << xsd::format_double(xsd::bayes_accuracy(p, cfg)) << '\n';
  }
  std::cout << "fingerprint " << xsd::fingerprint_hex(xsd::fingerprint(synth.data)) << '\n';
  return 0;
}

int run_ingest(const std::string& tensor_dir, int decimate, const std::string& out,
               const std::string& window) {
  xsd::KeyValues kv;
  kv.set("command", "ingest");
  kv.set("tensor_dir", tensor_dir);
  kv.set("decimate", std::to_string(decimate));
  kv.set("out", out);
  echo(kv);
  const auto tensors = xsd::read_tensor_dir(tensor_dir);
  std::vector<xsd::SubjectDataset> subjects;
  for (const auto& t : tensors) {
    if (const auto dropped = xsd::dropped_timepoints(t, decimate)) {
      std::cerr << "warning: subject " << t.subject_id << ": dropping " << dropped
                << " trailing timepoint(s) not divisible by " << decimate << '\n';
    }
    subjects.push_back(xsd::vectorize(t, decimate));
  }
  const xsd::MultiSubjectDataset dataset(std::move(subjects));
  xsd::DatasetInfo info;
  info.channels = tensors.front().channels;
  info.timepoints = tensors.front().timepoints / static_cast<std::size_t>(decimate);
  info.window = window;
  info.sampling = "decimated by block mean, factor " + std::to_string(decimate);
  info.source = "ingested from " + tensor_dir;
  xsd::save_dataset(dataset, out, xsd::PayloadFormat::binary, info);
  std::cout << "subjects " << dataset.size() << " trials " << dataset.total_trials() << " d "
            << dataset.dim() << " fingerprint " << xsd::fingerprint_hex(xsd::fingerprint(dataset))
            << '\n';
  return 0;
}

int run_evaluate(const std::string& data, const std::string& methods, const ModelFlags& flags,
                 const std::string& out_csv, const std::string& out_txt) {
  const auto parsed = xsd::parse_methods(methods);
  std::vector<xsd::DecoderSpec> specs;
  for (auto m : parsed) specs.push_back(flags.spec(m));

  xsd::KeyValues kv;
  kv.set("command", "evaluate");
  kv.set("data", data);
  kv.set("methods", methods);
  kv.set("k", std::to_string(flags.k));
  kv.set("lambda_mode", flags.lambda_mode);
  kv.set("lambda_ratio", xsd::format_double(flags.lambda_ratio));
  kv.set("shift_space", flags.shift_space);
  kv.set("clip", flags.clip);
  kv.set("standardize", flags.no_standardize ? "off" : "train-side");
  kv.set("seed", std::to_string(flags.seed));
  echo(kv);

  const auto loaded = load_checked(data);
  const auto table = xsd::loso(loaded.data, specs, flags.seed, flags.evaluation());
  const std::string text = table.to_text();
  std::cout << text;
  if (!out_csv.empty()) xsd::write_file(out_csv, table.to_csv());
  if (!out_txt.empty()) xsd::write_file(out_txt, text);
  return 0;
}

int run_weights(const std::string& data, int target_subject, const ModelFlags& flags,
                const std::string& out) {
  const auto spec = flags.spec(xsd::Method::sg_cs);
  xsd::KeyValues kv;
  kv.set("command", "weights");
  kv.set("data", data);
  kv.set("target_subject", std::to_string(target_subject));
  kv.set("shift_space", flags.shift_space);
  kv.set("clip", flags.clip);
  kv.set("seed", std::to_string(flags.seed));
  echo(kv);

  const auto loaded = load_checked(data);
  const auto& target = loaded.data.subject(target_subject);
  auto train = loaded.data.without(target_subject);
  xsd::Matrix target_x = target.features();
  if (!flags.no_standardize) {
    const auto st = xsd::Standardizer::fit(train);
    train = st.apply(train);
    target_x = st.apply(target_x);
  }
  auto shift = spec.shift;
  shift.seed = flags.seed;
  xsd::ImportanceWeights w;
  if (shift.space == xsd::ShiftSpace::second_level) {
    const auto so = spec.stacking();
    const auto bank = xsd::fit_first_level(train, so.k, so.seed, so.first_level, so.solver);
    const auto source = xsd::build_second_level_train(bank, train);
    const auto tgt = xsd::build_second_level_test(bank, target_x);
    w = xsd::estimate_weights(source.features, tgt.features, shift);
  } else {
    w = xsd::estimate_weights(xsd::pool(train).design.values, target_x, shift);
  }
  std::string csv = "trial_index,weight\n";
  for (Eigen::Index i = 0; i < w.weights.size(); ++i) {
    csv += std::to_string(i) + ',' + xsd::format_double(w.weights[i]) + '\n';
  }
  if (out.empty()) {
    std::cout << csv;
  } else {
    xsd::write_file(out, csv);
  }
  std::cout << "# weights n=" << w.weights.size() << " min=" << xsd::format_double(w.weights.minCoeff())
            << " max=" << xsd::format_double(w.weights.maxCoeff())
            << " raw_mean=" << xsd::format_double(w.raw_mean) << '\n';
  return 0;
}

int run_permcheck(const std::string& data, const std::string& method, int n_perm,
                  const ModelFlags& flags) {
  const auto spec = flags.spec(xsd::parse_method(method));
  xsd::KeyValues kv;
  kv.set("command", "permcheck");
  kv.set("data", data);
  kv.set("method", method);
  kv.set("n_perm", std::to_string(n_perm));
  kv.set("seed", std::to_string(flags.seed));
  echo(kv);
  const auto loaded = load_checked(data);
  const auto null = xsd::permutation_check(loaded.data, spec, n_perm, flags.seed, flags.evaluation());
  double mean = 0.0;
  for (std::size_t p = 0; p < null.size(); ++p) {
    std::cout << "permutation " << p << " accuracy " << xsd::format_double(null[p]) << '\n';
    mean += null[p];
  }
  mean /= static_cast<double>(null.size());
  std::printf("null mean %.6f\n", mean);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-subject decoding toolkit"};
  app.require_subcommand(1);

  xsd::SynthConfig synth_cfg;
  std::string synth_out, synth_payload = "binary";
  auto* synth = app.add_subcommand("synth", "Generate and save a synthetic multi-subject dataset");
  synth->add_option("--subjects", synth_cfg.n_subjects)->check(CLI::PositiveNumber);
  synth->add_option("--trials", synth_cfg.trials_per_subject, "Trials per subject (even)");
  synth->add_option("--dim", synth_cfg.dim)->check(CLI::PositiveNumber);
  synth->add_option("--mu", synth_cfg.mu)->check(CLI::NonNegativeNumber);
  synth->add_option("--sigma", synth_cfg.sigma)->check(CLI::NonNegativeNumber);
  synth->add_option("--gamma", synth_cfg.gamma)->check(CLI::NonNegativeNumber);
  synth->add_option("--tau", synth_cfg.tau)->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_cfg.seed);
  synth->add_option("--payload", synth_payload)->check(CLI::IsMember({"binary", "csv"}));
  synth->add_option("--out", synth_out)->required();

  std::string tensor_dir, ingest_out, window;
  int decimate = 1;
  auto* ingest = app.add_subcommand("ingest", "Vectorize epoched tensors into a dataset");
  ingest->add_option("--tensor-dir", tensor_dir)->required()->check(CLI::ExistingDirectory);
  ingest->add_option("--decimate", decimate)->check(CLI::PositiveNumber);
  ingest->add_option("--window", window, "Epoch window description recorded in the manifest");
  ingest->add_option("--out", ingest_out)->required();

  std::string eval_data, methods = "single,pool,sg,sg_cs", out_csv, out_txt;
  ModelFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "Leave-one-subject-out evaluation");
  evaluate->add_option("--data", eval_data)->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--methods", methods, "Comma list of single,pool,sg,sg_cs");
  eval_flags.add_to(evaluate, true);
  evaluate->add_option("--out-csv", out_csv);
  evaluate->add_option("--out-txt", out_txt);

  std::string w_data, w_out;
  int target_subject = 0;
  ModelFlags w_flags;
  auto* weights = app.add_subcommand("weights", "Export importance weights for one target subject");
  weights->add_option("--data", w_data)->required()->check(CLI::ExistingDirectory);
  weights->add_option("--target-subject", target_subject)->required();
  w_flags.add_to(weights, true);
  weights->add_option("--out", w_out);

  std::string p_data, p_method = "pool";
  int n_perm = 20;
  ModelFlags p_flags;
  auto* permcheck = app.add_subcommand("permcheck", "Label-permutation sanity harness");
  permcheck->add_option("--data", p_data)->required()->check(CLI::ExistingDirectory);
  permcheck->add_option("--method", p_method);
  permcheck->add_option("--n-perm", n_perm);
  p_flags.add_to(permcheck, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(synth_cfg, synth_out, synth_payload);
    if (ingest->parsed()) return run_ingest(tensor_dir, decimate, ingest_out, window);
    if (evaluate->parsed()) return run_evaluate(eval_data, methods, eval_flags, out_csv, out_txt);
    if (weights->parsed()) return run_weights(w_data, target_subject, w_flags, w_out);
    if (permcheck->parsed()) return run_permcheck(p_data, p_method, n_perm, p_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
