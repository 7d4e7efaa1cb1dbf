#include "xsd/decoders.hpp"

#include "xsd/manifest.hpp"
#include "xsd/random.hpp"

namespace xsd {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::single: return "single";
    case Method::pool: return "pool";
    case Method::sg: return "sg";
    case Method::sg_cs: return "sg_cs";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (Method m : kAllMethods) {
    if (to_string(m) == text) return m;
  }
  throw Error("unknown method '" + std::string(text) + "' (expected single, pool, sg or sg_cs)");
}

std::vector<Method> parse_methods(std::string_view comma_list) {
  std::vector<Method> out;
  for (const auto& tok : split(comma_list, ',')) {
    const Method m = parse_method(tok);
    if (std::find(out.begin(), out.end(), m) != out.end()) {
      throw Error("method '" + tok + "' listed twice");
    }
    out.push_back(m);
  }
  return out;
}

void DecoderSpec::validate() const {
  solver.validate();
  regularization.validate();
  combiner.validate();
  shift.validate();
  if (k < 2) throw Error("k must be at least 2");
}

StackingOptions DecoderSpec::stacking() const {
  StackingOptions opts;
  opts.k = k;
  opts.first_level = regularization;
  opts.combiner = combiner;
  opts.solver = solver;
  opts.shift = shift;
  opts.seed = seed;
  return opts;
}

FittedDecoder fit_decoder(const DecoderSpec& spec, const MultiSubjectDataset& train,
                          const Matrix* target_unlabeled) {
  return fit_decoder(spec, train, target_unlabeled, nullptr);
}

FittedDecoder fit_decoder(const DecoderSpec& spec, const MultiSubjectDataset& train,
                          const Matrix* target_unlabeled, const FirstLevelBank* prefit_bank) {
  spec.validate();
  FittedDecoder out;
  out.method = spec.method;
  out.meta.subjects = train.subject_ids();
  out.meta.seed = spec.seed;

  FitOptions solver = spec.solver;
  solver.seed = derive_seed(spec.seed, {0x474Cu});

  switch (spec.method) {
    case Method::single: {
      if (train.size() != 1) {
        throw Error("method single needs exactly one training subject, got " +
                    std::to_string(train.size()));
      }
      const auto& s = train.subjects().front();
      LinearModel m = fit_regularized(DesignMatrix(s.features()), s.labels(), spec.regularization, solver);
      out.meta.lambda = m.lambda;
      out.model = std::move(m);
      break;
    }
    case Method::pool: {
      const auto pooled = pool(train);
      LinearModel m = fit_regularized(pooled.design, pooled.labels, spec.regularization, solver);
      out.meta.lambda = m.lambda;
      out.model = std::move(m);
      break;
    }
    case Method::sg:
    case Method::sg_cs: {
      const bool weighted = spec.method == Method::sg_cs;
      if (weighted && target_unlabeled == nullptr) {
        throw Error("SG+CS requires unlabeled target trials");
      }
      const auto opts = spec.stacking();
      FirstLevelBank bank = prefit_bank != nullptr
                                ? *prefit_bank
                                : fit_first_level(train, opts.k, opts.seed, opts.first_level, opts.solver);
      StackedModel m = fit_stacked(std::move(bank), train, weighted ? target_unlabeled : nullptr, opts);
      out.meta.lambda = m.combiner.lambda;
      out.meta.used_weights = m.used_weights;
      if (m.weights) {
        out.meta.weight_min = m.weights->weights.minCoeff();
        out.meta.weight_max = m.weights->weights.maxCoeff();
        out.meta.weight_raw_mean = m.weights->raw_mean;
      }
      out.model = std::move(m);
      break;
    }
  }
  return out;
}

Prediction predict_decoder(const FittedDecoder& decoder, const Matrix& trials) {
  Prediction out;
  if (trials.rows() == 0) {
    out.proba = Vector(0);
    return out;
  }
  if (const auto* lin = std::get_if<LinearModel>(&decoder.model)) {
    out.proba = predict_proba(*lin, trials);
  } else {
    out.proba = predict_stacked(std::get<StackedModel>(decoder.model), trials);
  }
  out.labels.resize(static_cast<std::size_t>(out.proba.size()));
  for (Eigen::Index i = 0; i < out.proba.size(); ++i) {
    out.labels[static_cast<std::size_t>(i)] = out.proba[i] >= 0.5;
  }
  return out;
}

void save_decoder(const FittedDecoder& decoder, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  KeyValues kv;
  kv.set("format", "xsd-decoder");
  kv.set("version", "1");
  kv.set("method", std::string(to_string(decoder.method)));
  kv.set("subjects", join_ints(decoder.meta.subjects));
  kv.set("lambda", format_double(decoder.meta.lambda));
  kv.set("seed", std::to_string(decoder.meta.seed));
  kv.set("used_weights", decoder.meta.used_weights ? "true" : "false");
  kv.set("weight_min", format_double(decoder.meta.weight_min));
  kv.set("weight_max", format_double(decoder.meta.weight_max));
  kv.set("weight_raw_mean", format_double(decoder.meta.weight_raw_mean));
  if (const auto* lin = std::get_if<LinearModel>(&decoder.model)) {
    kv.set("model", "model.txt");
    save_model(*lin, dir / "model.txt");
  } else {
    kv.set("model", "stacked");
    save_stacked(std::get<StackedModel>(decoder.model), dir / "stacked");
  }
  kv.save(dir / "decoder.txt");
}

FittedDecoder load_decoder(const std::filesystem::path& dir) {
  const auto kv = KeyValues::load(dir / "decoder.txt");
  if (kv.get("format") != "xsd-decoder") throw Error(dir.string() + " is not a decoder");
  FittedDecoder out;
  out.method = parse_method(kv.get("method"));
  out.meta.subjects = parse_ints(kv.get("subjects"));
  out.meta.lambda = kv.get_double("lambda");
  out.meta.seed = static_cast<std::uint64_t>(std::stoull(kv.get("seed")));
  out.meta.used_weights = kv.get("used_weights") == "true";
  out.meta.weight_min = kv.get_double("weight_min");
  out.meta.weight_max = kv.get_double("weight_max");
  out.meta.weight_raw_mean = kv.get_double("weight_raw_mean");
  if (out.method == Method::single || out.method == Method::pool) {
    out.model = load_model(dir / kv.get("model"));
  } else {
    out.model = load_stacked(dir / kv.get("model"));
  }
  return out;
}

}  // namespace xsd
