#include "xsd/decoders.hpp"

#include "xsd/synth.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace xsd {
namespace {

MultiSubjectDataset synthetic(int subjects, int trials, int dim, std::uint64_t seed, double tau = 0.2) {
  SynthConfig c;
  c.n_subjects = subjects;
  c.trials_per_subject = trials;
  c.dim = dim;
  c.gamma = 0.3;
  c.tau = tau;
  c.seed = seed;
  return generate(c).data;
}

DecoderSpec spec_for(Method m, std::uint64_t seed = 1) {
  DecoderSpec s;
  s.method = m;
  s.seed = seed;
  return s;
}

TEST(Method, NamesRoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(parse_methods("pool,sg_cs"), (std::vector<Method>{Method::pool, Method::sg_cs}));
  EXPECT_THROW(parse_method("svm"), Error);
}

TEST(Decoders, PoolDispatchesToLinearModel) {
  const auto d = synthetic(15, 24, 7, 1);
  const auto dec = fit_decoder(spec_for(Method::pool), d);
  ASSERT_TRUE(std::holds_alternative<LinearModel>(dec.model));
  EXPECT_EQ(std::get<LinearModel>(dec.model).dim(), 7u);
  const auto pooled = pool(d);
  const auto direct = fit_regularized(pooled.design, pooled.labels, Regularization{}, FitOptions{});
  const Matrix probe = synthetic(1, 30, 7, 2).subjects()[0].features();
  EXPECT_EQ(predict_decoder(dec, probe).proba, predict_proba(direct, probe));
}

TEST(Decoders, SingleEqualsDirectFit) {
  const auto d = synthetic(1, 60, 5, 3);
  const auto dec = fit_decoder(spec_for(Method::single), d);
  const auto& s = d.subjects()[0];
  const auto direct = fit_regularized(DesignMatrix(s.features()), s.labels(), Regularization{}, FitOptions{});
  EXPECT_EQ(std::get<LinearModel>(dec.model).beta, direct.beta);
  EXPECT_EQ(std::get<LinearModel>(dec.model).intercept, direct.intercept);
  EXPECT_THROW(fit_decoder(spec_for(Method::single), synthetic(2, 24, 5, 3)), Error);
}

TEST(Decoders, SgEqualsPredictStacked) {
  const auto d = synthetic(4, 36, 6, 4);
  const auto dec = fit_decoder(spec_for(Method::sg), d);
  const Matrix probe = synthetic(1, 30, 6, 5).subjects()[0].features();
  const auto pred = predict_decoder(dec, probe);
  EXPECT_EQ(pred.proba, predict_stacked(std::get<StackedModel>(dec.model), probe));
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    EXPECT_EQ(pred.labels[static_cast<std::size_t>(i)], pred.proba[i] >= 0.5 ? 1 : 0);
  }
}

TEST(Decoders, SgCsNeedsTarget) {
  const auto d = synthetic(3, 24, 4, 6);
  try {
    fit_decoder(spec_for(Method::sg_cs), d);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "SG+CS requires unlabeled target trials");
  }
}

TEST(Decoders, SgCsWithSelfTargetTracksSg) {
  const auto d = synthetic(4, 60, 8, 7);
  const Matrix self = pool(d).design.values;
  const auto sg = fit_decoder(spec_for(Method::sg), d);
  const Matrix probe = synthetic(1, 100, 8, 8).subjects()[0].features();
  for (ShiftSpace space : {ShiftSpace::original, ShiftSpace::second_level}) {
    auto spec = spec_for(Method::sg_cs);
    spec.shift.space = space;
    const auto cs = fit_decoder(spec, d, &self);
    EXPECT_TRUE(cs.meta.used_weights);
    const Vector gap = predict_decoder(cs, probe).proba - predict_decoder(sg, probe).proba;
    EXPECT_LE(gap.cwiseAbs().maxCoeff(), 0.05) << to_string(space);
  }
}

TEST(Decoders, EmptyInputGivesEmptyOutput) {
  const auto d = synthetic(3, 24, 4, 9);
  for (Method m : {Method::pool, Method::sg}) {
    const auto pred = predict_decoder(fit_decoder(spec_for(m), d), Matrix(0, 4));
    EXPECT_TRUE(pred.labels.empty());
    EXPECT_EQ(pred.proba.size(), 0);
  }
}

TEST(Decoders, DimensionMismatchIsAnError) {
  const auto d = synthetic(3, 24, 4, 10);
  EXPECT_THROW(predict_decoder(fit_decoder(spec_for(Method::pool), d), Matrix::Zero(2, 5)), Error);
  EXPECT_THROW(predict_decoder(fit_decoder(spec_for(Method::sg), d), Matrix::Zero(2, 5)), Error);
}

TEST(Decoders, SerializationKeepsMethodAndPredictions) {
  const auto d = synthetic(4, 30, 5, 11);
  const Matrix target = synthetic(1, 40, 5, 12).subjects()[0].features();
  const auto dir = std::filesystem::temp_directory_path() / "xsd_decoder_roundtrip";
  for (Method m : {Method::pool, Method::sg, Method::sg_cs}) {
    const auto dec = fit_decoder(spec_for(m), d, &target);
    std::filesystem::remove_all(dir);
    save_decoder(dec, dir);
    const auto back = load_decoder(dir);
    EXPECT_EQ(back.method, m);
    EXPECT_EQ(predict_decoder(back, target).proba, predict_decoder(dec, target).proba);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace xsd
