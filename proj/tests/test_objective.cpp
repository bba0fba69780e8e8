#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "vwspr/objective.hpp"

using namespace vwspr;

namespace {

const double kLn2 = std::log(2.0);

ModelShape shape(EncoderKind kind = EncoderKind::kBagOfEmbeddings) {
  ModelShape s;
  s.token_vocab_size = 9;
  s.opinion_vocab_size = 8;
  s.embedding_dim = 4;
  s.opinion_dim = 3;
  s.encoder = kind;
  s.filters_per_width = 2;
  return s;
}

ModelParams zero_params(std::size_t opinions) {
  ModelShape s = shape();
  s.opinion_vocab_size = opinions;
  ModelParams p = ModelParams::initialize(s, 1);
  for (auto& b : param_blocks(p)) std::fill(b.values.begin(), b.values.end(), 0.0);
  return p;
}

BatchNegatives fixed_negatives(const std::vector<Document>& docs, std::size_t vocab,
                               std::size_t count, std::uint64_t seed) {
  NegativeSampler sampler(vocab, count, seed);
  return draw_negatives(oracle::pointers(docs), sampler);
}

}  // namespace

TEST(Entropy, KnownValues) {
  EXPECT_NEAR(entropy(std::vector<double>{0.5, 0.5}), kLn2, 1e-15);
  EXPECT_EQ(entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_NEAR(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}), std::log(4.0), 1e-15);
}

TEST(Entropy, BoundedByLogK) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-8, 8);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd z(3);
    for (int i = 0; i < 3; ++i) z(i) = u(rng);
    const double h = entropy(softmax(z));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(3.0) + 1e-12);
  }
}

TEST(LogSigmoid, StableAndAccurate) {
  EXPECT_NEAR(log_sigmoid(0.0), -kLn2, 1e-15);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
  EXPECT_NEAR(log_sigmoid(800.0), 0.0, 1e-15);
  for (double z : {-5.0, -0.3, 0.7, 12.0}) EXPECT_NEAR(log_sigmoid(z), oracle::log_sigmoid(z), 1e-14);
  EXPECT_NEAR(sigmoid(0.0), 0.5, 1e-15);
}

TEST(NegativeSampling, ZeroScoresGiveLogHalfPerTerm) {
  const ModelParams p = zero_params(6);
  for (std::size_t n : {1u, 5u}) {
    NegativeSampler sampler(6, n, 2);
    const auto negs = sampler.draw(0);
    EXPECT_EQ(negs.count(), n);
    EXPECT_NEAR(neg_sampled_term(0, 0, negs, p), (1.0 + static_cast<double>(n)) * std::log(0.5),
                1e-12);
  }
  NegativeSampler one(6, 1, 2);
  EXPECT_NEAR(neg_sampled_term(0, 1, one.draw(0), p), -1.386294, 1e-6);
}

TEST(NegativeSampling, NeverDrawsThePositive) {
  NegativeSampler uniform(5, 50, 3);
  std::vector<double> w = {1, 2, 0, 4, 1};
  NegativeSampler weighted(w, 50, 3);
  for (int pos = 0; pos < 5; ++pos) {
    for (int s : uniform.draw(pos).samples) {
      EXPECT_NE(s, pos);
      EXPECT_GE(s, 0);
      EXPECT_LT(s, 5);
    }
    for (int s : weighted.draw(pos).samples) {
      EXPECT_NE(s, pos);
      EXPECT_NE(s, 2);
    }
  }
  EXPECT_THROW(NegativeSampler(1, 5, 0), Error);
}

TEST(L2, SingleWordUniformExample) {
  // q uniform, scores zero, one negative, alpha = 1
  const ModelParams p = zero_params(4);
  Document d;
  d.token_ids = {0, 1};
  d.opinion_ids = {2};
  const std::vector<Document> docs = {d};
  const auto negs = fixed_negatives(docs, 4, 1, 5);
  const auto v = batch_objective_L2(oracle::pointers(docs), p, 1.0, negs);
  EXPECT_NEAR(v.total, -0.693147, 1e-6);
  EXPECT_NEAR(v.mean_entropy, kLn2, 1e-12);
  EXPECT_EQ(v.documents, 1u);
}

TEST(L2, SkipsDocumentsWithoutOpinions) {
  const ModelParams p = zero_params(4);
  Document a;
  a.token_ids = {0};
  a.opinion_ids = {1};
  Document b;
  b.token_ids = {2};
  const std::vector<Document> docs = {a, b};
  const auto negs = fixed_negatives(docs, 4, 2, 1);
  const auto v = batch_objective_L2(oracle::pointers(docs), p, 0.1, negs);
  EXPECT_EQ(v.documents, 1u);
  EXPECT_EQ(v.skipped, 1u);
}

TEST(L2, MatchesOracle) {
  std::mt19937_64 rng(7);
  for (auto kind : {EncoderKind::kBagOfEmbeddings, EncoderKind::kConvolutional}) {
    const ModelParams p = oracle::random_params(shape(kind), rng);
    std::vector<Document> docs;
    for (int i = 0; i < 6; ++i) docs.push_back(oracle::random_document(rng, p.shape, 1, 9, 0, 4, "d"));
    const auto negs = fixed_negatives(docs, 8, 3, 9);
    const auto batch = oracle::pointers(docs);
    const auto v = batch_objective_L2(batch, p, 0.3, negs);
    const auto o = oracle::objective(batch, p, 0.3, 0.0, PRConfig{}, negs);
    EXPECT_NEAR(v.total, o.l2, 1e-9 * std::max(1.0, std::abs(o.l2)));

    ObjectiveConfig cfg;
    cfg.alpha = 0.3;
    cfg.pr.beta = 0.7;
    const auto j = objective_J(batch, p, cfg, negs);
    const auto oj = oracle::objective(batch, p, 0.3, 0.7, cfg.pr, negs);
    EXPECT_NEAR(j.pr, oj.pr, 1e-9);
    EXPECT_NEAR(j.j, oj.j, 1e-9 * std::max(1.0, std::abs(oj.j)));
    EXPECT_NEAR(j.j, j.l2.total + 0.7 * j.pr, 1e-12 * std::max(1.0, std::abs(j.j)));
  }
}

TEST(Elbo, UniformCase) {
  const ModelParams p = zero_params(8);
  const auto q = softmax(Eigen::VectorXd::Zero(2));
  const std::vector<int> one = {3};
  EXPECT_NEAR(elbo_exact(q, one, p, PriorTerm::kDrop), std::log(1.0 / 8) + kLn2, 1e-12);
  EXPECT_NEAR(elbo_exact(q, one, p, PriorTerm::kInclude), std::log(1.0 / 8), 1e-12);
  EXPECT_NEAR(log_likelihood_exact(one, p), std::log(1.0 / 8), 1e-12);
}

TEST(Elbo, MatchesOracleAndBoundsLikelihood) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const ModelParams p = oracle::random_params(shape(), rng, 1.5);
    const Document d = oracle::random_document(rng, p.shape, 1, 5, 1, 4, "d");
    const auto q = polarity_posterior(encode(d, p), p);
    const double e = elbo_exact(q, d.opinion_ids, p);
    const double ll = log_likelihood_exact(d.opinion_ids, p);
    const std::vector<double> qv(q.probs.data(), q.probs.data() + q.probs.size());
    EXPECT_NEAR(e, oracle::elbo(qv, d.opinion_ids, p), 1e-10);
    EXPECT_NEAR(ll, oracle::log_likelihood(d.opinion_ids, p), 1e-10);
    EXPECT_LE(e, ll + 1e-12);
  }
}

TEST(Elbo, TightAtTheTruePosterior) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const ModelParams p = oracle::random_params(shape(), rng, 2.0);
    const int w = static_cast<int>(rng() % 8);
    const auto post = oracle::true_posterior(w, p);
    Eigen::VectorXd probs(2);
    probs << post[0], post[1];
    const std::vector<int> words = {w};
    EXPECT_NEAR(elbo_exact(PolarityDistribution{probs}, words, p), log_likelihood_exact(words, p),
                1e-9);
  }
}

class GradientCheck : public ::testing::TestWithParam<std::tuple<EncoderKind, bool>> {};

TEST_P(GradientCheck, MatchesFiniteDifferences) {
  const auto [kind, through_score] = GetParam();
  std::mt19937_64 rng(21);
  ObjectiveConfig cfg;
  cfg.alpha = 0.2;
  cfg.pr.beta = 0.6;
  cfg.pr.gamma1 = 0.3;
  cfg.pr.gamma2 = -0.2;
  cfg.backprop_through_score = through_score;
  int checked = 0;
  for (int attempt = 0; checked < 3 && attempt < 200; ++attempt) {
    const ModelParams p = oracle::random_params(shape(kind), rng);
    std::vector<Document> docs;
    for (int i = 0; i < 4; ++i) docs.push_back(oracle::random_document(rng, p.shape, 1, 8, 1, 3, "d"));
    const auto batch = oracle::pointers(docs);
    if (oracle::cnn_margin(batch, p) < 1e-3) continue;
    if (through_score && oracle::score_margin(batch, p, cfg.pr) < 1e-3) continue;
    const auto negs = fixed_negatives(docs, 8, 2, static_cast<std::uint64_t>(attempt));
    const auto r = oracle::check_gradients(batch, p, cfg, negs, 1e-4, 1e-7);
    EXPECT_EQ(r.failed, 0u) << r.worst_block << "[" << r.worst_index << "] analytic "
                            << r.worst_analytic << " numeric " << r.worst_numeric;
    ++checked;
  }
  EXPECT_EQ(checked, 3);
}

INSTANTIATE_TEST_SUITE_P(Objective, GradientCheck,
                         ::testing::Combine(::testing::Values(EncoderKind::kBagOfEmbeddings,
                                                              EncoderKind::kConvolutional),
                                            ::testing::Bool()),
                         [](const auto& info) {
                           const bool cnn = std::get<0>(info.param) == EncoderKind::kConvolutional;
                           return std::string(cnn ? "Cnn" : "Bag") +
                                  (std::get<1>(info.param) ? "FullPath" : "StopGradient");
                         });

TEST(Gradients, FrozenEmbeddingsGetZeroGradient) {
  std::mt19937_64 rng(31);
  const ModelParams p = oracle::random_params(shape(), rng);
  std::vector<Document> docs;
  for (int i = 0; i < 3; ++i) docs.push_back(oracle::random_document(rng, p.shape, 1, 5, 1, 3, "d"));
  ObjectiveConfig cfg;
  cfg.train_token_embeddings = false;
  const auto g = gradients(oracle::pointers(docs), p, cfg, fixed_negatives(docs, 8, 2, 1));
  EXPECT_EQ(g.grads.token_embeddings.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(g.grads.class_weights.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradients, RegularizeOffMatchesZeroBeta) {
  std::mt19937_64 rng(32);
  const ModelParams p = oracle::random_params(shape(), rng);
  std::vector<Document> docs;
  for (int i = 0; i < 5; ++i) docs.push_back(oracle::random_document(rng, p.shape, 1, 5, 1, 3, "d"));
  const auto negs = fixed_negatives(docs, 8, 2, 1);
  ObjectiveConfig off;
  off.regularize = false;
  ObjectiveConfig zero;
  zero.pr.beta = 0.0;
  const auto a = gradients(oracle::pointers(docs), p, off, negs);
  const auto b = gradients(oracle::pointers(docs), p, zero, negs);
  EXPECT_TRUE(bit_identical(a.grads, b.grads));
  EXPECT_EQ(a.value.j, b.value.j);
  EXPECT_EQ(a.value.pr, b.value.pr);
}
