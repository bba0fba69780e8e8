#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "vwspr/evaluation.hpp"
#include "vwspr/synthetic.hpp"
#include "vwspr/training.hpp"

using namespace vwspr;

namespace {

SyntheticData small_data(double noise = 0.1, std::size_t docs = 300) {
  SyntheticSpec spec;
  spec.num_docs = docs;
  spec.noise_rate = noise;
  return make_synthetic(spec);
}

TrainConfig small_config() {
  TrainConfig c;
  c.embedding_dim = 16;
  c.opinion_dim = 16;
  c.epochs = 2;
  c.seed = 3;
  return c;
}

double corpus_f1(const LoadedCorpus& data, const ModelParams& params) {
  std::vector<ClassId> pred, gold;
  for (std::size_t i = 0; i < data.corpus.size(); ++i) {
    pred.push_back(predict(data.corpus[i], params).label);
    gold.push_back(*data.gold[i]);
  }
  return f1(pred, gold, 0);
}

}  // namespace

TEST(Train, DeterministicForAFixedSeed) {
  const auto data = small_data();
  const auto a = train(data.data.corpus, data.keywords, small_config());
  const auto b = train(data.data.corpus, data.keywords, small_config());
  EXPECT_TRUE(bit_identical(a.params, b.params));
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(a.epochs, b.epochs);
  TrainConfig other = small_config();
  other.seed = 4;
  EXPECT_FALSE(bit_identical(a.params, train(data.data.corpus, data.keywords, other).params));
}

TEST(Train, StepCountKeepsThePartialBatch) {
  const auto data = small_data();
  std::size_t usable = 0;
  for (const auto& d : data.data.corpus.documents()) usable += !d.opinion_ids.empty();
  const auto r = train(data.data.corpus, data.keywords, small_config());
  const std::size_t per_epoch = (usable + 31) / 32;
  EXPECT_EQ(r.steps.size(), 2 * per_epoch);
  EXPECT_EQ(r.epochs.size(), 2u);
  EXPECT_EQ(r.steps.back().step, 2 * per_epoch);
}

TEST(Train, ZeroEpochsStopsAfterPretraining) {
  const auto data = small_data();
  TrainConfig c = small_config();
  c.epochs = 0;
  const auto r = train(data.data.corpus, data.keywords, c);
  EXPECT_TRUE(r.steps.empty());
  EXPECT_FALSE(r.pretrain.epochs.empty());
}

TEST(Train, ZeroBetaIsBitIdenticalToVws) {
  const auto data = small_data();
  TrainConfig vws = small_config();
  vws.posterior_regularization = false;
  TrainConfig zero = small_config();
  zero.pr.beta = 0.0;
  std::ostringstream log_a, log_b;
  const auto a = train(data.data.corpus, data.keywords, vws, {&log_a, nullptr});
  const auto b = train(data.data.corpus, data.keywords, zero, {&log_b, nullptr});
  EXPECT_TRUE(bit_identical(a.params, b.params));
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(log_a.str(), log_b.str());
}

TEST(Train, FrozenEmbeddingsStayFixedAfterPretraining) {
  const auto data = small_data();
  TrainConfig c = small_config();
  c.epochs = 0;
  const auto pre = train(data.data.corpus, data.keywords, c);
  c.epochs = 2;
  const auto full = train(data.data.corpus, data.keywords, c);
  EXPECT_EQ(pre.params.token_embeddings, full.params.token_embeddings);
  EXPECT_NE(pre.params.class_weights, full.params.class_weights);

  c.freeze_embeddings_after_pretrain = false;
  const auto thawed = train(data.data.corpus, data.keywords, c);
  EXPECT_NE(pre.params.token_embeddings, thawed.params.token_embeddings);
}

TEST(Train, StepObjectiveDecomposes) {
  const auto data = small_data();
  TrainConfig c = small_config();
  c.pr.beta = 0.3;
  const auto r = train(data.data.corpus, data.keywords, c);
  EXPECT_EQ(r.beta, 0.3);
  for (const auto& s : r.steps) {
    EXPECT_TRUE(std::isfinite(s.j));
    EXPECT_NEAR(s.j, s.l2 + 0.3 * s.pr, 1e-9 * std::max(1.0, std::abs(s.j)));
    EXPECT_GE(s.mean_entropy, 0.0);
    EXPECT_LE(s.mean_entropy, std::log(2.0) + 1e-12);
  }
}

TEST(Train, LogRecordsAreJsonLines) {
  const auto data = small_data();
  TrainConfig c = small_config();
  c.posterior_regularization = false;
  std::ostringstream log;
  const auto r = train(data.data.corpus, data.keywords, c, {&log, nullptr});
  std::istringstream in(log.str());
  std::string line;
  std::size_t steps = 0, epochs = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("beta").get<double>(), 0.0);
    for (const char* key : {"epoch", "J", "L2", "PR", "mean_entropy"}) EXPECT_TRUE(j.contains(key));
    (j.at("type") == "step" ? steps : epochs) += 1;
  }
  EXPECT_EQ(steps, r.steps.size());
  EXPECT_EQ(epochs, 2u);
}

TEST(Train, TraceListsPairs) {
  const auto data = small_data(0.1, 80);
  TrainConfig c = small_config();
  c.epochs = 1;
  std::ostringstream trace;
  train(data.data.corpus, data.keywords, c, {nullptr, &trace});
  std::istringstream in(trace.str());
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  const auto j = nlohmann::json::parse(line);
  EXPECT_TRUE(j.contains("branch"));
}

TEST(Train, ErrorsOnUnusableCorpora) {
  Corpus raw;
  raw.add_document("a", "terrific");
  raw.add_document("b", "horrible");
  EXPECT_THROW(train(raw, KeywordSpec::yelp(), small_config()), Error);
  raw.set_opinion_words(0, std::vector<std::string>{});
  raw.set_opinion_words(1, std::vector<std::string>{});
  EXPECT_THROW(train(raw, KeywordSpec::yelp(), small_config()), Error);
}

TEST(Train, ConfigValidation) {
  const auto data = small_data(0.1, 60);
  for (auto mutate : std::vector<void (*)(TrainConfig&)>{
           [](TrainConfig& c) { c.negatives = 0; }, [](TrainConfig& c) { c.batch_size = 0; },
           [](TrainConfig& c) { c.lr = 0; }, [](TrainConfig& c) { c.alpha = -1; },
           [](TrainConfig& c) { c.pr.gamma2 = 0.9; }, [](TrainConfig& c) { c.pr.delta = 2; }}) {
    TrainConfig c = small_config();
    mutate(c);
    EXPECT_THROW(train(data.data.corpus, data.keywords, c), Error);
  }
}

TEST(Train, ConvolutionalEncoderAndAdam) {
  const auto data = small_data(0.1, 120);
  TrainConfig c = small_config();
  c.encoder = EncoderKind::kConvolutional;
  c.filters_per_width = 4;
  c.optimizer = OptimizerKind::kAdam;
  c.epochs = 1;
  const auto r = train(data.data.corpus, data.keywords, c);
  EXPECT_EQ(r.params.class_weights.cols(), 16);
  for (const auto& s : r.steps) EXPECT_TRUE(std::isfinite(s.j));
}

TEST(Train, SeparableSyntheticIsLearned) {
  const auto data = small_data(0.0, 2000);
  TrainConfig c;
  c.seed = 3;
  const auto r = train(data.data.corpus, data.keywords, c);
  EXPECT_GE(corpus_f1(data.data, r.params), 0.95);
}

TEST(Predict, ArgmaxAndTies) {
  Eigen::VectorXd even(2);
  even << 0.5, 0.5;
  auto p = argmax_prediction({even});
  EXPECT_EQ(p.label, 0u);
  EXPECT_TRUE(p.tie);
  Eigen::VectorXd skew(2);
  skew << 0.2, 0.8;
  p = argmax_prediction({skew});
  EXPECT_EQ(p.label, 1u);
  EXPECT_FALSE(p.tie);

  const auto data = small_data(0.1, 40);
  const auto params = ModelParams::for_corpus(data.data.corpus, ModelShape{}, 1);
  Document empty;
  empty.id = "e";
  EXPECT_THROW(predict(empty, params), Error);
  EXPECT_EQ(predict(data.data.corpus, params).size(), 40u);
}

TEST(Grid, SingleCellAndErrors) {
  const auto data = small_data(0.1, 200);
  const auto [tr, dev] = split_train_dev(data.data, 0.25, 1);
  GridSpec g;
  g.gamma1 = {0.7};
  g.gamma2 = {-0.1};
  g.beta = {0.5, 0.2};
  g.stage1_beta = 0.5;
  TrainConfig c = small_config();
  c.epochs = 1;
  const auto r = grid_search(tr.corpus, dev.corpus, dev.gold, data.keywords, c, g);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].stage, 1);
  EXPECT_EQ(r.rows[1].stage, 2);
  EXPECT_EQ(r.rows[1].beta, 0.2);
  EXPECT_GE(r.best.mean_f1, std::max(r.rows[0].mean_f1, r.rows[1].mean_f1));
  EXPECT_TRUE(r.best_config.posterior_regularization);
  EXPECT_EQ(r.best_config.pr.beta, r.best.beta);

  // a single cell equals a plain train + evaluate
  GridSpec one = g;
  one.beta = {0.5};
  const auto single = grid_search(tr.corpus, dev.corpus, dev.gold, data.keywords, c, one);
  ASSERT_EQ(single.rows.size(), 1u);
  TrainConfig plain = c;
  plain.seed = 1;
  const auto params = train(tr.corpus, data.keywords, plain).params;
  std::vector<ClassId> pred, gold;
  for (std::size_t i = 0; i < dev.corpus.size(); ++i) {
    pred.push_back(predict(dev.corpus[i], params).label);
    gold.push_back(*dev.gold[i]);
  }
  EXPECT_EQ(single.rows[0].mean_f1, f1(pred, gold, 0));
  EXPECT_EQ(single.rows[0].std_f1, 0.0);

  GridSpec empty = g;
  empty.gamma1.clear();
  EXPECT_THROW(grid_search(tr.corpus, dev.corpus, dev.gold, data.keywords, c, empty), Error);
  GridSpec no_seeds = g;
  no_seeds.seeds.clear();
  EXPECT_THROW(grid_search(tr.corpus, dev.corpus, dev.gold, data.keywords, c, no_seeds), Error);
}

TEST(Grid, StandardGrid) {
  const auto g = GridSpec::standard();
  EXPECT_EQ(g.gamma1.size(), 6u);
  EXPECT_EQ(g.gamma2.size(), 6u);
  EXPECT_EQ(g.beta.size(), 10u);
  EXPECT_EQ(g.gamma1.front(), 0.5);
  EXPECT_EQ(g.gamma2.front(), -0.5);
  EXPECT_EQ(g.beta.back(), 1.0);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}
