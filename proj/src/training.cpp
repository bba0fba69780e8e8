#include "vwspr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <utility>

#include <json.hpp>

#include "vwspr/evaluation.hpp"

namespace vwspr {

namespace {

constexpr const char* kTokenEmbeddings = "token_embeddings";

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, bool skip_embeddings)
      : kind_(kind), lr_(lr), skip_embeddings_(skip_embeddings) {}

  // Gradient ascent step.
  void step(ModelParams& params, const ModelParams& grads) {
    auto p = param_blocks(params);
    const auto g = param_blocks(grads);
    if (kind_ == OptimizerKind::kAdam && m_.empty()) {
      for (const auto& b : p) {
        m_.emplace_back(b.values.size(), 0.0);
        v_.emplace_back(b.values.size(), 0.0);
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (skip_embeddings_ && p[k].name == kTokenEmbeddings) continue;
      auto values = p[k].values;
      const auto grad = g[k].values;
      if (kind_ == OptimizerKind::kSgd) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += lr_ * grad[i];
        continue;
      }
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < values.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        values[i] += lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  OptimizerKind kind_;
  double lr_;
  bool skip_embeddings_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

void log_step(std::ostream& out, const StepRecord& r, double beta) {
  nlohmann::json j = {{"type", "step"}, {"epoch", r.epoch},   {"step", r.step},
                      {"J", r.j},       {"L2", r.l2},         {"PR", r.pr},
                      {"beta", beta},   {"mean_entropy", r.mean_entropy}};
  out << j.dump() << '\n';
}

void log_epoch(std::ostream& out, const EpochRecord& r, double beta) {
  nlohmann::json j = {{"type", "epoch"}, {"epoch", r.epoch}, {"J", r.j},
                      {"L2", r.l2},      {"PR", r.pr},       {"beta", beta},
                      {"mean_entropy", r.mean_entropy}};
  out << j.dump() << '\n';
}

double dev_f1(const Corpus& dev, const GoldLabels& gold, const ModelParams& params) {
  std::vector<ClassId> pred;
  std::vector<ClassId> truth;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    if (!gold[i]) continue;
    pred.push_back(predict(dev[i], params).label);
    truth.push_back(*gold[i]);
  }
  if (truth.empty()) throw Error("dev split has no gold labels");
  return f1(pred, truth, 0);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined state
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void TrainConfig::validate() const {
  if (negatives < 1) throw Error("negatives must be at least 1");
  if (batch_size < 1) throw Error("batch_size must be at least 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw Error("lr must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("alpha must be non-negative");
  if (embedding_dim < 1 || opinion_dim < 1) throw Error("dimensions must be at least 1");
  if (encoder == EncoderKind::kConvolutional && filters_per_width < 1) {
    throw Error("filters_per_width must be at least 1");
  }
  pr.validate();
}

ObjectiveConfig TrainConfig::objective() const {
  ObjectiveConfig c;
  c.alpha = alpha;
  c.regularize = posterior_regularization;
  c.pr = pr;
  c.backprop_through_score = backprop_through_score;
  c.train_token_embeddings = !freeze_embeddings_after_pretrain;
  c.prior = PriorTerm::kDrop;
  return c;
}

TrainReport train(const Corpus& input, const KeywordSpec& keywords,
                  const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  const auto start_time = std::chrono::steady_clock::now();
  if (!input.extraction_run()) throw Error("corpus has no extracted opinion words");

  Corpus corpus = input;
  TrainReport report;
  report.seed = config.seed;

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].opinion_ids.empty()) usable.push_back(i);
  }
  if (usable.empty()) throw Error("no document has opinion words");
  report.skipped_documents = corpus.size() - usable.size();

  report.pseudo_labels = assign_pseudo_labels(corpus, keywords);

  ModelShape shape;
  shape.embedding_dim = config.embedding_dim;
  shape.opinion_dim = config.opinion_dim;
  shape.encoder = config.encoder;
  shape.filters_per_width = config.filters_per_width;
  ModelParams params = ModelParams::for_corpus(corpus, shape, derive_seed(config.seed, 1));

  PretrainConfig pre = config.pretrain;
  pre.seed = derive_seed(config.seed, 2);
  report.pretrain = pretrain_classifier(corpus, params, pre);

  const ObjectiveConfig objective = config.objective();
  report.beta = objective.effective_beta();

  if (config.epochs > 0) {
    NegativeSampler sampler = NegativeSampler::for_corpus(
        corpus, config.negatives, config.negative_distribution, derive_seed(config.seed, 4));
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, 3));
    Optimizer optimizer(config.optimizer, config.lr, config.freeze_embeddings_after_pretrain);
    const std::size_t batch_size = std::min(config.batch_size, usable.size());
    std::size_t step = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
      std::shuffle(usable.begin(), usable.end(), shuffle_rng);
      EpochRecord er;
      er.epoch = epoch;
      std::size_t docs = 0;
      for (std::size_t b = 0; b < usable.size(); b += batch_size) {
        ++step;
        const std::size_t end = std::min(b + batch_size, usable.size());
        std::vector<const Document*> batch;
        for (std::size_t k = b; k < end; ++k) batch.push_back(&corpus[usable[k]]);

        const BatchNegatives negatives = draw_negatives(batch, sampler);
        GradientResult g;
        try {
          g = gradients(batch, params, objective, negatives);
        } catch (const Error& e) {
          throw Error("step " + std::to_string(step) + ": " + e.what());
        }
        const ObjectiveBreakdown& v = g.value;
        if (!std::isfinite(v.j)) {
          throw Error("non-finite J at step " + std::to_string(step));
        }
        if (hooks.trace) {
          std::vector<PairTrace> trace;
          batch_pr(batch, params, objective.pr, &trace);
          write_trace(*hooks.trace, step, trace, batch);
        }

        const StepRecord sr{epoch, step, v.j, v.l2.total, v.pr, v.l2.mean_entropy};
        report.steps.push_back(sr);
        if (hooks.log) log_step(*hooks.log, sr, report.beta);
        er.j += v.j;
        er.l2 += v.l2.total;
        er.pr += v.pr;
        er.mean_entropy += v.l2.mean_entropy * static_cast<double>(v.l2.documents);
        docs += v.l2.documents;

        optimizer.step(params, g.grads);
      }
      if (docs > 0) er.mean_entropy /= static_cast<double>(docs);
      report.epochs.push_back(er);
      if (hooks.log) log_epoch(*hooks.log, er, report.beta);
    }
  }

  report.params = std::move(params);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return report;
}

Prediction argmax_prediction(PolarityDistribution probs) {
  Prediction p;
  if (probs.size() == 0) throw Error("empty distribution");
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (c != best && probs[c] == probs[best]) p.tie = true;
  }
  p.label = best;
  p.probs = std::move(probs);
  return p;
}

Prediction predict(const Document& document, const ModelParams& params) {
  if (document.token_ids.empty()) {
    throw Error("cannot predict empty document \"" + document.id + "\"");
  }
  return argmax_prediction(polarity_posterior(encode(document, params), params));
}

std::vector<Prediction> predict(const Corpus& corpus, const ModelParams& params) {
  std::vector<Prediction> out;
  out.reserve(corpus.size());
  for (const auto& d : corpus.documents()) out.push_back(predict(d, params));
  return out;
}

GridSpec GridSpec::standard() {
  GridSpec g;
  for (int k = 5; k <= 10; ++k) g.gamma1.push_back(k / 10.0);
  for (int k = -5; k <= 0; ++k) g.gamma2.push_back(k / 10.0);
  for (int k = 1; k <= 10; ++k) g.beta.push_back(k / 10.0);
  return g;
}

GridResult grid_search(const Corpus& train_corpus, const Corpus& dev_corpus,
                       const GoldLabels& dev_gold, const KeywordSpec& keywords,
                       const TrainConfig& base, const GridSpec& grid) {
  if (grid.gamma1.empty() || grid.gamma2.empty() || grid.beta.empty()) {
    throw Error("grid is empty");
  }
  if (grid.seeds.empty()) throw Error("grid needs at least one seed");
  if (dev_gold.size() != dev_corpus.size()) {
    throw Error("dev gold labels do not match the dev corpus");
  }

  auto cell_config = [&](double g1, double g2, double beta) {
    TrainConfig c = base;
    c.posterior_regularization = true;
    c.pr.gamma1 = g1;
    c.pr.gamma2 = g2;
    c.pr.beta = beta;
    return c;
  };
  auto score = [&](int stage, const TrainConfig& c) {
    std::vector<double> scores;
    for (std::uint64_t seed : grid.seeds) {
      TrainConfig run = c;
      run.seed = seed;
      const TrainReport r = train(train_corpus, keywords, run);
      scores.push_back(dev_f1(dev_corpus, dev_gold, r.params));
    }
    return GridRow{stage, c.pr.gamma1, c.pr.gamma2, c.pr.beta, mean(scores),
                   population_std(scores)};
  };

  GridResult result;
  std::size_t best = 0;
  for (double g1 : grid.gamma1) {
    for (double g2 : grid.gamma2) {
      result.rows.push_back(score(1, cell_config(g1, g2, grid.stage1_beta)));
      if (result.rows.back().mean_f1 > result.rows[best].mean_f1) best = result.rows.size() - 1;
    }
  }
  const GridRow stage1 = result.rows[best];
  for (double beta : grid.beta) {
    if (beta == grid.stage1_beta) continue;
    result.rows.push_back(score(2, cell_config(stage1.gamma1, stage1.gamma2, beta)));
    if (result.rows.back().mean_f1 > result.rows[best].mean_f1) best = result.rows.size() - 1;
  }
  result.best = result.rows[best];
  result.best_config = cell_config(result.best.gamma1, result.best.gamma2, result.best.beta);
  return result;
}

}  // namespace vwspr
