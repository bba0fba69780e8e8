#include "vwspr/objective.hpp"

#include <cmath>
#include <numeric>

namespace vwspr {

double entropy(std::span<const double> q) {
  double h = 0.0;
  for (double p : q) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double entropy(const PolarityDistribution& q) {
  return entropy(std::span<const double>(q.probs.data(), q.size()));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

NegativeSampler::NegativeSampler(std::size_t vocab_size, std::size_t count,
                                 std::uint64_t seed)
    : vocab_size_(vocab_size), count_(count), rng_(seed) {
  if (vocab_size_ < 2) {
    throw Error("negative sampling needs at least two opinion words");
  }
}

NegativeSampler::NegativeSampler(std::vector<double> weights, std::size_t count,
                                 std::uint64_t seed)
    : vocab_size_(weights.size()), count_(count), rng_(seed) {
  const auto positive = std::count_if(weights.begin(), weights.end(),
                                      [](double w) { return w > 0.0; });
  if (positive < 2) {
    throw Error("negative sampling needs at least two opinion words with weight");
  }
  weighted_.emplace(weights.begin(), weights.end());
}

NegativeSampler NegativeSampler::for_corpus(const Corpus& corpus, std::size_t count,
                                            NegativeDistribution distribution,
                                            std::uint64_t seed) {
  const std::size_t v = corpus.opinion_vocab().size();
  if (distribution == NegativeDistribution::kUniform) {
    return NegativeSampler(v, count, seed);
  }
  std::vector<double> counts(v, 0.0);
  for (const auto& d : corpus.documents()) {
    for (int id : d.opinion_ids) counts[static_cast<std::size_t>(id)] += 1.0;
  }
  for (double& c : counts) c = std::pow(c, 0.75);
  return NegativeSampler(std::move(counts), count, seed);
}

NegSampleSet NegativeSampler::draw(int positive) {
  NegSampleSet set;
  set.samples.reserve(count_);
  if (weighted_) {
    while (set.samples.size() < count_) {
      const int w = (*weighted_)(rng_);
      if (w != positive) set.samples.push_back(w);
    }
    return set;
  }
  // Uniform over the vocabulary minus the positive word, without rejection.
  std::uniform_int_distribution<int> pick(0, static_cast<int>(vocab_size_) - 2);
  for (std::size_t k = 0; k < count_; ++k) {
    int w = pick(rng_);
    if (positive >= 0 && w >= positive) ++w;
    set.samples.push_back(w);
  }
  return set;
}

double neg_sampled_term(int opinion, ClassId c, const NegSampleSet& negatives,
                        const ModelParams& params) {
  double term = log_sigmoid(opinion_score(opinion, c, params));
  for (int w : negatives.samples) term += log_sigmoid(-opinion_score(w, c, params));
  return term;
}

double elbo_exact(const PolarityDistribution& q, std::span<const int> opinions,
                  const ModelParams& params, PriorTerm prior) {
  const std::size_t k = q.size();
  std::vector<Eigen::VectorXd> log_p(k);
  for (ClassId c = 0; c < k; ++c) log_p[c] = opinion_log_softmax(c, params);
  const double log_prior =
      prior == PriorTerm::kInclude ? -std::log(static_cast<double>(k)) : 0.0;
  const double h = entropy(q);
  double total = 0.0;
  for (int w : opinions) {
    double expected = 0.0;
    for (ClassId c = 0; c < k; ++c) {
      const double lp = log_p[c](w);
      if (!std::isfinite(lp)) throw Error("zero probability inside the bound");
      expected += q[c] * (lp + log_prior);
    }
    total += expected + h;
  }
  return total;
}

double elbo_exact(const Document& document, const ModelParams& params,
                  PriorTerm prior) {
  const auto q = polarity_posterior(encode(document, params), params);
  return elbo_exact(q, document.opinion_ids, params, prior);
}

double log_likelihood_exact(std::span<const int> opinions, const ModelParams& params) {
  const std::size_t k = params.shape.num_classes;
  std::vector<Eigen::VectorXd> log_p(k);
  for (ClassId c = 0; c < k; ++c) log_p[c] = opinion_log_softmax(c, params);
  double total = 0.0;
  for (int w : opinions) {
    double top = -std::numeric_limits<double>::infinity();
    for (ClassId c = 0; c < k; ++c) top = std::max(top, log_p[c](w));
    double sum = 0.0;
    for (ClassId c = 0; c < k; ++c) sum += std::exp(log_p[c](w) - top);
    total += top + std::log(sum) - std::log(static_cast<double>(k));
  }
  return total;
}

BatchNegatives draw_negatives(std::span<const Document* const> batch,
                              NegativeSampler& sampler) {
  BatchNegatives out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (int w : batch[i]->opinion_ids) out[i].push_back(sampler.draw(w));
  }
  return out;
}

namespace {

const std::vector<NegSampleSet>& negatives_for(const BatchNegatives& negatives,
                                               std::size_t pos, const Document& doc) {
  if (pos >= negatives.size() || negatives[pos].size() != doc.opinion_ids.size()) {
    throw Error("negative samples do not match document " + doc.id);
  }
  return negatives[pos];
}

}  // namespace

ObjectiveValue batch_objective_L2(std::span<const Document* const> batch,
                                  const ModelParams& params, double alpha,
                                  const BatchNegatives& negatives, PriorTerm prior) {
  ObjectiveValue v;
  const std::size_t k = params.shape.num_classes;
  const double log_prior =
      prior == PriorTerm::kInclude ? -std::log(static_cast<double>(k)) : 0.0;
  double entropy_sum = 0.0;
  for (std::size_t pos = 0; pos < batch.size(); ++pos) {
    const Document& doc = *batch[pos];
    if (doc.opinion_ids.empty()) {
      ++v.skipped;
      continue;
    }
    const auto& negs = negatives_for(negatives, pos, doc);
    const auto q = polarity_posterior(encode(doc, params), params);
    const double h = entropy(q);
    for (std::size_t o = 0; o < doc.opinion_ids.size(); ++o) {
      for (ClassId c = 0; c < k; ++c) {
        v.expected_term +=
            q[c] * (neg_sampled_term(doc.opinion_ids[o], c, negs[o], params) + log_prior);
      }
      v.entropy_term += h;
    }
    entropy_sum += h;
    ++v.documents;
  }
  if (v.documents == 0) throw Error("batch has no document with opinion words");
  v.mean_entropy = entropy_sum / static_cast<double>(v.documents);
  v.total = v.expected_term + alpha * v.entropy_term;
  return v;
}

ObjectiveValue batch_objective_L2(std::span<const Document* const> batch,
                                  const ModelParams& params, double alpha,
                                  NegativeSampler& sampler, PriorTerm prior) {
  return batch_objective_L2(batch, params, alpha, draw_negatives(batch, sampler), prior);
}

ObjectiveBreakdown objective_J(std::span<const Document* const> batch,
                               const ModelParams& params, const ObjectiveConfig& config,
                               const BatchNegatives& negatives) {
  config.pr.validate();
  ObjectiveBreakdown out;
  out.l2 = batch_objective_L2(batch, params, config.alpha, negatives, config.prior);

  std::vector<PolarityDistribution> q;
  std::vector<std::vector<int>> sets;
  for (const Document* d : batch) {
    if (d->opinion_ids.empty()) continue;
    q.push_back(polarity_posterior(encode(*d, params), params));
    sets.push_back(d->opinion_set());
  }
  out.pr = batch_pr(q, sets, params, config.pr);
  out.beta = config.effective_beta();
  out.j = out.l2.total + out.beta * out.pr;
  return out;
}

namespace {

struct Forward {
  std::size_t pos = 0;
  const Document* doc = nullptr;
  EncoderCache cache;
  Eigen::VectorXd x;
  PolarityDistribution q;
  Eigen::VectorXd dq;      // dJ/dq, excluding the entropy part
  double entropy_weight = 0.0;  // coefficient of H(q) in J
  std::vector<int> set;
};

// d cos(u, v) / du
Eigen::RowVectorXd cosine_grad(const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return Eigen::RowVectorXd::Zero(u.size());
  const double cos = u.dot(v) / (nu * nv);
  return v / (nu * nv) - cos * u / (nu * nu);
}

}  // namespace

GradientResult gradients(std::span<const Document* const> batch,
                         const ModelParams& params, const ObjectiveConfig& config,
                         const BatchNegatives& negatives) {
  config.pr.validate();
  const std::size_t k = params.shape.num_classes;
  const auto kk = static_cast<Eigen::Index>(k);
  const double log_prior =
      config.prior == PriorTerm::kInclude ? -std::log(static_cast<double>(k)) : 0.0;
  GradientResult result{{}, ModelParams::zeros_like(params)};
  ModelParams& g = result.grads;
  ObjectiveValue& l2 = result.value.l2;
  const RowMatrix& emb = params.opinion_embeddings;
  const RowMatrix& score_vec = params.class_score_vectors;

  std::vector<Forward> used;
  used.reserve(batch.size());
  for (std::size_t pos = 0; pos < batch.size(); ++pos) {
    const Document& doc = *batch[pos];
    if (doc.opinion_ids.empty()) {
      ++l2.skipped;
      continue;
    }
    Forward f;
    f.pos = pos;
    f.doc = &doc;
    f.x = encode(doc, params, &f.cache);
    f.q = polarity_posterior(f.x, params);
    f.dq = Eigen::VectorXd::Zero(kk);
    f.set = doc.opinion_set();
    used.push_back(std::move(f));
  }
  if (used.empty()) throw Error("batch has no document with opinion words");

  // Negative-sampling expectation and entropy.
  double entropy_sum = 0.0;
  for (Forward& f : used) {
    const auto& negs = negatives_for(negatives, f.pos, *f.doc);
    const auto& ids = f.doc->opinion_ids;
    for (std::size_t o = 0; o < ids.size(); ++o) {
      const int w = ids[o];
      for (ClassId c = 0; c < k; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        const double qc = f.q[c];
        const double s = score_vec.row(ci).dot(emb.row(w));
        double term = log_sigmoid(s);
        const double ds = qc * sigmoid(-s);
        g.class_score_vectors.row(ci) += ds * emb.row(w);
        g.opinion_embeddings.row(w) += ds * score_vec.row(ci);
        for (int neg : negs[o].samples) {
          const double sn = score_vec.row(ci).dot(emb.row(neg));
          term += log_sigmoid(-sn);
          const double dsn = -qc * sigmoid(sn);
          g.class_score_vectors.row(ci) += dsn * emb.row(neg);
          g.opinion_embeddings.row(neg) += dsn * score_vec.row(ci);
        }
        term += log_prior;
        l2.expected_term += qc * term;
        f.dq(ci) += term;
      }
    }
    const double h = entropy(f.q);
    const double n = static_cast<double>(ids.size());
    l2.entropy_term += n * h;
    entropy_sum += h;
    f.entropy_weight = config.alpha * n;
    ++l2.documents;
  }
  l2.mean_entropy = entropy_sum / static_cast<double>(l2.documents);
  l2.total = l2.expected_term + config.alpha * l2.entropy_term;

  // Pairwise regularizer over documents with opinion words, i < j.
  const double beta = config.effective_beta();
  double pr = 0.0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    for (std::size_t j = i + 1; j < used.size(); ++j) {
      const auto s = score_S(used[i].set, used[j].set, params, config.pr);
      const Eigen::VectorXd diff = used[i].q.probs - used[j].q.probs;
      const double d = diff.norm();
      pr += -d * s.value;
      if (!config.regularize) continue;
      if (d > 0.0) {
        const Eigen::VectorXd dd = (beta * -s.value / d) * diff;
        used[i].dq += dd;
        used[j].dq -= dd;
      }
      if (config.backprop_through_score &&
          (s.branch == ScoreBranch::kSimilar || s.branch == ScoreBranch::kDissimilar)) {
        const double ds = beta * -d;
        const auto [a, b] =
            s.branch == ScoreBranch::kSimilar ? s.max_pair : s.min_pair;
        const Eigen::RowVectorXd ea = emb.row(a);
        const Eigen::RowVectorXd eb = emb.row(b);
        g.opinion_embeddings.row(a) += ds * cosine_grad(ea, eb);
        g.opinion_embeddings.row(b) += ds * cosine_grad(eb, ea);
      }
    }
  }
  result.value.pr = pr;
  result.value.beta = beta;
  result.value.j = l2.total + beta * pr;

  // Softmax and encoder.
  for (Forward& f : used) {
    const Eigen::ArrayXd q = f.q.probs.array();
    Eigen::VectorXd dz = (q * (f.dq.array() - q.matrix().dot(f.dq))).matrix();
    // dH/dz_c = -q_c (ln q_c + H), with q ln q = 0 at q = 0.
    const double h = entropy(f.q);
    for (Eigen::Index c = 0; c < kk; ++c) {
      const double qlnq = q(c) > 0.0 ? q(c) * std::log(q(c)) : 0.0;
      dz(c) += f.entropy_weight * -(qlnq + q(c) * h);
    }
    g.class_weights.noalias() += dz * f.x.transpose();
    const Eigen::VectorXd grad_x = params.class_weights.transpose() * dz;
    encode_backward(grad_x, f.cache, params, g, config.train_token_embeddings);
  }

  for (const auto& block : param_blocks(g)) {
    for (double v : block.values) {
      if (!std::isfinite(v)) throw Error("non-finite gradient in " + block.name);
    }
  }
  return result;
}

}  // namespace vwspr
