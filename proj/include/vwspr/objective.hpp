#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "vwspr/model.hpp"
#include "vwspr/regularizer.hpp"

namespace vwspr {

/// Shannon entropy in nats with 0 ln 0 = 0.
double entropy(const PolarityDistribution& q);
double entropy(std::span<const double> q);

double sigmoid(double z);
/// log(sigmoid(z)) without overflow for large |z|.
double log_sigmoid(double z);

struct NegSampleSet {
  std::vector<int> samples;
  std::size_t count() const { return samples.size(); }
};

enum class NegativeDistribution { kUniform, kUnigram075 };

/// Draws negatives for one positive opinion word from the opinion vocabulary
/// with the positive word excluded.
class NegativeSampler {
 public:
  /// Uniform over the vocabulary.
  NegativeSampler(std::size_t vocab_size, std::size_t count, std::uint64_t seed);
  /// Proportional to the given non-negative weights.
  NegativeSampler(std::vector<double> weights, std::size_t count, std::uint64_t seed);

  /// Unigram^0.75 weights come from the corpus' opinion multisets.
  static NegativeSampler for_corpus(const Corpus& corpus, std::size_t count,
                                    NegativeDistribution distribution,
                                    std::uint64_t seed);

  NegSampleSet draw(int positive);
  std::size_t count() const { return count_; }

 private:
  std::size_t vocab_size_;
  std::size_t count_;
  std::optional<std::discrete_distribution<int>> weighted_;
  std::mt19937_64 rng_;
};

/// log sigma(phi(w_o, c)) + sum over negatives of log(1 - sigma(phi(w', c)))
double neg_sampled_term(int opinion, ClassId c, const NegSampleSet& negatives,
                        const ModelParams& params);

enum class PriorTerm { kInclude, kDrop };

/// sum_{w in P_x} [ sum_c q(c|x) log(p(w|c) p(c)) + H(q) ] with the full
/// opinion softmax and a uniform prior p(c) = 1/K. With PriorTerm::kDrop the
/// log p(c) part is omitted, which shifts the value by |P_x| ln K.
double elbo_exact(const PolarityDistribution& q, std::span<const int> opinions,
                  const ModelParams& params, PriorTerm prior = PriorTerm::kInclude);
double elbo_exact(const Document& document, const ModelParams& params,
                  PriorTerm prior = PriorTerm::kInclude);

/// sum_{w in P_x} log sum_c p(w|c) p(c) with the same uniform prior.
double log_likelihood_exact(std::span<const int> opinions, const ModelParams& params);

/// Negatives for every opinion occurrence of every document in a batch:
/// negatives[doc][occurrence].
using BatchNegatives = std::vector<std::vector<NegSampleSet>>;

BatchNegatives draw_negatives(std::span<const Document* const> batch,
                              NegativeSampler& sampler);

struct ObjectiveValue {
  double expected_term = 0.0;  // sum over docs and opinion words of E_q[...]
  double entropy_term = 0.0;   // sum over docs and opinion words of H(q)
  double mean_entropy = 0.0;   // mean of H(q) over used documents, in [0, ln K]
  double total = 0.0;          // expected_term + alpha * entropy_term
  std::size_t documents = 0;
  std::size_t skipped = 0;  // documents without opinion words
};

/// Negative-sampling objective with entropy weight alpha. Throws when no
/// document in the batch has opinion words.
ObjectiveValue batch_objective_L2(std::span<const Document* const> batch,
                                  const ModelParams& params, double alpha,
                                  const BatchNegatives& negatives,
                                  PriorTerm prior = PriorTerm::kDrop);
ObjectiveValue batch_objective_L2(std::span<const Document* const> batch,
                                  const ModelParams& params, double alpha,
                                  NegativeSampler& sampler,
                                  PriorTerm prior = PriorTerm::kDrop);

struct ObjectiveConfig {
  double alpha = 0.1;
  // false gives plain VWS: the regularizer is still evaluated for reporting
  // but carries no weight.
  bool regularize = true;
  PRConfig pr;
  // Let gradients flow through S into the opinion embeddings.
  bool backprop_through_score = false;
  bool train_token_embeddings = true;
  PriorTerm prior = PriorTerm::kDrop;

  double effective_beta() const { return regularize ? pr.beta : 0.0; }
};

struct ObjectiveBreakdown {
  ObjectiveValue l2;
  double pr = 0.0;  // unweighted sum of R over the batch's pairs
  double beta = 0.0;
  double j = 0.0;   // l2.total + beta * pr
};

/// Value of J = L2 + beta * sum R for one batch.
ObjectiveBreakdown objective_J(std::span<const Document* const> batch,
                               const ModelParams& params, const ObjectiveConfig& config,
                               const BatchNegatives& negatives);

struct GradientResult {
  ObjectiveBreakdown value;
  ModelParams grads;  // dJ/dparams
};

/// Analytic gradient of J by reverse-mode differentiation. Token embeddings
/// receive gradient only when config.train_token_embeddings. S is treated as
/// a constant weight unless config.backprop_through_score. Throws when any
/// gradient coordinate is non-finite, naming the block.
GradientResult gradients(std::span<const Document* const> batch,
                         const ModelParams& params, const ObjectiveConfig& config,
                         const BatchNegatives& negatives);

}  // namespace vwspr
