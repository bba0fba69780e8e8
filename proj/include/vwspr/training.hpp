#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vwspr/corpus.hpp"
#include "vwspr/model.hpp"
#include "vwspr/objective.hpp"
#include "vwspr/pretrain.hpp"
#include "vwspr/regularizer.hpp"

namespace vwspr {

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  // false runs plain VWS (no regularizer in the update).
  bool posterior_regularization = true;
  double alpha = 0.1;
  PRConfig pr;
  std::size_t negatives = 5;
  NegativeDistribution negative_distribution = NegativeDistribution::kUniform;
  std::size_t batch_size = 32;
  double lr = 0.01;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  EncoderKind encoder = EncoderKind::kBagOfEmbeddings;
  std::size_t embedding_dim = 100;
  std::size_t opinion_dim = 100;
  std::size_t filters_per_width = 100;
  bool freeze_embeddings_after_pretrain = true;
  bool backprop_through_score = false;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  PretrainConfig pretrain;  // its seed is derived from `seed`

  void validate() const;
  ObjectiveConfig objective() const;
};

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double j = 0.0;
  double l2 = 0.0;
  double pr = 0.0;
  double mean_entropy = 0.0;

  bool operator==(const StepRecord&) const = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double j = 0.0;   // summed over the epoch's batches
  double l2 = 0.0;
  double pr = 0.0;  // unweighted
  double mean_entropy = 0.0;  // document-weighted mean of H(q)

  bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
  PretrainReport pretrain;
  PseudoLabelCounts pseudo_labels;
  std::vector<EpochRecord> epochs;
  std::vector<StepRecord> steps;
  ModelParams params;
  double beta = 0.0;  // effective regularizer weight
  std::size_t skipped_documents = 0;  // no opinion words
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Optional side outputs of a training run.
struct TrainHooks {
  std::ostream* log = nullptr;    // one JSON record per step and per epoch
  std::ostream* trace = nullptr;  // constraint trace, one JSON record per pair
};

/// Independent sub-seed for one consumer of randomness within a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Pseudo-labels a copy of the corpus, pretrains the classifier, then runs
/// `epochs` passes of shuffled minibatch ascent on J. Fully determined by
/// (corpus, keywords, config).
TrainReport train(const Corpus& corpus, const KeywordSpec& keywords,
                  const TrainConfig& config, const TrainHooks& hooks = {});

struct Prediction {
  ClassId label = 0;
  PolarityDistribution probs;
  bool tie = false;
};

/// argmax_c q(c|x); ties go to the lowest class index and are flagged.
Prediction predict(const Document& document, const ModelParams& params);
std::vector<Prediction> predict(const Corpus& corpus, const ModelParams& params);
Prediction argmax_prediction(PolarityDistribution probs);

struct GridSpec {
  std::vector<double> gamma1;
  std::vector<double> gamma2;
  std::vector<double> beta;
  double stage1_beta = 0.5;
  std::vector<std::uint64_t> seeds = {1};

  /// gamma1 in {0.5..1.0}, gamma2 in {-0.5..0}, beta in {0.1..1.0}, step 0.1.
  static GridSpec standard();
};

struct GridRow {
  int stage = 1;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double beta = 0.0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
};

struct GridResult {
  std::vector<GridRow> rows;
  GridRow best;
  TrainConfig best_config;
};

/// Two stages: every (gamma1, gamma2) with beta = stage1_beta, then every beta
/// at the best gamma pair. Cells are scored by mean positive-class F1 on the
/// dev split over the seeds; a stage-2 cell equal to a stage-1 cell is reused.
GridResult grid_search(const Corpus& train_corpus, const Corpus& dev_corpus,
                       const GoldLabels& dev_gold, const KeywordSpec& keywords,
                       const TrainConfig& base, const GridSpec& grid);

}  // namespace vwspr
