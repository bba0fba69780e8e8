#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vwspr/common.hpp"
#include "vwspr/corpus.hpp"

namespace vwspr {

enum class EncoderKind {
  kBagOfEmbeddings,  // mean of token embeddings
  kConvolutional,    // per-width convolution, max over time, ReLU, concatenate
};

std::string to_string(EncoderKind kind);
EncoderKind encoder_from_string(std::string_view name);

struct ModelShape {
  std::size_t num_classes = 2;
  std::size_t token_vocab_size = 0;
  std::size_t opinion_vocab_size = 0;
  std::size_t embedding_dim = 100;
  std::size_t opinion_dim = 100;
  EncoderKind encoder = EncoderKind::kBagOfEmbeddings;
  std::vector<std::size_t> filter_widths = {2, 3, 4, 5};
  std::size_t filters_per_width = 100;

  std::size_t encoder_output_dim() const;
  std::size_t min_document_length() const;
};

struct ConvBank {
  std::size_t width = 0;
  RowMatrix weights;  // filters x (width * embedding_dim)
  Eigen::VectorXd bias;
};

/// All trainable state. The same type doubles as the gradient record, so
/// gradients and parameters share block names and layout.
struct ModelParams {
  ModelShape shape;
  RowMatrix token_embeddings;  // (token_vocab_size + 1) x d, last row is UNK
  std::vector<ConvBank> conv;
  RowMatrix class_weights;        // K x encoder_output_dim      (w_c)
  RowMatrix opinion_embeddings;   // opinion_vocab_size x d_o    (w_o)
  RowMatrix class_score_vectors;  // K x d_o                     (a_c)
  std::uint64_t token_vocab_fingerprint = 0;
  std::uint64_t opinion_vocab_fingerprint = 0;

  /// Every coordinate uniform in [-0.1, 0.1], drawn in a fixed block order.
  static ModelParams initialize(const ModelShape& shape, std::uint64_t seed);
  static ModelParams zeros_like(const ModelParams& other);
  static ModelParams for_corpus(const Corpus& corpus, ModelShape shape,
                                std::uint64_t seed);

  std::size_t unk_row() const { return shape.token_vocab_size; }
  std::size_t num_parameters() const;
};

struct ParamBlock {
  std::string name;
  std::span<double> values;
};
struct ConstParamBlock {
  std::string name;
  std::span<const double> values;
};

/// Fixed-order views over every parameter block.
std::vector<ParamBlock> param_blocks(ModelParams& params);
std::vector<ConstParamBlock> param_blocks(const ModelParams& params);

/// Bitwise equality of every block (NaN payloads and signed zeros included).
bool bit_identical(const ModelParams& a, const ModelParams& b);

/// Forward state kept for encode_backward.
struct EncoderCache {
  std::vector<long> rows;  // embedding row per (padded) position, -1 for PAD
  // Convolutional only: per bank, per filter, winning position and pooled
  // pre-activation.
  std::vector<std::vector<std::size_t>> argmax;
  std::vector<Eigen::VectorXd> pooled;
};

/// Document vector for a sequence of token ids (Vocab::kUnknown -> UNK row).
/// Throws on an empty sequence.
Eigen::VectorXd encode(std::span<const int> token_ids, const ModelParams& params,
                       EncoderCache* cache = nullptr);
Eigen::VectorXd encode(const Document& document, const ModelParams& params,
                       EncoderCache* cache = nullptr);

/// Accumulates d(objective)/d(params) given d(objective)/dx into grads.
/// Token-embedding gradients are only written when embeddings_trainable.
void encode_backward(const Eigen::VectorXd& grad_x, const EncoderCache& cache,
                     const ModelParams& params, ModelParams& grads,
                     bool embeddings_trainable);

/// q(C|x): a probability vector whose entries are positive and sum to one.
struct PolarityDistribution {
  Eigen::VectorXd probs;

  std::size_t size() const { return static_cast<std::size_t>(probs.size()); }
  double operator[](std::size_t c) const { return probs(static_cast<Eigen::Index>(c)); }
};

/// Max-subtracted softmax. Throws on non-finite logits.
PolarityDistribution softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd class_logits(const Eigen::VectorXd& x, const ModelParams& params);
PolarityDistribution polarity_posterior(const Eigen::VectorXd& x,
                                        const ModelParams& params);

/// phi(w_o, c) = a_c . w_o
double opinion_score(int opinion, ClassId c, const ModelParams& params);
/// p(w_o | c) by a full softmax over the opinion vocabulary.
double opinion_softmax(int opinion, ClassId c, const ModelParams& params);
/// log p(w_o | c) for every opinion word at once.
Eigen::VectorXd opinion_log_softmax(ClassId c, const ModelParams& params);

/// Checkpoints are JSON with a format tag, version, shape, vocabulary
/// fingerprints and every parameter block at round-trip precision.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);
/// Also verifies that both vocabulary fingerprints match the corpus.
ModelParams load_checkpoint(const std::filesystem::path& path, const Corpus& corpus);
std::string checkpoint_json(const ModelParams& params);
ModelParams checkpoint_from_json(const std::string& text);

}  // namespace vwspr
