#include "vwspr/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

namespace vwspr {

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::kBagOfEmbeddings ? "bag" : "cnn";
}

EncoderKind encoder_from_string(std::string_view name) {
  if (name == "bag" || name == "bag-of-embeddings") return EncoderKind::kBagOfEmbeddings;
  if (name == "cnn" || name == "convolutional") return EncoderKind::kConvolutional;
  throw Error("unknown encoder \"" + std::string(name) + "\"");
}

std::size_t ModelShape::encoder_output_dim() const {
  return encoder == EncoderKind::kBagOfEmbeddings
             ? embedding_dim
             : filter_widths.size() * filters_per_width;
}

std::size_t ModelShape::min_document_length() const {
  if (encoder == EncoderKind::kBagOfEmbeddings || filter_widths.empty()) return 1;
  return *std::max_element(filter_widths.begin(), filter_widths.end());
}

namespace {

RowMatrix shaped(std::size_t rows, std::size_t cols) {
  return RowMatrix::Zero(static_cast<Eigen::Index>(rows),
                         static_cast<Eigen::Index>(cols));
}

template <typename Params, typename Block>
std::vector<Block> blocks_of(Params& p) {
  auto view = [](auto& m) {
    return std::span(m.data(), static_cast<std::size_t>(m.size()));
  };
  std::vector<Block> out;
  out.push_back({"token_embeddings", view(p.token_embeddings)});
  for (auto& bank : p.conv) {
    const std::string prefix = "conv" + std::to_string(bank.width);
    out.push_back({prefix + ".weights", view(bank.weights)});
    out.push_back({prefix + ".bias", view(bank.bias)});
  }
  out.push_back({"class_weights", view(p.class_weights)});
  out.push_back({"opinion_embeddings", view(p.opinion_embeddings)});
  out.push_back({"class_score_vectors", view(p.class_score_vectors)});
  return out;
}

}  // namespace

ModelParams ModelParams::zeros_like(const ModelParams& other) {
  ModelParams p;
  p.shape = other.shape;
  const ModelShape& s = other.shape;
  p.token_embeddings = shaped(s.token_vocab_size + 1, s.embedding_dim);
  if (s.encoder == EncoderKind::kConvolutional) {
    for (std::size_t w : s.filter_widths) {
      ConvBank bank;
      bank.width = w;
      bank.weights = shaped(s.filters_per_width, w * s.embedding_dim);
      bank.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.filters_per_width));
      p.conv.push_back(std::move(bank));
    }
  }
  p.class_weights = shaped(s.num_classes, s.encoder_output_dim());
  p.opinion_embeddings = shaped(s.opinion_vocab_size, s.opinion_dim);
  p.class_score_vectors = shaped(s.num_classes, s.opinion_dim);
  p.token_vocab_fingerprint = other.token_vocab_fingerprint;
  p.opinion_vocab_fingerprint = other.opinion_vocab_fingerprint;
  return p;
}

ModelParams ModelParams::initialize(const ModelShape& shape, std::uint64_t seed) {
  if (shape.num_classes < 2) throw Error("model needs at least two classes");
  if (shape.embedding_dim == 0 || shape.opinion_dim == 0) {
    throw Error("embedding dimensions must be positive");
  }
  if (shape.encoder == EncoderKind::kConvolutional &&
      (shape.filter_widths.empty() || shape.filters_per_width == 0)) {
    throw Error("convolutional encoder needs filters");
  }
  ModelParams shell;
  shell.shape = shape;
  ModelParams p = zeros_like(shell);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  for (auto& block : param_blocks(p)) {
    for (double& v : block.values) v = uniform(rng);
  }
  return p;
}

ModelParams ModelParams::for_corpus(const Corpus& corpus, ModelShape shape,
                                    std::uint64_t seed) {
  shape.num_classes = corpus.num_classes();
  shape.token_vocab_size = corpus.token_vocab().size();
  shape.opinion_vocab_size = corpus.opinion_vocab().size();
  ModelParams p = initialize(shape, seed);
  p.token_vocab_fingerprint = corpus.token_vocab().fingerprint();
  p.opinion_vocab_fingerprint = corpus.opinion_vocab().fingerprint();
  return p;
}

std::size_t ModelParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& b : param_blocks(*this)) n += b.values.size();
  return n;
}

std::vector<ParamBlock> param_blocks(ModelParams& params) {
  return blocks_of<ModelParams, ParamBlock>(params);
}

std::vector<ConstParamBlock> param_blocks(const ModelParams& params) {
  return blocks_of<const ModelParams, ConstParamBlock>(params);
}

bool bit_identical(const ModelParams& a, const ModelParams& b) {
  const auto ba = param_blocks(a);
  const auto bb = param_blocks(b);
  if (ba.size() != bb.size()) return false;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    if (ba[i].name != bb[i].name || ba[i].values.size() != bb[i].values.size()) {
      return false;
    }
    if (std::memcmp(ba[i].values.data(), bb[i].values.data(),
                    ba[i].values.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

Eigen::VectorXd encode(std::span<const int> token_ids, const ModelParams& params,
                       EncoderCache* cache) {
  if (token_ids.empty()) throw Error("cannot encode an empty document");
  const ModelShape& s = params.shape;
  const auto d = static_cast<Eigen::Index>(s.embedding_dim);

  std::vector<long> rows;
  rows.reserve(std::max(token_ids.size(), s.min_document_length()));
  for (int id : token_ids) {
    if (id == Vocab::kUnknown) {
      rows.push_back(static_cast<long>(params.unk_row()));
    } else if (id < 0 || static_cast<std::size_t>(id) >= s.token_vocab_size) {
      throw Error("token id outside the model vocabulary: " + std::to_string(id));
    } else {
      rows.push_back(id);
    }
  }

  Eigen::VectorXd x;
  if (s.encoder == EncoderKind::kBagOfEmbeddings) {
    x = Eigen::VectorXd::Zero(d);
    for (long r : rows) x += params.token_embeddings.row(r).transpose();
    x /= static_cast<double>(rows.size());
    if (cache) {
      cache->rows = std::move(rows);
      cache->argmax.clear();
      cache->pooled.clear();
    }
    return x;
  }

  // Right-pad with the zero PAD vector up to the widest filter.
  while (rows.size() < s.min_document_length()) rows.push_back(-1);
  const auto length = static_cast<Eigen::Index>(rows.size());
  RowMatrix input = RowMatrix::Zero(length, d);
  for (Eigen::Index t = 0; t < length; ++t) {
    if (rows[static_cast<std::size_t>(t)] >= 0) {
      input.row(t) = params.token_embeddings.row(rows[static_cast<std::size_t>(t)]);
    }
  }

  const auto filters = static_cast<Eigen::Index>(s.filters_per_width);
  x.resize(static_cast<Eigen::Index>(s.encoder_output_dim()));
  if (cache) {
    cache->argmax.assign(params.conv.size(), {});
    cache->pooled.assign(params.conv.size(), {});
  }
  for (std::size_t b = 0; b < params.conv.size(); ++b) {
    const ConvBank& bank = params.conv[b];
    const auto w = static_cast<Eigen::Index>(bank.width);
    Eigen::VectorXd best = Eigen::VectorXd::Constant(
        filters, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> where(static_cast<std::size_t>(filters), 0);
    for (Eigen::Index p = 0; p + w <= length; ++p) {
      Eigen::Map<const Eigen::VectorXd> window(input.data() + p * d, w * d);
      const Eigen::VectorXd h = bank.weights * window + bank.bias;
      for (Eigen::Index f = 0; f < filters; ++f) {
        if (h(f) > best(f)) {
          best(f) = h(f);
          where[static_cast<std::size_t>(f)] = static_cast<std::size_t>(p);
        }
      }
    }
    x.segment(static_cast<Eigen::Index>(b) * filters, filters) = best.cwiseMax(0.0);
    if (cache) {
      cache->argmax[b] = std::move(where);
      cache->pooled[b] = std::move(best);
    }
  }
  if (cache) cache->rows = std::move(rows);
  return x;
}

Eigen::VectorXd encode(const Document& document, const ModelParams& params,
                       EncoderCache* cache) {
  return encode(std::span<const int>(document.token_ids), params, cache);
}

void encode_backward(const Eigen::VectorXd& grad_x, const EncoderCache& cache,
                     const ModelParams& params, ModelParams& grads,
                     bool embeddings_trainable) {
  const ModelShape& s = params.shape;
  const auto d = static_cast<Eigen::Index>(s.embedding_dim);
  if (s.encoder == EncoderKind::kBagOfEmbeddings) {
    if (!embeddings_trainable) return;
    const double scale = 1.0 / static_cast<double>(cache.rows.size());
    for (long r : cache.rows) grads.token_embeddings.row(r) += scale * grad_x.transpose();
    return;
  }

  const auto filters = static_cast<Eigen::Index>(s.filters_per_width);
  for (std::size_t b = 0; b < params.conv.size(); ++b) {
    const ConvBank& bank = params.conv[b];
    ConvBank& gbank = grads.conv[b];
    const auto w = static_cast<Eigen::Index>(bank.width);
    for (Eigen::Index f = 0; f < filters; ++f) {
      if (cache.pooled[b](f) <= 0.0) continue;  // ReLU closed
      const double g = grad_x(static_cast<Eigen::Index>(b) * filters + f);
      if (g == 0.0) continue;
      const std::size_t p = cache.argmax[b][static_cast<std::size_t>(f)];
      gbank.bias(f) += g;
      for (Eigen::Index k = 0; k < w; ++k) {
        const long r = cache.rows[p + static_cast<std::size_t>(k)];
        if (r < 0) continue;  // PAD contributes nothing and is not trainable
        gbank.weights.row(f).segment(k * d, d) += g * params.token_embeddings.row(r);
        if (embeddings_trainable) {
          grads.token_embeddings.row(r) += g * bank.weights.row(f).segment(k * d, d);
        }
      }
    }
  }
}

PolarityDistribution softmax(const Eigen::VectorXd& logits) {
  if (!logits.allFinite()) throw Error("non-finite class logits");
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp();
  return {e / e.sum()};
}

Eigen::VectorXd class_logits(const Eigen::VectorXd& x, const ModelParams& params) {
  if (x.size() != params.class_weights.cols()) {
    throw Error("document vector has the wrong dimension");
  }
  return params.class_weights * x;
}

PolarityDistribution polarity_posterior(const Eigen::VectorXd& x,
                                        const ModelParams& params) {
  return softmax(class_logits(x, params));
}

double opinion_score(int opinion, ClassId c, const ModelParams& params) {
  if (opinion < 0 || opinion >= params.opinion_embeddings.rows()) {
    throw Error("opinion index outside the vocabulary: " + std::to_string(opinion));
  }
  if (c >= params.shape.num_classes) throw Error("class index out of range");
  return params.class_score_vectors.row(static_cast<Eigen::Index>(c))
      .dot(params.opinion_embeddings.row(opinion));
}

Eigen::VectorXd opinion_log_softmax(ClassId c, const ModelParams& params) {
  if (params.opinion_embeddings.rows() == 0) throw Error("empty opinion vocabulary");
  if (c >= params.shape.num_classes) throw Error("class index out of range");
  const Eigen::VectorXd scores =
      params.opinion_embeddings *
      params.class_score_vectors.row(static_cast<Eigen::Index>(c)).transpose();
  const double top = scores.maxCoeff();
  const double log_z = top + std::log((scores.array() - top).exp().sum());
  return scores.array() - log_z;
}

double opinion_softmax(int opinion, ClassId c, const ModelParams& params) {
  opinion_score(opinion, c, params);  // range checks
  return std::exp(opinion_log_softmax(c, params)(opinion));
}

namespace {

constexpr const char* kCheckpointFormat = "vwspr-checkpoint";
constexpr int kCheckpointVersion = 1;

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

std::uint64_t from_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

}  // namespace

std::string checkpoint_json(const ModelParams& params) {
  const ModelShape& s = params.shape;
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["shape"] = {{"num_classes", s.num_classes},
                {"token_vocab_size", s.token_vocab_size},
                {"opinion_vocab_size", s.opinion_vocab_size},
                {"embedding_dim", s.embedding_dim},
                {"opinion_dim", s.opinion_dim},
                {"encoder", to_string(s.encoder)},
                {"filter_widths", s.filter_widths},
                {"filters_per_width", s.filters_per_width}};
  j["token_vocab_fingerprint"] = hex64(params.token_vocab_fingerprint);
  j["opinion_vocab_fingerprint"] = hex64(params.opinion_vocab_fingerprint);
  nlohmann::json blocks = nlohmann::json::object();
  for (const auto& b : param_blocks(params)) {
    blocks[b.name] = std::vector<double>(b.values.begin(), b.values.end());
  }
  j["blocks"] = std::move(blocks);
  return j.dump();
}

ModelParams checkpoint_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != kCheckpointFormat) throw Error("not a model checkpoint");
    if (j.at("version") != kCheckpointVersion) {
      throw Error("unsupported checkpoint version " + j.at("version").dump());
    }
    const auto& js = j.at("shape");
    ModelParams shell;
    ModelShape& s = shell.shape;
    s.num_classes = js.at("num_classes");
    s.token_vocab_size = js.at("token_vocab_size");
    s.opinion_vocab_size = js.at("opinion_vocab_size");
    s.embedding_dim = js.at("embedding_dim");
    s.opinion_dim = js.at("opinion_dim");
    s.encoder = encoder_from_string(js.at("encoder").get<std::string>());
    s.filter_widths = js.at("filter_widths").get<std::vector<std::size_t>>();
    s.filters_per_width = js.at("filters_per_width");
    shell.token_vocab_fingerprint = from_hex64(j.at("token_vocab_fingerprint"));
    shell.opinion_vocab_fingerprint = from_hex64(j.at("opinion_vocab_fingerprint"));
    ModelParams p = ModelParams::zeros_like(shell);
    for (auto& b : param_blocks(p)) {
      const auto values = j.at("blocks").at(b.name).get<std::vector<double>>();
      if (values.size() != b.values.size()) {
        throw Error("checkpoint block " + b.name + " has the wrong size");
      }
      std::copy(values.begin(), values.end(), b.values.begin());
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_json(params) << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_json(buffer.str());
}

ModelParams load_checkpoint(const std::filesystem::path& path, const Corpus& corpus) {
  ModelParams p = load_checkpoint(path);
  if (p.token_vocab_fingerprint != corpus.token_vocab().fingerprint() ||
      p.opinion_vocab_fingerprint != corpus.opinion_vocab().fingerprint()) {
    throw Error("checkpoint vocabulary does not match the corpus");
  }
  return p;
}

}  // namespace vwspr
