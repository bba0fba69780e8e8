#include "vwspr/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace vwspr {

namespace {

std::string lowercase(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

KeywordSpec make_spec(std::vector<std::string> positive,
                      std::vector<std::string> negative) {
  KeywordSpec spec;
  spec.keywords["positive"] = std::move(positive);
  spec.keywords["negative"] = std::move(negative);
  return spec;
}

KeywordSpec spec_from_json(const nlohmann::json& j) {
  KeywordSpec spec;
  for (const auto& [label, words] : j.items()) {
    for (const auto& w : words) spec.keywords[label].push_back(lowercase(w.get<std::string>()));
  }
  return spec;
}

}  // namespace

void KeywordSpec::validate(const std::vector<std::string>& class_labels) const {
  std::set<std::string> seen;
  for (const auto& [label, words] : keywords) {
    if (std::find(class_labels.begin(), class_labels.end(), label) == class_labels.end()) {
      throw Error("keywords given for unknown class \"" + label + "\"");
    }
    for (const auto& w : words) {
      if (!seen.insert(lowercase(w)).second) {
        throw Error("keyword \"" + w + "\" is listed more than once");
      }
    }
  }
  for (const auto& label : class_labels) {
    auto it = keywords.find(label);
    if (it == keywords.end() || it->second.empty()) {
      throw Error("class \"" + label + "\" has no keywords");
    }
  }
}

KeywordSpec KeywordSpec::yelp() {
  return make_spec({"terrific", "amazing", "awesome"}, {"horrible", "worst", "bad"});
}

KeywordSpec KeywordSpec::imdb() {
  return make_spec({"great", "fantastic", "awesome"}, {"awful", "worst", "bad"});
}

KeywordSpec KeywordSpec::amazon() {
  return make_spec({"great", "fantastic", "awesome"}, {"poor", "worst", "bad"});
}

KeywordSpec KeywordSpec::preset(const std::string& dataset) {
  const std::string name = lowercase(dataset);
  if (name == "yelp") return yelp();
  if (name == "imdb") return imdb();
  if (name == "amazon") return amazon();
  throw Error("no keyword preset named \"" + dataset + "\"");
}

KeywordSpec load_keywords(const std::filesystem::path& path, const std::string& preset) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open keyword file " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_object() || j.empty()) throw Error("keyword file must hold an object");
    if (j.begin()->is_array()) return spec_from_json(j);
    if (preset.empty()) throw Error("keyword file has presets; choose one");
    if (!j.contains(preset)) throw Error("keyword file has no preset \"" + preset + "\"");
    return spec_from_json(j.at(preset));
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed keyword file " + path.string() + ": " + e.what());
  }
}

PseudoLabelCounts assign_pseudo_labels(Corpus& corpus, const KeywordSpec& keywords) {
  keywords.validate(corpus.class_labels());
  std::map<std::string, ClassId> owner;
  for (const auto& [label, words] : keywords.keywords) {
    const ClassId c = *corpus.class_index(label);
    for (const auto& w : words) owner[lowercase(w)] = c;
  }

  PseudoLabelCounts counts;
  counts.per_class.assign(corpus.num_classes(), 0);
  std::vector<std::optional<ClassId>> labels(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::set<ClassId> hit;
    for (const auto& t : corpus[i].tokens) {
      if (auto it = owner.find(t); it != owner.end()) hit.insert(it->second);
    }
    if (hit.size() == 1) {
      labels[i] = *hit.begin();
      ++counts.per_class[*hit.begin()];
    } else if (hit.empty()) {
      ++counts.unmatched;
    } else {
      ++counts.conflicting;
    }
  }
  for (ClassId c = 0; c < counts.per_class.size(); ++c) {
    if (counts.per_class[c] == 0) {
      throw Error("no document pseudo-labeled as \"" + corpus.class_labels()[c] + "\"");
    }
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) corpus.set_pseudo_label(i, labels[i]);
  return counts;
}

double pseudo_label_loss(const Corpus& corpus, const ModelParams& params) {
  double loss = 0.0;
  std::size_t n = 0;
  for (const auto& d : corpus.documents()) {
    if (!d.pseudo_label) continue;
    const auto q = polarity_posterior(encode(d, params), params);
    loss -= std::log(std::max(q[*d.pseudo_label], 1e-300));
    ++n;
  }
  return n == 0 ? 0.0 : loss / static_cast<double>(n);
}

double pseudo_label_accuracy(const Corpus& corpus, const ModelParams& params) {
  std::size_t hit = 0;
  std::size_t n = 0;
  for (const auto& d : corpus.documents()) {
    if (!d.pseudo_label) continue;
    const auto q = polarity_posterior(encode(d, params), params);
    Eigen::Index best = 0;
    q.probs.maxCoeff(&best);
    hit += static_cast<std::size_t>(best) == *d.pseudo_label ? 1 : 0;
    ++n;
  }
  return n == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(n);
}

PretrainReport pretrain_classifier(const Corpus& corpus, ModelParams& params,
                                   const PretrainConfig& config) {
  if (!(config.lr > 0.0)) throw Error("pretraining learning rate must be positive");
  std::vector<std::size_t> pseudo;
  std::vector<std::size_t> per_class(corpus.num_classes(), 0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (const auto& l = corpus[i].pseudo_label) {
      pseudo.push_back(i);
      ++per_class[*l];
    }
  }
  PretrainReport report;
  report.pseudo_labeled = pseudo.size();
  if (config.epochs == 0) return report;
  if (std::any_of(per_class.begin(), per_class.end(), [](auto n) { return n == 0; })) {
    throw Error("pretraining needs pseudo-labeled documents of every class");
  }

  std::mt19937_64 rng(config.seed);
  const std::size_t batch =
      config.batch_size == 0 ? pseudo.size() : std::min(config.batch_size, pseudo.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(pseudo.begin(), pseudo.end(), rng);
    for (std::size_t start = 0; start < pseudo.size(); start += batch) {
      const std::size_t end = std::min(start + batch, pseudo.size());
      ModelParams grads = ModelParams::zeros_like(params);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const Document& d = corpus[pseudo[b]];
        EncoderCache cache;
        const Eigen::VectorXd x = encode(d, params, &cache);
        Eigen::VectorXd dz = polarity_posterior(x, params).probs;
        dz(static_cast<Eigen::Index>(*d.pseudo_label)) -= 1.0;
        dz *= scale;
        grads.class_weights.noalias() += dz * x.transpose();
        const Eigen::VectorXd grad_x = params.class_weights.transpose() * dz;
        encode_backward(grad_x, cache, params, grads, config.train_embeddings);
      }
      auto p = param_blocks(params);
      const auto gb = param_blocks(std::as_const(grads));
      for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t i = 0; i < p[k].values.size(); ++i) {
          p[k].values[i] -= config.lr * gb[k].values[i];
        }
      }
    }
    const double loss = pseudo_label_loss(corpus, params);
    if (!std::isfinite(loss)) {
      throw Error("pretraining diverged at epoch " + std::to_string(epoch + 1));
    }
    report.epochs.push_back({epoch + 1, loss, pseudo_label_accuracy(corpus, params)});
  }
  return report;
}

}  // namespace vwspr
