#include "vwspr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace vwspr {

namespace {

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.num_docs < 2 || spec.words_per_cluster == 0 || spec.min_opinions == 0 ||
      spec.min_opinions > spec.max_opinions || spec.min_filler > spec.max_filler ||
      spec.filler_vocab == 0) {
    throw Error("invalid synthetic corpus parameters");
  }
  if (spec.noise_rate > 0.0 && spec.noise_words == 0) {
    throw Error("noise_rate needs noise words");
  }
  const auto& kw = spec.keywords.keywords;
  if (!kw.count("positive") || !kw.count("negative")) {
    throw Error("synthetic keywords need positive and negative lists");
  }

  SyntheticData out;
  out.keywords = spec.keywords;
  out.positive_words = numbered("posw", spec.words_per_cluster);
  out.negative_words = numbered("negw", spec.words_per_cluster);
  out.noise_words = numbered("neuw", spec.noise_words);
  const auto filler = numbered("tok", spec.filler_vocab);

  std::mt19937_64 rng(spec.seed);
  std::vector<ClassId> labels(spec.num_docs);
  for (std::size_t i = 0; i < spec.num_docs; ++i) labels[i] = i % 2;
  std::shuffle(labels.begin(), labels.end(), rng);

  std::bernoulli_distribution noise(spec.noise_rate);
  std::bernoulli_distribution carry_keyword(spec.keyword_rate);
  Corpus& corpus = out.data.corpus;
  for (std::size_t i = 0; i < spec.num_docs; ++i) {
    const ClassId y = labels[i];
    const auto& cluster = y == 0 ? out.positive_words : out.negative_words;
    const auto& keys = kw.at(y == 0 ? "positive" : "negative");

    std::vector<std::string> opinions;
    const std::size_t n = uniform(rng, spec.min_opinions, spec.max_opinions);
    for (std::size_t k = 0; k < n; ++k) {
      if (noise(rng)) {
        opinions.push_back(out.noise_words[uniform(rng, 0, out.noise_words.size() - 1)]);
      } else {
        opinions.push_back(cluster[uniform(rng, 0, cluster.size() - 1)]);
      }
    }
    if (carry_keyword(rng)) opinions.push_back(keys[uniform(rng, 0, keys.size() - 1)]);

    std::vector<std::string> tokens;
    const std::size_t m = uniform(rng, spec.min_filler, spec.max_filler);
    for (std::size_t k = 0; k < m; ++k) tokens.push_back(filler[uniform(rng, 0, filler.size() - 1)]);
    for (const auto& w : opinions) {
      tokens.insert(tokens.begin() + static_cast<long>(uniform(rng, 0, tokens.size())), w);
    }
    std::string text;
    for (const auto& t : tokens) {
      if (!text.empty()) text += ' ';
      text += t;
    }
    const std::size_t doc = corpus.add_document("syn" + std::to_string(i), text);
    corpus.set_opinion_words(doc, opinions);
    out.data.gold.push_back(y);
  }
  // Keywords count as cluster members for lexicon purposes.
  for (const auto& w : kw.at("positive")) out.positive_words.push_back(w);
  for (const auto& w : kw.at("negative")) out.negative_words.push_back(w);
  return out;
}

Lexicon synthetic_lexicon(const SyntheticData& data, double coverage) {
  if (coverage < 0.0 || coverage > 1.0) throw Error("coverage must lie in [0, 1]");
  auto take = [&](const std::vector<std::string>& words) {
    const auto n = static_cast<std::size_t>(std::llround(coverage * static_cast<double>(words.size())));
    return std::vector<std::string>(words.begin(), words.begin() + static_cast<long>(n));
  };
  const auto pos = take(data.positive_words);
  const auto neg = take(data.negative_words);
  return Lexicon::from_lists(pos, neg);
}

}  // namespace vwspr
