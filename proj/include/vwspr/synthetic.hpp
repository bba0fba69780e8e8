#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vwspr/corpus.hpp"
#include "vwspr/evaluation.hpp"
#include "vwspr/pretrain.hpp"

namespace vwspr {

/// Parameters of a labeled toy corpus with a known polarity structure.
struct SyntheticSpec {
  std::size_t num_docs = 2000;          // split evenly between the two classes
  std::size_t words_per_cluster = 40;   // opinion words per polarity
  std::size_t noise_words = 20;         // polarity-free opinion words
  double noise_rate = 0.1;              // share of opinion slots filled with noise
  std::size_t min_opinions = 1;
  std::size_t max_opinions = 4;
  std::size_t filler_vocab = 200;
  std::size_t min_filler = 6;
  std::size_t max_filler = 14;
  double keyword_rate = 0.25;           // documents that also carry a class keyword
  KeywordSpec keywords = KeywordSpec::yelp();
  std::uint64_t seed = 7;
};

struct SyntheticData {
  LoadedCorpus data;  // opinion words already attached
  std::vector<std::string> positive_words;  // includes the positive keywords
  std::vector<std::string> negative_words;
  std::vector<std::string> noise_words;
  KeywordSpec keywords;
};

/// Each document draws its opinion words from its class cluster, replacing
/// each with a noise word with probability noise_rate. Text is the opinion
/// words interleaved with filler tokens.
SyntheticData make_synthetic(const SyntheticSpec& spec = {});

/// Lexicon listing the first `coverage` share of each polarity cluster.
Lexicon synthetic_lexicon(const SyntheticData& data, double coverage);

}  // namespace vwspr
