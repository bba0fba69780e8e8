#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vwspr/corpus.hpp"
#include "vwspr/model.hpp"

namespace vwspr {

/// Seed words per class name. Matching is exact-token and case-insensitive.
struct KeywordSpec {
  std::map<std::string, std::vector<std::string>> keywords;

  /// Every corpus class has at least one keyword, no keyword belongs to two
  /// classes and no keyword names an unknown class.
  void validate(const std::vector<std::string>& class_labels) const;

  static KeywordSpec yelp();
  static KeywordSpec imdb();
  static KeywordSpec amazon();
  static KeywordSpec preset(const std::string& dataset);
};

/// Accepts either {"positive": [...], "negative": [...]} or an object of
/// named presets, in which case `preset` selects one.
KeywordSpec load_keywords(const std::filesystem::path& path,
                          const std::string& preset = "");

struct PseudoLabelCounts {
  std::vector<std::size_t> per_class;
  std::size_t conflicting = 0;  // keywords of several classes
  std::size_t unmatched = 0;
};

/// A document gets a pseudo label when its tokens contain keywords of exactly
/// one class; previous pseudo labels are replaced. Throws, leaving the corpus
/// untouched, when some class receives no document.
PseudoLabelCounts assign_pseudo_labels(Corpus& corpus, const KeywordSpec& keywords);

struct PretrainConfig {
  std::size_t epochs = 5;
  double lr = 2.0;
  std::size_t batch_size = 32;  // 0 means one full batch per epoch
  std::uint64_t seed = 1;
  bool train_embeddings = true;
};

struct PretrainEpoch {
  std::size_t epoch = 0;
  double loss = 0.0;      // mean cross-entropy at the end of the epoch
  double accuracy = 0.0;  // on the pseudo-labeled documents
};

struct PretrainReport {
  std::size_t pseudo_labeled = 0;
  std::vector<PretrainEpoch> epochs;
};

/// Mean cross-entropy of q(C|x) against the pseudo labels, over pseudo-labeled
/// documents only.
double pseudo_label_loss(const Corpus& corpus, const ModelParams& params);
double pseudo_label_accuracy(const Corpus& corpus, const ModelParams& params);

/// Plain minibatch SGD on the pseudo-label cross-entropy. Gold labels are not
/// available here by construction.
PretrainReport pretrain_classifier(const Corpus& corpus, ModelParams& params,
                                   const PretrainConfig& config);

}  // namespace vwspr
