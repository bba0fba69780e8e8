#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vwspr/common.hpp"

namespace vwspr {

/// Lowercases ASCII letters and splits on runs of characters that are not
/// alphanumeric. An apostrophe survives only between two word characters, so
/// "don't" stays whole while "'quoted'" loses its quotes. Bytes >= 0x80 count
/// as word characters, which keeps UTF-8 sequences intact.
std::vector<std::string> tokenize(std::string_view text);

/// Dense token -> index map with insertion-ordered indices.
class Vocab {
 public:
  static constexpr int kUnknown = -1;

  /// Returns the existing index or appends the token.
  int add(std::string_view token);
  int index_of(std::string_view token) const;
  const std::string& token(int index) const;
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Order-sensitive hash of the token list.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
  // Parallel to tokens. Vocab::kUnknown only occurs in corpora built over a
  // frozen vocabulary (e.g. a dev split).
  std::vector<int> token_ids;
  std::optional<ClassId> pseudo_label;
  // Multiset of extracted opinion words, in extraction order, and their
  // opinion-vocabulary indices.
  std::vector<std::string> opinion_words;
  std::vector<int> opinion_ids;
  bool opinion_fallback = false;

  /// Sorted distinct opinion indices, i.e. the support set of opinion_ids.
  std::vector<int> opinion_set() const;
};

/// Gold labels live outside the Corpus so that code which only receives a
/// Corpus (pretraining, training) has no way to read them.
class GoldLabels {
 public:
  GoldLabels() = default;
  explicit GoldLabels(std::vector<std::optional<ClassId>> labels)
      : labels_(std::move(labels)) {}

  const std::optional<ClassId>& operator[](std::size_t doc) const {
    return labels_.at(doc);
  }
  std::size_t size() const { return labels_.size(); }
  bool complete() const;
  void push_back(std::optional<ClassId> label) { labels_.push_back(label); }

 private:
  std::vector<std::optional<ClassId>> labels_;
};

std::vector<std::string> default_class_labels();

class Corpus {
 public:
  explicit Corpus(std::vector<std::string> class_labels = default_class_labels());

  /// A corpus whose token and opinion vocabularies never grow; out-of-vocabulary
  /// tokens map to Vocab::kUnknown and unknown opinion words are dropped.
  static Corpus with_frozen_vocab(const Corpus& reference);

  /// Tokenizes and appends a document. Throws on duplicate id or when a
  /// non-empty text produces no tokens.
  std::size_t add_document(std::string id, std::string text);

  /// Replaces the opinion multiset of one document, growing the opinion
  /// vocabulary unless frozen.
  void set_opinion_words(std::size_t doc, std::span<const std::string> words,
                         bool fallback = false);
  void set_pseudo_label(std::size_t doc, std::optional<ClassId> label);

  /// Copies the listed documents (in the given order) keeping both
  /// vocabularies and the extraction state unchanged.
  Corpus subset(std::span<const std::size_t> indices) const;

  const std::vector<Document>& documents() const { return documents_; }
  const Document& operator[](std::size_t i) const { return documents_.at(i); }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }
  std::optional<std::size_t> find(const std::string& id) const;

  const std::vector<std::string>& class_labels() const { return class_labels_; }
  std::size_t num_classes() const { return class_labels_.size(); }
  std::optional<ClassId> class_index(std::string_view label) const;

  const Vocab& token_vocab() const { return token_vocab_; }
  const Vocab& opinion_vocab() const { return opinion_vocab_; }
  bool extraction_run() const { return extraction_run_; }
  bool frozen() const { return frozen_; }

 private:
  std::vector<Document> documents_;
  std::vector<std::string> class_labels_;
  Vocab token_vocab_;
  Vocab opinion_vocab_;
  std::unordered_map<std::string, std::size_t> id_index_;
  bool extraction_run_ = false;
  bool frozen_ = false;
};

struct LoadedCorpus {
  Corpus corpus;
  GoldLabels gold;
};

/// Deterministic shuffled split; both halves keep the full vocabularies.
std::pair<LoadedCorpus, LoadedCorpus> split_train_dev(const LoadedCorpus& all,
                                                      double dev_fraction,
                                                      std::uint64_t seed);

struct CorpusOptions {
  std::vector<std::string> class_labels = default_class_labels();
  // When set, the new corpus reuses (and never grows) this corpus' vocabularies.
  const Corpus* vocab_from = nullptr;
};

/// Reads line-delimited JSON records {"id", "text", "label"?}. Blank lines
/// are skipped. Errors name the 1-based line number.
LoadedCorpus load_corpus(const std::filesystem::path& path,
                         const CorpusOptions& options = {});
LoadedCorpus read_corpus(std::istream& in, const CorpusOptions& options = {});

/// Writes the inverse of read_corpus, including gold labels when present.
void write_corpus(std::ostream& out, const Corpus& corpus,
                  const GoldLabels* gold = nullptr);

struct CorpusStats {
  std::size_t num_docs = 0;
  double avg_doc_length = 0.0;
  std::size_t opinion_vocab_size = 0;
  bool extraction_run = false;
  std::size_t docs_with_opinions = 0;
  std::size_t pseudo_labeled = 0;
};

CorpusStats corpus_stats(const Corpus& corpus);
std::string stats_json(const CorpusStats& stats);

}  // namespace vwspr
