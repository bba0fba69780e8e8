#include "vwspr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

namespace vwspr {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      current.push_back(lower(c));
    } else if (c == '\'' && !current.empty() && i + 1 < text.size() &&
               is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      current.push_back('\'');
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

int Vocab::add(std::string_view token) {
  auto [it, inserted] =
      index_.try_emplace(std::string(token), static_cast<int>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

int Vocab::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

const std::string& Vocab::token(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size()) {
    throw Error("vocabulary index out of range: " + std::to_string(index));
  }
  return tokens_[static_cast<std::size_t>(index)];
}

std::uint64_t Vocab::fingerprint() const {
  std::uint64_t hash = fnv1a("vocab");
  for (const auto& t : tokens_) {
    hash = fnv1a(t, hash);
    hash = fnv1a(std::string_view("\0", 1), hash);
  }
  return hash;
}

std::vector<int> Document::opinion_set() const {
  std::vector<int> set = opinion_ids;
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

bool GoldLabels::complete() const {
  return std::all_of(labels_.begin(), labels_.end(),
                     [](const auto& l) { return l.has_value(); });
}

std::vector<std::string> default_class_labels() {
  return {"positive", "negative"};
}

Corpus::Corpus(std::vector<std::string> class_labels)
    : class_labels_(std::move(class_labels)) {
  if (class_labels_.size() < 2) {
    throw Error("a corpus needs at least two class labels");
  }
  std::vector<std::string> sorted = class_labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error("class labels must be distinct");
  }
}

Corpus Corpus::with_frozen_vocab(const Corpus& reference) {
  Corpus corpus(reference.class_labels_);
  corpus.token_vocab_ = reference.token_vocab_;
  corpus.opinion_vocab_ = reference.opinion_vocab_;
  corpus.frozen_ = true;
  return corpus;
}

std::size_t Corpus::add_document(std::string id, std::string text) {
  if (id_index_.count(id) != 0) throw Error("duplicate document id: " + id);
  Document doc;
  doc.tokens = tokenize(text);
  if (!text.empty() && doc.tokens.empty() &&
      std::any_of(text.begin(), text.end(),
                  [](char c) { return !std::isspace(static_cast<unsigned char>(c)); })) {
    throw Error("document " + id + " has text but no tokens");
  }
  doc.token_ids.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) {
    doc.token_ids.push_back(frozen_ ? token_vocab_.index_of(t)
                                    : token_vocab_.add(t));
  }
  doc.id = std::move(id);
  doc.text = std::move(text);
  const std::size_t index = documents_.size();
  id_index_.emplace(doc.id, index);
  documents_.push_back(std::move(doc));
  return index;
}

void Corpus::set_opinion_words(std::size_t doc, std::span<const std::string> words,
                               bool fallback) {
  Document& d = documents_.at(doc);
  d.opinion_words.clear();
  d.opinion_ids.clear();
  for (const auto& w : words) {
    const int id = frozen_ ? opinion_vocab_.index_of(w) : opinion_vocab_.add(w);
    if (id == Vocab::kUnknown) continue;
    d.opinion_words.push_back(w);
    d.opinion_ids.push_back(id);
  }
  d.opinion_fallback = fallback;
  extraction_run_ = true;
}

void Corpus::set_pseudo_label(std::size_t doc, std::optional<ClassId> label) {
  if (label && *label >= class_labels_.size()) {
    throw Error("pseudo label outside the configured classes");
  }
  documents_.at(doc).pseudo_label = label;
}

Corpus Corpus::subset(std::span<const std::size_t> indices) const {
  Corpus out(class_labels_);
  out.token_vocab_ = token_vocab_;
  out.opinion_vocab_ = opinion_vocab_;
  out.extraction_run_ = extraction_run_;
  out.frozen_ = frozen_;
  for (std::size_t i : indices) {
    const Document& d = documents_.at(i);
    if (out.id_index_.count(d.id) != 0) {
      throw Error("subset repeats document " + d.id);
    }
    out.id_index_.emplace(d.id, out.documents_.size());
    out.documents_.push_back(d);
  }
  return out;
}

std::optional<std::size_t> Corpus::find(const std::string& id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ClassId> Corpus::class_index(std::string_view label) const {
  for (std::size_t i = 0; i < class_labels_.size(); ++i) {
    if (class_labels_[i] == label) return i;
  }
  return std::nullopt;
}

std::pair<LoadedCorpus, LoadedCorpus> split_train_dev(const LoadedCorpus& all,
                                                      double dev_fraction,
                                                      std::uint64_t seed) {
  if (dev_fraction < 0.0 || dev_fraction >= 1.0) {
    throw Error("dev fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(all.corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_dev = static_cast<std::size_t>(dev_fraction * order.size());
  std::vector<std::size_t> dev(order.begin(), order.begin() + n_dev);
  std::vector<std::size_t> train(order.begin() + n_dev, order.end());
  std::sort(dev.begin(), dev.end());
  std::sort(train.begin(), train.end());

  auto take = [&](const std::vector<std::size_t>& idx) {
    LoadedCorpus part{all.corpus.subset(idx), GoldLabels{}};
    for (std::size_t i : idx) {
      part.gold.push_back(i < all.gold.size() ? all.gold[i] : std::nullopt);
    }
    return part;
  };
  return {take(train), take(dev)};
}

LoadedCorpus read_corpus(std::istream& in, const CorpusOptions& options) {
  LoadedCorpus out{options.vocab_from ? Corpus::with_frozen_vocab(*options.vocab_from)
                                      : Corpus(options.class_labels),
                   GoldLabels{}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "corpus line " + std::to_string(line_no) + ": ";
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(where + "malformed JSON (" + e.what() + ")");
    }
    if (!record.is_object()) throw Error(where + "record is not an object");
    auto id = record.find("id");
    auto text = record.find("text");
    if (id == record.end() || !id->is_string()) {
      throw Error(where + "missing string field \"id\"");
    }
    if (text == record.end() || !text->is_string()) {
      throw Error(where + "missing string field \"text\"");
    }
    std::optional<ClassId> label;
    if (auto l = record.find("label"); l != record.end() && !l->is_null()) {
      if (!l->is_string()) throw Error(where + "\"label\" must be a string");
      label = out.corpus.class_index(l->get<std::string>());
      if (!label) {
        throw Error(where + "unknown label \"" + l->get<std::string>() + "\"");
      }
    }
    try {
      out.corpus.add_document(id->get<std::string>(), text->get<std::string>());
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
    out.gold.push_back(label);
  }
  return out;
}

LoadedCorpus load_corpus(const std::filesystem::path& path,
                         const CorpusOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  return read_corpus(in, options);
}

void write_corpus(std::ostream& out, const Corpus& corpus, const GoldLabels* gold) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    nlohmann::json record{{"id", corpus[i].id}, {"text", corpus[i].text}};
    if (gold && i < gold->size() && (*gold)[i]) {
      record["label"] = corpus.class_labels()[*(*gold)[i]];
    }
    out << record.dump() << '\n';
  }
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.num_docs = corpus.size();
  std::size_t tokens = 0;
  for (const auto& d : corpus.documents()) {
    tokens += d.tokens.size();
    if (!d.opinion_ids.empty()) ++stats.docs_with_opinions;
    if (d.pseudo_label) ++stats.pseudo_labeled;
  }
  stats.avg_doc_length =
      stats.num_docs == 0 ? 0.0 : static_cast<double>(tokens) / stats.num_docs;
  stats.extraction_run = corpus.extraction_run();
  stats.opinion_vocab_size =
      stats.extraction_run ? corpus.opinion_vocab().size() : 0;
  return stats;
}

std::string stats_json(const CorpusStats& stats) {
  nlohmann::json j{{"num_docs", stats.num_docs},
                   {"avg_doc_length", stats.avg_doc_length},
                   {"opinion_vocab_size", stats.opinion_vocab_size},
                   {"extraction_run", stats.extraction_run},
                   {"docs_with_opinions", stats.docs_with_opinions},
                   {"pseudo_labeled", stats.pseudo_labeled}};
  return j.dump();
}

}  // namespace vwspr
