#include "vwspr/extraction.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace vwspr {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool head_allowed(const ExtractionRule& rule, const ParsedSentence& parse,
                  std::size_t head) {
  switch (rule.head_constraint) {
    case HeadConstraint::kNone:
      return true;
    case HeadConstraint::kAdjective:
      return parse.pos[head] == PosTag::kAdj;
    case HeadConstraint::kWordList: {
      const std::string word = lowercase(parse.tokens[head]);
      return std::find(rule.head_words.begin(), rule.head_words.end(), word) !=
             rule.head_words.end();
    }
  }
  return false;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

int parse_int(const std::string& field, const std::string& where) {
  int value = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(where + "expected an integer, got \"" + field + "\"");
  }
  return value;
}

}  // namespace

PosTag coarse_pos(std::string_view tag) {
  const std::string t = lowercase(tag);
  if (t == "adj" || t.rfind("jj", 0) == 0) return PosTag::kAdj;
  if (t == "noun" || t == "propn" || t.rfind("nn", 0) == 0) return PosTag::kNoun;
  if (t == "verb" || t.rfind("vb", 0) == 0) return PosTag::kVerb;
  return PosTag::kOther;
}

void ParsedSentence::validate() const {
  const std::size_t n = tokens.size();
  if (pos.size() != n || heads.size() != n || relations.size() != n) {
    throw Error("parsed sentence arrays differ in length");
  }
  for (int h : heads) {
    if (h != kRoot && (h < 0 || static_cast<std::size_t>(h) >= n)) {
      throw Error("head index out of range: " + std::to_string(h));
    }
  }
}

bool relation_matches(std::string_view label, DependencyRelation relation) {
  const std::string l = lowercase(label);
  switch (relation) {
    case DependencyRelation::kAdjectivalModifier:
      return l == "amod";
    case DependencyRelation::kNominalSubject:
      return l == "nsubj";
    case DependencyRelation::kDirectObject:
      return l == "dobj" || l == "obj";
    case DependencyRelation::kOpenClausalComplement:
      return l == "xcomp";
  }
  return false;
}

std::vector<ExtractionRule> default_rules() {
  return {
      {1, DependencyRelation::kAdjectivalModifier, HeadConstraint::kNone, {},
       false, ExtractedSide::kDependent},
      {2, DependencyRelation::kNominalSubject, HeadConstraint::kAdjective, {},
       true, ExtractedSide::kHead},
      {3, DependencyRelation::kDirectObject, HeadConstraint::kWordList,
       {"like", "dislike", "love", "hate"}, false, ExtractedSide::kHead},
      {4, DependencyRelation::kOpenClausalComplement, HeadConstraint::kWordList,
       {"seem", "look", "feel", "smell", "taste"}, false,
       ExtractedSide::kDependent},
  };
}

std::vector<std::size_t> extract_opinion_positions(
    const ParsedSentence& parse, std::span<const ExtractionRule> rules) {
  parse.validate();
  std::vector<std::size_t> positions;
  for (std::size_t dep = 0; dep < parse.size(); ++dep) {
    if (parse.heads[dep] == ParsedSentence::kRoot) continue;
    const auto head = static_cast<std::size_t>(parse.heads[dep]);
    for (const auto& rule : rules) {
      if (!relation_matches(parse.relations[dep], rule.relation)) continue;
      if (!head_allowed(rule, parse, head)) continue;
      if (rule.tail_must_be_noun && parse.pos[dep] != PosTag::kNoun) continue;
      positions.push_back(rule.extracted == ExtractedSide::kHead ? head : dep);
    }
  }
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  return positions;
}

std::set<std::string> extract_opinion_words(const ParsedSentence& parse,
                                            std::span<const ExtractionRule> rules) {
  std::set<std::string> words;
  for (std::size_t p : extract_opinion_positions(parse, rules)) {
    words.insert(lowercase(parse.tokens[p]));
  }
  return words;
}

ParseMap read_parses(std::istream& in) {
  ParseMap parses;
  std::string line;
  std::size_t line_no = 0;
  std::string doc_id;
  std::size_t block_start = 0;
  ParsedSentence sentence;
  bool in_block = false;

  auto finish = [&] {
    if (!in_block) return;
    if (sentence.tokens.empty()) {
      throw Error("parse line " + std::to_string(block_start) +
                  ": sentence block for " + doc_id + " has no rows");
    }
    for (int h : sentence.heads) {
      if (h != ParsedSentence::kRoot &&
          static_cast<std::size_t>(h) >= sentence.size()) {
        throw Error("parse line " + std::to_string(block_start) +
                    ": head index beyond sentence length in " + doc_id);
      }
    }
    parses[doc_id].push_back(std::move(sentence));
    sentence = ParsedSentence{};
    in_block = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      finish();
      continue;
    }
    if (!in_block) {
      doc_id = line;
      block_start = line_no;
      in_block = true;
      continue;
    }
    const std::string where = "parse line " + std::to_string(line_no) + ": ";
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw Error(where + "expected 5 tab-separated columns, got " +
                  std::to_string(fields.size()));
    }
    const int index = parse_int(fields[0], where);
    if (index != static_cast<int>(sentence.size()) + 1) {
      throw Error(where + "token index " + fields[0] + " out of sequence");
    }
    const int head = parse_int(fields[3], where);
    if (head < 0) throw Error(where + "negative head index");
    sentence.tokens.push_back(fields[1]);
    sentence.pos.push_back(coarse_pos(fields[2]));
    sentence.heads.push_back(head == 0 ? ParsedSentence::kRoot : head - 1);
    sentence.relations.push_back(fields[4]);
  }
  finish();
  return parses;
}

ParseMap load_parses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open parse file " + path.string());
  return read_parses(in);
}

const std::set<std::string>& builtin_adjectives() {
  static const std::set<std::string> words = {
      "amazing",    "annoying",  "awesome",   "awful",      "bad",
      "beautiful",  "best",      "big",       "bland",      "boring",
      "brilliant",  "broken",    "careless",  "cheap",      "clean",
      "cold",       "comfortable", "cool",    "crappy",     "cute",
      "decent",     "delicious", "delightful", "dirty",     "disappointing",
      "disgusting", "dreadful",  "dull",      "easy",       "excellent",
      "expensive",  "fabulous",  "fantastic", "fast",       "fine",
      "fresh",      "friendly",  "funny",     "good",       "gorgeous",
      "great",      "gross",     "happy",     "hard",       "helpful",
      "horrible",   "hot",       "impressive", "incredible", "lame",
      "large",      "lazy",      "lousy",     "lovely",     "mediocre",
      "messy",      "nasty",     "nice",      "noisy",      "outstanding",
      "overpriced", "perfect",   "pleasant",  "poor",       "pretty",
      "quick",      "quiet",     "rude",      "sad",        "slow",
      "small",      "smart",     "soggy",     "solid",      "sour",
      "stale",      "stupid",    "superb",    "sweet",      "tasty",
      "terrible",   "terrific",  "tiny",      "ugly",       "unfriendly",
      "unhappy",    "useful",    "useless",   "warm",       "weak",
      "weird",      "wonderful", "worse",     "worst",      "wrong",
  };
  return words;
}

std::set<std::string> fallback_extract(const Document& document,
                                       const std::set<std::string>& adjectives) {
  std::set<std::string> found;
  for (const auto& t : document.tokens) {
    if (adjectives.count(t) != 0) found.insert(t);
  }
  return found;
}

ExtractionSummary extract_corpus(Corpus& corpus, const ParseMap& parses,
                                 const std::set<std::string>& adjectives,
                                 std::span<const ExtractionRule> rules) {
  ExtractionSummary summary;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Document& doc = corpus[i];
    std::vector<std::string> words;
    bool fallback = false;
    if (auto it = parses.find(doc.id); it != parses.end()) {
      for (const auto& sentence : it->second) {
        for (std::size_t p : extract_opinion_positions(sentence, rules)) {
          words.push_back(lowercase(sentence.tokens[p]));
        }
      }
      ++summary.parsed;
    } else {
      for (const auto& t : doc.tokens) {
        if (adjectives.count(t) != 0) words.push_back(t);
      }
      fallback = true;
      ++summary.fallback;
    }
    corpus.set_opinion_words(i, words, fallback);
    if (corpus[i].opinion_ids.empty()) ++summary.without_opinions;
  }
  return summary;
}

void write_extraction(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.documents()) {
    nlohmann::json record{{"id", doc.id},
                          {"opinion_words", doc.opinion_words},
                          {"source", doc.opinion_fallback ? "fallback" : "parse"}};
    out << record.dump() << '\n';
  }
}

void read_extraction(std::istream& in, Corpus& corpus) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "extraction line " + std::to_string(line_no) + ": ";
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
      const auto id = record.at("id").get<std::string>();
      const auto words = record.at("opinion_words").get<std::vector<std::string>>();
      const bool fallback = record.value("source", "parse") == "fallback";
      const auto doc = corpus.find(id);
      if (!doc) throw Error("unknown document id " + id);
      corpus.set_opinion_words(*doc, words, fallback);
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + e.what());
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
  }
}

}  // namespace vwspr
