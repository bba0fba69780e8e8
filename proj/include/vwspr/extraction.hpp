#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vwspr/corpus.hpp"

namespace vwspr {

enum class PosTag { kAdj, kNoun, kVerb, kOther };

/// Maps Universal Dependencies or Penn Treebank tags onto the four coarse
/// classes the rules need. Anything unrecognised is kOther.
PosTag coarse_pos(std::string_view tag);

struct ParsedSentence {
  static constexpr int kRoot = -1;

  std::vector<std::string> tokens;
  std::vector<PosTag> pos;
  std::vector<int> heads;  // 0-based, kRoot for the root
  std::vector<std::string> relations;

  std::size_t size() const { return tokens.size(); }
  /// Throws Error when the parallel arrays disagree or a head is out of range.
  void validate() const;
};

enum class DependencyRelation {
  kAdjectivalModifier,     // amod
  kNominalSubject,         // nsubj
  kDirectObject,           // dobj / obj
  kOpenClausalComplement,  // xcomp
};

/// True when a relation label from a parse denotes the given relation.
bool relation_matches(std::string_view label, DependencyRelation relation);

enum class HeadConstraint { kNone, kAdjective, kWordList };
enum class ExtractedSide { kDependent, kHead };

struct ExtractionRule {
  int rule_id = 0;
  DependencyRelation relation = DependencyRelation::kAdjectivalModifier;
  HeadConstraint head_constraint = HeadConstraint::kNone;
  std::vector<std::string> head_words;  // for kWordList, lowercase
  bool tail_must_be_noun = false;
  ExtractedSide extracted = ExtractedSide::kDependent;
};

/// The four dependency rules:
///   1. amod, no constraints, extracts the modifier
///   2. nsubj, head ADJ and tail NOUN, extracts the head adjective
///   3. dobj, head in {like, dislike, love, hate}, extracts the head verb
///   4. xcomp, head in {seem, look, feel, smell, taste}, extracts the complement
std::vector<ExtractionRule> default_rules();

/// Sorted distinct token positions picked out by any of the rules.
std::vector<std::size_t> extract_opinion_positions(
    const ParsedSentence& parse, std::span<const ExtractionRule> rules);

std::set<std::string> extract_opinion_words(const ParsedSentence& parse,
                                            std::span<const ExtractionRule> rules);

using ParseMap = std::map<std::string, std::vector<ParsedSentence>>;

/// Blank-line separated blocks; the first line of a block is the document id
/// and each following row is "index<TAB>token<TAB>pos<TAB>head<TAB>relation"
/// with 1-based indices and head 0 for the root (CoNLL convention).
ParseMap read_parses(std::istream& in);
ParseMap load_parses(const std::filesystem::path& path);

const std::set<std::string>& builtin_adjectives();

/// Word-list substitute for a dependency parse: the document tokens that occur
/// in the adjective list.
std::set<std::string> fallback_extract(const Document& document,
                                       const std::set<std::string>& adjectives);

struct ExtractionSummary {
  std::size_t parsed = 0;
  std::size_t fallback = 0;
  std::size_t without_opinions = 0;
};

/// Fills every document's opinion multiset. Documents with a parse use the
/// rules (one entry per extracted token position); the rest fall back to the
/// adjective list (one entry per matching token occurrence) and are flagged.
ExtractionSummary extract_corpus(Corpus& corpus, const ParseMap& parses,
                                 const std::set<std::string>& adjectives,
                                 std::span<const ExtractionRule> rules);

/// One JSON record per document: {"id", "opinion_words", "source"}.
void write_extraction(std::ostream& out, const Corpus& corpus);

/// Reads write_extraction output back onto a corpus, matching by id.
void read_extraction(std::istream& in, Corpus& corpus);

}  // namespace vwspr
