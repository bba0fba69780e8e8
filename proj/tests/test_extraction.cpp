#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "vwspr/extraction.hpp"

using namespace vwspr;

namespace {

// Hand-written parses of the four rule examples, in the parse-file format.
const char* kGoldenParses =
    "ex1\n"
    "1\tthey\tPRON\t2\tnsubj\n"
    "2\thave\tVERB\t0\troot\n"
    "3\tdelicious\tADJ\t4\tamod\n"
    "4\tfood\tNOUN\t2\tobj\n"
    "\n"
    "ex2\n"
    "1\tthe\tDET\t2\tdet\n"
    "2\troom\tNOUN\t4\tnsubj\n"
    "3\tis\tAUX\t4\tcop\n"
    "4\tbig\tADJ\t0\troot\n"
    "\n"
    "ex3\n"
    "1\ti\tPRON\t2\tnsubj\n"
    "2\tlike\tVERB\t0\troot\n"
    "3\tit\tPRON\t2\tdobj\n"
    "\n"
    "ex4\n"
    "1\ti\tPRON\t2\tnsubj\n"
    "2\tfeel\tVERB\t0\troot\n"
    "3\tcomfortable\tADJ\t2\txcomp\n";

ParseMap golden() {
  std::istringstream in(kGoldenParses);
  return read_parses(in);
}

std::set<std::string> words_of(const std::string& id) {
  const auto parses = golden();
  const auto rules = default_rules();
  return extract_opinion_words(parses.at(id).at(0), rules);
}

std::string error_of(const std::string& text) {
  try {
    std::istringstream in(text);
    read_parses(in);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Extraction, RuleExamplesYieldTheirExtractedWord) {
  EXPECT_EQ(words_of("ex1"), (std::set<std::string>{"delicious"}));
  EXPECT_EQ(words_of("ex2"), (std::set<std::string>{"big"}));
  EXPECT_EQ(words_of("ex3"), (std::set<std::string>{"like"}));
  EXPECT_EQ(words_of("ex4"), (std::set<std::string>{"comfortable"}));
}

TEST(Extraction, RuleOrderDoesNotMatter) {
  const auto parses = golden();
  auto rules = default_rules();
  std::sort(rules.begin(), rules.end(),
            [](const auto& a, const auto& b) { return a.rule_id < b.rule_id; });
  do {
    for (const auto& [id, sentences] : parses) {
      EXPECT_EQ(extract_opinion_words(sentences[0], rules), words_of(id));
    }
  } while (std::next_permutation(rules.begin(), rules.end(), [](const auto& a, const auto& b) {
    return a.rule_id < b.rule_id;
  }));
}

TEST(Extraction, ExtractedWordsAreSentenceTokens) {
  for (const auto& [id, sentences] : golden()) {
    for (const auto& s : sentences) {
      for (const auto& w : extract_opinion_words(s, default_rules())) {
        EXPECT_NE(std::find(s.tokens.begin(), s.tokens.end(), w), s.tokens.end());
      }
    }
  }
}

TEST(Extraction, ConstraintsBlockNonMatchingHeads) {
  // nsubj under a verb head: rule 2 needs an adjective head
  ParsedSentence s;
  s.tokens = {"food", "arrived"};
  s.pos = {PosTag::kNoun, PosTag::kVerb};
  s.heads = {1, ParsedSentence::kRoot};
  s.relations = {"nsubj", "root"};
  EXPECT_TRUE(extract_opinion_words(s, default_rules()).empty());

  // dobj under a head outside the word list; no lemmatization
  s.tokens = {"i", "loved", "it"};
  s.pos = {PosTag::kOther, PosTag::kVerb, PosTag::kOther};
  s.heads = {1, ParsedSentence::kRoot, 1};
  s.relations = {"nsubj", "root", "dobj"};
  EXPECT_TRUE(extract_opinion_words(s, default_rules()).empty());

  // head-word matching is case-insensitive and output is lowercased
  s.tokens = {"I", "LOVE", "it"};
  EXPECT_EQ(extract_opinion_words(s, default_rules()), (std::set<std::string>{"love"}));
}

TEST(Extraction, RelationLabelsAndTags) {
  EXPECT_TRUE(relation_matches("amod", DependencyRelation::kAdjectivalModifier));
  EXPECT_TRUE(relation_matches("DOBJ", DependencyRelation::kDirectObject));
  EXPECT_TRUE(relation_matches("obj", DependencyRelation::kDirectObject));
  EXPECT_FALSE(relation_matches("nsubjpass", DependencyRelation::kNominalSubject));
  EXPECT_EQ(coarse_pos("JJ"), PosTag::kAdj);
  EXPECT_EQ(coarse_pos("NNS"), PosTag::kNoun);
  EXPECT_EQ(coarse_pos("VBD"), PosTag::kVerb);
  EXPECT_EQ(coarse_pos("DET"), PosTag::kOther);
}

TEST(Parses, ReadsBlocksWithZeroBasedHeads) {
  const auto parses = golden();
  ASSERT_EQ(parses.size(), 4u);
  const auto& s = parses.at("ex2").at(0);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(s.heads, (std::vector<int>{1, 3, 3, ParsedSentence::kRoot}));
  EXPECT_EQ(s.pos[3], PosTag::kAdj);
}

TEST(Parses, SeveralSentencesPerDocument) {
  std::istringstream in("d\n1\tgood\tADJ\t0\troot\n\nd\n1\tbad\tADJ\t0\troot\n");
  const auto parses = read_parses(in);
  EXPECT_EQ(parses.at("d").size(), 2u);
}

TEST(Parses, EmptyFileAndUnknownRelation) {
  std::istringstream empty("");
  EXPECT_TRUE(read_parses(empty).empty());
  std::istringstream odd("d\n1\tgood\tADJ\t2\tweird\n2\tday\tNOUN\t0\troot\n");
  const auto parses = read_parses(odd);
  EXPECT_EQ(parses.at("d")[0].relations[0], "weird");
  EXPECT_TRUE(extract_opinion_words(parses.at("d")[0], default_rules()).empty());
}

TEST(Parses, MalformedRowsNameTheLine) {
  EXPECT_NE(error_of("d\n1\tgood\tADJ\t0\n").find("parse line 2"), std::string::npos);
  EXPECT_NE(error_of("d\n1\ta\tX\t0\troot\n3\tb\tX\t1\tdep\n").find("line 3"),
            std::string::npos);
  EXPECT_NE(error_of("d\n1\ta\tX\tx\troot\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("d\n1\ta\tX\t5\troot\n").find("beyond"), std::string::npos);
  EXPECT_NE(error_of("d\n1\ta\tX\t-1\troot\n").find("negative"), std::string::npos);
}

TEST(Fallback, ListIntersection) {
  Document d;
  d.tokens = {"the", "food", "was", "terrific"};
  EXPECT_EQ(fallback_extract(d, {"terrific"}), (std::set<std::string>{"terrific"}));
  EXPECT_TRUE(fallback_extract(d, {"big"}).empty());
  d.tokens = {"big", "small"};
  EXPECT_EQ(fallback_extract(d, {"big", "small"}), (std::set<std::string>{"big", "small"}));
  EXPECT_TRUE(builtin_adjectives().count("terrific"));
}

TEST(ExtractCorpus, ParsesFallbackAndRoundTrip) {
  Corpus c;
  c.add_document("ex1", "they have delicious food");
  c.add_document("plain", "nice nice place");
  c.add_document("none", "we went there");
  const auto summary = extract_corpus(c, golden(), builtin_adjectives(), default_rules());
  EXPECT_EQ(summary.parsed, 1u);
  EXPECT_EQ(summary.fallback, 2u);
  EXPECT_EQ(summary.without_opinions, 1u);
  EXPECT_EQ(c[0].opinion_words, (std::vector<std::string>{"delicious"}));
  EXPECT_FALSE(c[0].opinion_fallback);
  // fallback keeps one entry per occurrence
  EXPECT_EQ(c[1].opinion_words, (std::vector<std::string>{"nice", "nice"}));
  EXPECT_TRUE(c[1].opinion_fallback);

  std::ostringstream out;
  write_extraction(out, c);
  Corpus d;
  d.add_document("ex1", "they have delicious food");
  d.add_document("plain", "nice nice place");
  d.add_document("none", "we went there");
  std::istringstream in(out.str());
  read_extraction(in, d);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(d[i].opinion_words, c[i].opinion_words);
    EXPECT_EQ(d[i].opinion_fallback, c[i].opinion_fallback);
  }
  EXPECT_EQ(d.opinion_vocab().tokens(), c.opinion_vocab().tokens());
}

TEST(ExtractCorpus, UnknownIdInExtractionFile) {
  Corpus c;
  c.add_document("a", "good");
  std::istringstream in("{\"id\":\"zzz\",\"opinion_words\":[\"good\"]}\n");
  EXPECT_THROW(read_extraction(in, c), Error);
}
