#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vwspr/corpus.hpp"
#include "vwspr/pretrain.hpp"
#include "vwspr/training.hpp"

namespace vwspr {

/// F1 of `positive` treated as the target class; 0 when precision + recall = 0.
double f1(std::span<const ClassId> predictions, std::span<const ClassId> gold,
          ClassId positive);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

std::vector<ClassMetrics> per_class_metrics(std::span<const ClassId> predictions,
                                            std::span<const ClassId> gold,
                                            std::size_t num_classes);
double macro_f1(std::span<const ClassId> predictions, std::span<const ClassId> gold,
                std::size_t num_classes);

double mean(std::span<const double> values);
/// Population standard deviation (divides by n).
double population_std(std::span<const double> values);

struct Lexicon {
  std::set<std::string> positive;
  std::set<std::string> negative;
  std::set<std::string> negation_words = {"no", "not"};
  std::vector<std::string> dropped;  // listed as both polarities

  /// Merges the lists, dropping (and recording) words found in both.
  static Lexicon from_lists(std::span<const std::string> positive,
                            std::span<const std::string> negative);
  /// One word per line per file; blank lines and lines starting with ';' are
  /// ignored.
  static Lexicon load(const std::filesystem::path& positive,
                      const std::filesystem::path& negative);
};

inline constexpr std::size_t kNegationWindow = 3;

struct LexiconVote {
  ClassId label = 0;
  bool tie = false;
  int positive_votes = 0;
  int negative_votes = 0;
};

/// Majority vote of the document's extracted opinion words. A vote flips when
/// a negation word appears within the kNegationWindow tokens before that
/// occurrence of the word. Ties (including no votes) are broken uniformly at
/// random.
LexiconVote lexicon_classify(const Document& document, const Lexicon& lexicon,
                             std::mt19937_64& rng, ClassId positive = 0,
                             ClassId negative = 1);

enum class MethodKind { kLexicon, kKeywordPretrain, kVws, kVwsPr };
std::string to_string(MethodKind method);

struct RunSpec {
  MethodKind method = MethodKind::kVwsPr;
  TrainConfig config;
  KeywordSpec keywords = KeywordSpec::yelp();
  std::optional<Lexicon> lexicon;  // required for kLexicon
};

struct EvalResult {
  std::string method;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_f1;
  std::vector<double> per_seed_macro_f1;
  double mean = 0.0;
  double std = 0.0;
  double macro_mean = 0.0;
  std::vector<ClassMetrics> per_class;  // averaged over successful seeds
  std::size_t tie_count = 0;            // summed over seeds
  std::vector<std::string> failures;    // "seed N: message"
};

/// Predicted labels for one run of a method; exposed for harnesses that need
/// the raw predictions.
std::vector<ClassId> run_method(const RunSpec& spec, const Corpus& corpus,
                                std::uint64_t seed, std::size_t* ties = nullptr);

/// Runs the method once per seed on `corpus` and scores it against `gold`
/// (documents without a gold label are ignored). Failing seeds are recorded
/// rather than aborting the evaluation. The positive class is index 0.
EvalResult evaluate_runs(const RunSpec& spec, const Corpus& corpus,
                         const GoldLabels& gold, std::span<const std::uint64_t> seeds);

std::string eval_report_json(const EvalResult& result, const std::string& dataset);
/// Mean/std table with one row per method.
void print_table(std::ostream& out, std::span<const EvalResult> results,
                 const std::string& dataset);

}  // namespace vwspr
