#include "vwspr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

namespace vwspr {

namespace {

void check_lengths(std::span<const ClassId> predictions, std::span<const ClassId> gold) {
  if (predictions.size() != gold.size()) {
    throw Error("prediction and gold lists differ in length (" +
                std::to_string(predictions.size()) + " vs " + std::to_string(gold.size()) +
                ")");
  }
}

ClassMetrics metrics_for(std::span<const ClassId> predictions, std::span<const ClassId> gold,
                         ClassId positive) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predictions[i] == positive;
    const bool g = gold[i] == positive;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  ClassMetrics m;
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double denom = m.precision + m.recall;
  m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
  return m;
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == ';') continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::string w = line.substr(b, e - b + 1);
    for (char& c : w) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    words.push_back(std::move(w));
  }
  return words;
}

}  // namespace

double f1(std::span<const ClassId> predictions, std::span<const ClassId> gold,
          ClassId positive) {
  check_lengths(predictions, gold);
  return metrics_for(predictions, gold, positive).f1;
}

std::vector<ClassMetrics> per_class_metrics(std::span<const ClassId> predictions,
                                            std::span<const ClassId> gold,
                                            std::size_t num_classes) {
  check_lengths(predictions, gold);
  std::vector<ClassMetrics> out;
  for (ClassId c = 0; c < num_classes; ++c) out.push_back(metrics_for(predictions, gold, c));
  return out;
}

double macro_f1(std::span<const ClassId> predictions, std::span<const ClassId> gold,
                std::size_t num_classes) {
  if (num_classes == 0) throw Error("macro F1 needs at least one class");
  double sum = 0.0;
  for (const auto& m : per_class_metrics(predictions, gold, num_classes)) sum += m.f1;
  return sum / static_cast<double>(num_classes);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double m = mean(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(values.size()));
}

Lexicon Lexicon::from_lists(std::span<const std::string> positive,
                            std::span<const std::string> negative) {
  Lexicon lex;
  const std::set<std::string> pos(positive.begin(), positive.end());
  const std::set<std::string> neg(negative.begin(), negative.end());
  for (const auto& w : pos) {
    if (neg.count(w)) {
      lex.dropped.push_back(w);
    } else {
      lex.positive.insert(w);
    }
  }
  for (const auto& w : neg) {
    if (!pos.count(w)) lex.negative.insert(w);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& positive,
                      const std::filesystem::path& negative) {
  return from_lists(read_word_list(positive), read_word_list(negative));
}

LexiconVote lexicon_classify(const Document& document, const Lexicon& lexicon,
                             std::mt19937_64& rng, ClassId positive, ClassId negative) {
  LexiconVote vote;
  // Each opinion occurrence is matched to the next unused occurrence of the
  // same word in the token sequence.
  std::map<std::string, std::size_t> cursor;
  for (const auto& word : document.opinion_words) {
    int sign = 0;
    if (lexicon.positive.count(word)) sign = 1;
    else if (lexicon.negative.count(word)) sign = -1;

    std::size_t& from = cursor[word];
    std::size_t pos = document.tokens.size();
    for (std::size_t t = from; t < document.tokens.size(); ++t) {
      if (document.tokens[t] == word) {
        pos = t;
        break;
      }
    }
    if (pos < document.tokens.size()) {
      from = pos + 1;
      if (sign != 0) {
        const std::size_t lo = pos >= kNegationWindow ? pos - kNegationWindow : 0;
        for (std::size_t t = lo; t < pos; ++t) {
          if (lexicon.negation_words.count(document.tokens[t])) {
            sign = -sign;
            break;
          }
        }
      }
    }
    if (sign > 0) ++vote.positive_votes;
    if (sign < 0) ++vote.negative_votes;
  }
  if (vote.positive_votes > vote.negative_votes) {
    vote.label = positive;
  } else if (vote.negative_votes > vote.positive_votes) {
    vote.label = negative;
  } else {
    vote.tie = true;
    vote.label = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? positive : negative;
  }
  return vote;
}

std::string to_string(MethodKind method) {
  switch (method) {
    case MethodKind::kLexicon: return "Lexicon";
    case MethodKind::kKeywordPretrain: return "Keyword Pretrain";
    case MethodKind::kVws: return "VWS";
    case MethodKind::kVwsPr: return "VWS-PR";
  }
  return "unknown";
}

std::vector<ClassId> run_method(const RunSpec& spec, const Corpus& corpus,
                                std::uint64_t seed, std::size_t* ties) {
  std::vector<ClassId> labels;
  std::size_t tie_count = 0;
  if (spec.method == MethodKind::kLexicon) {
    if (!spec.lexicon) throw Error("lexicon baseline needs a lexicon");
    const auto pos = corpus.class_index("positive");
    const auto neg = corpus.class_index("negative");
    std::mt19937_64 rng(derive_seed(seed, 5));
    for (const auto& d : corpus.documents()) {
      const auto v = lexicon_classify(d, *spec.lexicon, rng, pos.value_or(0), neg.value_or(1));
      labels.push_back(v.label);
      tie_count += v.tie;
    }
  } else {
    TrainConfig config = spec.config;
    config.seed = seed;
    if (spec.method == MethodKind::kKeywordPretrain) config.epochs = 0;
    config.posterior_regularization = spec.method == MethodKind::kVwsPr;
    const TrainReport report = train(corpus, spec.keywords, config);
    for (const auto& p : predict(corpus, report.params)) {
      labels.push_back(p.label);
      tie_count += p.tie;
    }
  }
  if (ties) *ties = tie_count;
  return labels;
}

EvalResult evaluate_runs(const RunSpec& spec, const Corpus& corpus, const GoldLabels& gold,
                         std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw Error("evaluation needs at least one seed");
  if (gold.size() != corpus.size()) throw Error("gold labels do not match the corpus");
  EvalResult result;
  result.method = to_string(spec.method);
  const std::size_t k = corpus.num_classes();
  result.per_class.assign(k, ClassMetrics{});

  for (std::uint64_t seed : seeds) {
    try {
      std::size_t ties = 0;
      const auto labels = run_method(spec, corpus, seed, &ties);
      std::vector<ClassId> pred;
      std::vector<ClassId> truth;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!gold[i]) continue;
        pred.push_back(labels[i]);
        truth.push_back(*gold[i]);
      }
      if (truth.empty()) throw Error("no document has a gold label");
      result.seeds.push_back(seed);
      result.per_seed_f1.push_back(f1(pred, truth, 0));
      result.per_seed_macro_f1.push_back(macro_f1(pred, truth, k));
      const auto pc = per_class_metrics(pred, truth, k);
      for (std::size_t c = 0; c < k; ++c) {
        result.per_class[c].precision += pc[c].precision;
        result.per_class[c].recall += pc[c].recall;
        result.per_class[c].f1 += pc[c].f1;
      }
      result.tie_count += ties;
    } catch (const std::exception& e) {
      result.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  const double n = static_cast<double>(result.per_seed_f1.size());
  if (n > 0) {
    for (auto& m : result.per_class) {
      m.precision /= n;
      m.recall /= n;
      m.f1 /= n;
    }
  }
  result.mean = mean(result.per_seed_f1);
  result.std = population_std(result.per_seed_f1);
  result.macro_mean = mean(result.per_seed_macro_f1);
  return result;
}

std::string eval_report_json(const EvalResult& result, const std::string& dataset) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& m : result.per_class) {
    per_class.push_back({{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}});
  }
  const nlohmann::json j = {{"method", result.method},
                            {"dataset", dataset},
                            {"mean", result.mean},
                            {"std", result.std},
                            {"per_seed", result.per_seed_f1},
                            {"seeds", result.seeds},
                            {"macro_f1_mean", result.macro_mean},
                            {"per_seed_macro_f1", result.per_seed_macro_f1},
                            {"per_class", per_class},
                            {"ties", result.tie_count},
                            {"failures", result.failures}};
  return j.dump();
}

void print_table(std::ostream& out, std::span<const EvalResult> results,
                 const std::string& dataset) {
  std::size_t width = 6;
  for (const auto& r : results) width = std::max(width, r.method.size());
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s | %-17s\n", static_cast<int>(width), "Method",
                dataset.c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "%-*s | %-8s %-8s\n", static_cast<int>(width), "", "Mean",
                "Std");
  out << buf << std::string(width, '-') << "-+------------------\n";
  for (const auto& r : results) {
    if (r.per_seed_f1.empty()) {
      std::snprintf(buf, sizeof buf, "%-*s | %-8s %-8s\n", static_cast<int>(width),
                    r.method.c_str(), "failed", "-");
    } else {
      std::snprintf(buf, sizeof buf, "%-*s | %.4f   %.4f\n", static_cast<int>(width),
                    r.method.c_str(), r.mean, r.std);
    }
    out << buf;
  }
}

}  // namespace vwspr
