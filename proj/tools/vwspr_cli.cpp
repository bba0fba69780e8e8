#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vwspr/corpus.hpp"
#include "vwspr/evaluation.hpp"
#include "vwspr/extraction.hpp"
#include "vwspr/model.hpp"
#include "vwspr/pretrain.hpp"
#include "vwspr/synthetic.hpp"
#include "vwspr/training.hpp"

using namespace vwspr;

namespace {

struct InputArgs {
  std::string corpus;
  std::string extraction;
  std::string parses;
  std::string adjectives;
  std::string keywords;
  std::string preset = "yelp";
};

void add_input_options(CLI::App* sub, InputArgs& in, bool keywords) {
  sub->add_option("--corpus", in.corpus, "JSONL corpus {id, text, label?}")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--extraction", in.extraction, "opinion words written by `extract`")
      ->check(CLI::ExistingFile);
  sub->add_option("--parses", in.parses, "dependency parses (used without --extraction)")
      ->check(CLI::ExistingFile);
  sub->add_option("--adjectives", in.adjectives,
                  "fallback adjective list, one per line (default: built-in)")
      ->check(CLI::ExistingFile);
  if (keywords) {
    sub->add_option("--keywords", in.keywords, "keyword JSON file")->check(CLI::ExistingFile);
    sub->add_option("--preset", in.preset, "keyword preset (yelp, imdb, amazon)");
  }
}

std::set<std::string> read_adjectives(const std::string& path) {
  if (path.empty()) return builtin_adjectives();
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& t : tokenize(line)) out.insert(t);
  }
  return out;
}

LoadedCorpus load_input(const InputArgs& in, const CorpusOptions& options = {}) {
  LoadedCorpus data = load_corpus(in.corpus, options);
  if (!in.extraction.empty()) {
    std::ifstream ex(in.extraction);
    if (!ex) throw Error("cannot open " + in.extraction);
    read_extraction(ex, data.corpus);
  } else {
    const ParseMap parses = in.parses.empty() ? ParseMap{} : load_parses(in.parses);
    const auto rules = default_rules();
    extract_corpus(data.corpus, parses, read_adjectives(in.adjectives), rules);
  }
  return data;
}

KeywordSpec load_keyword_spec(const InputArgs& in) {
  if (in.keywords.empty()) return KeywordSpec::preset(in.preset);
  return load_keywords(in.keywords, in.preset);
}

struct TrainArgs {
  TrainConfig config;
  std::string encoder = "bag";
  std::string optimizer = "sgd";
  std::string negative_distribution = "uniform";
  bool no_freeze = false;
};

void add_train_options(CLI::App* sub, TrainArgs& t) {
  TrainConfig& c = t.config;
  sub->add_option("--alpha", c.alpha, "entropy weight")->capture_default_str();
  sub->add_option("--beta", c.pr.beta, "regularizer weight")->capture_default_str();
  sub->add_option("--gamma1", c.pr.gamma1, "similar threshold")->capture_default_str();
  sub->add_option("--gamma2", c.pr.gamma2, "dissimilar threshold")->capture_default_str();
  sub->add_option("--delta", c.pr.delta, "mixed-case score")->capture_default_str();
  sub->add_option("--negatives", c.negatives, "negative samples per opinion word")
      ->capture_default_str();
  sub->add_option("--negative-distribution", t.negative_distribution)
      ->check(CLI::IsMember({"uniform", "unigram075"}))
      ->capture_default_str();
  sub->add_option("--batch-size", c.batch_size)->capture_default_str();
  sub->add_option("--lr", c.lr)->capture_default_str();
  sub->add_option("--epochs", c.epochs)->capture_default_str();
  sub->add_option("--seed", c.seed)->capture_default_str();
  sub->add_option("--encoder", t.encoder)
      ->check(CLI::IsMember({"bag", "cnn"}))
      ->capture_default_str();
  sub->add_option("--embedding-dim", c.embedding_dim)->capture_default_str();
  sub->add_option("--opinion-dim", c.opinion_dim)->capture_default_str();
  sub->add_option("--filters", c.filters_per_width, "CNN filters per width")
      ->capture_default_str();
  sub->add_flag("--no-freeze", t.no_freeze, "keep training token embeddings after pretraining");
  sub->add_flag("--backprop-score", c.backprop_through_score,
                "let gradients flow through the constraint score");
  sub->add_option("--optimizer", t.optimizer)
      ->check(CLI::IsMember({"sgd", "adam"}))
      ->capture_default_str();
  sub->add_option("--pretrain-epochs", c.pretrain.epochs)->capture_default_str();
  sub->add_option("--pretrain-lr", c.pretrain.lr)->capture_default_str();
  sub->add_option("--pretrain-batch-size", c.pretrain.batch_size)->capture_default_str();
}

TrainConfig finish(const TrainArgs& t) {
  TrainConfig c = t.config;
  c.encoder = encoder_from_string(t.encoder);
  c.optimizer = t.optimizer == "adam" ? OptimizerKind::kAdam : OptimizerKind::kSgd;
  c.negative_distribution = t.negative_distribution == "unigram075"
                                ? NegativeDistribution::kUnigram075
                                : NegativeDistribution::kUniform;
  c.freeze_embeddings_after_pretrain = !t.no_freeze;
  c.validate();
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

MethodKind method_from_string(const std::string& name) {
  if (name == "lexicon") return MethodKind::kLexicon;
  if (name == "pretrain") return MethodKind::kKeywordPretrain;
  if (name == "vws") return MethodKind::kVws;
  return MethodKind::kVwsPr;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised sentiment classification from opinion words"};
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);

  // extract
  InputArgs ex_in;
  std::string ex_out;
  auto* extract = app.add_subcommand("extract", "extract opinion words");
  add_input_options(extract, ex_in, false);
  extract->add_option("--out", ex_out, "JSONL output")->required();

  // stats
  InputArgs st_in;
  auto* stats = app.add_subcommand("stats", "corpus statistics as JSON");
  add_input_options(stats, st_in, false);

  // pretrain
  InputArgs pt_in;
  TrainArgs pt_args;
  std::string pt_checkpoint;
  auto* pretrain = app.add_subcommand("pretrain", "keyword pretraining only");
  add_input_options(pretrain, pt_in, true);
  add_train_options(pretrain, pt_args);
  pretrain->add_option("--checkpoint", pt_checkpoint, "checkpoint output")->required();

  // train
  InputArgs tr_in;
  TrainArgs tr_args;
  std::string tr_checkpoint, tr_log, tr_trace, tr_report;
  bool tr_vws = false;
  auto* trainc = app.add_subcommand("train", "pretrain then optimize the objective");
  add_input_options(trainc, tr_in, true);
  add_train_options(trainc, tr_args);
  trainc->add_flag("--vws", tr_vws, "disable the posterior regularizer");
  trainc->add_option("--checkpoint", tr_checkpoint, "checkpoint output")->required();
  trainc->add_option("--log", tr_log, "JSONL training log");
  trainc->add_option("--trace", tr_trace, "JSONL constraint trace");
  trainc->add_option("--report", tr_report, "JSON summary of the run");

  // evaluate
  InputArgs ev_in;
  TrainArgs ev_args;
  std::string ev_method = "vws-pr", ev_dataset = "corpus", ev_results, ev_checkpoint;
  std::string ev_pos, ev_neg;
  std::vector<std::uint64_t> ev_seeds = {1, 2, 3, 4, 5};
  auto* evaluate = app.add_subcommand("evaluate", "F1 over seeds on the gold labels");
  add_input_options(evaluate, ev_in, true);
  add_train_options(evaluate, ev_args);
  evaluate->add_option("--method", ev_method)
      ->check(CLI::IsMember({"lexicon", "pretrain", "vws", "vws-pr"}))
      ->capture_default_str();
  evaluate->add_option("--seeds", ev_seeds)->capture_default_str();
  evaluate->add_option("--dataset", ev_dataset)->capture_default_str();
  evaluate->add_option("--lexicon-positive", ev_pos)->check(CLI::ExistingFile);
  evaluate->add_option("--lexicon-negative", ev_neg)->check(CLI::ExistingFile);
  evaluate->add_option("--checkpoint", ev_checkpoint,
                       "score a saved model instead of training")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--results", ev_results, "append the JSON report to this file");

  // grid
  InputArgs gr_in;
  TrainArgs gr_args;
  double gr_dev = 0.2;
  std::uint64_t gr_split_seed = 1;
  std::vector<std::uint64_t> gr_seeds = {1};
  std::vector<double> gr_g1, gr_g2, gr_beta;
  double gr_stage1_beta = 0.5;
  std::string gr_out;
  auto* grid = app.add_subcommand("grid", "two-stage search over gamma1, gamma2, beta");
  add_input_options(grid, gr_in, true);
  add_train_options(grid, gr_args);
  grid->add_option("--dev-fraction", gr_dev)->capture_default_str();
  grid->add_option("--split-seed", gr_split_seed)->capture_default_str();
  grid->add_option("--seeds", gr_seeds)->capture_default_str();
  grid->add_option("--gamma1-values", gr_g1, "default 0.5..1.0");
  grid->add_option("--gamma2-values", gr_g2, "default -0.5..0");
  grid->add_option("--beta-values", gr_beta, "default 0.1..1.0");
  grid->add_option("--stage1-beta", gr_stage1_beta)->capture_default_str();
  grid->add_option("--out", gr_out, "JSONL rows");

  // synth
  SyntheticSpec sy_spec;
  std::string sy_dir;
  double sy_coverage = 0.5;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with a known answer");
  synth->add_option("--out-dir", sy_dir)->required();
  synth->add_option("--docs", sy_spec.num_docs)->capture_default_str();
  synth->add_option("--noise", sy_spec.noise_rate)->capture_default_str();
  synth->add_option("--seed", sy_spec.seed)->capture_default_str();
  synth->add_option("--lexicon-coverage", sy_coverage)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      InputArgs in = ex_in;
      in.extraction.clear();
      const LoadedCorpus data = load_input(in);
      auto out = open_out(ex_out);
      write_extraction(out, data.corpus);
      std::cout << stats_json(corpus_stats(data.corpus)) << '\n';
    } else if (*stats) {
      std::cout << stats_json(corpus_stats(load_input(st_in).corpus)) << '\n';
    } else if (*pretrain) {
      TrainConfig c = finish(pt_args);
      c.epochs = 0;
      const LoadedCorpus data = load_input(pt_in);
      const TrainReport r = train(data.corpus, load_keyword_spec(pt_in), c);
      for (const auto& e : r.pretrain.epochs) {
        std::cout << nlohmann::json{{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}}
                         .dump()
                  << '\n';
      }
      save_checkpoint(pt_checkpoint, r.params);
    } else if (*trainc) {
      TrainConfig c = finish(tr_args);
      c.posterior_regularization = !tr_vws;
      const LoadedCorpus data = load_input(tr_in);
      std::ofstream log, trace;
      TrainHooks hooks;
      if (!tr_log.empty()) {
        log = open_out(tr_log);
        hooks.log = &log;
      } else {
        hooks.log = &std::cout;
      }
      if (!tr_trace.empty()) {
        trace = open_out(tr_trace);
        hooks.trace = &trace;
      }
      const TrainReport r = train(data.corpus, load_keyword_spec(tr_in), c, hooks);
      save_checkpoint(tr_checkpoint, r.params);
      if (!tr_report.empty()) {
        nlohmann::json epochs = nlohmann::json::array();
        for (const auto& e : r.epochs) {
          epochs.push_back({{"epoch", e.epoch}, {"J", e.j}, {"L2", e.l2}, {"PR", e.pr},
                            {"mean_entropy", e.mean_entropy}});
        }
        auto out = open_out(tr_report);
        out << nlohmann::json{{"seed", r.seed},
                              {"beta", r.beta},
                              {"wall_seconds", r.wall_seconds},
                              {"skipped_documents", r.skipped_documents},
                              {"pseudo_labeled", r.pretrain.pseudo_labeled},
                              {"epochs", epochs}}
                   .dump(2)
            << '\n';
      }
    } else if (*evaluate) {
      const LoadedCorpus data = load_input(ev_in);
      EvalResult result;
      if (!ev_checkpoint.empty()) {
        const ModelParams params = load_checkpoint(ev_checkpoint, data.corpus);
        std::vector<ClassId> pred, gold;
        for (std::size_t i = 0; i < data.corpus.size(); ++i) {
          if (!data.gold[i]) continue;
          pred.push_back(predict(data.corpus[i], params).label);
          gold.push_back(*data.gold[i]);
        }
        result.method = "checkpoint";
        result.per_seed_f1 = {f1(pred, gold, 0)};
        result.mean = result.per_seed_f1[0];
        result.macro_mean = macro_f1(pred, gold, data.corpus.num_classes());
        result.per_class = per_class_metrics(pred, gold, data.corpus.num_classes());
      } else {
        RunSpec spec;
        spec.method = method_from_string(ev_method);
        spec.config = finish(ev_args);
        spec.keywords = load_keyword_spec(ev_in);
        if (spec.method == MethodKind::kLexicon) {
          if (ev_pos.empty() || ev_neg.empty()) {
            throw Error("lexicon method needs --lexicon-positive and --lexicon-negative");
          }
          spec.lexicon = Lexicon::load(ev_pos, ev_neg);
          for (const auto& w : spec.lexicon->dropped) {
            std::cerr << "lexicon: dropped conflicting word \"" << w << "\"\n";
          }
        }
        result = evaluate_runs(spec, data.corpus, data.gold, ev_seeds);
      }
      const std::vector<EvalResult> rows = {result};
      print_table(std::cout, rows, ev_dataset);
      for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
      if (!ev_results.empty()) {
        std::ofstream out(ev_results, std::ios::app);
        if (!out) throw Error("cannot write " + ev_results);
        out << eval_report_json(result, ev_dataset) << '\n';
      }
      if (result.per_seed_f1.empty()) return 1;
    } else if (*grid) {
      const LoadedCorpus all = load_input(gr_in);
      auto [train_split, dev_split] = split_train_dev(all, gr_dev, gr_split_seed);
      GridSpec spec = GridSpec::standard();
      if (!gr_g1.empty()) spec.gamma1 = gr_g1;
      if (!gr_g2.empty()) spec.gamma2 = gr_g2;
      if (!gr_beta.empty()) spec.beta = gr_beta;
      spec.stage1_beta = gr_stage1_beta;
      spec.seeds = gr_seeds;
      const GridResult r = grid_search(train_split.corpus, dev_split.corpus, dev_split.gold,
                                       load_keyword_spec(gr_in), finish(gr_args), spec);
      std::ofstream file;
      if (!gr_out.empty()) file = open_out(gr_out);
      for (const auto& row : r.rows) {
        const auto line = nlohmann::json{{"stage", row.stage},     {"gamma1", row.gamma1},
                                         {"gamma2", row.gamma2},   {"beta", row.beta},
                                         {"mean_f1", row.mean_f1}, {"std_f1", row.std_f1}}
                              .dump();
        std::cout << line << '\n';
        if (file) file << line << '\n';
      }
      std::cout << "best: gamma1=" << r.best.gamma1 << " gamma2=" << r.best.gamma2
                << " beta=" << r.best.beta << " mean_f1=" << r.best.mean_f1 << '\n';
    } else if (*synth) {
      const SyntheticData syn = make_synthetic(sy_spec);
      const std::filesystem::path dir(sy_dir);
      std::filesystem::create_directories(dir);
      auto corpus = open_out((dir / "corpus.jsonl").string());
      write_corpus(corpus, syn.data.corpus, &syn.data.gold);
      auto extraction = open_out((dir / "extraction.jsonl").string());
      write_extraction(extraction, syn.data.corpus);
      const Lexicon lex = synthetic_lexicon(syn, sy_coverage);
      auto pos = open_out((dir / "lexicon_positive.txt").string());
      for (const auto& w : lex.positive) pos << w << '\n';
      auto neg = open_out((dir / "lexicon_negative.txt").string());
      for (const auto& w : lex.negative) neg << w << '\n';
      auto kw = open_out((dir / "keywords.json").string());
      kw << nlohmann::json(syn.keywords.keywords).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
