#include "vwspr/regularizer.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace vwspr {

void PRConfig::validate() const {
  if (!(beta >= 0.0)) throw Error("beta must be non-negative");
  if (!(gamma2 <= gamma1)) throw Error("gamma2 must not exceed gamma1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw Error("delta must lie in [0, 1]");
}

std::string to_string(ScoreBranch branch) {
  switch (branch) {
    case ScoreBranch::kSimilar:
      return "similar";
    case ScoreBranch::kDissimilar:
      return "dissimilar";
    case ScoreBranch::kMixed:
      return "mixed";
    case ScoreBranch::kNeutral:
      return "neutral";
  }
  return "neutral";
}

double cosine(const Eigen::Ref<const Eigen::RowVectorXd>& u,
              const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return u.dot(v) / (nu * nv);
}

std::optional<std::vector<double>> pairwise_cosines(std::span<const int> o_i,
                                                    std::span<const int> o_j,
                                                    const RowMatrix& embeddings) {
  if (o_i.empty() || o_j.empty()) return std::nullopt;
  std::vector<double> out;
  out.reserve(o_i.size() * o_j.size());
  for (int a : o_i) {
    for (int b : o_j) out.push_back(cosine(embeddings.row(a), embeddings.row(b)));
  }
  return out;
}

ConstraintScore score_from_extremes(double max_cos, double min_cos,
                                    const PRConfig& config) {
  ConstraintScore s;
  s.max_cos = max_cos;
  s.min_cos = min_cos;
  const bool similar = max_cos > config.gamma1;
  const bool dissimilar = min_cos < config.gamma2;
  if (similar && !dissimilar) {
    s.branch = ScoreBranch::kSimilar;
    s.value = max_cos;
  } else if (!similar && dissimilar) {
    s.branch = ScoreBranch::kDissimilar;
    s.value = min_cos;
  } else if (similar && dissimilar) {
    s.branch = ScoreBranch::kMixed;
    s.value = config.delta;
  } else {
    s.branch = ScoreBranch::kNeutral;
    s.value = 0.0;
  }
  return s;
}

ConstraintScore score_S(std::span<const int> o_i, std::span<const int> o_j,
                        const ModelParams& params, const PRConfig& config) {
  if (o_i.empty() || o_j.empty()) return ConstraintScore{};
  const RowMatrix& e = params.opinion_embeddings;
  double max_cos = -std::numeric_limits<double>::infinity();
  double min_cos = std::numeric_limits<double>::infinity();
  std::pair<int, int> max_pair, min_pair;
  for (int a : o_i) {
    for (int b : o_j) {
      const double c = cosine(e.row(a), e.row(b));
      if (c > max_cos) {
        max_cos = c;
        max_pair = {a, b};
      }
      if (c < min_cos) {
        min_cos = c;
        min_pair = {a, b};
      }
    }
  }
  ConstraintScore s = score_from_extremes(max_cos, min_cos, config);
  s.max_pair = max_pair;
  s.min_pair = min_pair;
  return s;
}

double posterior_distance(const PolarityDistribution& a, const PolarityDistribution& b) {
  return (a.probs - b.probs).norm();
}

double pr_term(const PolarityDistribution& q_i, const PolarityDistribution& q_j,
               double score) {
  return -posterior_distance(q_i, q_j) * score;
}

double pr_term(const Document& doc_i, const Document& doc_j,
               const ModelParams& params, const PRConfig& config) {
  const auto q_i = polarity_posterior(encode(doc_i, params), params);
  const auto q_j = polarity_posterior(encode(doc_j, params), params);
  const auto s = score_S(doc_i.opinion_set(), doc_j.opinion_set(), params, config);
  return pr_term(q_i, q_j, s.value);
}

double batch_pr(std::span<const PolarityDistribution> posteriors,
                std::span<const std::vector<int>> opinion_sets,
                const ModelParams& params, const PRConfig& config,
                std::vector<PairTrace>* trace) {
  if (posteriors.size() != opinion_sets.size()) {
    throw Error("posteriors and opinion sets differ in count");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    if (opinion_sets[i].empty()) continue;
    for (std::size_t j = i + 1; j < posteriors.size(); ++j) {
      if (opinion_sets[j].empty()) continue;
      const auto s = score_S(opinion_sets[i], opinion_sets[j], params, config);
      const double d = posterior_distance(posteriors[i], posteriors[j]);
      const double r = -d * s.value;
      total += r;
      if (trace) trace->push_back({i, j, s, d, r});
    }
  }
  return total;
}

double batch_pr(std::span<const Document* const> batch, const ModelParams& params,
                const PRConfig& config, std::vector<PairTrace>* trace) {
  std::vector<PolarityDistribution> q;
  std::vector<std::vector<int>> sets;
  q.reserve(batch.size());
  sets.reserve(batch.size());
  for (const Document* d : batch) {
    q.push_back(polarity_posterior(encode(*d, params), params));
    sets.push_back(d->opinion_set());
  }
  return batch_pr(q, sets, params, config, trace);
}

void write_trace(std::ostream& out, std::size_t batch_index,
                 std::span<const PairTrace> trace,
                 std::span<const Document* const> batch) {
  for (const auto& t : trace) {
    nlohmann::json record{
        {"batch", batch_index},
        {"pair", {batch[t.i]->id, batch[t.j]->id}},
        {"branch", to_string(t.score.branch)},
        {"S", t.score.value},
        {"max_cos", t.score.max_cos},
        {"min_cos", t.score.min_cos},
        {"d", t.distance}};
    out << record.dump() << '\n';
  }
}

}  // namespace vwspr
