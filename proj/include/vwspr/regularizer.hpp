#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vwspr/model.hpp"

namespace vwspr {

struct PRConfig {
  double beta = 0.5;     // weight of the regularizer in the objective
  double gamma1 = 0.7;   // "similar" threshold on the largest cosine
  double gamma2 = -0.1;  // "dissimilar" threshold on the smallest cosine
  double delta = 1.0;    // score of the mixed case

  /// Throws unless beta >= 0, gamma2 <= gamma1 and delta in [0, 1].
  void validate() const;
};

enum class ScoreBranch { kSimilar, kDissimilar, kMixed, kNeutral };
std::string to_string(ScoreBranch branch);

/// Value of S(O_i, O_j) and the case that produced it. The pairs record which
/// opinion words attained the extreme cosines.
struct ConstraintScore {
  double value = 0.0;
  ScoreBranch branch = ScoreBranch::kNeutral;
  double max_cos = 0.0;
  double min_cos = 0.0;
  std::pair<int, int> max_pair{-1, -1};
  std::pair<int, int> min_pair{-1, -1};
};

/// cos(u, v), defined as 0 when either vector has zero norm.
double cosine(const Eigen::Ref<const Eigen::RowVectorXd>& u,
              const Eigen::Ref<const Eigen::RowVectorXd>& v);

/// Cosines of every cross pair (a in O_i, b in O_j), row-major over O_i then
/// O_j, computed on the opinion-classifier embeddings. nullopt when either
/// set is empty ("no constraint").
std::optional<std::vector<double>> pairwise_cosines(std::span<const int> o_i,
                                                    std::span<const int> o_j,
                                                    const RowMatrix& embeddings);

/// The piecewise score given the extreme cosines.
ConstraintScore score_from_extremes(double max_cos, double min_cos,
                                    const PRConfig& config);

ConstraintScore score_S(std::span<const int> o_i, std::span<const int> o_j,
                        const ModelParams& params, const PRConfig& config);

/// Euclidean distance between two class distributions.
double posterior_distance(const PolarityDistribution& a, const PolarityDistribution& b);

/// R = -d(q_i, q_j) * S
double pr_term(const PolarityDistribution& q_i, const PolarityDistribution& q_j,
               double score);
double pr_term(const Document& doc_i, const Document& doc_j,
               const ModelParams& params, const PRConfig& config);

struct PairTrace {
  std::size_t i = 0;
  std::size_t j = 0;
  ConstraintScore score;
  double distance = 0.0;
  double r = 0.0;
};

/// Sum of R over unordered pairs i < j. Pairs where either opinion set is
/// empty contribute nothing. When trace is given, one record per scored pair
/// is appended.
double batch_pr(std::span<const PolarityDistribution> posteriors,
                std::span<const std::vector<int>> opinion_sets,
                const ModelParams& params, const PRConfig& config,
                std::vector<PairTrace>* trace = nullptr);
double batch_pr(std::span<const Document* const> batch, const ModelParams& params,
                const PRConfig& config, std::vector<PairTrace>* trace = nullptr);

/// One JSON line per pair: {"batch", "pair", "branch", "S", "d"}.
void write_trace(std::ostream& out, std::size_t batch_index,
                 std::span<const PairTrace> trace,
                 std::span<const Document* const> batch);

}  // namespace vwspr
