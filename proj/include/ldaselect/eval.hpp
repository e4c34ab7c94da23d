#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ldaselect/similarity.hpp"

namespace ldaselect {

struct MatchPair {
  int true_topic = 0;
  int est_topic = 0;
  double similarity = 0.0;
};

// One-to-one alignment of estimated to true topics; every recorded pair has
// similarity strictly above the threshold.
struct MatchResult {
  std::vector<MatchPair> pairs;
  double threshold = 0.0;
  int k_true = 0;
  int k_metric = 0;
};

enum class MatchAlgorithm {
  greedy,     // accept candidate pairs in descending similarity order
  hungarian,  // exact assignment maximizing total similarity
};

MatchResult match_from_similarity(const Eigen::MatrixXd& similarity, double threshold,
                                  MatchAlgorithm algorithm = MatchAlgorithm::greedy);

template <typename DerivedA, typename DerivedB>
MatchResult best_match(const Eigen::MatrixBase<DerivedA>& beta_true,
                       const Eigen::MatrixBase<DerivedB>& beta_est, double threshold,
                       MatchAlgorithm algorithm = MatchAlgorithm::greedy) {
  return match_from_similarity(cross_cosine_matrix(beta_true, beta_est), threshold, algorithm);
}

enum class ScoreMode { binary, weighted };

struct EvalScores {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  ScoreMode mode = ScoreMode::binary;
};

// binary: |pairs| / K_true and |pairs| / K_metric; weighted replaces the
// match count with the sum of pair similarities. F1 is the harmonic mean,
// zero when precision + recall is zero.
EvalScores classification_scores(const MatchResult& match, ScoreMode mode);

}  // namespace ldaselect
