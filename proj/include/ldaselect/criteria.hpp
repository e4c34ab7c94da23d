#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ldaselect/corpus.hpp"
#include "ldaselect/lda.hpp"
#include "ldaselect/similarity.hpp"

namespace ldaselect {

enum class Direction { minimize, maximize };

inline const char* to_string(Direction d) {
  return d == Direction::minimize ? "minimize" : "maximize";
}

struct CriterionScore {
  std::string criterion;
  int k = 0;
  double value = 0.0;
  Direction direction = Direction::minimize;
};

struct CriteriaConfig {
  int mimno_top_words = 20;
  double mimno_epsilon = std::exp(-12.0);
  double optop_cutoff = 0.05;
};

// Mean cosine similarity over the K(K-1)/2 unordered topic pairs; lower
// values mean more distinct topics.
template <typename Derived>
double cao_juan(const Eigen::MatrixBase<Derived>& beta) {
  const Eigen::Index k = beta.rows();
  if (k < 2) throw ValidationError("cao_juan requires at least two topics");
  Eigen::MatrixXd sim = row_cosine_matrix(beta);
  double sum = 0.0;
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a + 1; b < k; ++b) sum += sim(a, b);
  return sum / (static_cast<double>(k) * static_cast<double>(k - 1) / 2.0);
}

// Average per-topic semantic coherence over the v most probable words:
// coh(k) = 2/(v(v-1)) * sum_{m>n} log((f(i_m,i_n) + eps) / f(i_n)),
// with the word list sorted by descending probability (ties by word id).
double mimno_coherence(const Eigen::MatrixXd& beta, const Corpus& corpus,
                       const CriteriaConfig& config = {});

// Goodness-of-fit between observed and model-implied per-document relative
// word frequencies. Words whose cumulative estimated frequency stays below
// x_cutoff collapse into one bin; each document contributes
// (P_j + 1) * (sum of important-word terms + bin term).
double optop(const Corpus& corpus, const LdaModel& model, double x_cutoff);

// argmin/argmax over a contiguous K-range, ties toward smaller K.
int select_optimal_k(const std::vector<CriterionScore>& scores);

void save_scores(const std::filesystem::path& path, const std::vector<CriterionScore>& scores);
std::vector<CriterionScore> load_scores(const std::filesystem::path& path);

}  // namespace ldaselect
