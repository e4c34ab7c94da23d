#include "ldaselect/eval.hpp"

#include <algorithm>
#include <limits>

#include "ldaselect/errors.hpp"

namespace ldaselect {

namespace {

MatchResult greedy_match(const Eigen::MatrixXd& sim, double threshold) {
  const int nt = static_cast<int>(sim.rows());
  const int ne = static_cast<int>(sim.cols());
  std::vector<MatchPair> candidates;
  for (int t = 0; t < nt; ++t)
    for (int e = 0; e < ne; ++e)
      if (sim(t, e) > threshold) candidates.push_back({t, e, sim(t, e)});
  std::sort(candidates.begin(), candidates.end(), [](const MatchPair& a, const MatchPair& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.true_topic != b.true_topic) return a.true_topic < b.true_topic;
    return a.est_topic < b.est_topic;
  });
  MatchResult result;
  std::vector<char> true_used(static_cast<std::size_t>(nt), 0);
  std::vector<char> est_used(static_cast<std::size_t>(ne), 0);
  for (const auto& c : candidates) {
    if (true_used[static_cast<std::size_t>(c.true_topic)] ||
        est_used[static_cast<std::size_t>(c.est_topic)])
      continue;
    true_used[static_cast<std::size_t>(c.true_topic)] = 1;
    est_used[static_cast<std::size_t>(c.est_topic)] = 1;
    result.pairs.push_back(c);
  }
  return result;
}

// O(n^3) Hungarian algorithm with potentials on a square cost matrix.
// Returns assignment[row] = column.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0), match(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      int i0 = match[static_cast<std::size_t>(j0)], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<std::size_t>(j)] > 0)
      assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return assignment;
}

MatchResult hungarian_match(const Eigen::MatrixXd& sim, double threshold) {
  const int nt = static_cast<int>(sim.rows());
  const int ne = static_cast<int>(sim.cols());
  const int n = std::max(nt, ne);
  // profit 0 for below-threshold or padded cells makes them equivalent to
  // leaving the topic unmatched; such cells are dropped afterwards
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < nt; ++t)
    for (int e = 0; e < ne; ++e)
      if (sim(t, e) > threshold) cost(t, e) = -sim(t, e);
  auto assignment = solve_assignment(cost);
  MatchResult result;
  for (int t = 0; t < nt; ++t) {
    int e = assignment[static_cast<std::size_t>(t)];
    if (e >= 0 && e < ne && sim(t, e) > threshold) result.pairs.push_back({t, e, sim(t, e)});
  }
  return result;
}

}  // namespace

MatchResult match_from_similarity(const Eigen::MatrixXd& sim, double threshold,
                                  MatchAlgorithm algorithm) {
  if (sim.rows() < 1 || sim.cols() < 1) throw ValidationError("empty similarity matrix");
  MatchResult result = algorithm == MatchAlgorithm::greedy ? greedy_match(sim, threshold)
                                                           : hungarian_match(sim, threshold);
  result.threshold = threshold;
  result.k_true = static_cast<int>(sim.rows());
  result.k_metric = static_cast<int>(sim.cols());
  return result;
}

EvalScores classification_scores(const MatchResult& match, ScoreMode mode) {
  if (match.k_true < 1) throw ValidationError("K_true must be >= 1");
  if (match.k_metric < 1) throw ValidationError("K_metric must be >= 1");
  double numerator = 0.0;
  if (mode == ScoreMode::binary) {
    numerator = static_cast<double>(match.pairs.size());
  } else {
    for (const auto& p : match.pairs) numerator += p.similarity;
  }
  EvalScores scores;
  scores.mode = mode;
  scores.recall = numerator / static_cast<double>(match.k_true);
  scores.precision = numerator / static_cast<double>(match.k_metric);
  const double pr = scores.precision + scores.recall;
  scores.f1 = pr > 0.0 ? 2.0 * scores.precision * scores.recall / pr : 0.0;
  return scores;
}

}  // namespace ldaselect
