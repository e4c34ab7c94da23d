#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "ldaselect/errors.hpp"
#include "ldaselect/eval.hpp"
#include "oracles.hpp"

using namespace ldaselect;

TEST_CASE("a row permutation matches one-to-one with similarity one") {
  Pcg32 rng(11);
  Eigen::MatrixXd beta = oracles::random_row_stochastic(rng, 6, 15);
  std::vector<int> perm{3, 0, 5, 1, 4, 2};
  Eigen::MatrixXd permuted(6, 15);
  for (int r = 0; r < 6; ++r) permuted.row(r) = beta.row(perm[static_cast<std::size_t>(r)]);

  MatchResult match = best_match(beta, permuted, 0.99);
  REQUIRE(match.pairs.size() == 6);
  for (const auto& p : match.pairs) {
    CHECK(perm[static_cast<std::size_t>(p.est_topic)] == p.true_topic);
    CHECK(p.similarity == doctest::Approx(1.0).epsilon(1e-12));
  }
  EvalScores binary = classification_scores(match, ScoreMode::binary);
  CHECK(binary.recall == 1.0);
  CHECK(binary.precision == 1.0);
  CHECK(binary.f1 == 1.0);
  EvalScores weighted = classification_scores(match, ScoreMode::weighted);
  CHECK(weighted.recall == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(weighted.f1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("an extra near-uniform topic stays unmatched") {
  Eigen::MatrixXd beta_true = Eigen::MatrixXd::Identity(3, 12) * 1.0;
  Eigen::MatrixXd beta_est(4, 12);
  beta_est.topRows(3) = beta_true;
  beta_est.row(3) = Eigen::RowVectorXd::Constant(12, 1.0 / 12.0);
  MatchResult match = best_match(beta_true, beta_est, 0.5);
  CHECK(match.pairs.size() == 3);
  for (const auto& p : match.pairs) CHECK(p.est_topic != 3);
  CHECK(match.k_true == 3);
  CHECK(match.k_metric == 4);
}

TEST_CASE("conflicting candidates resolve toward the higher similarity") {
  // both true topics are nearest to estimated topic 0
  Eigen::MatrixXd sim(3, 3);
  sim << 0.95, 0.10, 0.05,  //
      0.90, 0.85, 0.05,     //
      0.05, 0.10, 0.60;
  MatchResult match = match_from_similarity(sim, 0.5);
  REQUIRE(match.pairs.size() == 3);
  // exhaustive oracle over the greedy order: (0,0) first, (1,0) blocked,
  // then (1,1), then (2,2)
  std::vector<MatchPair> sorted = match.pairs;
  std::sort(sorted.begin(), sorted.end(),
            [](const MatchPair& a, const MatchPair& b) { return a.true_topic < b.true_topic; });
  CHECK(sorted[0].est_topic == 0);
  CHECK(sorted[1].est_topic == 1);
  CHECK(sorted[1].similarity == 0.85);
  CHECK(sorted[2].est_topic == 2);
}

TEST_CASE("second-best below the threshold leaves the loser unmatched") {
  Eigen::MatrixXd sim(2, 2);
  sim << 0.95, 0.10,  //
      0.90, 0.20;
  MatchResult match = match_from_similarity(sim, 0.5);
  REQUIRE(match.pairs.size() == 1);
  CHECK(match.pairs[0].true_topic == 0);
  CHECK(match.pairs[0].est_topic == 0);
}

TEST_CASE("dimension mismatch is rejected") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(2, 5, 0.2);
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(2, 6, 1.0 / 6.0);
  CHECK_THROWS_AS(best_match(a, b, 0.5), ValidationError);
}

TEST_CASE("binary and weighted score formulas") {
  MatchResult match;
  match.k_true = 4;
  match.k_metric = 6;
  match.pairs = {{0, 0, 0.9}, {1, 1, 0.8}, {2, 2, 0.7}};
  EvalScores binary = classification_scores(match, ScoreMode::binary);
  CHECK(binary.recall == 0.75);
  CHECK(binary.precision == 0.5);
  CHECK(binary.f1 == doctest::Approx(0.6).epsilon(1e-15));

  MatchResult weighted_match;
  weighted_match.k_true = 2;
  weighted_match.k_metric = 4;
  weighted_match.pairs = {{0, 0, 1.0}, {1, 1, 0.8}};
  EvalScores weighted = classification_scores(weighted_match, ScoreMode::weighted);
  CHECK(weighted.recall == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(weighted.precision == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(weighted.f1 == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("empty matches give zero F1 without dividing by zero") {
  MatchResult match;
  match.k_true = 3;
  match.k_metric = 5;
  EvalScores s = classification_scores(match, ScoreMode::binary);
  CHECK(s.recall == 0.0);
  CHECK(s.precision == 0.0);
  CHECK(s.f1 == 0.0);
}

TEST_CASE("zero topic counts are rejected") {
  MatchResult match;
  match.k_true = 0;
  match.k_metric = 3;
  CHECK_THROWS_AS(classification_scores(match, ScoreMode::binary), ValidationError);
  match.k_true = 3;
  match.k_metric = 0;
  CHECK_THROWS_AS(classification_scores(match, ScoreMode::binary), ValidationError);
}

TEST_CASE("raising the threshold never increases the number of pairs") {
  Pcg32 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd t = oracles::random_row_stochastic(rng, 5, 9);
    Eigen::MatrixXd e = oracles::random_row_stochastic(rng, 7, 9);
    std::size_t prev = 99;
    for (double threshold : {0.0, 0.2, 0.4, 0.6, 0.8, 0.95}) {
      MatchResult match = best_match(t, e, threshold);
      CHECK(match.pairs.size() <= prev);
      prev = match.pairs.size();
    }
  }
}

TEST_CASE("weighted scores never exceed binary scores") {
  Pcg32 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd t = oracles::random_row_stochastic(rng, 4, 8);
    Eigen::MatrixXd e = oracles::random_row_stochastic(rng, 6, 8);
    MatchResult match = best_match(t, e, 0.3);
    EvalScores b = classification_scores(match, ScoreMode::binary);
    EvalScores w = classification_scores(match, ScoreMode::weighted);
    CHECK(w.recall <= b.recall + 1e-12);
    CHECK(w.precision <= b.precision + 1e-12);
    CHECK(w.f1 <= b.f1 + 1e-12);
  }
}

TEST_CASE("hungarian assignment maximizes total similarity where greedy cannot") {
  Eigen::MatrixXd sim(2, 2);
  sim << 0.90, 0.89,  //
      0.88, 0.20;
  MatchResult greedy = match_from_similarity(sim, 0.1, MatchAlgorithm::greedy);
  MatchResult exact = match_from_similarity(sim, 0.1, MatchAlgorithm::hungarian);
  auto total = [](const MatchResult& m) {
    double s = 0.0;
    for (const auto& p : m.pairs) s += p.similarity;
    return s;
  };
  CHECK(greedy.pairs.size() == 2);
  CHECK(exact.pairs.size() == 2);
  CHECK(total(greedy) == doctest::Approx(1.10));
  CHECK(total(exact) == doctest::Approx(1.77));
}

TEST_CASE("hungarian never scores below greedy on random fixtures") {
  Pcg32 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd t = oracles::random_row_stochastic(rng, 4, 10);
    Eigen::MatrixXd e = oracles::random_row_stochastic(rng, 5, 10);
    auto total = [](const MatchResult& m) {
      double s = 0.0;
      for (const auto& p : m.pairs) s += p.similarity;
      return s;
    };
    const double g = total(best_match(t, e, 0.4, MatchAlgorithm::greedy));
    const double h = total(best_match(t, e, 0.4, MatchAlgorithm::hungarian));
    CHECK(h >= g - 1e-12);
  }
}
