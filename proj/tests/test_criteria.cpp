#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "ldaselect/criteria.hpp"
#include "ldaselect/errors.hpp"
#include "ldaselect/generator.hpp"
#include "oracles.hpp"

using namespace ldaselect;

namespace {

Corpus corpus_from_lines(const std::string& text, const std::string& name) {
  auto dir = oracles::make_temp_dir(name);
  auto path = dir / "c.txt";
  std::ofstream(path) << text;
  return load_corpus(path, CorpusFormat::token_lists);
}

LdaModel make_model(Eigen::MatrixXd theta, Eigen::MatrixXd beta) {
  LdaModel m;
  m.theta = std::move(theta);
  m.beta = std::move(beta);
  m.k = static_cast<int>(m.beta.rows());
  for (Eigen::Index j = 0; j < m.theta.rows(); ++j) m.doc_lengths.push_back(1);
  return m;
}

// independent OpTop evaluation written directly from the statistic's
// definition, kept separate from the library path
double optop_oracle(const std::vector<std::vector<double>>& estimated,
                    const std::vector<std::vector<double>>& observed, double cutoff) {
  double total = 0.0;
  for (std::size_t j = 0; j < estimated.size(); ++j) {
    const auto& xhat = estimated[j];
    const auto& x = observed[j];
    std::vector<std::size_t> order(xhat.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (xhat[a] != xhat[b]) return xhat[a] < xhat[b];
      return a < b;
    });
    double cum = 0.0;
    std::size_t p = 0;
    while (p < order.size() && cum + xhat[order[p]] < cutoff) cum += xhat[order[p++]];
    double bin_est = 0.0, bin_obs = 0.0;
    for (std::size_t q = 0; q < p; ++q) {
      bin_est += xhat[order[q]];
      bin_obs += x[order[q]];
    }
    double term = 0.0;
    for (std::size_t q = p; q < order.size(); ++q) {
      const double d = xhat[order[q]] - x[order[q]];
      term += d * d / xhat[order[q]];
    }
    if (p > 0 && bin_est > 0.0) term += (bin_est - bin_obs) * (bin_est - bin_obs) / bin_est;
    total += static_cast<double>(order.size() - p + 1) * term;
  }
  return total;
}

}  // namespace

TEST_CASE("cao_juan on orthogonal, identical, and overlapping topic pairs") {
  Eigen::MatrixXd orthogonal(2, 2);
  orthogonal << 1, 0, 0, 1;
  CHECK(cao_juan(orthogonal) == doctest::Approx(0.0).epsilon(1e-15));

  Eigen::MatrixXd identical(2, 3);
  identical << 0.2, 0.5, 0.3, 0.2, 0.5, 0.3;
  CHECK(cao_juan(identical) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd overlapping(2, 2);
  overlapping << 0.8, 0.2, 0.2, 0.8;
  // direct dot-product evaluation: 0.32 / 0.68
  CHECK(cao_juan(overlapping) == doctest::Approx(0.32 / 0.68).epsilon(1e-12));
}

TEST_CASE("cao_juan rejects degenerate input") {
  Eigen::MatrixXd single(1, 3);
  single << 1, 0, 0;
  CHECK_THROWS_AS(cao_juan(single), ValidationError);

  Eigen::MatrixXd zero_row(2, 2);
  zero_row << 1, 0, 0, 0;
  CHECK_THROWS_AS(cao_juan(zero_row), ValidationError);
}

TEST_CASE("cao_juan is invariant under row permutation and positive rescaling") {
  Pcg32 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd beta = oracles::random_row_stochastic(rng, 4, 7);
    const double value = cao_juan(beta);

    Eigen::MatrixXd permuted(4, 7);
    permuted.row(0) = beta.row(2);
    permuted.row(1) = beta.row(0);
    permuted.row(2) = beta.row(3);
    permuted.row(3) = beta.row(1);
    CHECK(cao_juan(permuted) == doctest::Approx(value).epsilon(1e-12));

    Eigen::MatrixXd scaled = beta;  // unnormalized copy
    scaled.row(1) *= 37.5;
    scaled.row(3) *= 0.004;
    CHECK(cao_juan(scaled) == doctest::Approx(value).epsilon(1e-12));
  }
}

TEST_CASE("mimno coherence of perfectly co-occurring top words is almost zero") {
  std::string text;
  for (int j = 0; j < 10; ++j) text += "a b\n";
  Corpus corpus = corpus_from_lines(text, "mimno_perfect");
  Eigen::MatrixXd beta(1, 2);
  beta << 0.7, 0.3;
  CriteriaConfig cc;
  cc.mimno_top_words = 2;
  const double value = mimno_coherence(beta, corpus, cc);
  const double expected = std::log((10.0 + cc.mimno_epsilon) / 10.0);
  CHECK(value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(value) < 1e-6);
}

TEST_CASE("a never co-occurring pair contributes -12 - log f") {
  // top word a appears in 4 documents, runner-up b in the remaining ones
  Corpus corpus = corpus_from_lines("a\na\na\na\nb\nb\n", "mimno_disjoint");
  Eigen::MatrixXd beta(1, 2);
  beta << 0.6, 0.4;
  CriteriaConfig cc;
  cc.mimno_top_words = 2;
  const double value = mimno_coherence(beta, corpus, cc);
  CHECK(value == doctest::Approx(-12.0 - std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("mimno coherence equals an exhaustive pair-loop oracle on a 3-doc toy") {
  Corpus corpus = corpus_from_lines("a b c c\nb c\na a b\n", "mimno_toy");
  Eigen::MatrixXd beta(2, 3);
  beta << 0.5, 0.3, 0.2, 0.1, 0.2, 0.7;
  CriteriaConfig cc;
  cc.mimno_top_words = 3;

  // oracle: enumerate documents and pairs directly
  auto doc_has = [&](int j, int w) {
    for (const auto& e : corpus.doc(j))
      if (e.word == w) return true;
    return false;
  };
  auto doc_freq = [&](int w) {
    long f = 0;
    for (int j = 0; j < corpus.num_docs(); ++j) f += doc_has(j, w);
    return f;
  };
  auto co_freq = [&](int w1, int w2) {
    long f = 0;
    for (int j = 0; j < corpus.num_docs(); ++j) f += doc_has(j, w1) && doc_has(j, w2);
    return f;
  };
  double expected = 0.0;
  for (int k = 0; k < 2; ++k) {
    std::vector<int> top(3);
    std::iota(top.begin(), top.end(), 0);
    std::sort(top.begin(), top.end(), [&](int a, int b) {
      if (beta(k, a) != beta(k, b)) return beta(k, a) > beta(k, b);
      return a < b;
    });
    double coh = 0.0;
    for (int m = 1; m < 3; ++m)
      for (int n = 0; n < m; ++n)
        coh += std::log((static_cast<double>(co_freq(top[m], top[n])) + cc.mimno_epsilon) /
                        static_cast<double>(doc_freq(top[n])));
    expected += coh * 2.0 / (3.0 * 2.0);
  }
  expected /= 2.0;
  CHECK(mimno_coherence(beta, corpus, cc) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mimno validation errors") {
  Corpus corpus = corpus_from_lines("a b\nb c\n", "mimno_bad");
  CriteriaConfig cc;
  cc.mimno_top_words = 2;

  SUBCASE("top word absent from every document") {
    // vocabulary gains an extra unseen word via triplets
    auto dir = oracles::make_temp_dir("mimno_unseen");
    std::ofstream(dir / "c.csv") << "doc,word,count\n0,0,1\n1,1,1\n";
    std::ofstream(dir / "c.vocab") << "a\nb\nzzz\n";
    Corpus with_unseen = load_corpus(dir / "c.csv", CorpusFormat::sparse_triplets);
    Eigen::MatrixXd beta(1, 3);
    beta << 0.1, 0.2, 0.7;  // unseen word is the most probable
    CHECK_THROWS_WITH_AS(mimno_coherence(beta, with_unseen, cc),
                         doctest::Contains("zero document frequency"), ValidationError);
  }
  SUBCASE("fewer than v positive-probability words") {
    Eigen::MatrixXd beta(1, 3);
    beta << 1.0, 0.0, 0.0;
    cc.mimno_top_words = 3;
    CHECK_THROWS_WITH_AS(mimno_coherence(beta, corpus, cc), doctest::Contains("positive"),
                         ValidationError);
  }
  SUBCASE("v below 2") {
    Eigen::MatrixXd beta(1, 3);
    beta << 0.5, 0.3, 0.2;
    cc.mimno_top_words = 1;
    CHECK_THROWS_AS(mimno_coherence(beta, corpus, cc), ValidationError);
  }
}

TEST_CASE("mimno coherence never exceeds the epsilon slack") {
  Pcg32 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int I = 6;
    // every word appears in document 0 so all document frequencies are positive
    std::vector<std::vector<CountEntry>> docs(8);
    for (int i = 0; i < I; ++i) docs[0].push_back({i, 1 + static_cast<long>(rng.next_below(3))});
    for (int j = 1; j < 8; ++j) {
      for (int i = 0; i < I; ++i)
        if (rng.next_double() < 0.6) docs[j].push_back({i, 1 + static_cast<long>(rng.next_below(4))});
      if (docs[j].empty()) docs[j].push_back({0, 1});
    }
    Corpus corpus(Vocabulary::placeholder(I), std::move(docs));
    Eigen::MatrixXd beta = oracles::random_row_stochastic(rng, 3, I).array() + 1e-6;
    CriteriaConfig cc;
    cc.mimno_top_words = 3;
    CHECK(mimno_coherence(beta, corpus, cc) <= cc.mimno_epsilon + 1e-12);
  }
}

TEST_CASE("optop is zero when estimated frequencies reproduce the data exactly") {
  Corpus corpus = corpus_from_lines("a a b\nb b b c\n", "optop_exact");
  // one topic per document whose word distribution equals the observed one
  Eigen::MatrixXd theta(2, 2), beta(2, 3);
  theta << 1, 0, 0, 1;
  beta << 2.0 / 3, 1.0 / 3, 0.0, 0.0, 0.75, 0.25;
  // beta row 0 has a zero entry: that word lands in the bin with zero
  // observed and estimated mass for document 0
  const double value = optop(corpus, make_model(theta, beta), 0.05);
  CHECK(value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("optop hand-evaluated example with an empty minimum bin") {
  auto dir = oracles::make_temp_dir("optop_hand");
  std::ofstream(dir / "c.csv") << "doc,word,count\n0,0,2\n0,1,2\n0,2,1\n";
  std::ofstream(dir / "c.vocab") << "a\nb\nc\n";
  Corpus corpus = load_corpus(dir / "c.csv", CorpusFormat::sparse_triplets);
  Eigen::MatrixXd theta(1, 1), beta(1, 3);
  theta << 1.0;
  beta << 0.5, 0.3, 0.2;  // observed x = (0.4, 0.4, 0.2)
  const double value = optop(corpus, make_model(theta, beta), 0.05);
  const double expected = 4.0 * (0.01 / 0.5 + 0.01 / 0.3);  // = 0.21333...
  CHECK(value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("optop bins exactly one low-frequency word and matches the scripted oracle") {
  auto dir = oracles::make_temp_dir("optop_bin");
  std::ofstream(dir / "c.csv") << "doc,word,count\n0,0,8\n0,1,1\n0,2,1\n";
  std::ofstream(dir / "c.vocab") << "a\nb\nc\n";
  Corpus corpus = load_corpus(dir / "c.csv", CorpusFormat::sparse_triplets);
  Eigen::MatrixXd theta(1, 1), beta(1, 3);
  theta << 1.0;
  beta << 0.90, 0.06, 0.04;
  // ascending estimated frequencies: 0.04 (binned; 0.04+0.06 >= 0.05), 0.06, 0.90
  const double value = optop(corpus, make_model(theta, beta), 0.05);
  const double oracle = optop_oracle({{0.90, 0.06, 0.04}}, {{0.8, 0.1, 0.1}}, 0.05);
  CHECK(value == doctest::Approx(oracle).epsilon(1e-12));
  // spot-check the bin really holds one word
  const double by_hand = 3.0 * ((0.9 - 0.8) * (0.9 - 0.8) / 0.9 +
                                (0.06 - 0.1) * (0.06 - 0.1) / 0.06 +
                                (0.04 - 0.1) * (0.04 - 0.1) / 0.04);
  CHECK(value == doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("optop stays non-negative and matches the oracle on random fixtures") {
  Pcg32 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const int I = 8, J = 4, K = 3;
    Eigen::MatrixXd theta = oracles::random_row_stochastic(rng, J, K);
    Eigen::MatrixXd beta = oracles::random_row_stochastic(rng, K, I);
    std::vector<std::vector<CountEntry>> docs(J);
    for (int j = 0; j < J; ++j)
      for (int i = 0; i < I; ++i)
        if (rng.next_double() < 0.6) docs[j].push_back({i, 1 + static_cast<long>(rng.next_below(6))});
    for (auto& d : docs)
      if (d.empty()) d.push_back({0, 2});
    Corpus corpus(Vocabulary::placeholder(I), std::move(docs));

    std::vector<std::vector<double>> est(J, std::vector<double>(I)), obs(J, std::vector<double>(I, 0.0));
    for (int j = 0; j < J; ++j) {
      Eigen::RowVectorXd row = theta.row(j) * beta;
      for (int i = 0; i < I; ++i) est[j][i] = row[i];
      for (const auto& e : corpus.doc(j))
        obs[j][e.word] = static_cast<double>(e.count) / static_cast<double>(corpus.doc_length(j));
    }
    for (double cutoff : {0.05, 0.2}) {
      const double value = optop(corpus, make_model(theta, beta), cutoff);
      CHECK(value >= 0.0);
      CHECK(value == doctest::Approx(optop_oracle(est, obs, cutoff)).epsilon(1e-12));
    }
  }
}

TEST_CASE("optop rejects a bin whose estimated mass vanishes under observed mass") {
  Corpus corpus = corpus_from_lines("a b\n", "optop_zero");
  Eigen::MatrixXd theta(1, 1), beta(1, 2);
  theta << 1.0;
  beta << 0.0, 1.0;  // word a observed but estimated at zero
  CHECK_THROWS_AS(optop(corpus, make_model(theta, beta), 0.05), NumericalError);
}

TEST_CASE("optop cutoff domain is validated") {
  Corpus corpus = corpus_from_lines("a b\n", "optop_dom");
  Eigen::MatrixXd theta(1, 1), beta(1, 2);
  theta << 1.0;
  beta << 0.5, 0.5;
  CHECK_THROWS_AS(optop(corpus, make_model(theta, beta), 0.0), ValidationError);
  CHECK_THROWS_AS(optop(corpus, make_model(theta, beta), 1.0), ValidationError);
}

TEST_CASE("select_optimal_k follows the direction and breaks ties toward smaller K") {
  auto score = [](int k, double v, Direction d) {
    return CriterionScore{"c", k, v, d};
  };
  SUBCASE("minimize") {
    std::vector<CriterionScore> scores{score(2, 3, Direction::minimize),
                                       score(3, 1, Direction::minimize),
                                       score(4, 2, Direction::minimize)};
    CHECK(select_optimal_k(scores) == 3);
  }
  SUBCASE("maximize with a tie") {
    std::vector<CriterionScore> scores;
    for (int k = 4; k <= 8; ++k)
      scores.push_back(score(k, k == 5 || k == 7 ? 9.0 : 1.0, Direction::maximize));
    CHECK(select_optimal_k(scores) == 5);
  }
  SUBCASE("invariant under adding a constant") {
    Pcg32 rng(3);
    std::vector<CriterionScore> scores;
    for (int k = 2; k <= 9; ++k) scores.push_back(score(k, rng.next_double(), Direction::maximize));
    const int chosen = select_optimal_k(scores);
    for (auto& s : scores) s.value += 123.456;
    CHECK(select_optimal_k(scores) == chosen);
  }
}

TEST_CASE("select_optimal_k validation errors") {
  auto score = [](int k, double v) {
    return CriterionScore{"c", k, v, Direction::minimize};
  };
  CHECK_THROWS_AS(select_optimal_k({}), ValidationError);
  CHECK_THROWS_AS(select_optimal_k({score(2, 1), score(4, 2)}), ValidationError);
  CHECK_THROWS_AS(select_optimal_k({score(2, 1), score(2, 2)}), ValidationError);
  CHECK_THROWS_AS(select_optimal_k({score(2, 1), score(3, std::nan(""))}), ValidationError);
  std::vector<CriterionScore> mixed{score(2, 1), {"other", 3, 2.0, Direction::minimize}};
  CHECK_THROWS_AS(select_optimal_k(mixed), ValidationError);
}

TEST_CASE("scores CSV round-trips") {
  auto dir = oracles::make_temp_dir("scores_io");
  std::vector<CriterionScore> scores{{"cao_juan", 2, 0.125, Direction::minimize},
                                     {"sbic", 2, -1234.5678901234567, Direction::maximize}};
  save_scores(dir / "s.csv", scores);
  auto loaded = load_scores(dir / "s.csv");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].criterion == "cao_juan");
  CHECK(loaded[0].k == 2);
  CHECK(loaded[0].value == 0.125);
  CHECK(loaded[0].direction == Direction::minimize);
  CHECK(loaded[1].value == -1234.5678901234567);
  CHECK(loaded[1].direction == Direction::maximize);
}
