#include "ldaselect/criteria.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "ldaselect/csv.hpp"
#include "ldaselect/errors.hpp"

namespace ldaselect {

namespace {

std::vector<int> top_words(const Eigen::MatrixXd& beta, int topic, int v) {
  const int I = static_cast<int>(beta.cols());
  std::vector<int> order(static_cast<std::size_t>(I));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + v, order.end(), [&](int a, int b) {
    double pa = beta(topic, a), pb = beta(topic, b);
    if (pa != pb) return pa > pb;
    return a < b;  // deterministic tie-break
  });
  order.resize(static_cast<std::size_t>(v));
  return order;
}

}  // namespace

double mimno_coherence(const Eigen::MatrixXd& beta, const Corpus& corpus,
                       const CriteriaConfig& config) {
  const int K = static_cast<int>(beta.rows());
  const int I = static_cast<int>(beta.cols());
  const int v = config.mimno_top_words;
  const double eps = config.mimno_epsilon;
  if (K < 1) throw ValidationError("mimno_coherence requires at least one topic");
  if (I != corpus.vocab_size())
    throw ValidationError("beta vocabulary dimension does not match corpus");
  if (v < 2) throw ValidationError("mimno_top_words must be >= 2");
  if (v > I) throw ValidationError("mimno_top_words exceeds vocabulary size");
  if (!(eps > 0.0)) throw ValidationError("mimno_epsilon must be positive");

  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    auto words = top_words(beta, k, v);
    if (!(beta(k, words.back()) > 0.0))
      throw ValidationError("topic " + std::to_string(k) + " has fewer than " +
                            std::to_string(v) + " positive-probability words");
    auto freqs = co_document_frequencies(corpus, words);
    double coh = 0.0;
    for (int m = 1; m < v; ++m) {
      for (int n = 0; n < m; ++n) {
        long f_n = freqs.doc_freq.at(words[static_cast<std::size_t>(n)]);
        if (f_n == 0)
          throw ValidationError("top word " + std::to_string(words[static_cast<std::size_t>(n)]) +
                                " of topic " + std::to_string(k) +
                                " has zero document frequency");
        long f_mn = freqs.co(words[static_cast<std::size_t>(m)], words[static_cast<std::size_t>(n)]);
        coh += std::log((static_cast<double>(f_mn) + eps) / static_cast<double>(f_n));
      }
    }
    total += coh * 2.0 / (static_cast<double>(v) * (v - 1));
  }
  return total / K;
}

double optop(const Corpus& corpus, const LdaModel& model, double x_cutoff) {
  if (!(x_cutoff > 0.0 && x_cutoff < 1.0)) throw ValidationError("x_cutoff must lie in (0,1)");
  const int J = corpus.num_docs();
  const int I = corpus.vocab_size();
  if (model.theta.rows() != J || model.beta.cols() != I)
    throw ValidationError("model dimensions do not match corpus");

  std::vector<int> order(static_cast<std::size_t>(I));
  std::vector<double> observed(static_cast<std::size_t>(I));
  double total = 0.0;

  for (int j = 0; j < J; ++j) {
    Eigen::RowVectorXd estimated = model.theta.row(j) * model.beta;

    std::fill(observed.begin(), observed.end(), 0.0);
    const double len = static_cast<double>(corpus.doc_length(j));
    for (const auto& e : corpus.doc(j))
      observed[static_cast<std::size_t>(e.word)] = static_cast<double>(e.count) / len;

    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (estimated[a] != estimated[b]) return estimated[a] < estimated[b];
      return a < b;
    });

    // largest ascending prefix whose cumulative estimated mass stays < cutoff
    int p = 0;
    double bin_estimated = 0.0, bin_observed = 0.0;
    while (p < I && bin_estimated + estimated[order[static_cast<std::size_t>(p)]] < x_cutoff) {
      bin_estimated += estimated[order[static_cast<std::size_t>(p)]];
      bin_observed += observed[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])];
      ++p;
    }

    double doc_term = 0.0;
    for (int q = p; q < I; ++q) {
      const int w = order[static_cast<std::size_t>(q)];
      const double est = estimated[w];
      if (!(est > 0.0))
        throw ValidationError("estimated frequency is zero for important word " +
                              std::to_string(w) + " in document " + std::to_string(j));
      const double d = est - observed[static_cast<std::size_t>(w)];
      doc_term += d * d / est;
    }
    if (p > 0) {
      if (bin_estimated > 0.0) {
        const double d = bin_estimated - bin_observed;
        doc_term += d * d / bin_estimated;
      } else if (bin_observed > 0.0) {
        throw NumericalError("zero estimated mass in low-frequency bin of document " +
                             std::to_string(j));
      }
      // a bin with neither estimated nor observed mass contributes nothing
    }
    const int important = I - p;
    total += static_cast<double>(important + 1) * doc_term;
  }
  return total;
}

int select_optimal_k(const std::vector<CriterionScore>& scores) {
  if (scores.empty()) throw ValidationError("cannot select from an empty score list");
  std::vector<CriterionScore> sorted = scores;
  std::sort(sorted.begin(), sorted.end(),
            [](const CriterionScore& a, const CriterionScore& b) { return a.k < b.k; });
  const auto& name = sorted.front().criterion;
  const auto direction = sorted.front().direction;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    if (s.criterion != name) throw ValidationError("scores mix criteria: " + name + " vs " + s.criterion);
    if (s.direction != direction) throw ValidationError("scores mix optimization directions");
    if (std::isnan(s.value)) throw ValidationError("NaN score for K=" + std::to_string(s.k));
    if (i > 0 && sorted[i].k == sorted[i - 1].k)
      throw ValidationError("duplicate score for K=" + std::to_string(s.k));
    if (i > 0 && sorted[i].k != sorted[i - 1].k + 1)
      throw ValidationError("K-range is not contiguous between " + std::to_string(sorted[i - 1].k) +
                            " and " + std::to_string(sorted[i].k));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const bool better = direction == Direction::minimize ? sorted[i].value < sorted[best].value
                                                         : sorted[i].value > sorted[best].value;
    if (better) best = i;  // strict comparison keeps ties at the smaller K
  }
  return sorted[best].k;
}

void save_scores(const std::filesystem::path& path, const std::vector<CriterionScore>& scores) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scores file: " + path.string());
  out << "criterion,K,value,direction\n";
  for (const auto& s : scores)
    out << s.criterion << ',' << s.k << ',' << format_double(s.value) << ','
        << to_string(s.direction) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<CriterionScore> load_scores(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "criterion,K,value,direction")
    throw ValidationError(path.string() + ": expected header 'criterion,K,value,direction'");
  std::vector<CriterionScore> scores;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != 4) throw ValidationError(where + ": expected 4 fields");
    CriterionScore s;
    s.criterion = fields[0];
    s.k = static_cast<int>(parse_long_field(fields[1], where));
    s.value = parse_double_field(fields[2], where);
    if (fields[3] == "minimize")
      s.direction = Direction::minimize;
    else if (fields[3] == "maximize")
      s.direction = Direction::maximize;
    else
      throw ValidationError(where + ": unknown direction '" + fields[3] + "'");
    scores.push_back(std::move(s));
  }
  return scores;
}

}  // namespace ldaselect
