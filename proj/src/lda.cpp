#include "ldaselect/lda.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ldaselect/csv.hpp"
#include "ldaselect/errors.hpp"
#include "ldaselect/rng.hpp"

namespace ldaselect {

namespace {

void validate_fit_config(const Corpus& corpus, const FitConfig& cfg) {
  if (cfg.k < 1) throw ValidationError("topic count must be >= 1");
  if (cfg.k > corpus.vocab_size())
    throw ValidationError("topic count " + std::to_string(cfg.k) +
                          " exceeds vocabulary size " + std::to_string(corpus.vocab_size()));
  if (cfg.iterations < 1) throw ValidationError("iterations must be >= 1");
  if (!(cfg.alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (!(cfg.eta > 0.0)) throw ValidationError("eta must be positive");
}

}  // namespace

LdaModel fit_lda(const Corpus& corpus, const FitConfig& cfg) {
  validate_fit_config(corpus, cfg);
  const int J = corpus.num_docs();
  const int I = corpus.vocab_size();
  const int K = cfg.k;
  const long long N = corpus.total_words();
  if (N >= std::numeric_limits<std::int32_t>::max())
    throw NumericalError("corpus too large for 32-bit count tables");

  // token-level expansion of the sparse counts
  std::vector<std::int32_t> token_word;
  token_word.reserve(static_cast<std::size_t>(N));
  std::vector<std::size_t> doc_offset(static_cast<std::size_t>(J) + 1, 0);
  for (int j = 0; j < J; ++j) {
    for (const auto& e : corpus.doc(j))
      for (long c = 0; c < e.count; ++c) token_word.push_back(e.word);
    doc_offset[static_cast<std::size_t>(j) + 1] = token_word.size();
  }

  // word-major topic counts keep the inner sampling loop contiguous
  std::vector<std::int32_t> n_jk(static_cast<std::size_t>(J) * K, 0);
  std::vector<std::int32_t> n_wk(static_cast<std::size_t>(I) * K, 0);
  std::vector<std::int32_t> n_k(static_cast<std::size_t>(K), 0);
  std::vector<std::int32_t> z(token_word.size());

  Pcg32 rng(cfg.seed);
  for (int j = 0; j < J; ++j) {
    for (std::size_t t = doc_offset[j]; t < doc_offset[j + 1]; ++t) {
      int k = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(K)));
      z[t] = k;
      ++n_jk[static_cast<std::size_t>(j) * K + k];
      ++n_wk[static_cast<std::size_t>(token_word[t]) * K + k];
      ++n_k[static_cast<std::size_t>(k)];
    }
  }

  const double alpha = cfg.alpha;
  const double eta = cfg.eta;
  const double eta_total = eta * I;
  std::vector<double> cum(static_cast<std::size_t>(K));

  for (int it = 0; it < cfg.iterations; ++it) {
    for (int j = 0; j < J; ++j) {
      std::int32_t* doc_counts = n_jk.data() + static_cast<std::size_t>(j) * K;
      for (std::size_t t = doc_offset[j]; t < doc_offset[j + 1]; ++t) {
        const int w = token_word[t];
        const int old_k = z[t];
        std::int32_t* word_counts = n_wk.data() + static_cast<std::size_t>(w) * K;
        --doc_counts[old_k];
        --word_counts[old_k];
        --n_k[static_cast<std::size_t>(old_k)];

        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          total += (doc_counts[k] + alpha) * (word_counts[k] + eta) /
                   (n_k[static_cast<std::size_t>(k)] + eta_total);
          cum[static_cast<std::size_t>(k)] = total;
        }
        const double u = rng.next_double() * total;
        int new_k = 0;
        while (new_k < K - 1 && cum[static_cast<std::size_t>(new_k)] <= u) ++new_k;

        z[t] = new_k;
        ++doc_counts[new_k];
        ++word_counts[new_k];
        ++n_k[static_cast<std::size_t>(new_k)];
      }
    }
  }

  LdaModel model;
  model.k = K;
  model.alpha = alpha;
  model.eta = eta;
  model.iterations = cfg.iterations;
  model.seed = cfg.seed;
  model.doc_lengths = corpus.doc_lengths();
  model.theta.resize(J, K);
  for (int j = 0; j < J; ++j) {
    const double denom = static_cast<double>(corpus.doc_length(j)) + K * alpha;
    for (int k = 0; k < K; ++k)
      model.theta(j, k) = (n_jk[static_cast<std::size_t>(j) * K + k] + alpha) / denom;
  }
  model.beta.resize(K, I);
  for (int k = 0; k < K; ++k) {
    const double denom = n_k[static_cast<std::size_t>(k)] + eta_total;
    for (int i = 0; i < I; ++i)
      model.beta(k, i) = (n_wk[static_cast<std::size_t>(i) * K + k] + eta) / denom;
  }
  return model;
}

double corpus_log_likelihood(const Corpus& corpus, const LdaModel& model) {
  const int J = corpus.num_docs();
  const int I = corpus.vocab_size();
  if (model.theta.rows() != J || model.theta.cols() != model.k || model.beta.rows() != model.k ||
      model.beta.cols() != I)
    throw ValidationError("model dimensions do not match corpus (J=" + std::to_string(J) +
                          ", I=" + std::to_string(I) + ")");
  double ll = 0.0;
  for (int j = 0; j < J; ++j) {
    const auto theta_row = model.theta.row(j);
    for (const auto& e : corpus.doc(j)) {
      const double p = theta_row.dot(model.beta.col(e.word));
      if (!(p > 0.0))
        throw NumericalError("log-likelihood is -inf: zero mixture probability for word " +
                             std::to_string(e.word) + " in document " + std::to_string(j));
      ll += static_cast<double>(e.count) * std::log(p);
    }
  }
  return ll;
}

void validate_row_stochastic(const Eigen::MatrixXd& m, double tol, const std::string& what) {
  if (m.rows() < 1 || m.cols() < 1) throw ValidationError(what + " is empty");
  if ((m.array() < 0.0).any()) throw ValidationError(what + " has negative entries");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double s = m.row(r).sum();
    if (std::abs(s - 1.0) > tol)
      throw ValidationError(what + " row " + std::to_string(r) + " sums to " + format_double(s));
  }
}

void save_model(const LdaModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "theta.csv", model.theta);
  write_matrix_csv(dir / "beta.csv", model.beta);
  {
    std::ofstream out(dir / "doc_lengths.csv");
    if (!out) throw IoError("cannot write doc_lengths.csv in " + dir.string());
    for (long n : model.doc_lengths) out << n << '\n';
  }
  nlohmann::json meta{{"k", model.k},
                      {"alpha", model.alpha},
                      {"eta", model.eta},
                      {"iterations", model.iterations},
                      {"seed", model.seed}};
  std::ofstream out(dir / "meta.json");
  if (!out) throw IoError("cannot write meta.json in " + dir.string());
  out << meta.dump(2) << '\n';
}

LdaModel load_model(const std::filesystem::path& dir) {
  LdaModel model;
  model.theta = read_matrix_csv(dir / "theta.csv");
  model.beta = read_matrix_csv(dir / "beta.csv");
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw IoError("cannot open meta.json in " + dir.string());
  nlohmann::json meta = nlohmann::json::parse(meta_in, nullptr, true);
  model.k = meta.at("k").get<int>();
  model.alpha = meta.at("alpha").get<double>();
  model.eta = meta.at("eta").get<double>();
  model.iterations = meta.at("iterations").get<int>();
  model.seed = meta.at("seed").get<std::uint64_t>();
  for (const auto& line : read_lines(dir / "doc_lengths.csv")) {
    if (line.empty()) continue;
    model.doc_lengths.push_back(parse_long_field(line, (dir / "doc_lengths.csv").string()));
  }
  if (model.theta.cols() != model.k || model.beta.rows() != model.k)
    throw ValidationError("model in " + dir.string() + " has inconsistent topic count");
  if (static_cast<Eigen::Index>(model.doc_lengths.size()) != model.theta.rows())
    throw ValidationError("model in " + dir.string() + " has inconsistent document count");
  validate_row_stochastic(model.theta, 1e-9, "theta");
  validate_row_stochastic(model.beta, 1e-9, "beta");
  return model;
}

}  // namespace ldaselect
