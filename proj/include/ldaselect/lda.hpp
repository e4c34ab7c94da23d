#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

#include "ldaselect/corpus.hpp"

namespace ldaselect {

struct FitConfig {
  int k = 0;
  int iterations = 1000;
  double alpha = 0.1;  // symmetric document-topic prior
  double eta = 0.01;   // symmetric topic-word prior
  std::uint64_t seed = 0;
};

// Point estimates from the final Gibbs state, smoothed by the priors:
//   theta_jk = (n_jk + alpha) / (N_j + K alpha)
//   beta_ki  = (n_ki + eta)   / (n_k + I eta)
// Both matrices are row-stochastic. doc_lengths records the training
// documents so a model alone can seed a data-generating process.
struct LdaModel {
  Eigen::MatrixXd theta;  // J x K
  Eigen::MatrixXd beta;   // K x I
  int k = 0;
  double alpha = 0.0;
  double eta = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<long> doc_lengths;
};

// Collapsed Gibbs sampling; deterministic for fixed (corpus, config).
LdaModel fit_lda(const Corpus& corpus, const FitConfig& config);

// sum_j sum_i x_ji * log(sum_k theta_jk beta_ki). Throws NumericalError if
// any observed word has zero mixture probability (the -inf case).
double corpus_log_likelihood(const Corpus& corpus, const LdaModel& model);

// Throws ValidationError unless rows are stochastic within `tol` and
// entries are non-negative.
void validate_row_stochastic(const Eigen::MatrixXd& m, double tol, const std::string& what);

// Directory layout: theta.csv, beta.csv, doc_lengths.csv, meta.json.
void save_model(const LdaModel& model, const std::filesystem::path& dir);
LdaModel load_model(const std::filesystem::path& dir);

}  // namespace ldaselect
