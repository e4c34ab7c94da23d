#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <vector>

namespace ldaselect {

// Penalty exponents of the log-marginal-likelihood expansion
//   log L ~ log P(D|theta,beta,K) - lambda log N + (m - 1) log log N
// for a fitted model with `k` topics whose data-generating truth uses
// `k_sub` <= k topics.
struct LearningCoefficient {
  double lambda = 0.0;
  int multiplicity = 1;
  int k_sub = 0;
  int k = 0;
  int vocab_size = 0;
  int num_docs = 0;
};

// Free parameter count of a K-topic model: J(K-1) + K(I-1).
long regular_dimension(int k, int vocab_size, int num_docs);

// k_sub == k gives the regular coefficient d(k)/2 with multiplicity 1.
// For k_sub < k the k_sub-topic part contributes its regular dimension and
// the k - k_sub redundant topics contribute the rank-deficiency coefficient
// of a J x (I-1) matrix-factorization singularity (case analysis by relative
// size, with the log log N multiplicity arising in the balanced odd case).
// Always 0 < lambda <= d(k)/2, and lambda is nondecreasing in k_sub.
LearningCoefficient learning_coefficient(int k_sub, int k, int vocab_size, int num_docs);

struct SbicInput {
  std::map<int, double> log_likelihoods;  // contiguous candidate K -> log P(D|theta,beta,K)
  long long total_words = 0;              // N
  int vocab_size = 0;                     // I
  int num_docs = 0;                       // J
};

struct SbicOptions {
  int mantissa_bits = 256;  // precision of the extended-float root solve
};

using CoefficientFn = std::function<LearningCoefficient(int k_sub, int k)>;

struct SbicSubmodelPenalty {
  int k_sub = 0;
  double lambda = 0.0;
  int multiplicity = 1;
  double log_term = 0.0;  // log L_hat(K) - lambda log N + (m-1) log log N
};

struct SbicDebugEntry {
  int k = 0;
  double log_likelihood = 0.0;
  double sbic = 0.0;  // log of the positive root
  int mantissa_bits = 0;
  long bisection_steps = 0;
  std::vector<SbicSubmodelPenalty> penalties;
};

// Singular BIC by model averaging: for each candidate K (ascending), the
// score is log of the unique positive root of
//   x^2 + (sum_{k'<K} L'_{k'} - L_{KK}) x - sum_{k'<K} L_{Kk'} L'_{k'} = 0,
// where L_{Kk'} = exp(log_term) for the (k_sub=k', k=K) penalty. All algebra
// runs on likelihood ratios shifted by the largest penalized term, in
// extended precision, so corpus-scale magnitudes neither overflow nor
// silently underflow. Consumers maximize the returned values.
std::map<int, double> compute_sbic(const SbicInput& input, const SbicOptions& options = {},
                                   std::vector<SbicDebugEntry>* debug = nullptr);
std::map<int, double> compute_sbic(const SbicInput& input, const CoefficientFn& coefficients,
                                   const SbicOptions& options = {},
                                   std::vector<SbicDebugEntry>* debug = nullptr);

void write_sbic_debug(const std::filesystem::path& path, const std::vector<SbicDebugEntry>& debug);

}  // namespace ldaselect
