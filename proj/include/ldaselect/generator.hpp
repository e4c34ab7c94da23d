#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ldaselect/corpus.hpp"
#include "ldaselect/lda.hpp"

namespace ldaselect {

struct DgpProvenance {
  std::string source;          // e.g. "reduce_topics" or "preset:mini"
  double percentile = 0.0;     // pruning percentile, 0 if not applicable
  double cutoff_value = 0.0;   // cosine cutoff; reused as the matching threshold
};

// A fixed "true" model used to synthesize corpora. reduce_topics outputs
// always have k_true >= 2; directly constructed fixtures may use k_true = 1.
struct Dgp {
  Eigen::MatrixXd beta_true;   // k_true x I
  Eigen::MatrixXd theta_true;  // J x k_true
  int k_true = 0;
  std::vector<long> doc_lengths;
  Vocabulary vocab;
  DgpProvenance provenance;
};

void validate_dgp(const Dgp& dgp);

enum class PruneMode {
  simultaneous,  // one pass: drop every topic whose best match exceeds the cutoff
  iterative,     // repeatedly drop the single most similar pair above the cutoff
};

// Pairwise-cosine pruning: the cutoff is the linearly interpolated
// `percentile` of all K(K-1)/2 pairwise similarities of beta rows, topics in
// best-match pairs above it are removed, and theta rows are renormalized.
Dgp reduce_topics(const LdaModel& model, double percentile,
                  PruneMode mode = PruneMode::simultaneous);
Dgp reduce_topics(const LdaModel& model, const Vocabulary& vocab, double percentile,
                  PruneMode mode = PruneMode::simultaneous);

// Same pruning with an explicit cutoff value; re-applying with an unchanged
// cutoff removes nothing further.
Dgp reduce_topics_with_cutoff(const LdaModel& model, const Vocabulary& vocab, double cutoff_value,
                              PruneMode mode = PruneMode::simultaneous, double percentile = 0.0);

// For each document j draws exactly doc_lengths[j] words: topic from the
// theta_true row, then word from the chosen beta_true row. Cached-CDF
// inversion per row; deterministic for a fixed seed.
Corpus generate_corpus(const Dgp& dgp, std::uint64_t seed);

// Directory layout: theta.csv, beta.csv, doc_lengths.csv, vocab.txt, meta.json.
void save_dgp(const Dgp& dgp, const std::filesystem::path& dir);
Dgp load_dgp(const std::filesystem::path& dir);

}  // namespace ldaselect
