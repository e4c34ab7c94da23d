#include "ldaselect/generator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ldaselect/csv.hpp"
#include "ldaselect/errors.hpp"
#include "ldaselect/rng.hpp"
#include "ldaselect/similarity.hpp"
#include "ldaselect/stats.hpp"

namespace ldaselect {

void validate_dgp(const Dgp& dgp) {
  if (dgp.k_true < 1) throw ValidationError("dgp must keep at least one topic");
  if (dgp.beta_true.rows() != dgp.k_true || dgp.theta_true.cols() != dgp.k_true)
    throw ValidationError("dgp matrices disagree with k_true");
  if (dgp.vocab.size() != static_cast<int>(dgp.beta_true.cols()))
    throw ValidationError("dgp vocabulary size does not match beta columns");
  if (dgp.doc_lengths.size() != static_cast<std::size_t>(dgp.theta_true.rows()))
    throw ValidationError("dgp document count does not match theta rows");
  for (std::size_t j = 0; j < dgp.doc_lengths.size(); ++j)
    if (dgp.doc_lengths[j] < 1)
      throw ValidationError("dgp document " + std::to_string(j) + " has length < 1");
  validate_row_stochastic(dgp.beta_true, 1e-9, "beta_true");
  validate_row_stochastic(dgp.theta_true, 1e-9, "theta_true");
}

namespace {

std::vector<char> select_removals(const Eigen::MatrixXd& sim, double cutoff, PruneMode mode) {
  const int k = static_cast<int>(sim.rows());
  std::vector<char> removed(static_cast<std::size_t>(k), 0);
  if (mode == PruneMode::simultaneous) {
    // a topic is in some best-match pair above the cutoff exactly when its
    // most similar other topic exceeds the cutoff
    for (int a = 0; a < k; ++a) {
      double best = -2.0;
      for (int b = 0; b < k; ++b)
        if (b != a) best = std::max(best, sim(a, b));
      removed[static_cast<std::size_t>(a)] = best > cutoff;
    }
    return removed;
  }
  for (;;) {
    int best_a = -1, best_b = -1;
    double best = cutoff;
    for (int a = 0; a < k; ++a) {
      if (removed[static_cast<std::size_t>(a)]) continue;
      for (int b = a + 1; b < k; ++b) {
        if (removed[static_cast<std::size_t>(b)]) continue;
        if (sim(a, b) > best) {
          best = sim(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_a < 0) break;
    removed[static_cast<std::size_t>(best_a)] = 1;
    removed[static_cast<std::size_t>(best_b)] = 1;
  }
  return removed;
}

}  // namespace

Dgp reduce_topics_with_cutoff(const LdaModel& model, const Vocabulary& vocab, double cutoff_value,
                              PruneMode mode, double percentile) {
  const int k = model.k;
  if (k < 2) throw ValidationError("reduce_topics requires at least two topics");
  if (model.beta.rows() != k) throw ValidationError("model beta disagrees with k");
  if (vocab.size() != static_cast<int>(model.beta.cols()))
    throw ValidationError("vocabulary size does not match beta columns");

  Eigen::MatrixXd sim = row_cosine_matrix(model.beta);
  auto removed = select_removals(sim, cutoff_value, mode);

  std::vector<int> kept;
  for (int a = 0; a < k; ++a)
    if (!removed[static_cast<std::size_t>(a)]) kept.push_back(a);
  if (kept.empty()) throw ValidationError("no distinct topics remain after pruning");
  if (kept.size() < 2)
    throw ValidationError("fewer than two distinct topics remain after pruning");

  Dgp dgp;
  dgp.k_true = static_cast<int>(kept.size());
  dgp.vocab = vocab;
  dgp.doc_lengths = model.doc_lengths;
  dgp.provenance = {"reduce_topics", percentile, cutoff_value};

  dgp.beta_true.resize(dgp.k_true, model.beta.cols());
  for (int a = 0; a < dgp.k_true; ++a) dgp.beta_true.row(a) = model.beta.row(kept[static_cast<std::size_t>(a)]);

  const Eigen::Index J = model.theta.rows();
  dgp.theta_true.resize(J, dgp.k_true);
  std::vector<long> degenerate;
  for (Eigen::Index j = 0; j < J; ++j) {
    double sum = 0.0;
    for (int a = 0; a < dgp.k_true; ++a) {
      dgp.theta_true(j, a) = model.theta(j, kept[static_cast<std::size_t>(a)]);
      sum += dgp.theta_true(j, a);
    }
    if (!(sum > 0.0)) {
      degenerate.push_back(static_cast<long>(j));
      continue;
    }
    dgp.theta_true.row(j) /= sum;
  }
  if (!degenerate.empty()) {
    std::ostringstream msg;
    msg << "theta mass of " << degenerate.size()
        << " document(s) lies entirely on removed topics:";
    for (std::size_t i = 0; i < degenerate.size() && i < 20; ++i) msg << ' ' << degenerate[i];
    if (degenerate.size() > 20) msg << " ...";
    throw ValidationError(msg.str());
  }
  return dgp;
}

Dgp reduce_topics(const LdaModel& model, const Vocabulary& vocab, double percentile,
                  PruneMode mode) {
  if (!(percentile > 0.0 && percentile < 1.0))
    throw ValidationError("pruning percentile must lie in (0,1)");
  const int k = model.k;
  if (k < 2) throw ValidationError("reduce_topics requires at least two topics");
  Eigen::MatrixXd sim = row_cosine_matrix(model.beta);
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) scores.push_back(sim(a, b));
  std::sort(scores.begin(), scores.end());
  const double cutoff = percentile_linear(scores, percentile);
  Dgp dgp = reduce_topics_with_cutoff(model, vocab, cutoff, mode, percentile);
  return dgp;
}

Dgp reduce_topics(const LdaModel& model, double percentile, PruneMode mode) {
  return reduce_topics(model, Vocabulary::placeholder(static_cast<int>(model.beta.cols())),
                       percentile, mode);
}

Corpus generate_corpus(const Dgp& dgp, std::uint64_t seed) {
  validate_dgp(dgp);
  const int J = static_cast<int>(dgp.theta_true.rows());
  const int I = static_cast<int>(dgp.beta_true.cols());

  std::vector<CategoricalSampler> topic_samplers;
  topic_samplers.reserve(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j)
    topic_samplers.emplace_back(Eigen::RowVectorXd(dgp.theta_true.row(j)).data(), dgp.k_true);
  std::vector<CategoricalSampler> word_samplers;
  word_samplers.reserve(static_cast<std::size_t>(dgp.k_true));
  for (int k = 0; k < dgp.k_true; ++k)
    word_samplers.emplace_back(Eigen::RowVectorXd(dgp.beta_true.row(k)).data(), I);

  Pcg32 rng(seed);
  std::vector<std::vector<CountEntry>> docs(static_cast<std::size_t>(J));
  std::vector<long> counts(static_cast<std::size_t>(I), 0);
  std::vector<int> touched;
  for (int j = 0; j < J; ++j) {
    touched.clear();
    for (long n = 0; n < dgp.doc_lengths[static_cast<std::size_t>(j)]; ++n) {
      const int k = topic_samplers[static_cast<std::size_t>(j)].sample(rng);
      const int w = word_samplers[static_cast<std::size_t>(k)].sample(rng);
      if (counts[static_cast<std::size_t>(w)] == 0) touched.push_back(w);
      ++counts[static_cast<std::size_t>(w)];
    }
    auto& doc = docs[static_cast<std::size_t>(j)];
    doc.reserve(touched.size());
    for (int w : touched) {
      doc.push_back({w, counts[static_cast<std::size_t>(w)]});
      counts[static_cast<std::size_t>(w)] = 0;
    }
  }
  return Corpus(dgp.vocab, std::move(docs));
}

void save_dgp(const Dgp& dgp, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "theta.csv", dgp.theta_true);
  write_matrix_csv(dir / "beta.csv", dgp.beta_true);
  {
    std::ofstream out(dir / "doc_lengths.csv");
    if (!out) throw IoError("cannot write doc_lengths.csv in " + dir.string());
    for (long n : dgp.doc_lengths) out << n << '\n';
  }
  {
    std::ofstream out(dir / "vocab.txt");
    if (!out) throw IoError("cannot write vocab.txt in " + dir.string());
    for (const auto& t : dgp.vocab.tokens()) out << t << '\n';
  }
  nlohmann::json meta{{"k_true", dgp.k_true},
                      {"provenance",
                       {{"source", dgp.provenance.source},
                        {"percentile", dgp.provenance.percentile},
                        {"cutoff_value", dgp.provenance.cutoff_value}}}};
  std::ofstream out(dir / "meta.json");
  if (!out) throw IoError("cannot write meta.json in " + dir.string());
  out << meta.dump(2) << '\n';
}

Dgp load_dgp(const std::filesystem::path& dir) {
  Dgp dgp;
  dgp.theta_true = read_matrix_csv(dir / "theta.csv");
  dgp.beta_true = read_matrix_csv(dir / "beta.csv");
  for (const auto& line : read_lines(dir / "doc_lengths.csv")) {
    if (line.empty()) continue;
    dgp.doc_lengths.push_back(parse_long_field(line, (dir / "doc_lengths.csv").string()));
  }
  auto vocab_lines = read_lines(dir / "vocab.txt");
  while (!vocab_lines.empty() && vocab_lines.back().empty()) vocab_lines.pop_back();
  dgp.vocab = Vocabulary(std::move(vocab_lines));
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw IoError("cannot open meta.json in " + dir.string());
  nlohmann::json meta = nlohmann::json::parse(meta_in, nullptr, true);
  dgp.k_true = meta.at("k_true").get<int>();
  const auto& prov = meta.at("provenance");
  dgp.provenance.source = prov.at("source").get<std::string>();
  dgp.provenance.percentile = prov.at("percentile").get<double>();
  dgp.provenance.cutoff_value = prov.at("cutoff_value").get<double>();
  validate_dgp(dgp);
  return dgp;
}

}  // namespace ldaselect
