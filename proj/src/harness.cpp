#include "ldaselect/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ldaselect/csv.hpp"
#include "ldaselect/errors.hpp"
#include "ldaselect/rng.hpp"
#include "ldaselect/stats.hpp"

namespace ldaselect {

KRange default_k_range(int k_true) {
  if (k_true < 1) throw ValidationError("k_true must be >= 1");
  return {std::max(2, k_true - 20), k_true + 20};
}

namespace {

std::string trim_number(double x) {
  std::ostringstream ss;
  ss << x;
  return ss.str();
}

constexpr std::uint64_t kCorpusSlot = 0;  // fit chains use slot K >= 1

struct PresetShape {
  const char* name;
  int num_docs;
  int vocab_size;
  int k_true;
  double mean_doc_length;  // ignored when fixed_doc_length > 0
  long fixed_doc_length;
  double percentile;
  double theta_concentration;
  double beta_concentration;
  std::uint64_t seed;
};

constexpr PresetShape kPresets[] = {
    {"mini", 200, 100, 5, 0.0, 60, 0.95, 0.30, 0.05, 0x6d696e69646770ULL},
    {"dgp1", 704, 3911, 38, 3000.0, 0, 0.99, 0.10, 0.02, 0x31646770ULL},
    {"dgp2", 11387, 1796, 12, 80.0, 0, 0.95, 0.10, 0.02, 0x32646770ULL},
    {"dgp3", 50000, 4675, 70, 120.0, 0, 0.99, 0.10, 0.02, 0x33646770ULL},
};

Dgp synthesize_preset(const PresetShape& shape) {
  Pcg32 rng(shape.seed);
  Dgp dgp;
  dgp.k_true = shape.k_true;
  dgp.vocab = Vocabulary::placeholder(shape.vocab_size);
  dgp.beta_true.resize(shape.k_true, shape.vocab_size);
  for (int k = 0; k < shape.k_true; ++k)
    dgp.beta_true.row(k) = sample_dirichlet(rng, shape.beta_concentration, shape.vocab_size);
  dgp.theta_true.resize(shape.num_docs, shape.k_true);
  for (int j = 0; j < shape.num_docs; ++j)
    dgp.theta_true.row(j) = sample_dirichlet(rng, shape.theta_concentration, shape.k_true);
  dgp.doc_lengths.resize(static_cast<std::size_t>(shape.num_docs));
  for (int j = 0; j < shape.num_docs; ++j)
    dgp.doc_lengths[static_cast<std::size_t>(j)] =
        shape.fixed_doc_length > 0 ? shape.fixed_doc_length
                                   : std::max<long>(1, sample_poisson(rng, shape.mean_doc_length));

  // data-driven matching threshold: the pruning-percentile order statistic
  // of the pairwise topic similarities
  Eigen::MatrixXd sim = row_cosine_matrix(dgp.beta_true);
  std::vector<double> scores;
  for (int a = 0; a < shape.k_true; ++a)
    for (int b = a + 1; b < shape.k_true; ++b) scores.push_back(sim(a, b));
  std::sort(scores.begin(), scores.end());
  dgp.provenance = {std::string("preset:") + shape.name, shape.percentile,
                    percentile_linear(scores, shape.percentile)};
  validate_dgp(dgp);
  return dgp;
}

std::string sanitize_csv_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = '_';
  return s;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr const char* kResultsHeader =
    "dgp,criterion,replication,K_selected,score,recall_binary,precision_binary,f1_binary,"
    "recall_weighted,precision_weighted,f1_weighted";

std::string format_row(const ReplicationRow& r) {
  std::ostringstream out;
  out << sanitize_csv_field(r.dgp) << ',' << r.criterion << ',' << r.replication << ','
      << r.k_selected << ',' << format_double(r.score) << ',' << format_double(r.binary.recall)
      << ',' << format_double(r.binary.precision) << ',' << format_double(r.binary.f1) << ','
      << format_double(r.weighted.recall) << ',' << format_double(r.weighted.precision) << ','
      << format_double(r.weighted.f1);
  return out.str();
}

struct ResolvedConfig {
  Dgp dgp;
  std::string dgp_label;
  KRange k_range;
  std::vector<Criterion> criteria;
  bool wants_sbic = false;
};

ResolvedConfig resolve(const ExperimentConfig& cfg) {
  ResolvedConfig rc;
  rc.dgp = materialize_dgp(cfg.dgp_ref);
  rc.dgp_label = sanitize_csv_field(cfg.dgp_ref);
  rc.k_range = cfg.k_range ? *cfg.k_range : default_k_range(rc.dgp.k_true);
  if (rc.k_range.k_min < 1 || rc.k_range.k_max < rc.k_range.k_min)
    throw ValidationError("invalid K-range");
  if (rc.k_range.k_max - rc.k_range.k_min + 1 < 2)
    throw ValidationError("K-range must contain at least two candidates");
  if (rc.k_range.k_max > rc.dgp.vocab.size())
    throw ValidationError("K-range upper bound exceeds vocabulary size");
  if (cfg.replications < 1) throw ValidationError("replications must be >= 1");
  if (cfg.criteria.empty()) throw ValidationError("criteria list is empty");
  std::set<std::string> seen;
  for (const auto& token : cfg.criteria) {
    Criterion c = parse_criterion(token, cfg.criteria_config);
    if (!seen.insert(c.label).second)
      throw ValidationError("duplicate criterion: " + c.label);
    if (c.kind == CriterionKind::cao_juan && rc.k_range.k_min < 2)
      throw ValidationError("cao_juan needs candidate models with at least two topics");
    if (c.kind == CriterionKind::sbic) rc.wants_sbic = true;
    rc.criteria.push_back(std::move(c));
  }
  return rc;
}

std::vector<ReplicationRow> compute_replication(const ExperimentConfig& cfg,
                                                const ResolvedConfig& rc, int rep) {
  const std::uint64_t rep_seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(rep));
  Corpus corpus = generate_corpus(rc.dgp, mix_seed(rep_seed, kCorpusSlot));

  const int k_count = rc.k_range.k_max - rc.k_range.k_min + 1;
  std::vector<LdaModel> models;
  models.reserve(static_cast<std::size_t>(k_count));
  SbicInput sbic_input;
  sbic_input.total_words = corpus.total_words();
  sbic_input.vocab_size = corpus.vocab_size();
  sbic_input.num_docs = corpus.num_docs();

  std::map<std::string, std::vector<CriterionScore>> scores;
  for (int k = rc.k_range.k_min; k <= rc.k_range.k_max; ++k) {
    FitConfig fit;
    fit.k = k;
    fit.iterations = cfg.fit_iterations;
    fit.alpha = cfg.fit_alpha;
    fit.eta = cfg.fit_eta;
    fit.seed = mix_seed(rep_seed, static_cast<std::uint64_t>(k));
    models.push_back(fit_lda(corpus, fit));
    const LdaModel& model = models.back();
    if (rc.wants_sbic) sbic_input.log_likelihoods[k] = corpus_log_likelihood(corpus, model);
    for (const auto& c : rc.criteria) {
      double value = 0.0;
      switch (c.kind) {
        case CriterionKind::cao_juan:
          value = cao_juan(model.beta);
          break;
        case CriterionKind::mimno:
          value = mimno_coherence(model.beta, corpus, cfg.criteria_config);
          break;
        case CriterionKind::optop:
          value = optop(corpus, model, c.optop_cutoff);
          break;
        case CriterionKind::sbic:
          continue;  // filled in below from the joint likelihood map
      }
      scores[c.label].push_back({c.label, k, value, c.direction});
    }
  }
  if (rc.wants_sbic) {
    auto sbic_values = compute_sbic(sbic_input, cfg.sbic);
    for (const auto& c : rc.criteria)
      if (c.kind == CriterionKind::sbic)
        for (const auto& [k, v] : sbic_values)
          scores[c.label].push_back({c.label, k, v, c.direction});
  }

  std::vector<ReplicationRow> rows;
  rows.reserve(rc.criteria.size());
  for (const auto& c : rc.criteria) {
    const auto& criterion_scores = scores.at(c.label);
    const int k_selected = select_optimal_k(criterion_scores);
    double value = 0.0;
    for (const auto& s : criterion_scores)
      if (s.k == k_selected) value = s.value;
    const LdaModel& selected = models[static_cast<std::size_t>(k_selected - rc.k_range.k_min)];
    MatchResult match =
        best_match(rc.dgp.beta_true, selected.beta, rc.dgp.provenance.cutoff_value);
    ReplicationRow row;
    row.dgp = rc.dgp_label;
    row.criterion = c.label;
    row.replication = rep;
    row.k_selected = k_selected;
    row.score = value;
    row.binary = classification_scores(match, ScoreMode::binary);
    row.weighted = classification_scores(match, ScoreMode::weighted);
    rows.push_back(std::move(row));
  }
  return rows;
}

struct ResumeState {
  std::vector<ReplicationRow> rows;       // rows of complete replications
  std::set<int> completed;                // their indices
  std::uintmax_t keep_bytes = 0;          // file prefix to preserve
  bool file_exists = false;
};

ResumeState scan_existing_results(const std::filesystem::path& path, std::size_t rows_per_rep) {
  ResumeState state;
  if (!std::filesystem::exists(path)) return state;
  state.file_exists = true;
  auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kResultsHeader)
    throw ValidationError("existing results.csv has an unexpected header; refusing to resume");
  state.keep_bytes = lines[0].size() + 1;

  std::vector<ReplicationRow> block;
  std::uintmax_t block_bytes = 0;
  int block_rep = -1;
  auto flush_block = [&]() {
    if (block.empty()) return false;
    if (block.size() != rows_per_rep) return true;  // partial: stop here
    state.completed.insert(block_rep);
    for (auto& r : block) state.rows.push_back(std::move(r));
    state.keep_bytes += block_bytes;
    block.clear();
    block_bytes = 0;
    return false;
  };

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) break;
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != 11) break;  // truncated tail
    ReplicationRow r;
    try {
      const std::string where = path.string() + ":" + std::to_string(i + 1);
      r.dgp = fields[0];
      r.criterion = fields[1];
      r.replication = static_cast<int>(parse_long_field(fields[2], where));
      r.k_selected = static_cast<int>(parse_long_field(fields[3], where));
      r.score = parse_double_field(fields[4], where);
      r.binary = {parse_double_field(fields[5], where), parse_double_field(fields[6], where),
                  parse_double_field(fields[7], where), ScoreMode::binary};
      r.weighted = {parse_double_field(fields[8], where), parse_double_field(fields[9], where),
                    parse_double_field(fields[10], where), ScoreMode::weighted};
    } catch (const ValidationError&) {
      break;  // malformed tail; rewritten below
    }
    if (r.replication != block_rep && !block.empty()) {
      if (flush_block()) break;
    }
    block_rep = r.replication;
    block.push_back(std::move(r));
    block_bytes += lines[i].size() + 1;
  }
  flush_block();
  return state;
}

nlohmann::json manifest_json(const ExperimentConfig& cfg, const ResolvedConfig& rc) {
  std::vector<std::string> labels;
  for (const auto& c : rc.criteria) labels.push_back(c.label);
  return nlohmann::json{
      {"config_digest", config_digest(cfg)},
      {"dgp", cfg.dgp_ref},
      {"k_min", rc.k_range.k_min},
      {"k_max", rc.k_range.k_max},
      {"criteria", labels},
      {"master_seed", cfg.master_seed},
      {"fit", {{"iterations", cfg.fit_iterations}, {"alpha", cfg.fit_alpha}, {"eta", cfg.fit_eta}}},
      {"criteria_config",
       {{"mimno_top_words", cfg.criteria_config.mimno_top_words},
        {"mimno_epsilon", cfg.criteria_config.mimno_epsilon},
        {"optop_cutoff", cfg.criteria_config.optop_cutoff}}},
      {"sbic_mantissa_bits", cfg.sbic.mantissa_bits}};
}

}  // namespace

Criterion parse_criterion(const std::string& token, const CriteriaConfig& config) {
  Criterion c;
  if (token == "cao_juan") {
    c.kind = CriterionKind::cao_juan;
    c.label = "cao_juan";
    c.direction = Direction::minimize;
  } else if (token == "mimno") {
    c.kind = CriterionKind::mimno;
    c.label = "mimno";
    c.direction = Direction::maximize;
  } else if (token == "sbic") {
    c.kind = CriterionKind::sbic;
    c.label = "sbic";
    c.direction = Direction::maximize;
  } else if (token == "optop" || token.rfind("optop:", 0) == 0) {
    c.kind = CriterionKind::optop;
    c.direction = Direction::minimize;
    if (token == "optop") {
      c.optop_cutoff = config.optop_cutoff;
    } else {
      c.optop_cutoff = parse_double_field(token.substr(6), "criterion '" + token + "'");
    }
    if (!(c.optop_cutoff > 0.0 && c.optop_cutoff < 1.0))
      throw ValidationError("optop cutoff must lie in (0,1)");
    c.label = "optop_" + trim_number(c.optop_cutoff);
  } else {
    throw ValidationError("unknown criterion '" + token + "'");
  }
  return c;
}

bool is_preset_name(const std::string& ref) {
  for (const auto& p : kPresets)
    if (ref == p.name) return true;
  return false;
}

Dgp materialize_dgp(const std::string& ref) {
  for (const auto& p : kPresets)
    if (ref == p.name) return synthesize_preset(p);
  if (std::filesystem::is_directory(ref)) return load_dgp(ref);
  throw ValidationError("unknown dgp '" + ref + "': not a preset name or directory");
}

std::string config_digest(const ExperimentConfig& cfg) {
  CriteriaConfig cc = cfg.criteria_config;
  std::ostringstream ss;
  ss << cfg.dgp_ref << '|' << cfg.master_seed << '|' << cfg.fit_iterations << '|'
     << format_double(cfg.fit_alpha) << '|' << format_double(cfg.fit_eta) << '|'
     << cc.mimno_top_words << '|' << format_double(cc.mimno_epsilon) << '|'
     << format_double(cc.optop_cutoff) << '|' << cfg.sbic.mantissa_bits << '|';
  if (cfg.k_range) ss << cfg.k_range->k_min << ':' << cfg.k_range->k_max;
  ss << '|';
  for (const auto& c : cfg.criteria) ss << c << ';';
  std::ostringstream hex;
  hex << std::hex << fnv1a64(ss.str());
  return hex.str();
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config parse error in " + path.string() + ": " + e.what());
  }

  auto check_keys = [&](const nlohmann::json& obj, const std::set<std::string>& allowed,
                        const std::string& where) {
    for (const auto& [key, _] : obj.items())
      if (!allowed.count(key))
        throw ValidationError("unknown config key '" + key + "' in " + where);
  };

  ExperimentConfig cfg;
  try {
    check_keys(j, {"dgp", "replications", "k_min", "k_max", "criteria", "fit", "criteria_config",
                   "sbic", "seed", "threads", "out"},
               path.string());
    if (j.contains("dgp")) {
      if (j["dgp"].is_string())
        cfg.dgp_ref = j["dgp"].get<std::string>();
      else {
        check_keys(j["dgp"], {"dir"}, "dgp");
        cfg.dgp_ref = j["dgp"].at("dir").get<std::string>();
      }
    }
    if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
    if (j.contains("k_min") != j.contains("k_max"))
      throw ValidationError("k_min and k_max must be given together");
    if (j.contains("k_min"))
      cfg.k_range = KRange{j["k_min"].get<int>(), j["k_max"].get<int>()};
    if (j.contains("criteria")) cfg.criteria = j["criteria"].get<std::vector<std::string>>();
    if (j.contains("fit")) {
      check_keys(j["fit"], {"iterations", "alpha", "eta"}, "fit");
      if (j["fit"].contains("iterations")) cfg.fit_iterations = j["fit"]["iterations"].get<int>();
      if (j["fit"].contains("alpha")) cfg.fit_alpha = j["fit"]["alpha"].get<double>();
      if (j["fit"].contains("eta")) cfg.fit_eta = j["fit"]["eta"].get<double>();
    }
    if (j.contains("criteria_config")) {
      check_keys(j["criteria_config"], {"mimno_top_words", "mimno_epsilon", "optop_cutoff"},
                 "criteria_config");
      auto& cc = j["criteria_config"];
      if (cc.contains("mimno_top_words"))
        cfg.criteria_config.mimno_top_words = cc["mimno_top_words"].get<int>();
      if (cc.contains("mimno_epsilon"))
        cfg.criteria_config.mimno_epsilon = cc["mimno_epsilon"].get<double>();
      if (cc.contains("optop_cutoff"))
        cfg.criteria_config.optop_cutoff = cc["optop_cutoff"].get<double>();
    }
    if (j.contains("sbic")) {
      check_keys(j["sbic"], {"mantissa_bits"}, "sbic");
      if (j["sbic"].contains("mantissa_bits"))
        cfg.sbic.mantissa_bits = j["sbic"]["mantissa_bits"].get<int>();
    }
    if (j.contains("seed")) cfg.master_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config error in " + path.string() + ": " + e.what());
  }
  return cfg;
}

McSummary run_monte_carlo(const ExperimentConfig& cfg) {
  ResolvedConfig rc = resolve(cfg);
  if (cfg.out_dir.empty()) throw ValidationError("output directory is not set");
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string());

  const auto manifest_path = cfg.out_dir / "manifest.json";
  const auto results_path = cfg.out_dir / "results.csv";
  const std::string digest = config_digest(cfg);
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json m = nlohmann::json::parse(in, nullptr, false);
    if (m.is_discarded() || !m.contains("config_digest") ||
        m["config_digest"].get<std::string>() != digest)
      throw ValidationError("output directory holds results for a different configuration");
  } else {
    std::ofstream out(manifest_path);
    if (!out) throw IoError("cannot write manifest.json");
    out << manifest_json(cfg, rc).dump(2) << '\n';
  }

  ResumeState resume = scan_existing_results(results_path, rc.criteria.size());
  if (resume.file_exists) {
    // drop any partial trailing block; completed rows stay byte-identical
    std::filesystem::resize_file(results_path, resume.keep_bytes);
  }

  std::vector<int> pending;
  for (int r = 0; r < cfg.replications; ++r)
    if (!resume.completed.count(r)) pending.push_back(r);

  std::ofstream out(results_path, std::ios::app);
  if (!out) throw IoError("cannot open results.csv for append");
  if (!resume.file_exists) {
    out << kResultsHeader << '\n';
    out.flush();
  }

  std::vector<ReplicationRow> all_rows = std::move(resume.rows);
  std::vector<std::pair<int, std::string>> failures;

  if (!pending.empty()) {
    int thread_count = cfg.threads > 0 ? cfg.threads
                                       : static_cast<int>(std::thread::hardware_concurrency());
    thread_count = std::clamp<int>(thread_count, 1, static_cast<int>(pending.size()));

    struct Outcome {
      std::vector<ReplicationRow> rows;
      std::string error;
    };
    std::mutex mu;
    std::map<std::size_t, Outcome> staged;  // pending-index -> outcome
    std::size_t next_write = 0;
    std::atomic<std::size_t> next_job{0};
    std::exception_ptr io_failure;
    int done = static_cast<int>(resume.completed.size());

    auto drain = [&]() {  // caller holds mu
      while (!staged.empty() && staged.begin()->first == next_write) {
        Outcome& o = staged.begin()->second;
        if (o.error.empty()) {
          for (const auto& row : o.rows) {
            out << format_row(row) << '\n';
            all_rows.push_back(row);
          }
          out.flush();
          if (!out) throw IoError("write failed on results.csv");
        } else {
          failures.emplace_back(pending[staged.begin()->first], o.error);
        }
        staged.erase(staged.begin());
        ++next_write;
        ++done;
        if (cfg.progress) cfg.progress(done, cfg.replications);
      }
    };

    auto worker = [&]() {
      for (;;) {
        const std::size_t idx = next_job.fetch_add(1);
        if (idx >= pending.size()) return;
        Outcome o;
        try {
          o.rows = compute_replication(cfg, rc, pending[idx]);
        } catch (const std::exception& e) {
          o.error = e.what();
        }
        std::lock_guard lock(mu);
        staged[idx] = std::move(o);
        if (!io_failure) {
          try {
            drain();
          } catch (...) {
            io_failure = std::current_exception();
          }
        }
      }
    };

    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (io_failure) std::rethrow_exception(io_failure);
  }

  if (!failures.empty()) {
    std::ofstream log(cfg.out_dir / "errors.log", std::ios::app);
    for (const auto& [rep, msg] : failures) log << rep << ',' << sanitize_csv_field(msg) << '\n';
  }
  if (all_rows.empty())
    throw NumericalError("every replication failed; see " +
                         (cfg.out_dir / "errors.log").string());

  std::stable_sort(all_rows.begin(), all_rows.end(),
                   [](const ReplicationRow& a, const ReplicationRow& b) {
                     return a.replication < b.replication;
                   });
  McSummary summary = summarize(all_rows, rc.k_range);
  write_report(cfg.out_dir, summary, all_rows, false);
  return summary;
}

McSummary summarize(const std::vector<ReplicationRow>& rows, std::optional<KRange> k_range) {
  if (rows.empty()) throw ValidationError("cannot summarize an empty result set");
  McSummary summary;
  summary.dgp = rows.front().dgp;
  summary.k_range = k_range;

  std::map<std::string, std::vector<const ReplicationRow*>> by_criterion;
  std::map<int, int> rows_per_rep;
  for (const auto& r : rows) {
    by_criterion[r.criterion].push_back(&r);
    ++rows_per_rep[r.replication];
  }
  const std::size_t criteria_count = by_criterion.size();
  for (const auto& [rep, n] : rows_per_rep)
    if (static_cast<std::size_t>(n) == criteria_count) ++summary.completed;

  auto eval_stat = [](const std::vector<double>& xs) {
    EvalStat s;
    s.mean = mean(xs);
    s.std_dev = sample_std(xs);
    return s;
  };

  for (const auto& [label, rs] : by_criterion) {
    CriterionSummary cs;
    cs.count = static_cast<int>(rs.size());
    std::vector<double> ks, rb, pb, fb, rw, pw, fw;
    for (const auto* r : rs) {
      ks.push_back(static_cast<double>(r->k_selected));
      ++cs.histogram[r->k_selected];
      rb.push_back(r->binary.recall);
      pb.push_back(r->binary.precision);
      fb.push_back(r->binary.f1);
      rw.push_back(r->weighted.recall);
      pw.push_back(r->weighted.precision);
      fw.push_back(r->weighted.f1);
    }
    cs.selected_k.mean = mean(ks);
    cs.selected_k.median = median(ks);
    cs.selected_k.std_dev = sample_std(ks);
    cs.selected_k.skewness = adjusted_skewness(ks);
    cs.binary = {eval_stat(rb), eval_stat(pb), eval_stat(fb)};
    cs.weighted = {eval_stat(rw), eval_stat(pw), eval_stat(fw)};
    summary.criteria.emplace(label, std::move(cs));
  }
  return summary;
}

std::vector<ReplicationRow> read_results_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kResultsHeader)
    throw ValidationError(path.string() + ": unexpected results header");
  std::vector<ReplicationRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != 11) throw ValidationError(where + ": expected 11 fields");
    ReplicationRow r;
    r.dgp = fields[0];
    r.criterion = fields[1];
    r.replication = static_cast<int>(parse_long_field(fields[2], where));
    r.k_selected = static_cast<int>(parse_long_field(fields[3], where));
    r.score = parse_double_field(fields[4], where);
    r.binary = {parse_double_field(fields[5], where), parse_double_field(fields[6], where),
                parse_double_field(fields[7], where), ScoreMode::binary};
    r.weighted = {parse_double_field(fields[8], where), parse_double_field(fields[9], where),
                  parse_double_field(fields[10], where), ScoreMode::weighted};
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

void write_histogram_svg(const std::filesystem::path& path, const std::map<int, long>& histogram,
                         const KRange& range, const std::string& label) {
  long max_count = 1;
  for (const auto& [_, c] : histogram) max_count = std::max(max_count, c);
  const int bins = range.k_max - range.k_min + 1;
  const double bar_w = 20.0, gap = 4.0, height = 220.0, base = 250.0, left = 30.0;
  const double width = left + bins * (bar_w + gap) + 20.0;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"300\" viewBox=\"0 0 " << width << " 300\">\n";
  out << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << label
      << ": selected K</text>\n";
  for (int k = range.k_min; k <= range.k_max; ++k) {
    auto it = histogram.find(k);
    const long c = it == histogram.end() ? 0 : it->second;
    const double h = height * static_cast<double>(c) / static_cast<double>(max_count);
    const double x = left + (k - range.k_min) * (bar_w + gap);
    out << "<rect x=\"" << x << "\" y=\"" << base - h << "\" width=\"" << bar_w << "\" height=\""
        << h << "\" fill=\"#4477aa\"/>\n";
    out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << base + 16
        << "\" font-size=\"10\" text-anchor=\"middle\">" << k << "</text>\n";
    if (c > 0)
      out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << base - h - 4
          << "\" font-size=\"10\" text-anchor=\"middle\">" << c << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

void write_report(const std::filesystem::path& dir, const McSummary& summary,
                  const std::vector<ReplicationRow>& rows, bool render_svg) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw IoError("cannot write summary.csv");
    out << "criterion,std,mean,median,skewness\n";
    for (const auto& [label, cs] : summary.criteria)
      out << label << ',' << opt_field(cs.selected_k.std_dev) << ','
          << format_double(cs.selected_k.mean) << ',' << format_double(cs.selected_k.median) << ','
          << opt_field(cs.selected_k.skewness) << '\n';
  }
  {
    std::ofstream out(dir / "eval_summary.csv");
    if (!out) throw IoError("cannot write eval_summary.csv");
    out << "criterion,mode,recall_mean,recall_std,precision_mean,precision_std,f1_mean,f1_std\n";
    for (const auto& [label, cs] : summary.criteria) {
      const auto emit = [&](const char* mode, const EvalAggregate& e) {
        out << label << ',' << mode << ',' << format_double(e.recall.mean) << ','
            << opt_field(e.recall.std_dev) << ',' << format_double(e.precision.mean) << ','
            << opt_field(e.precision.std_dev) << ',' << format_double(e.f1.mean) << ','
            << opt_field(e.f1.std_dev) << '\n';
      };
      emit("binary", cs.binary);
      emit("weighted", cs.weighted);
    }
  }
  {
    nlohmann::json j;
    j["dgp"] = summary.dgp;
    j["completed_replications"] = summary.completed;
    if (summary.k_range)
      j["k_range"] = {{"k_min", summary.k_range->k_min}, {"k_max", summary.k_range->k_max}};
    nlohmann::json criteria = nlohmann::json::object();
    for (const auto& [label, cs] : summary.criteria) {
      nlohmann::json hist = nlohmann::json::object();
      for (const auto& [k, c] : cs.histogram) hist[std::to_string(k)] = c;
      auto eval_json = [](const EvalAggregate& e) {
        return nlohmann::json{{"recall_mean", e.recall.mean},
                              {"recall_std", opt_json(e.recall.std_dev)},
                              {"precision_mean", e.precision.mean},
                              {"precision_std", opt_json(e.precision.std_dev)},
                              {"f1_mean", e.f1.mean},
                              {"f1_std", opt_json(e.f1.std_dev)}};
      };
      criteria[label] = {{"count", cs.count},
                         {"selected_k",
                          {{"mean", cs.selected_k.mean},
                           {"median", cs.selected_k.median},
                           {"std", opt_json(cs.selected_k.std_dev)},
                           {"skewness", opt_json(cs.selected_k.skewness)}}},
                         {"histogram", std::move(hist)},
                         {"binary", eval_json(cs.binary)},
                         {"weighted", eval_json(cs.weighted)}};
    }
    j["criteria"] = std::move(criteria);
    std::ofstream out(dir / "summary.json");
    if (!out) throw IoError("cannot write summary.json");
    out << j.dump(2) << '\n';
  }

  for (const auto& [label, cs] : summary.criteria) {
    KRange range;
    if (summary.k_range) {
      range = *summary.k_range;
    } else {
      range.k_min = cs.histogram.begin()->first;
      range.k_max = cs.histogram.rbegin()->first;
    }
    {
      std::ofstream out(dir / ("histogram_" + label + ".csv"));
      if (!out) throw IoError("cannot write histogram for " + label);
      out << "K,count\n";
      for (int k = range.k_min; k <= range.k_max; ++k) {
        auto it = cs.histogram.find(k);
        out << k << ',' << (it == cs.histogram.end() ? 0 : it->second) << '\n';
      }
    }
    {
      std::ofstream out(dir / ("scatter_" + label + ".csv"));
      if (!out) throw IoError("cannot write scatter for " + label);
      out << "recall,precision\n";
      for (const auto& r : rows)
        if (r.criterion == label)
          out << format_double(r.binary.recall) << ',' << format_double(r.binary.precision) << '\n';
    }
    if (render_svg)
      write_histogram_svg(dir / ("histogram_" + label + ".svg"), cs.histogram, range, label);
  }
}

}  // namespace ldaselect
