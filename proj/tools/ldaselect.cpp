// ldaselect: LDA topic-number selection toolkit.
//
// Subcommands: generate, fit, score, select, evaluate, mc-run, report.
// Exit codes: 0 success, 1 validation error, 2 numerical error, 3 I/O error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldaselect/csv.hpp"
#include "ldaselect/errors.hpp"
#include "ldaselect/harness.hpp"
#include "ldaselect/rng.hpp"

namespace {

using namespace ldaselect;

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

CorpusFormat parse_format(const std::string& name) {
  if (name == "token-lists") return CorpusFormat::token_lists;
  if (name == "sparse-triplets") return CorpusFormat::sparse_triplets;
  throw ValidationError("unknown corpus format '" + name + "'");
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("LDASELECT_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v > 0) return v;
    } catch (...) {
      throw ValidationError("LDASELECT_THREADS is not a positive integer");
    }
  }
  return 0;  // harness falls back to hardware concurrency
}

struct McCliOptions {
  std::string preset;
  std::string config_path;
  std::string out;
  std::string criteria_csv;
  int replications = -1;
  long long seed = -1;
  int k_min = 0, k_max = 0;
  double optop_cutoff = 0.0;
  int threads = 0;
  bool verbose = false;
};

ExperimentConfig build_experiment_config(const McCliOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) cfg = load_experiment_config(opt.config_path);
  if (!opt.preset.empty()) cfg.dgp_ref = opt.preset;
  if (opt.replications >= 0) cfg.replications = opt.replications;
  if (opt.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(opt.seed);
  if (opt.k_min > 0 || opt.k_max > 0) {
    if (opt.k_min <= 0 || opt.k_max <= 0)
      throw ValidationError("--k-min and --k-max must be given together");
    cfg.k_range = KRange{opt.k_min, opt.k_max};
  }
  if (opt.optop_cutoff > 0.0) cfg.criteria_config.optop_cutoff = opt.optop_cutoff;
  if (!opt.criteria_csv.empty()) {
    cfg.criteria.clear();
    std::string token;
    std::istringstream ss(opt.criteria_csv);
    while (std::getline(ss, token, ','))
      if (!token.empty()) cfg.criteria.push_back(token);
  }
  if (!opt.out.empty()) cfg.out_dir = opt.out;
  cfg.threads = resolve_threads(opt.threads);
  if (opt.verbose)
    cfg.progress = [](int done, int total) {
      std::cerr << "replication " << done << "/" << total << " done\n";
    };
  return cfg;
}

void cmd_generate(const std::string& dgp_ref, long long seed, const std::string& out,
                  const std::string& format) {
  Dgp dgp = materialize_dgp(dgp_ref);
  Corpus corpus = generate_corpus(dgp, static_cast<std::uint64_t>(seed));
  save_corpus(corpus, out, parse_format(format));
}

void cmd_fit(const std::string& corpus_path, const std::string& format, const FitConfig& fit,
             const std::string& out) {
  Corpus corpus = load_corpus(corpus_path, parse_format(format));
  LdaModel model = fit_lda(corpus, fit);
  save_model(model, out);
}

void cmd_score(const std::string& corpus_path, const std::string& format, int k_min, int k_max,
               const std::string& criteria_csv, const CriteriaConfig& criteria_config,
               const FitConfig& fit_base, int mantissa_bits, long long seed,
               const std::string& out, const std::string& sbic_debug_path) {
  Corpus corpus = load_corpus(corpus_path, parse_format(format));
  if (k_min < 1 || k_max < k_min) throw ValidationError("invalid K-range");
  std::vector<std::string> tokens;
  {
    std::string token;
    std::istringstream ss(criteria_csv);
    while (std::getline(ss, token, ','))
      if (!token.empty()) tokens.push_back(token);
  }
  if (tokens.empty()) throw ValidationError("criteria list is empty");

  std::vector<Criterion> criteria;
  bool wants_sbic = false;
  for (const auto& t : tokens) {
    criteria.push_back(parse_criterion(t, criteria_config));
    if (criteria.back().kind == CriterionKind::sbic) wants_sbic = true;
  }

  SbicInput sbic_input;
  sbic_input.total_words = corpus.total_words();
  sbic_input.vocab_size = corpus.vocab_size();
  sbic_input.num_docs = corpus.num_docs();

  std::vector<CriterionScore> scores;
  std::vector<LdaModel> models;
  for (int k = k_min; k <= k_max; ++k) {
    FitConfig fit = fit_base;
    fit.k = k;
    fit.seed = mix_seed(static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(k));
    models.push_back(fit_lda(corpus, fit));
    if (wants_sbic)
      sbic_input.log_likelihoods[k] = corpus_log_likelihood(corpus, models.back());
  }
  for (const auto& c : criteria) {
    if (c.kind == CriterionKind::sbic) continue;
    for (int k = k_min; k <= k_max; ++k) {
      const LdaModel& model = models[static_cast<std::size_t>(k - k_min)];
      double value = 0.0;
      switch (c.kind) {
        case CriterionKind::cao_juan:
          value = cao_juan(model.beta);
          break;
        case CriterionKind::mimno:
          value = mimno_coherence(model.beta, corpus, criteria_config);
          break;
        case CriterionKind::optop:
          value = optop(corpus, model, c.optop_cutoff);
          break;
        case CriterionKind::sbic:
          break;
      }
      scores.push_back({c.label, k, value, c.direction});
    }
  }
  if (wants_sbic) {
    SbicOptions opts;
    opts.mantissa_bits = mantissa_bits;
    std::vector<SbicDebugEntry> debug;
    auto values = compute_sbic(sbic_input, opts, sbic_debug_path.empty() ? nullptr : &debug);
    for (const auto& c : criteria)
      if (c.kind == CriterionKind::sbic)
        for (const auto& [k, v] : values) scores.push_back({c.label, k, v, c.direction});
    if (!sbic_debug_path.empty()) write_sbic_debug(sbic_debug_path, debug);
  }
  save_scores(out, scores);
}

void cmd_select(const std::string& scores_path, const std::string& out) {
  auto scores = load_scores(scores_path);
  std::map<std::string, std::vector<CriterionScore>> by_criterion;
  for (auto& s : scores) by_criterion[s.criterion].push_back(s);
  std::ostringstream result;
  result << "criterion,K\n";
  for (const auto& [label, list] : by_criterion)
    result << label << ',' << select_optimal_k(list) << '\n';
  if (out.empty()) {
    std::cout << result.str();
  } else {
    std::ofstream f(out);
    if (!f) throw IoError("cannot write " + out);
    f << result.str();
  }
}

void cmd_evaluate(const std::string& true_dir, const std::string& est_dir, double threshold,
                  bool use_hungarian, const std::string& out) {
  Dgp dgp = load_dgp(true_dir);
  LdaModel model = load_model(est_dir);
  if (threshold < 0.0) threshold = dgp.provenance.cutoff_value;
  MatchResult match =
      best_match(dgp.beta_true, model.beta, threshold,
                 use_hungarian ? MatchAlgorithm::hungarian : MatchAlgorithm::greedy);
  EvalScores binary = classification_scores(match, ScoreMode::binary);
  EvalScores weighted = classification_scores(match, ScoreMode::weighted);
  std::ofstream f(out);
  if (!f) throw IoError("cannot write " + out);
  f << "dgp,criterion,replication,K_selected,recall,precision,f1,mode\n";
  const std::string dgp_label = std::filesystem::path(true_dir).filename().string();
  f << dgp_label << ",manual,0," << model.k << ',' << format_double(binary.recall) << ','
    << format_double(binary.precision) << ',' << format_double(binary.f1) << ",binary\n";
  f << dgp_label << ",manual,0," << model.k << ',' << format_double(weighted.recall) << ','
    << format_double(weighted.precision) << ',' << format_double(weighted.f1) << ",weighted\n";
}

void cmd_report(const std::string& in_dir, const std::string& out_dir, bool svg) {
  auto rows = read_results_csv(std::filesystem::path(in_dir) / "results.csv");
  std::optional<KRange> range;
  const auto manifest_path = std::filesystem::path(in_dir) / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    auto m = nlohmann::json::parse(in, nullptr, false);
    if (!m.is_discarded() && m.contains("k_min") && m.contains("k_max"))
      range = KRange{m["k_min"].get<int>(), m["k_max"].get<int>()};
  }
  McSummary summary = summarize(rows, range);
  write_report(out_dir.empty() ? in_dir : out_dir, summary, rows, svg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LDA topic-number selection toolkit"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "synthesize a corpus from a DGP");
  std::string gen_dgp = "mini", gen_out, gen_format = "token-lists";
  long long gen_seed = 0;
  generate->add_option("--preset,--dgp", gen_dgp, "preset name or DGP directory");
  generate->add_option("--seed", gen_seed, "generation seed");
  generate->add_option("--out", gen_out, "corpus output path")->required();
  generate->add_option("--format", gen_format, "token-lists | sparse-triplets");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit one LDA model");
  std::string fit_corpus, fit_format = "token-lists", fit_out;
  FitConfig fit_cfg;
  long long fit_seed = 0;
  fit_cmd->add_option("--corpus", fit_corpus)->required();
  fit_cmd->add_option("--format", fit_format);
  fit_cmd->add_option("--k", fit_cfg.k)->required();
  fit_cmd->add_option("--iterations", fit_cfg.iterations);
  fit_cmd->add_option("--alpha", fit_cfg.alpha);
  fit_cmd->add_option("--eta", fit_cfg.eta);
  fit_cmd->add_option("--seed", fit_seed);
  fit_cmd->add_option("--out", fit_out, "model output directory")->required();

  // score
  auto* score = app.add_subcommand("score", "score criteria over a K-range");
  std::string score_corpus, score_format = "token-lists", score_out, score_debug;
  std::string score_criteria = "cao_juan,mimno,optop:0.05,optop:0.2,sbic";
  int score_kmin = 2, score_kmax = 10, score_bits = 256;
  long long score_seed = 0;
  FitConfig score_fit;
  CriteriaConfig score_cc;
  score->add_option("--corpus", score_corpus)->required();
  score->add_option("--format", score_format);
  score->add_option("--k-min", score_kmin);
  score->add_option("--k-max", score_kmax);
  score->add_option("--criteria", score_criteria, "comma-separated list");
  score->add_option("--optop-cutoff", score_cc.optop_cutoff);
  score->add_option("--mimno-top-words", score_cc.mimno_top_words);
  score->add_option("--iterations", score_fit.iterations);
  score->add_option("--alpha", score_fit.alpha);
  score->add_option("--eta", score_fit.eta);
  score->add_option("--mantissa-bits", score_bits);
  score->add_option("--seed", score_seed);
  score->add_option("--sbic-debug", score_debug, "write per-K penalty dump JSON");
  score->add_option("--out", score_out, "scores CSV path")->required();

  // select
  auto* select = app.add_subcommand("select", "pick optimal K from a scores CSV");
  std::string select_scores, select_out;
  select->add_option("--scores", select_scores)->required();
  select->add_option("--out", select_out, "output CSV (stdout if omitted)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "match a model against a DGP");
  std::string eval_true, eval_est, eval_out;
  double eval_threshold = -1.0;
  bool eval_hungarian = false;
  evaluate->add_option("--true-dir", eval_true, "DGP directory")->required();
  evaluate->add_option("--est-dir", eval_est, "model directory")->required();
  evaluate->add_option("--threshold", eval_threshold, "cosine threshold (default: DGP cutoff)");
  evaluate->add_flag("--hungarian", eval_hungarian, "exact assignment instead of greedy");
  evaluate->add_option("--out", eval_out)->required();

  // mc-run
  auto* mc = app.add_subcommand("mc-run", "full Monte Carlo experiment");
  McCliOptions mc_opt;
  mc->add_option("--preset", mc_opt.preset, "preset name or DGP directory");
  mc->add_option("--config", mc_opt.config_path, "experiment config JSON");
  mc->add_option("--replications", mc_opt.replications);
  mc->add_option("--seed", mc_opt.seed);
  mc->add_option("--k-min", mc_opt.k_min);
  mc->add_option("--k-max", mc_opt.k_max);
  mc->add_option("--criteria", mc_opt.criteria_csv, "comma-separated list");
  mc->add_option("--optop-cutoff", mc_opt.optop_cutoff);
  mc->add_option("--threads", mc_opt.threads, "0 = LDASELECT_THREADS or hardware");
  mc->add_option("--out", mc_opt.out);
  mc->add_flag("-v,--verbose", mc_opt.verbose);

  // report
  auto* report = app.add_subcommand("report", "summaries and histograms from a run directory");
  std::string report_in, report_out;
  bool report_svg = false;
  report->add_option("--in", report_in)->required();
  report->add_option("--out", report_out, "defaults to --in");
  report->add_flag("--svg", report_svg, "also render SVG histograms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: validation: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    if (generate->parsed()) cmd_generate(gen_dgp, gen_seed, gen_out, gen_format);
    if (fit_cmd->parsed()) {
      fit_cfg.seed = static_cast<std::uint64_t>(fit_seed);
      cmd_fit(fit_corpus, fit_format, fit_cfg, fit_out);
    }
    if (score->parsed())
      cmd_score(score_corpus, score_format, score_kmin, score_kmax, score_criteria, score_cc,
                score_fit, score_bits, score_seed, score_out, score_debug);
    if (select->parsed()) cmd_select(select_scores, select_out);
    if (evaluate->parsed()) cmd_evaluate(eval_true, eval_est, eval_threshold, eval_hungarian, eval_out);
    if (mc->parsed()) run_monte_carlo(build_experiment_config(mc_opt));
    if (report->parsed()) cmd_report(report_in, report_out, report_svg);
  } catch (const ValidationError& e) {
    std::cerr << "error: validation: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "error: numerical: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << one_line(e.what()) << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << '\n';
    return 2;
  }
  return 0;
}
