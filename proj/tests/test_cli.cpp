// Exercises the installed binary end to end; the harness library computes
// the golden values the CLI output is compared against.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ldaselect/criteria.hpp"
#include "ldaselect/generator.hpp"
#include "ldaselect/harness.hpp"
#include "ldaselect/rng.hpp"
#include "oracles.hpp"

using namespace ldaselect;

namespace {

std::string binary_path() {
  const char* p = std::getenv("LDASELECT_BIN");
  REQUIRE_MESSAGE(p != nullptr, "LDASELECT_BIN must point at the CLI binary");
  return p;
}

int run(const std::string& args, const std::filesystem::path& stderr_file = {}) {
  std::string cmd = binary_path() + " " + args;
  if (!stderr_file.empty()) cmd += " 2>" + stderr_file.string();
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("generate, fit, score, select, evaluate pipeline round-trips") {
  auto dir = oracles::make_temp_dir("cli_pipeline");

  // token lists drop never-sampled vocabulary entries, so the DGP-aligned
  // pipeline uses sparse triplets with the vocabulary sidecar
  CHECK(run("generate --preset mini --seed 3 --format sparse-triplets --out " +
            (dir / "c.csv").string()) == 0);
  CHECK(std::filesystem::exists(dir / "c.csv"));
  CHECK(std::filesystem::exists(dir / "c.vocab"));
  CHECK(run("generate --preset mini --seed 3 --out " + (dir / "c.txt").string()) == 0);
  CHECK(std::filesystem::exists(dir / "c.txt"));

  CHECK(run("fit --corpus " + (dir / "c.csv").string() +
            " --format sparse-triplets --k 5 --iterations 80 --seed 5 --out " +
            (dir / "model").string()) == 0);
  CHECK(std::filesystem::exists(dir / "model" / "theta.csv"));
  CHECK(std::filesystem::exists(dir / "model" / "beta.csv"));
  CHECK(std::filesystem::exists(dir / "model" / "meta.json"));

  CHECK(run("score --corpus " + (dir / "c.csv").string() +
            " --format sparse-triplets"
            " --k-min 2 --k-max 5 --iterations 60 --seed 1 --criteria cao_juan,sbic --out " +
            (dir / "scores.csv").string() + " --sbic-debug " + (dir / "sbic.json").string()) == 0);
  CHECK(std::filesystem::exists(dir / "sbic.json"));

  CHECK(run("select --scores " + (dir / "scores.csv").string() + " --out " +
            (dir / "selected.csv").string()) == 0);
  auto selected = slurp(dir / "selected.csv");
  CHECK(selected.rfind("criterion,K\n", 0) == 0);

  // evaluate the fitted model against the generating topics
  save_dgp(materialize_dgp("mini"), dir / "dgp");
  CHECK(run("evaluate --true-dir " + (dir / "dgp").string() + " --est-dir " +
            (dir / "model").string() + " --out " + (dir / "eval.csv").string()) == 0);
  auto eval = slurp(dir / "eval.csv");
  CHECK(eval.rfind("dgp,criterion,replication,K_selected,recall,precision,f1,mode\n", 0) == 0);
  CHECK(eval.find(",binary\n") != std::string::npos);
  CHECK(eval.find(",weighted\n") != std::string::npos);
}

TEST_CASE("score output equals direct library computation") {
  auto dir = oracles::make_temp_dir("cli_golden");
  CHECK(run("generate --preset mini --seed 9 --out " + (dir / "c.txt").string()) == 0);
  CHECK(run("score --corpus " + (dir / "c.txt").string() +
            " --k-min 2 --k-max 4 --iterations 50 --seed 21 --criteria cao_juan,optop:0.05 --out " +
            (dir / "scores.csv").string()) == 0);
  auto scores = load_scores(dir / "scores.csv");

  Corpus corpus = load_corpus(dir / "c.txt", CorpusFormat::token_lists);
  for (const auto& s : scores) {
    FitConfig fit;
    fit.k = s.k;
    fit.iterations = 50;
    fit.seed = mix_seed(21, static_cast<std::uint64_t>(s.k));
    LdaModel model = fit_lda(corpus, fit);
    const double expected =
        s.criterion == "cao_juan" ? cao_juan(model.beta) : optop(corpus, model, 0.05);
    CHECK(s.value == expected);  // byte-exact through %.17g
  }
}

TEST_CASE("mc-run is reproducible and reports match the stored rows") {
  auto dir = oracles::make_temp_dir("cli_mc");
  const std::string base = " --preset mini --replications 2 --seed 7 --k-min 2 --k-max 4 "
                           "--criteria sbic,optop:0.1 --threads 2 --out ";
  CHECK(run("mc-run" + base + (dir / "a").string()) == 0);
  CHECK(run("mc-run" + base + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));

  CHECK(run("report --in " + (dir / "a").string() + " --out " + (dir / "rep").string() +
            " --svg") == 0);
  CHECK(slurp(dir / "rep" / "summary.csv") == slurp(dir / "a" / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "rep" / "histogram_sbic.svg"));
  auto summary = slurp(dir / "rep" / "summary.csv");
  CHECK(summary.rfind("criterion,std,mean,median,skewness\n", 0) == 0);
}

TEST_CASE("LDASELECT_THREADS is honored as a fallback") {
  auto dir = oracles::make_temp_dir("cli_env");
  const std::string cmd = binary_path() + " mc-run --preset mini --replications 2 --seed 7 "
                          "--k-min 2 --k-max 3 --criteria cao_juan --out " +
                          (dir / "a").string();
  int status = std::system(("LDASELECT_THREADS=2 " + cmd).c_str());
  CHECK(WEXITSTATUS(status) == 0);
  // same rows regardless of the env-provided parallelism
  CHECK(run("mc-run --preset mini --replications 2 --seed 7 --k-min 2 --k-max 3 "
            "--criteria cao_juan --threads 1 --out " +
            (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
}

TEST_CASE("validation failures exit 1 with a single machine-parsable line") {
  auto dir = oracles::make_temp_dir("cli_err");
  CHECK(run("generate --preset mini --seed 3 --out " + (dir / "c.txt").string()) == 0);

  // K-range beyond the vocabulary
  int code = run("score --corpus " + (dir / "c.txt").string() +
                     " --k-min 2 --k-max 500 --iterations 5 --out " + (dir / "s.csv").string(),
                 dir / "err1.txt");
  CHECK(code == 1);
  auto err = slurp(dir / "err1.txt");
  CHECK(err.rfind("error: validation: ", 0) == 0);
  CHECK(std::count(err.begin(), err.end(), '\n') == 1);
  CHECK(err.find("vocabulary") != std::string::npos);

  // mismatched model/DGP dimensions
  save_dgp(materialize_dgp("mini"), dir / "dgp");
  CHECK(run("fit --corpus " + (dir / "c.txt").string() + " --k 3 --iterations 5 --out " +
            (dir / "model").string()) == 0);
  {
    std::ofstream bad(dir / "model" / "beta.csv", std::ios::trunc);
    for (int r = 0; r < 3; ++r) bad << "0.5,0.5\n";
  }
  code = run("evaluate --true-dir " + (dir / "dgp").string() + " --est-dir " +
                 (dir / "model").string() + " --out " + (dir / "e.csv").string(),
             dir / "err2.txt");
  CHECK(code == 1);
  err = slurp(dir / "err2.txt");
  CHECK(err.rfind("error: validation: ", 0) == 0);

  // unknown subcommand/flag
  CHECK(run("frobnicate", dir / "err3.txt") == 1);
  CHECK(slurp(dir / "err3.txt").rfind("error: validation: ", 0) == 0);
}

TEST_CASE("I/O failures exit 3") {
  auto dir = oracles::make_temp_dir("cli_io");
  int code = run("generate --preset mini --seed 3 --out " +
                     (dir / "missing" / "deep" / "c.txt").string(),
                 dir / "err.txt");
  CHECK(code == 3);
  CHECK(slurp(dir / "err.txt").rfind("error: io: ", 0) == 0);
}

TEST_CASE("unknown config keys are rejected through the CLI") {
  auto dir = oracles::make_temp_dir("cli_cfg");
  std::ofstream(dir / "cfg.json") << R"({"dgp":"mini","banana":1})";
  int code = run("mc-run --config " + (dir / "cfg.json").string() + " --out " +
                     (dir / "out").string(),
                 dir / "err.txt");
  CHECK(code == 1);
  CHECK(slurp(dir / "err.txt").find("unknown config key") != std::string::npos);
}
