#include "ldaselect/sbic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>

#include <mpfr.h>

#include <json.hpp>

#include "ldaselect/csv.hpp"
#include "ldaselect/errors.hpp"

namespace ldaselect {

long regular_dimension(int k, int vocab_size, int num_docs) {
  return static_cast<long>(num_docs) * (k - 1) + static_cast<long>(k) * (vocab_size - 1);
}

LearningCoefficient learning_coefficient(int k_sub, int k, int vocab_size, int num_docs) {
  if (vocab_size < 2) throw ValidationError("vocabulary size must be >= 2");
  if (num_docs < 2) throw ValidationError("document count must be >= 2");
  if (k_sub < 1) throw ValidationError("k_sub must be >= 1");
  if (k_sub > k)
    throw ValidationError("k_sub " + std::to_string(k_sub) + " exceeds K " + std::to_string(k));

  LearningCoefficient out;
  out.k_sub = k_sub;
  out.k = k;
  out.vocab_size = vocab_size;
  out.num_docs = num_docs;

  if (k_sub == k) {
    out.lambda = 0.5 * static_cast<double>(regular_dimension(k, vocab_size, num_docs));
    out.multiplicity = 1;
    return out;
  }

  // Redundant-topic block: rank r = k - k_sub deficiency of a factorization
  // with M = J rows (document weights of the unused topics) and N = I - 1
  // columns (simplex tangent of their word distributions). The deficiency
  // rank saturates at the block's maximal rank min(M, N).
  const long M = num_docs;
  const long N = vocab_size - 1;
  const long r = std::min<long>(k - k_sub, std::min(M, N));

  double block;
  int multiplicity = 1;
  if (M + r < N) {
    block = 0.5 * static_cast<double>(r * M);
  } else if (N + r < M) {
    block = 0.5 * static_cast<double>(r * N);
  } else {
    block = static_cast<double>(2 * r * (M + N) - (M - N) * (M - N) - r * r) / 8.0;
    multiplicity = ((M + N + r) % 2 == 0) ? 1 : 2;
  }
  out.lambda = 0.5 * static_cast<double>(regular_dimension(k_sub, vocab_size, num_docs)) + block;
  out.multiplicity = multiplicity;
  return out;
}

namespace {

// Minimal RAII wrapper over mpfr_t; every value carries its own precision.
class Big {
 public:
  explicit Big(mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
  Big(const Big& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
  Big& operator=(const Big& o) {
    if (this != &o) mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  ~Big() { mpfr_clear(v_); }

  static Big from_log(double log_value, mpfr_prec_t prec) {
    Big b(prec);
    mpfr_set_d(b.v_, log_value, MPFR_RNDN);
    mpfr_exp(b.v_, b.v_, MPFR_RNDN);
    return b;
  }

  void add(const Big& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); }
  void sub(const Big& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); }
  void mul(const Big& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); }
  void add_product(const Big& a, const Big& b, mpfr_prec_t prec) {
    Big t(prec);
    mpfr_mul(t.v_, a.v_, b.v_, MPFR_RNDN);
    mpfr_add(v_, v_, t.v_, MPFR_RNDN);
  }
  void set_exp_of(const Big& log_value) { mpfr_exp(v_, log_value.v_, MPFR_RNDN); }
  void set_d(double x) { mpfr_set_d(v_, x, MPFR_RNDN); }
  void set(const Big& o) { mpfr_set(v_, o.v_, MPFR_RNDN); }
  void set_log_of(const Big& o) { mpfr_log(v_, o.v_, MPFR_RNDN); }
  void halve_sum(const Big& a, const Big& b) {
    mpfr_add(v_, a.v_, b.v_, MPFR_RNDN);
    mpfr_div_2ui(v_, v_, 1, MPFR_RNDN);
  }

  int sign() const { return mpfr_sgn(v_); }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int cmp(const Big& o) const { return mpfr_cmp(v_, o.v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  const mpfr_t& raw() const { return v_; }
  mpfr_t& raw() { return v_; }

 private:
  mpfr_t v_;
};

// q(x) = x^2 + b x - c evaluated at x = exp(y).
void eval_quadratic_at_log(Big& out, const Big& y, const Big& b, const Big& c, mpfr_prec_t prec) {
  Big x(prec);
  x.set_exp_of(y);
  Big sq(prec);
  mpfr_sqr(sq.raw(), x.raw(), MPFR_RNDN);
  mpfr_mul(x.raw(), x.raw(), b.raw(), MPFR_RNDN);
  mpfr_add(out.raw(), sq.raw(), x.raw(), MPFR_RNDN);
  mpfr_sub(out.raw(), out.raw(), c.raw(), MPFR_RNDN);
}

}  // namespace

std::map<int, double> compute_sbic(const SbicInput& input, const SbicOptions& options,
                                   std::vector<SbicDebugEntry>* debug) {
  const int I = input.vocab_size;
  const int J = input.num_docs;
  return compute_sbic(
      input, [I, J](int k_sub, int k) { return learning_coefficient(k_sub, k, I, J); }, options,
      debug);
}

std::map<int, double> compute_sbic(const SbicInput& input, const CoefficientFn& coefficients,
                                   const SbicOptions& options, std::vector<SbicDebugEntry>* debug) {
  if (input.log_likelihoods.empty()) throw ValidationError("sBIC needs at least one candidate model");
  if (input.total_words < 2) throw ValidationError("sBIC needs N >= 2 so log log N is defined");
  if (options.mantissa_bits < 24 || options.mantissa_bits > 1 << 20)
    throw ValidationError("mantissa_bits out of range");

  std::vector<int> ks;
  std::vector<double> lls;
  for (const auto& [k, ll] : input.log_likelihoods) {
    if (!std::isfinite(ll))
      throw ValidationError("non-finite log-likelihood for K=" + std::to_string(k));
    if (!ks.empty() && k != ks.back() + 1)
      throw ValidationError("candidate K-range is not contiguous between " +
                            std::to_string(ks.back()) + " and " + std::to_string(k));
    ks.push_back(k);
    lls.push_back(ll);
  }

  const double log_n = std::log(static_cast<double>(input.total_words));
  const double log_log_n = std::log(log_n);
  const int count = static_cast<int>(ks.size());

  // penalized log-terms log L_{ij} for every model i and sub-model j <= i
  std::vector<std::vector<SbicSubmodelPenalty>> penalties(static_cast<std::size_t>(count));
  double shift = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    penalties[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(i) + 1);
    for (int j = 0; j <= i; ++j) {
      LearningCoefficient lc = coefficients(ks[static_cast<std::size_t>(j)], ks[static_cast<std::size_t>(i)]);
      if (!(lc.lambda > 0.0) || lc.multiplicity < 1)
        throw NumericalError("invalid learning coefficient for (k_sub=" +
                             std::to_string(ks[static_cast<std::size_t>(j)]) +
                             ", K=" + std::to_string(ks[static_cast<std::size_t>(i)]) + ")");
      SbicSubmodelPenalty p;
      p.k_sub = ks[static_cast<std::size_t>(j)];
      p.lambda = lc.lambda;
      p.multiplicity = lc.multiplicity;
      p.log_term = lls[static_cast<std::size_t>(i)] - lc.lambda * log_n +
                   (lc.multiplicity - 1) * log_log_n;
      if (!std::isfinite(p.log_term))
        throw NumericalError("penalized term overflowed for K=" +
                             std::to_string(ks[static_cast<std::size_t>(i)]));
      penalties[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = p;
      shift = std::max(shift, p.log_term);
    }
  }

  const auto prec = static_cast<mpfr_prec_t>(options.mantissa_bits);
  std::vector<Big> solved;  // L'_i in the shifted frame, ascending K
  solved.reserve(static_cast<std::size_t>(count));
  std::map<int, double> result;
  if (debug) debug->clear();

  for (int i = 0; i < count; ++i) {
    const auto& row = penalties[static_cast<std::size_t>(i)];
    long steps = 0;
    Big root_log(prec);  // log L'_i (shifted frame)

    if (i == 0) {
      root_log.set_d(row[0].log_term - shift);
      Big lp(prec);
      lp.set_exp_of(root_log);
      solved.push_back(lp);
    } else {
      Big sum_prior(prec);  // b-part: sum of already-solved masses
      for (int j = 0; j < i; ++j) sum_prior.add(solved[static_cast<std::size_t>(j)]);
      Big diag = Big::from_log(row[static_cast<std::size_t>(i)].log_term - shift, prec);
      Big b(prec);
      b.set(sum_prior);
      b.sub(diag);
      Big c(prec);
      double hi_log = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < i; ++j) {
        Big term = Big::from_log(row[static_cast<std::size_t>(j)].log_term - shift, prec);
        c.add_product(term, solved[static_cast<std::size_t>(j)], prec);
        hi_log = std::max(hi_log, row[static_cast<std::size_t>(j)].log_term - shift);
      }
      hi_log = std::max(hi_log, row[static_cast<std::size_t>(i)].log_term - shift);
      if (!(c.sign() > 0))
        throw NumericalError("sBIC averaging sum vanished for K=" +
                             std::to_string(ks[static_cast<std::size_t>(i)]) +
                             "; raise mantissa_bits");

      // Deterministic bracket in log space: the root is at most the largest
      // penalty-adjusted term and at least c / (1 + sum of prior masses).
      Big y_hi(prec);
      y_hi.set_d(hi_log);
      Big y_lo(prec);
      {
        Big denom(prec);
        denom.set_d(1.0);
        denom.add(sum_prior);
        Big lo(prec);
        mpfr_div(lo.raw(), c.raw(), denom.raw(), MPFR_RNDN);
        y_lo.set_log_of(lo);
      }
      if (y_lo.cmp(y_hi) > 0) y_lo.set(y_hi);

      // widen both ends a few hundred ulps: the root can sit exactly on an
      // endpoint (regular coefficients make it the largest term itself)
      {
        Big slack(prec);
        mpfr_abs(slack.raw(), y_hi.raw(), MPFR_RNDN);
        if (mpfr_cmp_ui(slack.raw(), 1) < 0) mpfr_set_ui(slack.raw(), 1, MPFR_RNDN);
        mpfr_mul_2si(slack.raw(), slack.raw(), -(options.mantissa_bits - 16), MPFR_RNDN);
        mpfr_add(y_hi.raw(), y_hi.raw(), slack.raw(), MPFR_RNDN);
        mpfr_sub(y_lo.raw(), y_lo.raw(), slack.raw(), MPFR_RNDN);
      }

      Big q_lo(prec), q_hi(prec);
      eval_quadratic_at_log(q_lo, y_lo, b, c, prec);
      eval_quadratic_at_log(q_hi, y_hi, b, c, prec);
      if (q_lo.sign() > 0 || q_hi.sign() < 0)
        throw NumericalError("sBIC root bracket failed for K=" +
                             std::to_string(ks[static_cast<std::size_t>(i)]));

      // Bisection on the sign of the quadratic; log-space keeps the step
      // count bounded by log2(bracket width) + mantissa bits. The width
      // tolerance is relative to the endpoint scale, and the loop also stops
      // once no representable midpoint exists between the brackets.
      Big width(prec), mid(prec), q_mid(prec), tol(prec), scale(prec);
      const long max_steps = 64LL * options.mantissa_bits + 65536;
      for (;;) {
        mpfr_sub(width.raw(), y_hi.raw(), y_lo.raw(), MPFR_RNDN);
        mpfr_abs(scale.raw(), y_hi.raw(), MPFR_RNDN);
        mpfr_abs(tol.raw(), y_lo.raw(), MPFR_RNDN);
        if (mpfr_cmp(tol.raw(), scale.raw()) > 0) mpfr_swap(tol.raw(), scale.raw());
        if (mpfr_cmp_ui(scale.raw(), 1) < 0) mpfr_set_ui(scale.raw(), 1, MPFR_RNDN);
        mpfr_mul_2si(tol.raw(), scale.raw(), -(options.mantissa_bits - 8), MPFR_RNDN);
        if (mpfr_cmp(width.raw(), tol.raw()) <= 0) break;
        if (++steps > max_steps)
          throw NumericalError("sBIC root bisection did not converge for K=" +
                               std::to_string(ks[static_cast<std::size_t>(i)]) +
                               "; raise mantissa_bits");
        mid.halve_sum(y_lo, y_hi);
        if (mpfr_cmp(mid.raw(), y_lo.raw()) <= 0 || mpfr_cmp(mid.raw(), y_hi.raw()) >= 0)
          break;  // brackets are adjacent at this precision
        eval_quadratic_at_log(q_mid, mid, b, c, prec);
        if (q_mid.sign() <= 0)
          y_lo.set(mid);
        else
          y_hi.set(mid);
      }
      root_log.halve_sum(y_lo, y_hi);
      Big lp(prec);
      lp.set_exp_of(root_log);
      if (!(lp.sign() > 0) || !lp.is_finite())
        throw NumericalError("sBIC root is not positive for K=" +
                             std::to_string(ks[static_cast<std::size_t>(i)]));
      solved.push_back(lp);
    }

    const double sbic_value = shift + root_log.to_double();
    if (!std::isfinite(sbic_value))
      throw NumericalError("sBIC value overflowed for K=" + std::to_string(ks[static_cast<std::size_t>(i)]));
    result[ks[static_cast<std::size_t>(i)]] = sbic_value;

    if (debug) {
      SbicDebugEntry entry;
      entry.k = ks[static_cast<std::size_t>(i)];
      entry.log_likelihood = lls[static_cast<std::size_t>(i)];
      entry.sbic = sbic_value;
      entry.mantissa_bits = options.mantissa_bits;
      entry.bisection_steps = steps;
      entry.penalties = row;
      debug->push_back(std::move(entry));
    }
  }
  return result;
}

void write_sbic_debug(const std::filesystem::path& path, const std::vector<SbicDebugEntry>& debug) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : debug) {
    nlohmann::json penalties = nlohmann::json::array();
    for (const auto& p : e.penalties)
      penalties.push_back({{"k_sub", p.k_sub},
                           {"lambda", p.lambda},
                           {"multiplicity", p.multiplicity},
                           {"log_term", p.log_term}});
    out.push_back({{"k", e.k},
                   {"log_likelihood", e.log_likelihood},
                   {"sbic", e.sbic},
                   {"mantissa_bits", e.mantissa_bits},
                   {"bisection_steps", e.bisection_steps},
                   {"penalties", std::move(penalties)}});
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot write sbic debug dump: " + path.string());
  f << out.dump(2) << '\n';
}

}  // namespace ldaselect
