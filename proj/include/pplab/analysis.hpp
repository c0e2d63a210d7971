#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pplab/engine.hpp"

namespace pplab {

inline double effective_horizon(double gamma) {  // T_gamma
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("effective_horizon: gamma in [0,1)");
  return 1.0 / (1.0 - gamma);
}

inline double convex_lower_constant(double gamma) {  // C_gamma
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ConfigError("convex_lower_constant: gamma in [0,1)");
  return gamma / (2.0 * (1.0 - gamma));
}

/// Upper bound on penalized-fast-search regret for penalty r:
/// (v*r + 1) * (ceil(log2 log2 T) + 1) + (1+gamma)*gamma^r*T / (2(1-gamma)(1-gamma^r)).
inline double pfs_regret_bound(double v, std::int64_t r, double gamma, std::int64_t T) {
  if (r < 1) throw ConfigError("pfs_regret_bound: r >= 1 required");
  const double phases = double(phase_count_bound(std::uint64_t(T)));
  double tail = 0.0;
  if (gamma > 0.0) {
    const double gr = std::pow(gamma, double(r));
    tail = (1.0 + gamma) * gr * double(T) / (2.0 * (1.0 - gamma) * (1.0 - gr));
  }
  return (v * double(r) + 1.0) * phases + tail;
}

/// Regret bound for the tuned penalty r*, in its displayed form
/// (2 v g0 T_g0 log(cT) + 1 + v)(log2 log2 T + 1) + 4 T_g0 with c = 4 log 2.
inline double tuned_pfs_regret_bound(double v, double gamma0, std::int64_t T) {
  const double t_g0 = effective_horizon(gamma0);
  const double c = 4.0 * std::log(2.0);
  const double loglog = std::log2(std::log2(double(T)));
  return (2.0 * v * gamma0 * t_g0 * std::log(c * double(T)) + 1.0 + v) * (loglog + 1.0) +
         4.0 * t_g0;
}

inline double monotone_lower_bound(std::int64_t T) {  // (1/4) sqrt(T - sqrt(T))
  return 0.25 * std::sqrt(double(T) - std::sqrt(double(T)));
}

/// Lower bound for convex decreasing sequences:
/// max((1/8) sqrt(T - sqrt(T)), sqrt(C_g (T - sqrt(T_g T)) (1/2 - sqrt(C_g/T)))).
inline double convex_lower_bound(double gamma, std::int64_t T) {
  const double first = 0.125 * std::sqrt(double(T) - std::sqrt(double(T)));
  const double cg = convex_lower_constant(gamma);
  const double tg = effective_horizon(gamma);
  const double inner =
      cg * (double(T) - std::sqrt(tg * double(T))) * (0.5 - std::sqrt(cg / double(T)));
  return inner > 0.0 ? std::max(first, std::sqrt(inner)) : first;
}

inline bool convex_lower_applicable(double gamma, std::int64_t T) {
  if (gamma <= 0.0) return false;
  return double(T) >=
         effective_horizon(gamma) + 2.0 * std::log(2.0 / gamma) / std::log(1.0 / gamma);
}

/// All closed-form quantities for one configuration. Inapplicable values are
/// still reported, with their flag cleared.
struct BoundReport {
  double t_gamma = 0.0;
  double c_gamma = 0.0;
  double eq_reggamma_bound = 0.0;  // pfs_regret_bound
  double thm1_bound = 0.0;         // tuned_pfs_regret_bound, needs gamma0
  double prop1_lower = 0.0;
  double prop6_lower = 0.0;
  double kau_lower = 0.0;        // T_gamma / 12
  double kl_lower = 0.0;         // C log log T
  double corollary_lower = 0.0;  // max of the two above
  bool thm1_applicable = false;  // 1/2 < gamma < gamma0 < 1 and T > 4
  bool prop6_applicable = false;
};

inline BoundReport bound_report(double gamma, std::optional<double> gamma0, double v,
                                std::int64_t T, std::int64_t r, double kl_constant = 1.0) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("bound_report: gamma in [0,1)");
  if (T < 1) throw ConfigError("bound_report: T >= 1");
  if (r < 1) throw ConfigError("bound_report: r >= 1");
  BoundReport rep;
  rep.t_gamma = effective_horizon(gamma);
  rep.c_gamma = convex_lower_constant(gamma);
  rep.eq_reggamma_bound = pfs_regret_bound(v, r, gamma, T);
  if (gamma0) {
    if (!(*gamma0 > gamma && *gamma0 < 1.0))
      throw ConfigError("bound_report: gamma0 must lie in (gamma, 1)");
    rep.thm1_bound = tuned_pfs_regret_bound(v, *gamma0, T);
    rep.thm1_applicable = gamma > 0.5 && T > 4;
  }
  rep.prop1_lower = monotone_lower_bound(T);
  rep.prop6_lower = convex_lower_bound(gamma, T);
  rep.prop6_applicable = convex_lower_applicable(gamma, T);
  rep.kau_lower = rep.t_gamma / 12.0;
  rep.kl_lower = T >= 2 ? kl_constant * std::log(std::log(double(T))) : 0.0;
  rep.corollary_lower = std::max(rep.kau_lower, rep.kl_lower);
  return rep;
}

// ---------------------------------------------------------------------------
// Penalty tuning: minimize f(r) = r + gamma0^r T / ((1-gamma0)(1-gamma0^r)).

enum class RStarMethod { Scan, ClosedForm };

struct RStarResult {
  std::int64_t r_star = 1;       // by the requested method
  double r_bar_star = 0.0;       // continuous minimizer
  double f_value = 0.0;          // gamma0^r_bar_star from the closed form
  std::int64_t scan_argmin = 1;  // best integer by exhaustive scan
  int discrepancy = 0;           // |ceil(r_bar_star) - scan_argmin|
  RStarMethod method = RStarMethod::Scan;
};

inline double penalty_objective(std::int64_t r, double gamma0, std::int64_t T) {
  const double gr = std::pow(gamma0, double(r));
  return double(r) + gr * double(T) / ((1.0 - gamma0) * (1.0 - gr));
}

/// Closed-form gamma0^r_bar from the stationarity condition's quadratic,
/// (2 + D - sqrt((2+D)^2 - 4))/2 written against its conjugate so large D
/// does not cancel.
inline double penalty_objective_minimizer_power(double gamma0, std::int64_t T) {
  const double d = double(T) * std::log(1.0 / gamma0) / (1.0 - gamma0);
  return 2.0 / (2.0 + d + std::sqrt((2.0 + d) * (2.0 + d) - 4.0));
}

/// Integer penalty minimizing f. The scan accepts any gamma0 in (0,1); the
/// closed form needs 1/2 < gamma0 < 1 and T > 4 for its bracket guarantees.
/// Both routes are always computed and compared; the ceiling of the
/// continuous minimizer and the scanned argmin may differ by one.
inline RStarResult r_star(double gamma0, std::int64_t T,
                          RStarMethod method = RStarMethod::Scan) {
  if (!(gamma0 > 0.0 && gamma0 < 1.0)) throw ConfigError("r_star: gamma0 in (0,1)");
  if (T < 2) throw ConfigError("r_star: T >= 2");
  if (method == RStarMethod::ClosedForm && !(gamma0 > 0.5 && T > 4))
    throw ConfigError("r_star: closed form requires 1/2 < gamma0 < 1 and T > 4");

  RStarResult out;
  out.method = method;
  out.f_value = penalty_objective_minimizer_power(gamma0, T);
  out.r_bar_star = std::log(out.f_value) / std::log(gamma0);

  // f is convex, so the scan can stop at the first increase. The range cap
  // keeps gamma0^r below 1/T^2.
  const std::int64_t r_max = std::max<std::int64_t>(
      2, std::int64_t(std::ceil(2.0 * std::log(double(T)) / std::log(1.0 / gamma0))) + 2);
  std::int64_t best_r = 1;
  double best_f = penalty_objective(1, gamma0, T);
  for (std::int64_t r = 2; r <= r_max; ++r) {
    const double f = penalty_objective(r, gamma0, T);
    if (f < best_f) {
      best_f = f;
      best_r = r;
    } else if (f > best_f) {
      break;
    }
  }
  out.scan_argmin = best_r;

  const std::int64_t ceiled = std::max<std::int64_t>(1, std::int64_t(std::ceil(out.r_bar_star)));
  out.discrepancy = int(std::llabs(ceiled - out.scan_argmin));
  out.r_star = method == RStarMethod::Scan ? out.scan_argmin : ceiled;
  return out;
}

/// The necessary condition for a strategic rejection at a node:
/// v - p < gamma^r / ((1-gamma)(1-gamma^r)) * (delta_l + gamma * delta_r).
inline bool rejection_condition(double v, double p_n, double delta_l, double delta_r,
                                double gamma, std::int64_t r) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("rejection_condition: gamma in (0,1)");
  if (r < 1) throw ConfigError("rejection_condition: r >= 1");
  const double gr = std::pow(gamma, double(r));
  const double coeff = gr / ((1.0 - gamma) * (1.0 - gr));
  return v - p_n < coeff * (delta_l + gamma * delta_r);
}

// ---------------------------------------------------------------------------
// Numeric checks of the appendix lemmas.

struct CheckEntry {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckEntry> entries;
  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

inline double decreasing_log_ratio(double gamma) {  // g(gamma) = log(1/gamma)/(1-gamma)
  return std::log(1.0 / gamma) / (1.0 - gamma);
}

struct LemmaGridSpec {
  int g_points = 1000;
  double gamma_lo = 0.001;
  double gamma_hi = 0.999;
  std::vector<std::int64_t> f_horizons = {10, 1000, 1000000};
  int f_points = 200;
  std::vector<std::pair<double, std::int64_t>> bracket_points = {
      {0.6, 10}, {0.9, 1000}, {0.99, 1000000}};
};

/// Grid evaluation of the monotonicity and bracket facts the tuned bound
/// rests on. Failures become report entries, never exceptions.
inline CheckReport lemma_numeric_checks(const LemmaGridSpec& spec = {}) {
  if (spec.g_points < 10) throw ConfigError("lemma_numeric_checks: need >= 10 grid points");
  CheckReport report;

  {  // g strictly decreasing on (0, 1)
    bool ok = true;
    double worst = 0.0;
    double prev = decreasing_log_ratio(spec.gamma_lo);
    for (int i = 1; i < spec.g_points; ++i) {
      const double gamma = spec.gamma_lo + (spec.gamma_hi - spec.gamma_lo) * double(i) /
                                               double(spec.g_points - 1);
      const double cur = decreasing_log_ratio(gamma);
      if (!(cur < prev)) {
        ok = false;
        worst = gamma;
      }
      prev = cur;
    }
    std::ostringstream os;
    os << spec.g_points << "-point grid on (" << spec.gamma_lo << ", " << spec.gamma_hi
       << ")";
    if (!ok) os << "; first non-decrease near gamma = " << worst;
    report.entries.push_back({"log-ratio g decreasing", ok, os.str()});
  }

  {  // the minimizer power F increasing in gamma0, for each horizon
    bool ok = true;
    std::string where;
    for (std::int64_t T : spec.f_horizons) {
      double prev = penalty_objective_minimizer_power(0.505, T);
      for (int i = 1; i < spec.f_points; ++i) {
        const double g0 = 0.505 + (0.995 - 0.505) * double(i) / double(spec.f_points - 1);
        const double cur = penalty_objective_minimizer_power(g0, T);
        if (!(cur > prev)) {
          ok = false;
          where = "T = " + std::to_string(T);
        }
        prev = cur;
      }
    }
    report.entries.push_back({"minimizer power F increasing", ok,
                              ok ? "all horizons" : "violated at " + where});
  }

  {  // bracket 1/(4 T log 2) <= F <= 2/T
    bool ok = true;
    std::string where;
    for (const auto& [g0, T] : spec.bracket_points) {
      const double f = penalty_objective_minimizer_power(g0, T);
      const double lo = 1.0 / (4.0 * double(T) * std::log(2.0));
      const double hi = 2.0 / double(T);
      if (!(f >= lo && f <= hi)) {
        ok = false;
        where = "gamma0 = " + std::to_string(g0) + ", T = " + std::to_string(T);
      }
    }
    report.entries.push_back(
        {"minimizer power bracket", ok, ok ? "all points" : "violated at " + where});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Monte-Carlo check of the acceptance-time expectation inequality
// E[kappa*] >= 1 / (32 E[v - p_kappa*]) for truthful buyers, v ~ U[1/2, 1].

struct Lemma3Report {
  double mc_kappa_mean = 0.0;
  double mc_gap_mean = 0.0;
  double product = 0.0;     // mc_kappa_mean * mc_gap_mean
  double product_se = 0.0;  // delta-method standard error
  double exact_kappa_mean = 0.0;
  double exact_gap_mean = 0.0;
  bool pass = false;  // product >= 1/32 - 3 se
};

/// `prices` must be non-increasing with p_1 = 1 and final price <= 1/2 so
/// every sampled valuation accepts before the horizon. The truthful
/// acceptance time is piecewise constant in v, so each sample reduces to a
/// search over the price list; the exact means integrate the same intervals.
inline Lemma3Report lemma3_monte_carlo(const std::vector<double>& prices,
                                       std::int64_t samples, std::uint64_t seed) {
  if (samples < 10000) throw ConfigError("lemma3_monte_carlo: samples >= 10^4");
  if (prices.empty() || prices.front() != 1.0)
    throw ConfigError("lemma3_monte_carlo: prices must start at 1");
  for (std::size_t i = 1; i < prices.size(); ++i)
    if (prices[i] > prices[i - 1])
      throw ConfigError("lemma3_monte_carlo: prices must be non-increasing");
  if (prices.back() > 0.5)
    throw ConfigError("lemma3_monte_carlo: final price must be <= 1/2 so kappa* exists");

  // First index (1-based) with p_t <= v; prices are sorted descending.
  auto kappa_of = [&prices](double v) {
    auto it = std::lower_bound(prices.begin(), prices.end(), v,
                               [](double price, double val) { return price > val; });
    return std::int64_t(it - prices.begin()) + 1;
  };

  Lemma3Report rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.5, 1.0);
  double sum_k = 0.0, sum_g = 0.0, sum_kk = 0.0, sum_gg = 0.0, sum_kg = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const double v = uni(rng);
    const double k = double(kappa_of(v));
    const double g = v - prices[std::size_t(k - 1)];
    sum_k += k;
    sum_g += g;
    sum_kk += k * k;
    sum_gg += g * g;
    sum_kg += k * g;
  }
  const double n = double(samples);
  rep.mc_kappa_mean = sum_k / n;
  rep.mc_gap_mean = sum_g / n;
  rep.product = rep.mc_kappa_mean * rep.mc_gap_mean;
  const double var_k = (sum_kk / n - rep.mc_kappa_mean * rep.mc_kappa_mean) / n;
  const double var_g = (sum_gg / n - rep.mc_gap_mean * rep.mc_gap_mean) / n;
  const double cov = (sum_kg / n - rep.mc_kappa_mean * rep.mc_gap_mean) / n;
  const double var_p = rep.mc_gap_mean * rep.mc_gap_mean * var_k +
                       rep.mc_kappa_mean * rep.mc_kappa_mean * var_g +
                       2.0 * rep.mc_kappa_mean * rep.mc_gap_mean * cov;
  rep.product_se = var_p > 0.0 ? std::sqrt(var_p) : 0.0;

  // Exact means: kappa*(v) = kappa exactly when v lies in [p_kappa, p_{kappa-1}),
  // uniform density 2 on [1/2, 1].
  for (std::size_t kappa = 1; kappa <= prices.size(); ++kappa) {
    const double lo = std::max(prices[kappa - 1], 0.5);
    const double hi = std::min(kappa == 1 ? 1.0 : prices[kappa - 2], 1.0);
    if (hi <= lo) continue;
    const double p = prices[kappa - 1];
    rep.exact_kappa_mean += double(kappa) * 2.0 * (hi - lo);
    rep.exact_gap_mean += (hi - p) * (hi - p) - (lo - p) * (lo - p);
  }

  rep.pass = rep.product >= 1.0 / 32.0 - 3.0 * rep.product_se;
  return rep;
}

// ---------------------------------------------------------------------------
// Empirical lower-bound witnesses.

struct WorstCaseReport {
  double v0 = 0.0;      // regret-maximizing valuation on the grid
  double regret = 0.0;  // regret at v0
  std::optional<std::int64_t> kappa_at_v0;
  std::optional<std::int64_t> kappa_min;  // acceptance time at v = 1
  std::optional<std::int64_t> kappa_max;  // acceptance time at v = 1/2
};

/// Plays the full game at every grid valuation and returns the regret
/// maximizer. Exhibits the monotone and convex lower-bound witnesses.
inline WorstCaseReport worst_case_valuation(const SellerMachine& seller, std::int64_t T,
                                            double gamma, BuyerKind buyer_kind,
                                            const std::vector<double>& v_grid) {
  if (buyer_kind != BuyerKind::Truthful && buyer_kind != BuyerKind::DpOptimal)
    throw ConfigError("worst_case_valuation: buyer must be truthful or dp");
  if (v_grid.empty()) throw ConfigError("worst_case_valuation: empty grid");

  WorstCaseReport rep;
  bool first = true;
  auto play_at = [&](double v) {
    GameConfig cfg{T, gamma, v};
    BuyerSpec spec;
    spec.kind = buyer_kind;
    return play_and_score(seller, make_buyer(spec, seller, cfg), cfg);
  };
  for (double v : v_grid) {
    const GameOutcome out = play_at(v);
    if (first || out.regret > rep.regret) {
      rep.v0 = v;
      rep.regret = out.regret;
      rep.kappa_at_v0 = out.kappa_star;
      first = false;
    }
  }
  rep.kappa_min = play_at(1.0).kappa_star;
  rep.kappa_max = play_at(0.5).kappa_star;
  return rep;
}

inline std::vector<double> uniform_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (double x = lo; x <= hi + 1e-12; x += step) grid.push_back(std::min(x, hi));
  return grid;
}

}  // namespace pplab
