#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pplab/analysis.hpp"
#include "pplab/engine.hpp"
#include "pplab/harness.hpp"
#include "pplab/price_tree.hpp"

namespace pplab {

struct VerifyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
    sxy += xs[i] * ys[i];
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double vx = sxx / n - (sx / n) * (sx / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  return cov / std::sqrt(vx * vy);
}

inline double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (sxy / n - (sx / n) * (sy / n)) / (sxx / n - (sx / n) * (sx / n));
}

/// dp buyer with a grid fallback when the state space trips the node cap.
inline GameOutcome play_dp_or_grid(const SellerMachine& seller, const GameConfig& cfg,
                                   std::string* buyer_ran = nullptr) {
  BuyerSpec spec;
  spec.kind = BuyerKind::DpOptimal;
  try {
    auto out = play_and_score(seller, make_buyer(spec, seller, cfg), cfg);
    if (buyer_ran) *buyer_ran = "dp";
    return out;
  } catch (const TractabilityError&) {
    spec.kind = BuyerKind::GridFalseValuation;
    if (buyer_ran) *buyer_ran = "grid";
    return play_and_score(seller, make_buyer(spec, seller, cfg), cfg);
  }
}

}  // namespace detail

/// Exact best response agrees with the 2^T brute-force oracle on random
/// configurations across every machine family.
inline VerifyResult verify_dp_oracle(std::uint64_t seed = 7, int configs = 500) {
  detail::Stopwatch clock;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gamma_dist(0.1, 0.95);
  std::uniform_real_distribution<double> v_dist(0.05, 0.95);
  std::uniform_real_distribution<double> beta_dist(0.3, 0.97);

  double worst_oracle = 0.0, worst_play = 0.0;
  int failures = 0;
  for (int i = 0; i < configs; ++i) {
    SellerSpec spec;
    switch (i % 6) {
      case 0:
        spec.kind = SellerKind::MonotoneGeometric;
        spec.beta = beta_dist(rng);
        break;
      case 1: spec.kind = SellerKind::FastSearch; break;
      case 2:
      case 3:
      case 4:
        spec.kind = SellerKind::Pfs;
        spec.r = std::int64_t(i % 6) - 1;  // r in {1, 2, 3}
        break;
      case 5: spec.kind = SellerKind::Bisection; break;
    }
    const GameConfig cfg{1 + std::int64_t(rng() % 12), gamma_dist(rng), v_dist(rng)};
    const SellerMachine seller = make_seller(spec, cfg.T);

    const double brute = brute_force_best_response(seller, cfg).surplus;
    const double optimal = optimal_surplus(seller, cfg);
    BuyerSpec dp;
    dp.kind = BuyerKind::DpOptimal;
    const double played =
        discounted_surplus(play_game(seller, make_buyer(dp, seller, cfg), cfg), cfg);

    worst_oracle = std::max(worst_oracle, std::abs(optimal - brute));
    worst_play = std::max(worst_play, std::abs(played - optimal));
    if (std::abs(optimal - brute) > 1e-9 || std::abs(played - optimal) > 1e-9) ++failures;
  }

  std::ostringstream os;
  os << configs << " random configs (T <= 12): max |dp - brute| = " << worst_oracle
     << ", max |played - dp| = " << worst_play << ", " << clock.seconds() << " s";
  return {"oracle equivalence", failures == 0 && clock.seconds() < 120.0, os.str()};
}

/// In dp-vs-pfs play every first rejection of a node satisfies the strategic
/// rejection inequality, with increments taken from the machine's own
/// reachable tree.
inline VerifyResult verify_prop3(std::uint64_t seed = 11, int games = 100) {
  detail::Stopwatch clock;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gamma_dist(0.01, 0.99);
  std::uniform_real_distribution<double> v_dist(0.0, 1.0);

  std::int64_t rejections_checked = 0;
  int violations = 0;
  for (int g = 0; g < games; ++g) {
    SellerSpec spec;
    spec.kind = SellerKind::Pfs;
    spec.r = 1 + std::int64_t(rng() % 5);
    const GameConfig cfg{2 + std::int64_t(rng() % 511), gamma_dist(rng), v_dist(rng)};
    const SellerMachine seller = make_seller(spec, cfg.T);

    BuyerSpec dp_spec;
    dp_spec.kind = BuyerKind::DpOptimal;
    BuyerPolicy buyer = make_buyer(dp_spec, seller, cfg).clone_fresh();
    MinPriceSearch<SellerMachine> minps;

    SellerMachine s = seller;
    for (std::int64_t t = 1; t <= cfg.T; ++t) {
      const double p = s.quote();
      const bool fresh = s.at_fresh_quote();
      const bool accepted = buyer.decide(t, p);
      if (!accepted && fresh) {
        ++rejections_checked;
        SellerMachine up = s;
        up.advance(true);
        const double delta_r = up.quote() - p;
        SellerMachine left = s;
        for (std::int64_t i = 0; i < spec.r; ++i) left.advance(false);
        const std::int64_t horizon = cfg.T - t - spec.r + 1;
        double delta_l = 0.0;
        if (horizon > 0)
          delta_l = std::max(0.0, p - minps.min_price(left, horizon));
        if (!rejection_condition(cfg.v, p, delta_l, delta_r, cfg.gamma, spec.r))
          ++violations;
      }
      s.advance(accepted);
    }
  }

  std::ostringstream os;
  os << games << " dp-vs-pfs games (T <= 512): " << rejections_checked
     << " first rejections checked, " << violations << " violations, " << clock.seconds()
     << " s";
  return {"rejection condition", violations == 0, os.str()};
}

/// Simulated penalized-fast-search regret never exceeds its closed-form
/// penalty bound on a deterministic parameter grid.
inline VerifyResult verify_prop4_dominance() {
  detail::Stopwatch clock;
  const double gammas[] = {0.2, 0.5, 0.8, 0.9, 0.95};
  const std::int64_t rs[] = {1, 2, 4, 8, 16};
  const std::int64_t horizons[] = {256, 4096};

  int checked = 0, violations = 0;
  double min_margin = 1e300;
  for (double gamma : gammas)
    for (std::int64_t r : rs)
      for (std::int64_t T : horizons) {
        const double v = checked % 2 == 0 ? 0.75 : 0.25;
        SellerSpec spec;
        spec.kind = SellerKind::Pfs;
        spec.r = r;
        const SellerMachine seller = make_seller(spec, T);
        const GameConfig cfg{T, gamma, v};
        const GameOutcome out = detail::play_dp_or_grid(seller, cfg);
        const double bound = pfs_regret_bound(v, r, gamma, T);
        min_margin = std::min(min_margin, bound - out.regret);
        if (out.regret > bound) ++violations;
        ++checked;
      }

  std::ostringstream os;
  os << checked << " grid configs (T up to 4096): " << violations
     << " violations, smallest bound margin = " << min_margin << ", " << clock.seconds()
     << " s";
  return {"penalty bound dominance", violations == 0, os.str()};
}

/// Regret of the tuned penalty r* stays below the tuned closed-form bound on
/// sampled admissible configurations.
inline VerifyResult verify_thm1_dominance(std::uint64_t seed = 13, int configs = 25) {
  detail::Stopwatch clock;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  int violations = 0;
  double min_margin = 1e300;
  for (int i = 0; i < configs; ++i) {
    const double gamma0 = 0.55 + 0.42 * uni(rng);
    const double gamma = 0.505 + (gamma0 - 0.515) * uni(rng);
    const std::int64_t T =
        std::int64_t(std::llround(std::exp(std::log(64.0) + uni(rng) * std::log(4096.0 / 64.0))));
    const double v = 0.05 + 0.9 * uni(rng);
    const auto tuned = r_star(gamma0, T, RStarMethod::ClosedForm);

    SellerSpec spec;
    spec.kind = SellerKind::Pfs;
    spec.r = tuned.r_star;
    const SellerMachine seller = make_seller(spec, T);
    const GameConfig cfg{T, gamma, v};
    const GameOutcome out = detail::play_dp_or_grid(seller, cfg);
    const double bound = tuned_pfs_regret_bound(v, gamma0, T);
    min_margin = std::min(min_margin, bound - out.regret);
    if (out.regret > bound) ++violations;
  }

  std::ostringstream os;
  os << configs << " sampled configs (1/2 < gamma < gamma0, T in [64, 4096]): " << violations
     << " violations, smallest bound margin = " << min_margin << ", " << clock.seconds()
     << " s";
  return {"tuned bound dominance", violations == 0, os.str()};
}

/// Plain fast search against a truthful buyer stays below (v+1)(ceil(log2
/// log2 T) + 1) across horizons 2^4 .. 2^20.
inline VerifyResult verify_truthful_fast_search() {
  detail::Stopwatch clock;
  int checked = 0, violations = 0;
  double min_margin = 1e300;
  for (int e = 4; e <= 20; ++e) {
    const std::int64_t T = std::int64_t{1} << e;
    const SellerMachine seller = make_seller(SellerSpec{.kind = SellerKind::FastSearch}, T);
    for (int vi = 1; vi <= 9; ++vi) {
      const double v = 0.1 * vi;
      const GameConfig cfg{T, 0.0, v};
      BuyerSpec spec;  // truthful
      const GameOutcome out = play_and_score(seller, make_buyer(spec, seller, cfg), cfg);
      const double bound = (v + 1.0) * double(phase_count_bound(std::uint64_t(T)));
      min_margin = std::min(min_margin, bound - out.regret);
      if (out.regret > bound) ++violations;
      ++checked;
    }
  }
  std::ostringstream os;
  os << checked << " (T, v) pairs, T up to 2^20: " << violations
     << " violations, smallest bound margin = " << min_margin << ", " << clock.seconds()
     << " s";
  return {"truthful fast-search regret", violations == 0 && clock.seconds() < 60.0, os.str()};
}

/// A fine grid over [1/2, 1] exhibits a valuation whose truthful-buyer regret
/// against the tuned geometric monotone seller reaches the sqrt lower bound.
inline VerifyResult verify_prop1_witness() {
  detail::Stopwatch clock;
  const double gamma = 0.85;
  const std::int64_t horizons[] = {100, 1000, 10000};
  const std::vector<double> grid = uniform_grid(0.5, 1.0, 1e-3);

  bool all_found = true;
  std::ostringstream os;
  for (std::int64_t T : horizons) {
    SellerSpec spec;
    spec.kind = SellerKind::MonotoneGeometric;
    spec.beta = detail::auto_beta(gamma, T);
    const SellerMachine seller = make_seller(spec, T);
    const auto report = worst_case_valuation(seller, T, gamma, BuyerKind::Truthful, grid);
    const double target = 0.99 * monotone_lower_bound(T);
    if (report.regret < target) all_found = false;
    os << "T=" << T << ": regret " << report.regret << " at v0=" << report.v0
       << " (target " << target << "); ";
  }
  os << clock.seconds() << " s";
  return {"monotone lower-bound witness", all_found, os.str()};
}

/// Scan and closed form agree on r* to within one, and the minimizer power
/// stays inside [1/(4 T log 2), 2/T].
inline VerifyResult verify_rstar(std::uint64_t seed = 17, int pairs = 1000) {
  detail::Stopwatch clock;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  int max_disc = 0, disc_violations = 0, bracket_violations = 0;
  for (int i = 0; i < pairs; ++i) {
    const double gamma0 = 0.505 + 0.49 * uni(rng);
    const std::int64_t T =
        std::int64_t(std::llround(std::exp(std::log(5.0) + uni(rng) * std::log(1e5 / 5.0))));
    const auto result = r_star(gamma0, T, RStarMethod::ClosedForm);
    max_disc = std::max(max_disc, result.discrepancy);
    if (result.discrepancy > 1) ++disc_violations;
    const double lo = 1.0 / (4.0 * double(T) * std::log(2.0));
    const double hi = 2.0 / double(T);
    if (!(result.f_value >= lo && result.f_value <= hi)) ++bracket_violations;
  }
  std::ostringstream os;
  os << pairs << " random (gamma0, T): max scan/closed-form gap = " << max_disc << ", "
     << disc_violations << " gap violations, " << bracket_violations
     << " bracket violations, " << clock.seconds() << " s";
  return {"r* consistency and bracket", disc_violations == 0 && bracket_violations == 0,
          os.str()};
}

/// Grid monotonicity facts plus the acceptance-time expectation inequality
/// under Monte Carlo.
inline VerifyResult verify_lemma_numeric() {
  detail::Stopwatch clock;
  const CheckReport report = lemma_numeric_checks();
  std::ostringstream os;
  for (const auto& e : report.entries)
    os << e.name << ": " << (e.pass ? "ok" : "FAILED") << " (" << e.detail << "); ";
  os << clock.seconds() << " s";
  return {"scalar lemma grid checks", report.all_pass(), os.str()};
}

inline VerifyResult verify_lemma3(std::uint64_t seed = 19, int sequences = 20,
                                  std::int64_t samples = 100000) {
  detail::Stopwatch clock;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  int failures = 0;
  double min_product = 1e300;
  for (int i = 0; i < sequences; ++i) {
    const std::size_t len = 50 + rng() % 351;
    const double floor_price = 0.05 + 0.45 * uni(rng);
    std::vector<double> prices(len);
    prices.front() = 1.0;
    prices.back() = floor_price;
    for (std::size_t k = 1; k + 1 < len; ++k)
      prices[k] = floor_price + (1.0 - floor_price) * uni(rng);
    std::sort(prices.begin() + 1, prices.end() - 1, std::greater<double>());

    const auto rep = lemma3_monte_carlo(prices, samples, rng());
    min_product = std::min(min_product, rep.product);
    if (!rep.pass) ++failures;
  }
  std::ostringstream os;
  os << sequences << " random decreasing sequences at " << samples
     << " samples: min E[k]E[gap] = " << min_product << " (threshold "
     << 1.0 / 32.0 << " - 3 se), " << failures << " failures, " << clock.seconds() << " s";
  return {"acceptance-time expectation inequality", failures == 0, os.str()};
}

/// Qualitative reproduction of the two-seller comparison at gamma = 0.85,
/// v = 0.75: penalized fast search beats the tuned geometric monotone seller
/// by a wide factor, grows like log T, while the monotone seller grows
/// polynomially.
inline VerifyResult verify_figure2() {
  detail::Stopwatch clock;
  const double gamma = 0.85, v = 0.75;
  const std::vector<std::int64_t> horizons = {100,  178,  316,  562,  1000,
                                              1778, 3162, 5623, 10000};
  std::vector<double> log_t, pfs_regret, mono_log_regret, mono_log_t;

  double ratio_at_largest = 0.0;
  for (std::int64_t T : horizons) {
    const GameConfig cfg{T, gamma, v};
    BuyerSpec grid;
    grid.kind = BuyerKind::GridFalseValuation;

    SellerSpec mono_spec;
    mono_spec.kind = SellerKind::MonotoneGeometric;
    mono_spec.beta = detail::auto_beta(gamma, T);
    const SellerMachine mono = make_seller(mono_spec, T);
    const double mono_reg = play_and_score(mono, make_buyer(grid, mono, cfg), cfg).regret;

    SellerSpec pfs_spec;
    pfs_spec.kind = SellerKind::Pfs;
    pfs_spec.r = detail::ceil_log_horizon(T);
    const SellerMachine pfs = make_seller(pfs_spec, T);
    const double pfs_reg = play_and_score(pfs, make_buyer(grid, pfs, cfg), cfg).regret;

    log_t.push_back(std::log(double(T)));
    pfs_regret.push_back(pfs_reg);
    mono_log_t.push_back(std::log(double(T)));
    mono_log_regret.push_back(std::log(std::max(mono_reg, 1e-12)));
    if (T == horizons.back()) ratio_at_largest = mono_reg / pfs_reg;
  }

  const double corr = detail::pearson(log_t, pfs_regret);
  const double exponent = detail::ols_slope(mono_log_t, mono_log_regret);
  const bool pass = ratio_at_largest >= 5.0 && corr >= 0.95 && exponent >= 0.3;

  std::ostringstream os;
  os << "monotone/pfs regret ratio at T=10^4: " << ratio_at_largest
     << " (>= 5); pfs corr with log T: " << corr << " (>= 0.95); monotone growth exponent: "
     << exponent << " (>= 0.3); " << clock.seconds() << " s";
  return {"seller comparison shape", pass, os.str()};
}

/// Fast search and its penalized variants are consistent at every enumerable
/// depth.
inline VerifyResult verify_consistency() {
  detail::Stopwatch clock;
  int checked = 0, violations = 0;
  const std::int64_t horizons[] = {12, 100, 4096};
  for (std::int64_t T : horizons) {
    std::vector<SellerMachine> machines;
    machines.push_back(make_seller(SellerSpec{.kind = SellerKind::FastSearch}, T));
    for (std::int64_t r : {1, 2, 3}) {
      SellerSpec spec;
      spec.kind = SellerKind::Pfs;
      spec.r = r;
      machines.push_back(make_seller(spec, T));
      spec.semantics = PenaltySemantics::Literal;
      machines.push_back(make_seller(spec, T));
    }
    for (const auto& m : machines)
      for (int depth = 1; depth <= 12; ++depth) {
        if (!check_consistent(m, depth).consistent) ++violations;
        ++checked;
      }
  }
  std::ostringstream os;
  os << checked << " (machine, depth) checks up to depth 12: " << violations
     << " violations, " << clock.seconds() << " s";
  return {"machine consistency", violations == 0, os.str()};
}

inline std::vector<VerifyResult> run_all_verifications() {
  return {
      verify_dp_oracle(),          // 1
      verify_prop3(),              // 2
      verify_prop4_dominance(),    // 3
      verify_thm1_dominance(),     // 4
      verify_truthful_fast_search(),  // 5
      verify_prop1_witness(),      // 6
      verify_rstar(),              // 7
      verify_lemma_numeric(),      // 8a
      verify_lemma3(),             // 8b
      verify_figure2(),            // 9
      verify_consistency(),        // 10
  };
}

}  // namespace pplab
