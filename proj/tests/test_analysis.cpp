#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pplab/analysis.hpp"

using namespace pplab;

TEST_CASE("closed-form constants") {
  CHECK(effective_horizon(0.9) == Catch::Approx(10.0));
  CHECK(convex_lower_constant(0.9) == Catch::Approx(4.5));
  CHECK_THROWS_AS(effective_horizon(1.0), ConfigError);
  CHECK_THAT(monotone_lower_bound(100),
             Catch::Matchers::WithinAbs(2.3717082451262845, 1e-12));
}

TEST_CASE("integer doubly-logarithmic ceiling") {
  CHECK(ceil_log2_log2(2) == 0);
  CHECK(ceil_log2_log2(3) == 1);
  CHECK(ceil_log2_log2(4) == 1);
  CHECK(ceil_log2_log2(16) == 2);
  CHECK(ceil_log2_log2(17) == 3);
  CHECK(ceil_log2_log2(256) == 3);
  CHECK(ceil_log2_log2(65536) == 4);
  CHECK(phase_count_bound(16) == 3);
}

TEST_CASE("penalty bound reduces to the truthful form at gamma zero") {
  for (double v : {0.2, 0.9})
    for (std::int64_t T : {64, 1000}) {
      CHECK(pfs_regret_bound(v, 1, 0.0, T) ==
            Catch::Approx((v + 1.0) * phase_count_bound(std::uint64_t(T))));
    }
}

TEST_CASE("bound report fields") {
  const BoundReport rep = bound_report(0.9, 0.95, 0.5, 100, 1);
  CHECK(rep.t_gamma == Catch::Approx(10.0));
  CHECK(rep.c_gamma == Catch::Approx(4.5));
  CHECK(rep.kau_lower == Catch::Approx(10.0 / 12.0));
  CHECK(rep.kl_lower == Catch::Approx(std::log(std::log(100.0))));
  CHECK(rep.corollary_lower == std::max(rep.kau_lower, rep.kl_lower));
  CHECK(rep.thm1_applicable);
  CHECK(rep.prop1_lower == Catch::Approx(2.3717082451262845));

  // inapplicable cases still report values
  const BoundReport low = bound_report(0.3, std::nullopt, 0.5, 3, 1);
  CHECK_FALSE(low.thm1_applicable);
  CHECK(low.prop6_lower > 0.0);
  CHECK_THROWS_AS(bound_report(0.9, 0.8, 0.5, 100, 1), ConfigError);  // gamma0 <= gamma
}

TEST_CASE("convex lower bound applicability") {
  CHECK(convex_lower_applicable(0.9, 100));
  CHECK_FALSE(convex_lower_applicable(0.99, 100));  // T_gamma alone is 100
  CHECK(convex_lower_bound(0.9, 100) >= 0.125 * std::sqrt(100.0 - 10.0));
}

TEST_CASE("tuned penalty minimizer") {
  const auto result = r_star(0.75, 100, RStarMethod::Scan);
  CHECK(result.r_star == 17);
  CHECK(result.scan_argmin == 17);
  CHECK_THAT(result.r_bar_star, Catch::Matchers::WithinAbs(16.556, 0.01));
  CHECK(result.discrepancy <= 1);

  const auto closed = r_star(0.75, 100, RStarMethod::ClosedForm);
  CHECK(closed.r_star == 17);

  CHECK_THROWS_AS(r_star(0.4, 100, RStarMethod::ClosedForm), ConfigError);
  CHECK_NOTHROW(r_star(0.4, 100, RStarMethod::Scan));
  CHECK(r_star(0.4, 100).r_star >= 1);
}

TEST_CASE("penalty objective is convex along the scan range") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const double gamma0 = 0.51 + 0.47 * uni(rng);
    const std::int64_t T = 5 + std::int64_t(rng() % 5000);
    double prev_delta = -1e300;
    for (std::int64_t r = 1; r < 40; ++r) {
      const double delta =
          penalty_objective(r + 1, gamma0, T) - penalty_objective(r, gamma0, T);
      CHECK(delta >= prev_delta - 1e-7);
      prev_delta = delta;
    }
  }
}

TEST_CASE("scan and closed form stay within one of each other") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double gamma0 = 0.505 + 0.49 * uni(rng);
    const std::int64_t T = 5 + std::int64_t(rng() % 100000);
    const auto result = r_star(gamma0, T, RStarMethod::ClosedForm);
    CHECK(result.discrepancy <= 1);
    CHECK(result.f_value >= 1.0 / (4.0 * double(T) * std::log(2.0)));
    CHECK(result.f_value <= 2.0 / double(T));
  }
}

TEST_CASE("rejection condition coefficient") {
  // gamma = 0.5, r = 1: gamma^r / ((1-gamma)(1-gamma^r)) = 2
  CHECK(rejection_condition(0.4, 0.3, 0.04, 0.01, 0.5, 1) ==
        (0.4 - 0.3 < 2.0 * (0.04 + 0.5 * 0.01)));
  CHECK(rejection_condition(0.2, 0.5, 0.1, 0.1, 0.5, 1));  // v below price
  CHECK_FALSE(rejection_condition(0.9, 0.1, 0.0, 0.0, 0.5, 1));
  CHECK_THROWS_AS(rejection_condition(0.5, 0.5, 0.1, 0.1, 0.0, 1), ConfigError);
}

TEST_CASE("log-ratio values and monotonicity") {
  CHECK_THAT(decreasing_log_ratio(0.5), Catch::Matchers::WithinAbs(2.0 * std::log(2.0), 1e-12));
  CHECK_THAT(decreasing_log_ratio(0.9), Catch::Matchers::WithinAbs(1.0536051565782634, 1e-9));
  CHECK(decreasing_log_ratio(0.5) > decreasing_log_ratio(0.9));

  const CheckReport report = lemma_numeric_checks();
  CHECK(report.all_pass());
  CHECK(report.entries.size() == 3);
}

TEST_CASE("minimizer-power bracket at chosen points") {
  for (const auto& [g0, T] : std::vector<std::pair<double, std::int64_t>>{
           {0.6, 10}, {0.9, 1000}, {0.99, 1000000}}) {
    const double f = penalty_objective_minimizer_power(g0, T);
    CHECK(f >= 1.0 / (4.0 * double(T) * std::log(2.0)));
    CHECK(f <= 2.0 / double(T));
  }
}

TEST_CASE("acceptance-time inequality for a constant half sequence") {
  std::vector<double> prices(40, 0.5);
  prices[0] = 1.0;
  // v uniform on [1/2, 1]: kappa* = 2 for almost every v, gap mean = 1/4
  const auto rep = lemma3_monte_carlo(prices, 20000, 42);
  CHECK(rep.exact_kappa_mean == Catch::Approx(2.0));
  CHECK(rep.exact_gap_mean == Catch::Approx(0.25));
  CHECK_THAT(rep.mc_kappa_mean, Catch::Matchers::WithinAbs(2.0, 1e-9));
  CHECK_THAT(rep.mc_gap_mean, Catch::Matchers::WithinAbs(0.25, 0.01));
  CHECK(rep.pass);
}

TEST_CASE("acceptance-time inequality for a slow geometric sequence") {
  std::vector<double> prices{1.0};
  while (prices.back() > 0.4) prices.push_back(prices.back() * 0.99);
  const auto rep = lemma3_monte_carlo(prices, 100000, 7);
  CHECK(rep.pass);
  CHECK_THAT(rep.mc_kappa_mean, Catch::Matchers::WithinAbs(rep.exact_kappa_mean, 0.5));
  CHECK_THAT(rep.mc_gap_mean, Catch::Matchers::WithinAbs(rep.exact_gap_mean, 0.01));
}

TEST_CASE("monte carlo validation and preconditions") {
  std::vector<double> bad{1.0, 0.9};  // final price above 1/2
  CHECK_THROWS_AS(lemma3_monte_carlo(bad, 10000, 1), ConfigError);
  std::vector<double> rising{1.0, 0.4, 0.45};
  CHECK_THROWS_AS(lemma3_monte_carlo(rising, 10000, 1), ConfigError);
  std::vector<double> ok{1.0, 0.4};
  CHECK_THROWS_AS(lemma3_monte_carlo(ok, 100, 1), ConfigError);  // too few samples
}

TEST_CASE("worst-case valuation on degenerate sellers") {
  SellerSpec zero;
  zero.kind = SellerKind::MonotoneSequence;
  zero.prices = {1.0, 0.0};
  const auto grid = uniform_grid(0.0, 1.0, 0.125);
  const auto rep0 =
      worst_case_valuation(make_seller(zero, 20), 20, 0.5, BuyerKind::Truthful, grid);
  // v = 1 accepts the opening price and freezes it, so the damage peaks just
  // below 1, where everything after round one sells for nothing
  CHECK(rep0.v0 == 0.875);
  CHECK(rep0.regret == Catch::Approx(20.0 * 0.875));

  SellerSpec one;
  one.kind = SellerKind::MonotoneSequence;
  one.prices = {1.0};
  const auto rep1 =
      worst_case_valuation(make_seller(one, 20), 20, 0.5, BuyerKind::Truthful, grid);
  CHECK(rep1.v0 == 0.875);  // largest grid value below 1
  CHECK(rep1.regret == Catch::Approx(20.0 * 0.875));
  CHECK(rep1.kappa_min == 1);  // v = 1 accepts immediately
  CHECK_FALSE(rep1.kappa_max.has_value());
}

TEST_CASE("geometric witness reaches the square-root scale") {
  SellerSpec spec;
  spec.kind = SellerKind::MonotoneGeometric;
  spec.beta = 0.995;
  const std::int64_t T = 100;
  const auto rep = worst_case_valuation(make_seller(spec, T), T, 0.5, BuyerKind::Truthful,
                                        uniform_grid(0.5, 1.0, 1e-3));
  CHECK(rep.regret >= monotone_lower_bound(T));
}
