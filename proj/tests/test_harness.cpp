#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pplab/harness.hpp"
#include "pplab/svg.hpp"

using namespace pplab;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.gamma = 0.85;
  c.gamma0 = 0.9;
  c.v = 0.75;
  c.horizons = {16, 64, 256};
  SellerConfig mono;
  mono.kind = SellerKind::MonotoneGeometric;
  mono.beta_policy = BetaPolicy::Auto;
  SellerConfig pfs;
  pfs.kind = SellerKind::Pfs;
  pfs.r_policy = RPolicy::CeilLogT;
  c.sellers = {mono, pfs};
  c.buyer.kind = BuyerKind::GridFalseValuation;
  return c;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("config json round trip and validation") {
  const auto j = nlohmann::json::parse(R"({
    "version": 1,
    "gamma": 0.85, "gamma0": 0.9, "v": 0.75,
    "T": {"log10_from": 2, "log10_to": 3, "points": 3},
    "semantics": "strict",
    "sellers": [
      {"kind": "monotone", "beta": "auto"},
      {"kind": "pfs", "r": "logT"},
      {"kind": "pfs", "r": 4}
    ],
    "buyer": {"kind": "grid", "step": 0.03},
    "output": {"csv": "out.csv"}
  })");
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.horizons == std::vector<std::int64_t>{100, 316, 1000});
  CHECK(c.sellers.size() == 3);
  CHECK(c.sellers[0].beta_policy == BetaPolicy::Auto);
  CHECK(c.sellers[1].r_policy == RPolicy::CeilLogT);
  CHECK(c.sellers[2].r_fixed == 4);
  CHECK(c.csv_path == "out.csv");

  auto bad = j;
  bad["sellers"][1]["r"] = "auto";
  bad.erase("gamma0");
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);

  auto bad2 = j;
  bad2["gamma"] = 1.0;
  CHECK_THROWS_AS(config_from_json(bad2), ConfigError);
}

TEST_CASE("empty horizon list yields no rows") {
  auto c = small_config();
  c.horizons.clear();
  CHECK(run_sweep(c).empty());
}

TEST_CASE("csv emission basics") {
  CHECK(csv_string({}) == std::string(kCsvHeader) + "\r\n");

  auto c = small_config();
  c.horizons = {16};
  c.sellers.resize(1);
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 1);
  const std::string text = csv_string(rows);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.find("monotone,grid") != std::string::npos);
}

TEST_CASE("csv write-then-read reproduces rows exactly") {
  const auto rows = run_sweep(small_config());
  REQUIRE(rows.size() == 6);
  const std::string path = temp_path("pplab_roundtrip.csv");
  emit_csv(rows, path);
  std::ifstream in(path, std::ios::binary);
  const auto parsed = parse_csv(in);
  const std::string again = csv_string(parsed);
  std::ifstream reread(path, std::ios::binary);
  std::stringstream original;
  original << reread.rdbuf();
  CHECK(again == original.str());
  std::remove(path.c_str());
}

TEST_CASE("rows are self-consistent and ordered") {
  const auto config = small_config();
  const auto rows = run_sweep(config);
  REQUIRE(rows.size() == 6);
  // ordering: sellers in config order, horizons ascending within each
  CHECK(rows[0].seller == "monotone");
  CHECK(rows[3].seller == "pfs");
  CHECK(rows[0].T == 16);
  CHECK(rows[2].T == 256);

  for (const auto& row : rows) {
    // re-simulate the cell and compare the stored scores
    SellerSpec spec;
    spec.kind = seller_kind_from_string(row.seller);
    if (row.beta) spec.beta = *row.beta;
    if (row.r) spec.r = *row.r;
    const auto seller = make_seller(spec, row.T);
    const GameConfig cfg{row.T, row.gamma, row.v};
    BuyerSpec buyer;
    buyer.kind = BuyerKind::GridFalseValuation;
    const auto out = play_and_score(seller, make_buyer(buyer, seller, cfg), cfg);
    CHECK(out.regret == row.regret);
    CHECK(out.revenue == row.revenue);
    CHECK(out.surplus == row.surplus);
    CHECK(row.wall_ms == 0.0);  // timing off by default
    if (row.seller == "pfs") CHECK(row.bound_eq_reggamma.has_value());
  }
}

TEST_CASE("parallel and serial sweeps emit identical bytes") {
  auto serial = small_config();
  serial.threads = 1;
  auto parallel = small_config();
  parallel.threads = 4;
  CHECK(csv_string(run_sweep(serial)) == csv_string(run_sweep(parallel)));
}

TEST_CASE("ceil-log horizon policy") {
  CHECK(detail::ceil_log_horizon(10000) == 10);
  CHECK(detail::ceil_log_horizon(100) == 5);
  CHECK(detail::ceil_log_horizon(2) == 1);
}

TEST_CASE("tuned penalty policy resolves per horizon") {
  auto c = small_config();
  c.horizons = {100};
  c.sellers.clear();
  SellerConfig tuned;
  tuned.kind = SellerKind::Pfs;
  tuned.r_policy = RPolicy::AutoRStar;
  c.sellers = {tuned};
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].r.has_value());
  CHECK(*rows[0].r == r_star(0.9, 100).r_star);
}

TEST_CASE("explicit sequence sellers run through the harness") {
  auto c = small_config();
  c.horizons = {32};
  c.sellers.clear();
  SellerConfig seq;
  seq.kind = SellerKind::MonotoneSequence;
  seq.prices = {1.0, 0.9, 0.8, 0.7, 0.6};
  c.sellers = {seq};
  c.buyer.kind = BuyerKind::Truthful;
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].seller == "sequence");
  CHECK(rows[0].kappa_star == 4);  // 0.7 is the first price at or below v = 0.75
}

TEST_CASE("auto beta policy") {
  CHECK(detail::auto_beta(0.85, 10000) == Catch::Approx(1.0 - 1.0 / std::sqrt(10000.0 / 0.15)));
}

TEST_CASE("svg rendering") {
  const auto rows = run_sweep(small_config());
  const std::string svg = render_plot(rows, AxesSpec{});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("monotone") != std::string::npos);
  CHECK(svg.find("pfs") != std::string::npos);
  CHECK(svg.find("gamma=0.85") != std::string::npos);

  // single point still renders with a marker
  const std::vector<SweepRow> one(rows.begin(), rows.begin() + 1);
  const std::string lone = render_plot(one, AxesSpec{});
  CHECK(lone.find("circle") != std::string::npos);
  CHECK(lone.find("polyline") == std::string::npos);

  // linear axes honored
  const std::string linear = render_plot(rows, AxesSpec{false, false});
  CHECK(linear.find("rounds T (log)") == std::string::npos);

  CHECK_THROWS_AS(render_plot({}, AxesSpec{}), ConfigError);
}

TEST_CASE("svg rejects mixed panels") {
  auto rows = run_sweep(small_config());
  rows.back().v = 0.25;
  CHECK_THROWS_AS(render_plot(rows, AxesSpec{}), ConfigError);
}
