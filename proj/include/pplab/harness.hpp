#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pplab/analysis.hpp"
#include "pplab/engine.hpp"

namespace pplab {

enum class RPolicy { Fixed, CeilLogT, AutoRStar };
enum class BetaPolicy { Fixed, Auto };

/// One seller entry of a sweep: the algorithm plus how its parameter is
/// resolved per horizon (r = ceil(ln T), beta = 1 - 1/sqrt(T*T_gamma), ...).
struct SellerConfig {
  SellerKind kind = SellerKind::FastSearch;
  RPolicy r_policy = RPolicy::Fixed;
  std::int64_t r_fixed = 1;
  BetaPolicy beta_policy = BetaPolicy::Fixed;
  double beta_fixed = 0.5;
  std::vector<double> prices;  // MonotoneSequence
};

struct ExperimentConfig {
  int version = 1;
  double gamma = 0.0;
  std::optional<double> gamma0;
  double v = 0.0;
  std::vector<std::int64_t> horizons;
  PenaltySemantics semantics = PenaltySemantics::Strict;
  std::uint64_t seed = 0;
  int threads = 0;      // 0 = hardware concurrency; PPLAB_THREADS caps either way
  bool timing = false;  // measured wall times break byte-level determinism
  std::vector<SellerConfig> sellers;
  BuyerSpec buyer;
  std::string csv_path;
  std::string svg_path;

  void validate() const {
    if (version != 1) throw ConfigError("config: unsupported schema version");
    GameConfig{1, gamma, v}.validate();
    for (std::int64_t T : horizons)
      if (T < 1) throw ConfigError("config: every T must be >= 1");
    if (sellers.empty()) throw ConfigError("config: at least one seller required");
    for (const auto& s : sellers) {
      if (s.r_policy == RPolicy::AutoRStar && !gamma0)
        throw ConfigError("config: r policy 'auto' requires gamma0");
      if (s.kind == SellerKind::MonotoneGeometric && s.beta_policy == BetaPolicy::Fixed &&
          !(s.beta_fixed > 0.0 && s.beta_fixed < 1.0))
        throw ConfigError("config: fixed beta must lie in (0, 1)");
    }
    if (gamma0 && !(*gamma0 > gamma && *gamma0 < 1.0))
      throw ConfigError("config: gamma0 must lie in (gamma, 1)");
  }
};

/// One experiment outcome, flattened for CSV emission.
struct SweepRow {
  std::string seller;
  std::string buyer;
  std::string semantics;
  std::int64_t T = 0;
  double gamma = 0.0;
  std::optional<double> gamma0;
  double v = 0.0;
  std::optional<std::int64_t> r;
  std::optional<double> beta;
  std::optional<double> grid_step;
  double revenue = 0.0;
  double regret = 0.0;
  double surplus = 0.0;
  std::optional<std::int64_t> kappa_star;
  std::int64_t lie_count = 0;
  std::optional<double> best_false_valuation;
  std::optional<double> bound_eq_reggamma;
  std::optional<double> bound_thm1;
  double lower_prop1 = 0.0;
  double wall_ms = 0.0;
};

inline constexpr const char* kCsvHeader =
    "seller,buyer,semantics,T,gamma,gamma0,v,r,beta,grid_step,revenue,regret,surplus,"
    "kappa_star,lie_count,best_false_valuation,bound_eq_reggamma,bound_thm1,lower_prop1,"
    "wall_ms";

namespace detail {

inline std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

inline std::int64_t ceil_log_horizon(std::int64_t T) {  // r = ceil(ln T), at least 1
  return std::max<std::int64_t>(1, std::int64_t(std::ceil(std::log(double(T)))));
}

inline double auto_beta(double gamma, std::int64_t T) {  // 1 - 1/sqrt(T * T_gamma)
  return 1.0 - 1.0 / std::sqrt(double(T) * effective_horizon(gamma));
}

struct ResolvedSeller {
  SellerMachine machine;
  std::optional<std::int64_t> r;
  std::optional<double> beta;
};

inline ResolvedSeller resolve_seller(const SellerConfig& sc, const ExperimentConfig& xc,
                                     std::int64_t T) {
  SellerSpec spec;
  spec.kind = sc.kind;
  spec.semantics = xc.semantics;
  spec.prices = sc.prices;
  ResolvedSeller out;
  if (sc.kind == SellerKind::MonotoneGeometric) {
    spec.beta = sc.beta_policy == BetaPolicy::Auto ? auto_beta(xc.gamma, T) : sc.beta_fixed;
    out.beta = spec.beta;
  }
  if (sc.kind == SellerKind::Pfs) {
    switch (sc.r_policy) {
      case RPolicy::Fixed: spec.r = sc.r_fixed; break;
      case RPolicy::CeilLogT: spec.r = ceil_log_horizon(T); break;
      case RPolicy::AutoRStar: spec.r = r_star(*xc.gamma0, T).r_star; break;
    }
    out.r = spec.r;
  }
  if (sc.kind == SellerKind::FastSearch) out.r = 1;
  out.machine = make_seller(spec, T);
  return out;
}

inline int worker_count(int requested, std::size_t jobs) {
  int n = requested > 0 ? requested : int(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("PPLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return int(std::min<std::size_t>(std::size_t(n), jobs));
}

}  // namespace detail

/// Runs every (seller, T) cell of the config: instantiate, play, score, and
/// attach the closed-form bound values. Cells are independent jobs over a
/// bounded worker pool; rows come back ordered by (seller, T) so parallel and
/// serial runs emit identical files. A dp buyer that trips its node cap falls
/// back to the grid buyer, and the buyer column records what actually ran.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
  config.validate();

  struct Cell {
    std::size_t seller_index;
    std::int64_t T;
  };
  std::vector<Cell> cells;
  for (std::size_t si = 0; si < config.sellers.size(); ++si)
    for (std::int64_t T : config.horizons) cells.push_back({si, T});
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return a.seller_index != b.seller_index ? a.seller_index < b.seller_index : a.T < b.T;
  });

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  auto run_cell = [&](const Cell& cell) {
    const auto t0 = std::chrono::steady_clock::now();
    const SellerConfig& sc = config.sellers[cell.seller_index];
    const GameConfig game{cell.T, config.gamma, config.v};
    auto resolved = detail::resolve_seller(sc, config, cell.T);

    BuyerSpec buyer_spec = config.buyer;
    BuyerPolicy buyer;
    BuyerKind ran = buyer_spec.kind;
    try {
      buyer = make_buyer(buyer_spec, resolved.machine, game);
    } catch (const TractabilityError&) {
      if (buyer_spec.kind != BuyerKind::DpOptimal) throw;
      buyer_spec.kind = BuyerKind::GridFalseValuation;
      ran = buyer_spec.kind;
      buyer = make_buyer(buyer_spec, resolved.machine, game);
    }

    Transcript tr;
    try {
      tr = play_game(resolved.machine, buyer, game);
    } catch (const TractabilityError&) {
      if (ran != BuyerKind::DpOptimal) throw;
      buyer_spec.kind = BuyerKind::GridFalseValuation;
      ran = buyer_spec.kind;
      buyer = make_buyer(buyer_spec, resolved.machine, game);
      tr = play_game(resolved.machine, buyer, game);
    }
    const GameOutcome out = score_game(tr, game);

    SweepRow row;
    row.seller = to_string(sc.kind);
    row.buyer = to_string(ran);
    row.semantics = sc.kind == SellerKind::Pfs ? to_string(config.semantics) : "";
    row.T = cell.T;
    row.gamma = config.gamma;
    row.gamma0 = config.gamma0;
    row.v = config.v;
    row.r = resolved.r;
    row.beta = resolved.beta;
    if (ran == BuyerKind::GridFalseValuation) {
      row.grid_step = buyer_spec.grid_step;
      row.best_false_valuation = buyer.false_valuation();
    }
    row.revenue = out.revenue;
    row.regret = out.regret;
    row.surplus = out.surplus;
    row.kappa_star = out.kappa_star;
    row.lie_count = out.lie_count;
    if (resolved.r)
      row.bound_eq_reggamma = pfs_regret_bound(config.v, *resolved.r, config.gamma, cell.T);
    if (config.gamma0 && config.gamma > 0.5 && cell.T > 4)
      row.bound_thm1 = tuned_pfs_regret_bound(config.v, *config.gamma0, cell.T);
    row.lower_prop1 = monotone_lower_bound(cell.T);
    if (config.timing) {
      const auto t1 = std::chrono::steady_clock::now();
      row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    return row;
  };

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size() || failed.load()) return;
      try {
        rows[i] = run_cell(cells[i]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
      }
    }
  };

  const int workers = detail::worker_count(config.threads, cells.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw ConfigError("run_sweep: " + first_error);
  return rows;
}

inline std::string csv_string(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << kCsvHeader << "\r\n";
  auto opt_real = [](const std::optional<double>& x) {
    return x ? detail::fmt_real(*x) : std::string();
  };
  auto opt_int = [](const std::optional<std::int64_t>& x) {
    return x ? std::to_string(*x) : std::string();
  };
  for (const SweepRow& r : rows) {
    os << r.seller << ',' << r.buyer << ',' << r.semantics << ',' << r.T << ','
       << detail::fmt_real(r.gamma) << ',' << opt_real(r.gamma0) << ','
       << detail::fmt_real(r.v) << ',' << opt_int(r.r) << ',' << opt_real(r.beta) << ','
       << opt_real(r.grid_step) << ',' << detail::fmt_real(r.revenue) << ','
       << detail::fmt_real(r.regret) << ',' << detail::fmt_real(r.surplus) << ','
       << opt_int(r.kappa_star) << ',' << r.lie_count << ','
       << opt_real(r.best_false_valuation) << ',' << opt_real(r.bound_eq_reggamma) << ','
       << opt_real(r.bound_thm1) << ',' << detail::fmt_real(r.lower_prop1) << ','
       << detail::fmt_real(r.wall_ms) << "\r\n";
  }
  return os.str();
}

inline void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_csv: cannot open " + path);
  out << csv_string(rows);
  if (!out) throw IoError("emit_csv: write failed for " + path);
}

/// Parses a file produced by emit_csv back into rows (no quoted fields are
/// ever emitted, so a plain split suffices).
inline std::vector<SweepRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("parse_csv: empty input");
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  if (line != kCsvHeader) throw IoError("parse_csv: unexpected header");

  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 20) throw IoError("parse_csv: malformed row");
    auto real = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    auto opt_real = [&](const std::string& s) {
      return s.empty() ? std::optional<double>() : std::optional<double>(real(s));
    };
    auto opt_int = [](const std::string& s) {
      return s.empty() ? std::optional<std::int64_t>()
                       : std::optional<std::int64_t>(std::atoll(s.c_str()));
    };
    SweepRow r;
    r.seller = f[0];
    r.buyer = f[1];
    r.semantics = f[2];
    r.T = std::atoll(f[3].c_str());
    r.gamma = real(f[4]);
    r.gamma0 = opt_real(f[5]);
    r.v = real(f[6]);
    r.r = opt_int(f[7]);
    r.beta = opt_real(f[8]);
    r.grid_step = opt_real(f[9]);
    r.revenue = real(f[10]);
    r.regret = real(f[11]);
    r.surplus = real(f[12]);
    r.kappa_star = opt_int(f[13]);
    r.lie_count = std::atoll(f[14].c_str());
    r.best_false_valuation = opt_real(f[15]);
    r.bound_eq_reggamma = opt_real(f[16]);
    r.bound_thm1 = opt_real(f[17]);
    r.lower_prop1 = real(f[18]);
    r.wall_ms = real(f[19]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// JSON config ingestion (schema version 1; see docs/config-schema.md).

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.version = j.value("version", 1);
  if (!j.contains("gamma") || !j.contains("v"))
    throw ConfigError("config: gamma and v are required");
  c.gamma = j.at("gamma").get<double>();
  c.v = j.at("v").get<double>();
  if (j.contains("gamma0")) c.gamma0 = j.at("gamma0").get<double>();
  if (j.contains("semantics"))
    c.semantics = penalty_semantics_from_string(j.at("semantics").get<std::string>());
  c.seed = j.value("seed", std::uint64_t{0});
  c.threads = j.value("threads", 0);
  c.timing = j.value("timing", false);

  if (!j.contains("T")) throw ConfigError("config: T is required");
  const auto& jt = j.at("T");
  if (jt.is_array()) {
    for (const auto& x : jt) c.horizons.push_back(x.get<std::int64_t>());
  } else if (jt.is_object()) {
    const double lo = jt.at("log10_from").get<double>();
    const double hi = jt.at("log10_to").get<double>();
    const int points = jt.at("points").get<int>();
    if (points < 1) throw ConfigError("config: T.points must be >= 1");
    for (int i = 0; i < points; ++i) {
      const double e = points == 1 ? lo : lo + (hi - lo) * double(i) / double(points - 1);
      const auto T = std::int64_t(std::llround(std::pow(10.0, e)));
      if (c.horizons.empty() || c.horizons.back() != T) c.horizons.push_back(T);
    }
  } else {
    c.horizons.push_back(jt.get<std::int64_t>());
  }

  if (!j.contains("sellers")) throw ConfigError("config: sellers is required");
  for (const auto& js : j.at("sellers")) {
    SellerConfig s;
    s.kind = seller_kind_from_string(js.at("kind").get<std::string>());
    if (js.contains("r")) {
      const auto& jr = js.at("r");
      if (jr.is_string()) {
        const std::string rs = jr.get<std::string>();
        if (rs == "logT") s.r_policy = RPolicy::CeilLogT;
        else if (rs == "auto") s.r_policy = RPolicy::AutoRStar;
        else throw ConfigError("config: r must be an integer, \"logT\", or \"auto\"");
      } else {
        s.r_policy = RPolicy::Fixed;
        s.r_fixed = jr.get<std::int64_t>();
      }
    }
    if (js.contains("beta")) {
      const auto& jb = js.at("beta");
      if (jb.is_string()) {
        if (jb.get<std::string>() != "auto")
          throw ConfigError("config: beta must be a number or \"auto\"");
        s.beta_policy = BetaPolicy::Auto;
      } else {
        s.beta_policy = BetaPolicy::Fixed;
        s.beta_fixed = jb.get<double>();
      }
    }
    if (js.contains("prices")) s.prices = js.at("prices").get<std::vector<double>>();
    c.sellers.push_back(std::move(s));
  }

  if (j.contains("buyer")) {
    const auto& jb = j.at("buyer");
    c.buyer.kind = buyer_kind_from_string(jb.at("kind").get<std::string>());
    c.buyer.grid_step = jb.value("step", 0.03);
    c.buyer.dp_node_cap = jb.value("dp_node_cap", kDefaultDpNodeCap);
  }
  if (j.contains("output")) {
    const auto& jo = j.at("output");
    c.csv_path = jo.value("csv", "");
    c.svg_path = jo.value("svg", "");
  }
  c.validate();
  return c;
}

inline ExperimentConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace pplab
