#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pplab/common.hpp"

namespace pplab {

/// Parameters of one repeated posted-price game.
struct GameConfig {
  std::int64_t T = 1;  // number of rounds
  double gamma = 0.0;  // buyer discount factor, in [0, 1)
  double v = 0.0;      // buyer valuation, in [0, 1]

  void validate() const {
    if (T < 1) throw ConfigError("GameConfig: T must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0))
      throw ConfigError("GameConfig: gamma must lie in [0, 1)");
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("GameConfig: v must lie in [0, 1]");
  }
};

struct Round {
  std::int64_t t = 0;  // 1-based round index
  double price = 0.0;
  bool accepted = false;
};

/// Full play record: one entry per round, indices 1..T.
struct Transcript {
  std::vector<Round> rounds;

  void validate(const GameConfig& cfg) const {
    if (std::int64_t(rounds.size()) != cfg.T)
      throw ConfigError("Transcript: length does not match horizon T");
    for (std::size_t i = 0; i < rounds.size(); ++i) {
      if (rounds[i].t != std::int64_t(i) + 1)
        throw ConfigError("Transcript: round indices must increase from 1");
      if (!(rounds[i].price >= 0.0 && rounds[i].price <= 1.0))
        throw ConfigError("Transcript: price outside [0, 1]");
    }
  }
};

struct GameOutcome {
  double revenue = 0.0;  // sum of accepted prices, undiscounted
  double regret = 0.0;   // T*v - revenue
  double surplus = 0.0;  // discounted buyer surplus
  std::optional<std::int64_t> kappa_star;  // first accepted round
  std::int64_t lie_count = 0;              // rounds with a=0 while p < v
};

/// Buyer-side objective: sum of gamma^(t-1) * a_t * (v - p_t). The running
/// weight starts at 1 so gamma = 0 keeps its t = 1 term. May be negative if
/// above-valuation prices were accepted.
inline double discounted_surplus(const Transcript& tr, const GameConfig& cfg) {
  tr.validate(cfg);
  double weight = 1.0;
  double total = 0.0;
  for (const Round& r : tr.rounds) {
    if (r.accepted) total += weight * (cfg.v - r.price);
    weight *= cfg.gamma;
  }
  return total;
}

/// Seller-side objective: T*v minus undiscounted revenue. Only the buyer
/// discounts; the seller never does.
inline double strategic_regret(const Transcript& tr, const GameConfig& cfg) {
  tr.validate(cfg);
  double revenue = 0.0;
  for (const Round& r : tr.rounds)
    if (r.accepted) revenue += r.price;
  return double(cfg.T) * cfg.v - revenue;
}

/// First round whose price was accepted, if any.
inline std::optional<std::int64_t> acceptance_time(const Transcript& tr) {
  for (const Round& r : tr.rounds)
    if (r.accepted) return r.t;
  return std::nullopt;
}

inline std::int64_t lie_count(const Transcript& tr, const GameConfig& cfg) {
  std::int64_t lies = 0;
  for (const Round& r : tr.rounds)
    if (!r.accepted && r.price < cfg.v) ++lies;
  return lies;
}

inline GameOutcome score_game(const Transcript& tr, const GameConfig& cfg) {
  GameOutcome out;
  double revenue = 0.0;
  for (const Round& r : tr.rounds)
    if (r.accepted) revenue += r.price;
  out.revenue = revenue;
  out.regret = double(cfg.T) * cfg.v - revenue;
  out.surplus = discounted_surplus(tr, cfg);
  out.kappa_star = acceptance_time(tr);
  out.lie_count = lie_count(tr, cfg);
  return out;
}

}  // namespace pplab
