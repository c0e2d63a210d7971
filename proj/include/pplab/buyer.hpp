#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "pplab/common.hpp"
#include "pplab/game.hpp"
#include "pplab/seller.hpp"

namespace pplab {

enum class BuyerKind { Truthful, DpOptimal, GridFalseValuation, BruteForce, Scripted };

inline const char* to_string(BuyerKind k) {
  switch (k) {
    case BuyerKind::Truthful: return "truthful";
    case BuyerKind::DpOptimal: return "dp";
    case BuyerKind::GridFalseValuation: return "grid";
    case BuyerKind::BruteForce: return "brute-force";
    case BuyerKind::Scripted: return "scripted";
  }
  return "?";
}

inline BuyerKind buyer_kind_from_string(const std::string& s) {
  if (s == "truthful") return BuyerKind::Truthful;
  if (s == "dp" || s == "dp-optimal") return BuyerKind::DpOptimal;
  if (s == "grid" || s == "grid-false-valuation") return BuyerKind::GridFalseValuation;
  if (s == "brute-force" || s == "brute") return BuyerKind::BruteForce;
  if (s == "scripted") return BuyerKind::Scripted;
  throw ConfigError("unknown buyer kind: " + s);
}

inline constexpr std::uint64_t kDefaultDpNodeCap = 50'000'000;
inline constexpr std::int64_t kBruteForceMaxT = 20;

struct BuyerSpec {
  BuyerKind kind = BuyerKind::Truthful;
  double grid_step = 0.03;
  std::uint64_t dp_node_cap = kDefaultDpNodeCap;
  std::vector<bool> script;
};

namespace detail {

/// gamma^(t-1) for t = 1..T+1, built by repeated multiplication so gamma = 0
/// yields 1, 0, 0, ...
inline std::vector<double> discount_table(double gamma, std::int64_t T) {
  std::vector<double> w(std::size_t(T) + 1);
  w[0] = 1.0;
  for (std::int64_t t = 1; t <= T; ++t) w[std::size_t(t)] = w[std::size_t(t - 1)] * gamma;
  return w;
}

}  // namespace detail

/// Exact optimal play against an announced machine, by memoized backward
/// induction over (canonical seller state, round). States whose quote is
/// frozen close in O(1); the node cap guards everything else.
class BestResponseSolver {
 public:
  BestResponseSolver(SellerMachine seller, GameConfig cfg,
                     std::uint64_t node_cap = kDefaultDpNodeCap)
      : root_(std::move(seller)),
        cfg_(cfg),
        node_cap_(node_cap),
        weights_(detail::discount_table(cfg.gamma, cfg.T)) {
    cfg.validate();
    if (root_.horizon() != cfg_.T)
      throw ConfigError("BestResponseSolver: seller horizon differs from config T");
  }

  double root_value() { return value(root_, 1); }

  struct Branches {
    double accept_value = 0.0;
    double reject_value = 0.0;
  };

  Branches branch_values(const SellerMachine& m, std::int64_t t) {
    Branches out;
    SellerMachine up = m;
    up.advance(true);
    out.accept_value = weights_[std::size_t(t - 1)] * (cfg_.v - m.quote()) + value(up, t + 1);
    SellerMachine down = m;
    down.advance(false);
    out.reject_value = value(down, t + 1);
    return out;
  }

  double value(const SellerMachine& m, std::int64_t t) {
    if (t > cfg_.T) return 0.0;
    if (m.is_constant()) {
      // Fixed price p for the rest of the game: accept every round iff v >= p.
      const double p = m.quote();
      if (cfg_.v < p) return 0.0;
      return discount_weight_sum(cfg_.gamma, t, cfg_.T) * (cfg_.v - p);
    }
    if (!m.at_fresh_quote()) {
      // Penalty re-quotes: accepting now at price p is weakly worse than
      // accepting the fresh quote was, and rejecting through is the only
      // other option, so the remaining penalty rounds can be skipped in one
      // step. Under literal semantics the skipped rounds still earn
      // max(0, v - p) each, since decisions there cannot move the machine.
      SellerMachine ahead = m;
      double earned = 0.0;
      const bool literal = ahead.spec().semantics == PenaltySemantics::Literal;
      const double gap = cfg_.v - ahead.quote();
      while (!ahead.at_fresh_quote() && t <= cfg_.T) {
        if (literal && gap > 0.0) earned += weights_[std::size_t(t - 1)] * gap;
        ahead.advance(false);
        ++t;
      }
      return earned + value(ahead, t);
    }
    const MemoKey key{m.state_key(), t};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.value;
    if (++visited_ > node_cap_)
      throw TractabilityError(
          "best-response search exceeded " + std::to_string(node_cap_) +
          " states; use the grid buyer for this configuration");
    const Branches br = branch_values(m, t);
    Entry entry;
    entry.accept = br.accept_value >= br.reject_value;  // indifference accepts
    entry.value = entry.accept ? br.accept_value : br.reject_value;
    if (memo_.size() < kMemoStoreCap) memo_.emplace(key, entry);
    return entry.value;
  }

  std::uint64_t visited() const { return visited_; }
  std::size_t memo_entries() const { return memo_.size(); }
  const GameConfig& config() const { return cfg_; }
  const SellerMachine& root_machine() const { return root_; }

  /// CSV dump of the memoized value function: state-key, round, value, action.
  void export_value_function(std::ostream& os) const {
    os << "state_key,round,value,action\n";
    for (const auto& [key, entry] : memo_)
      os << state_key_hex(key.state) << ',' << key.t << ',' << entry.value << ','
         << (entry.accept ? "accept" : "reject") << '\n';
  }

 private:
  struct MemoKey {
    StateKey state;
    std::int64_t t;
    friend bool operator==(const MemoKey&, const MemoKey&) = default;
  };
  struct MemoKeyHash {
    std::size_t operator()(const MemoKey& k) const noexcept {
      return StateKeyHash{}(k.state) ^ (std::size_t(k.t) * 0x9e3779b97f4a7c15ull);
    }
  };
  struct Entry {
    double value = 0.0;
    bool accept = false;
  };
  // The memo is an accelerator; bounding its footprint keeps refusals from
  // exhausting memory before the node cap fires.
  static constexpr std::size_t kMemoStoreCap = 1u << 20;

  SellerMachine root_;
  GameConfig cfg_;
  std::uint64_t node_cap_;
  std::uint64_t visited_ = 0;
  std::vector<double> weights_;
  std::unordered_map<MemoKey, Entry, MemoKeyHash> memo_;
};

/// Optimal discounted surplus achievable against the machine.
inline double optimal_surplus(const SellerMachine& seller, const GameConfig& cfg,
                              std::uint64_t node_cap = kDefaultDpNodeCap) {
  BestResponseSolver solver(seller, cfg, node_cap);
  return solver.root_value();
}

struct BruteForceResult {
  double surplus = 0.0;
  std::vector<bool> decisions;
};

/// Exhaustive oracle over all 2^T decision sequences. Ties prefer acceptance
/// at the earliest differing round. Guarded at T <= 20.
inline BruteForceResult brute_force_best_response(const SellerMachine& seller,
                                                  const GameConfig& cfg) {
  cfg.validate();
  if (cfg.T > kBruteForceMaxT)
    throw TractabilityError("brute_force_best_response: T exceeds the 2^T guard of " +
                            std::to_string(kBruteForceMaxT));
  if (seller.horizon() != cfg.T)
    throw ConfigError("brute_force_best_response: seller horizon differs from config T");

  const auto weights = detail::discount_table(cfg.gamma, cfg.T);
  const std::uint64_t count = std::uint64_t{1} << cfg.T;
  BruteForceResult best;
  best.surplus = -std::numeric_limits<double>::infinity();

  auto lex_prefers = [&](std::uint64_t mask, const std::vector<bool>& incumbent) {
    for (std::int64_t t = 0; t < cfg.T; ++t) {
      const bool a = (mask >> t) & 1u;
      if (a != incumbent[std::size_t(t)]) return a;  // accept at the first difference wins
    }
    return false;
  };

  for (std::uint64_t mask = 0; mask < count; ++mask) {
    SellerMachine m = seller;
    double surplus = 0.0;
    for (std::int64_t t = 0; t < cfg.T; ++t) {
      const bool a = (mask >> t) & 1u;
      if (a) surplus += weights[std::size_t(t)] * (cfg.v - m.quote());
      m.advance(a);
    }
    if (surplus > best.surplus ||
        (surplus == best.surplus && lex_prefers(mask, best.decisions))) {
      best.surplus = surplus;
      best.decisions.assign(std::size_t(cfg.T), false);
      for (std::int64_t t = 0; t < cfg.T; ++t)
        best.decisions[std::size_t(t)] = (mask >> t) & 1u;
    }
  }
  return best;
}

struct FalseValuationResult {
  double v_hat = 0.0;    // best constant false valuation
  double surplus = 0.0;  // discounted surplus at the true v
  std::vector<double> candidates;
};

/// Evaluates every candidate false valuation in {step, 2*step, ...} plus v
/// itself (capped at v): the buyer plays truthfully with respect to v_hat and
/// is scored with the true v. Ties break toward the largest v_hat.
inline FalseValuationResult best_false_valuation(const SellerMachine& seller,
                                                 const GameConfig& cfg, double step) {
  cfg.validate();
  if (!(step > 0.0)) throw ConfigError("best_false_valuation: step must be positive");
  if (seller.horizon() != cfg.T)
    throw ConfigError("best_false_valuation: seller horizon differs from config T");

  FalseValuationResult out;
  for (std::int64_t k = 1; double(k) * step <= cfg.v + 1e-9; ++k) {
    double cand = double(k) * step;
    if (std::abs(cand - cfg.v) <= 1e-9) cand = cfg.v;
    if (cand > cfg.v) break;
    out.candidates.push_back(cand);
  }
  if (out.candidates.empty() || out.candidates.back() != cfg.v)
    out.candidates.push_back(cfg.v);

  bool first = true;
  for (double v_hat : out.candidates) {
    SellerMachine m = seller;
    double surplus = 0.0;
    double weight = 1.0;
    for (std::int64_t t = 1; t <= cfg.T; ++t) {
      const double p = m.quote();
      const bool a = p <= v_hat;
      if (a) surplus += weight * (cfg.v - p);
      m.advance(a);
      weight *= cfg.gamma;
    }
    if (first || surplus >= out.surplus) {  // >= so larger v_hat wins ties
      out.surplus = surplus;
      out.v_hat = v_hat;
      first = false;
    }
  }
  return out;
}

/// A deterministic decision rule. Policies are value types; the engine clones
/// one per game so per-game scratch state (the DP memo) stays confined.
class BuyerPolicy {
 public:
  BuyerPolicy() : BuyerPolicy(Truthful{0.0}, BuyerKind::Truthful, GameConfig{}) {}

  bool decide(std::int64_t t, double price) {
    switch (kind_) {
      case BuyerKind::Truthful:
      case BuyerKind::GridFalseValuation:
        return price <= std::get<Truthful>(impl_).threshold;
      case BuyerKind::Scripted: {
        const auto& s = std::get<Scripted>(impl_);
        return s.script[std::size_t(t - 1)];
      }
      case BuyerKind::BruteForce:
        return std::get<BruteForce>(impl_).decisions[std::size_t(t - 1)];
      case BuyerKind::DpOptimal: {
        auto& s = std::get<Dp>(impl_);
        if (price != s.machine.quote())
          throw ConfigError(
              "dp policy saw a price its machine copy did not quote; policies "
              "must be cloned fresh per game and fed rounds in order");
        const auto br = s.solver->branch_values(s.machine, t);
        const bool accept = br.accept_value >= br.reject_value;
        s.machine.advance(accept);
        return accept;
      }
    }
    return false;
  }

  /// Fresh copy with pre-game state (DP machine rewound, memo reset).
  BuyerPolicy clone_fresh() const {
    if (kind_ != BuyerKind::DpOptimal) return *this;
    const auto& s = std::get<Dp>(impl_);
    BuyerPolicy copy = *this;
    auto& c = std::get<Dp>(copy.impl_);
    c.solver = std::make_shared<BestResponseSolver>(s.solver->root_machine(),
                                                    s.solver->config(), s.node_cap);
    c.machine = s.solver->root_machine();
    return copy;
  }

  BuyerKind kind() const { return kind_; }
  const GameConfig& config() const { return cfg_; }

  /// The valuation this policy accepts up to: v_hat for the grid buyer, the
  /// true v for the truthful buyer.
  double false_valuation() const {
    if (kind_ == BuyerKind::Truthful || kind_ == BuyerKind::GridFalseValuation)
      return std::get<Truthful>(impl_).threshold;
    return cfg_.v;
  }

  /// Access to the underlying solver (DP policies only), for diagnostics.
  const std::shared_ptr<BestResponseSolver>& solver() const {
    if (kind_ != BuyerKind::DpOptimal)
      throw ConfigError("BuyerPolicy: only DP policies carry a solver");
    return std::get<Dp>(impl_).solver;
  }

 private:
  struct Truthful {
    double threshold = 0.0;
  };
  struct Scripted {
    std::vector<bool> script;
  };
  struct BruteForce {
    std::vector<bool> decisions;
  };
  struct Dp {
    std::shared_ptr<BestResponseSolver> solver;
    SellerMachine machine;  // mirrors the live seller during one game
    std::uint64_t node_cap = kDefaultDpNodeCap;
  };
  using Impl = std::variant<Truthful, Scripted, BruteForce, Dp>;

  BuyerPolicy(Impl impl, BuyerKind kind, GameConfig cfg)
      : impl_(std::move(impl)), kind_(kind), cfg_(cfg) {}

  friend BuyerPolicy make_buyer(const BuyerSpec&, const SellerMachine&, const GameConfig&);

  Impl impl_;
  BuyerKind kind_;
  GameConfig cfg_;
};

/// Builds a policy for playing against the announced seller machine.
inline BuyerPolicy make_buyer(const BuyerSpec& spec, const SellerMachine& seller,
                              const GameConfig& cfg) {
  cfg.validate();
  switch (spec.kind) {
    case BuyerKind::Truthful:
      return BuyerPolicy(BuyerPolicy::Truthful{cfg.v}, spec.kind, cfg);
    case BuyerKind::GridFalseValuation: {
      if (!(spec.grid_step > 0.0))
        throw ConfigError("make_buyer: grid step must be positive");
      const auto chosen = best_false_valuation(seller, cfg, spec.grid_step);
      return BuyerPolicy(BuyerPolicy::Truthful{chosen.v_hat}, spec.kind, cfg);
    }
    case BuyerKind::Scripted: {
      if (std::int64_t(spec.script.size()) != cfg.T)
        throw ConfigError("make_buyer: script length must equal T");
      return BuyerPolicy(BuyerPolicy::Scripted{spec.script}, spec.kind, cfg);
    }
    case BuyerKind::BruteForce: {
      auto result = brute_force_best_response(seller, cfg);
      return BuyerPolicy(BuyerPolicy::BruteForce{std::move(result.decisions)}, spec.kind,
                         cfg);
    }
    case BuyerKind::DpOptimal: {
      BuyerPolicy::Dp dp;
      dp.solver = std::make_shared<BestResponseSolver>(seller, cfg, spec.dp_node_cap);
      dp.machine = seller;
      dp.node_cap = spec.dp_node_cap;
      return BuyerPolicy(std::move(dp), spec.kind, cfg);
    }
  }
  throw ConfigError("make_buyer: unknown buyer kind");
}

}  // namespace pplab
