#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "pplab/common.hpp"

namespace pplab {

enum class SellerKind {
  MonotoneGeometric,  // prices 1, beta, beta^2, ... frozen at first acceptance
  MonotoneSequence,   // explicit non-increasing price list, frozen alike
  FastSearch,         // phase-based interval search, squared increments
  Pfs,                // fast search with a rejection penalty of r rounds
  Bisection,          // midpoint search on [0, 1]
};

enum class PenaltySemantics {
  /// A rejected price is re-quoted until it has been rejected r times in
  /// total; an acceptance at any re-quote moves to the accept branch.
  Strict,
  /// After the first rejection the price is quoted for r further rounds and
  /// the machine then moves to the reject branch regardless of the responses
  /// received during those rounds.
  Literal,
};

inline const char* to_string(SellerKind k) {
  switch (k) {
    case SellerKind::MonotoneGeometric: return "monotone";
    case SellerKind::MonotoneSequence: return "sequence";
    case SellerKind::FastSearch: return "fast-search";
    case SellerKind::Pfs: return "pfs";
    case SellerKind::Bisection: return "bisection";
  }
  return "?";
}

inline SellerKind seller_kind_from_string(const std::string& s) {
  if (s == "monotone" || s == "monotone-geometric") return SellerKind::MonotoneGeometric;
  if (s == "sequence" || s == "monotone-sequence") return SellerKind::MonotoneSequence;
  if (s == "fast-search" || s == "fastsearch") return SellerKind::FastSearch;
  if (s == "pfs") return SellerKind::Pfs;
  if (s == "bisection") return SellerKind::Bisection;
  throw ConfigError("unknown seller kind: " + s);
}

inline const char* to_string(PenaltySemantics s) {
  return s == PenaltySemantics::Strict ? "strict" : "literal";
}

inline PenaltySemantics penalty_semantics_from_string(const std::string& s) {
  if (s == "strict") return PenaltySemantics::Strict;
  if (s == "literal") return PenaltySemantics::Literal;
  throw ConfigError("unknown penalty semantics: " + s);
}

struct SellerSpec {
  SellerKind kind = SellerKind::FastSearch;
  double beta = 0.5;                 // MonotoneGeometric
  std::vector<double> prices;        // MonotoneSequence
  std::int64_t r = 1;                // Pfs
  PenaltySemantics semantics = PenaltySemantics::Strict;
};

namespace detail {

struct MonotoneState {
  double price = 1.0;      // current quote
  std::int64_t index = 0;  // 0-based position in the price sequence
  bool frozen = false;
};

struct FastSearchState {
  double a = 0.0;
  double b = 1.0;
  double eps = 0.5;
  std::int64_t k = 0;  // grid offsets already accepted this phase
  bool terminal = false;
  double final_price = 0.0;
  std::int32_t phase = 1;
};

struct PfsState {
  FastSearchState base;
  std::int64_t rejections = 0;    // strict: rejections of the current node
  std::int64_t penalty_left = 0;  // literal: forced re-quotes remaining
};

struct BisectionState {
  double lo = 0.0;
  double hi = 1.0;
};

}  // namespace detail

/// Deterministic pricing state machine. Value type: copying a machine copies
/// its state, advance mutates in place, and equal state keys guarantee
/// identical futures for machines built from the same spec and horizon.
class SellerMachine {
 public:
  SellerMachine() = default;

  double quote() const {
    switch (spec_->kind) {
      case SellerKind::MonotoneGeometric:
      case SellerKind::MonotoneSequence:
        return std::get<detail::MonotoneState>(st_).price;
      case SellerKind::FastSearch:
        return fs_quote(std::get<detail::FastSearchState>(st_));
      case SellerKind::Pfs:
        return fs_quote(std::get<detail::PfsState>(st_).base);
      case SellerKind::Bisection: {
        const auto& s = std::get<detail::BisectionState>(st_);
        return 0.5 * (s.lo + s.hi);
      }
    }
    return 0.0;
  }

  void advance(bool accepted) {
    switch (spec_->kind) {
      case SellerKind::MonotoneGeometric:
      case SellerKind::MonotoneSequence: {
        auto& s = std::get<detail::MonotoneState>(st_);
        if (s.frozen) return;
        if (accepted) {
          s.frozen = true;
          return;
        }
        ++s.index;
        if (spec_->kind == SellerKind::MonotoneGeometric) {
          s.price *= spec_->beta;
        } else {
          const auto& seq = *seq_;
          std::size_t i = std::size_t(s.index);
          s.price = seq[i < seq.size() ? i : seq.size() - 1];  // pad with last
        }
        return;
      }
      case SellerKind::FastSearch:
        fs_advance(std::get<detail::FastSearchState>(st_), accepted);
        return;
      case SellerKind::Pfs: {
        auto& s = std::get<detail::PfsState>(st_);
        if (s.base.terminal) return;
        if (spec_->semantics == PenaltySemantics::Strict) {
          if (accepted) {
            fs_advance(s.base, true);
            s.rejections = 0;
          } else if (++s.rejections >= spec_->r) {
            fs_advance(s.base, false);
            s.rejections = 0;
          }
        } else {  // Literal
          if (s.penalty_left > 0) {
            if (--s.penalty_left == 0) fs_advance(s.base, false);
          } else if (accepted) {
            fs_advance(s.base, true);
          } else {
            s.penalty_left = spec_->r;
          }
        }
        return;
      }
      case SellerKind::Bisection: {
        auto& s = std::get<detail::BisectionState>(st_);
        const double mid = 0.5 * (s.lo + s.hi);
        if (accepted)
          s.lo = mid;
        else
          s.hi = mid;
        return;
      }
    }
  }

  /// True when the quote is fixed for all remaining rounds regardless of the
  /// buyer's decisions. Lets best-response search close such states in O(1).
  bool is_constant() const {
    switch (spec_->kind) {
      case SellerKind::MonotoneGeometric: {
        const auto& s = std::get<detail::MonotoneState>(st_);
        return s.frozen || s.price == 0.0;
      }
      case SellerKind::MonotoneSequence: {
        const auto& s = std::get<detail::MonotoneState>(st_);
        return s.frozen || std::size_t(s.index) + 1 >= seq_->size();
      }
      case SellerKind::FastSearch:
        return std::get<detail::FastSearchState>(st_).terminal;
      case SellerKind::Pfs:
        return std::get<detail::PfsState>(st_).base.terminal;
      case SellerKind::Bisection: {
        const auto& s = std::get<detail::BisectionState>(st_);
        return s.lo == s.hi;
      }
    }
    return false;
  }

  StateKey state_key() const {
    StateKey key;
    auto& w = key.words;
    w[0] = (std::uint64_t(fingerprint_) << 8) | std::uint64_t(spec_->kind);
    switch (spec_->kind) {
      case SellerKind::MonotoneGeometric:
      case SellerKind::MonotoneSequence: {
        const auto& s = std::get<detail::MonotoneState>(st_);
        w[0] |= std::uint64_t(s.frozen) << 4;
        w[1] = double_bits(s.price);
        w[2] = s.frozen ? 0 : std::uint64_t(s.index);  // frozen states collapse by price
        break;
      }
      case SellerKind::FastSearch: {
        encode_fs(std::get<detail::FastSearchState>(st_), key);
        break;
      }
      case SellerKind::Pfs: {
        const auto& s = std::get<detail::PfsState>(st_);
        encode_fs(s.base, key);
        w[5] = std::uint64_t(s.rejections) | (std::uint64_t(s.penalty_left) << 32);
        break;
      }
      case SellerKind::Bisection: {
        const auto& s = std::get<detail::BisectionState>(st_);
        w[1] = double_bits(s.lo);
        w[2] = double_bits(s.hi);
        break;
      }
    }
    return key;
  }

  SellerKind kind() const { return spec_->kind; }
  std::int64_t horizon() const { return T_; }
  const SellerSpec& spec() const { return *spec_; }

  /// Interval-search diagnostics; only meaningful for FastSearch and Pfs.
  const detail::FastSearchState& fast_search_state() const {
    if (spec_->kind == SellerKind::Pfs) return std::get<detail::PfsState>(st_).base;
    return std::get<detail::FastSearchState>(st_);
  }

  /// Number of non-terminal phases entered so far (FastSearch/Pfs).
  int phase_count() const {
    const auto& s = fast_search_state();
    return s.terminal ? s.phase - 1 : s.phase;
  }

  /// Distinct prices offered per phase, indexed by phase - 1.
  std::vector<std::int64_t> phase_price_counts() const {
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < phase_log_.size() && phase_log_[i] > 0; ++i)
      out.push_back(phase_log_[i]);
    return out;
  }

  /// True when the current quote is the first quote of its node, with no
  /// penalty re-quotes pending. Always true for machines without penalties.
  bool at_fresh_quote() const {
    if (spec_->kind != SellerKind::Pfs) return true;
    const auto& s = std::get<detail::PfsState>(st_);
    return s.rejections == 0 && s.penalty_left == 0;
  }

  /// Called by the engine before each quote so the phase log counts every
  /// distinct price offered; re-quotes of the same node are not re-counted.
  void note_quote() {
    if (spec_->kind != SellerKind::FastSearch && spec_->kind != SellerKind::Pfs) return;
    if (!at_fresh_quote()) return;
    const auto& fs = fast_search_state();
    if (fs.terminal) return;
    std::size_t i = std::size_t(fs.phase - 1);
    if (i < phase_log_.size()) ++phase_log_[i];
  }

 private:
  friend SellerMachine make_seller(const SellerSpec& spec, std::int64_t T);

  static double fs_quote(const detail::FastSearchState& s) {
    return s.terminal ? s.final_price : s.a + double(s.k + 1) * s.eps;
  }

  void fs_advance(detail::FastSearchState& s, bool accepted) const {
    if (s.terminal) return;
    if (accepted) {
      s.k += 1;
      if (s.a + double(s.k + 1) * s.eps > s.b)
        fs_new_phase(s, s.a + double(s.k) * s.eps, s.b);
    } else {
      fs_new_phase(s, s.a + double(s.k) * s.eps, s.a + double(s.k + 1) * s.eps);
    }
  }

  void fs_new_phase(detail::FastSearchState& s, double lo, double hi) const {
    if (hi - lo <= terminal_width_) {
      s.terminal = true;
      s.final_price = lo;
      s.a = lo;
      s.b = hi;
      return;
    }
    s.a = lo;
    s.b = hi;
    s.eps = s.eps * s.eps;
    s.k = 0;
    s.phase += 1;
  }

  static void encode_fs(const detail::FastSearchState& s, StateKey& key) {
    auto& w = key.words;
    if (s.terminal) {
      // Terminal states with equal prices share one key regardless of the
      // interval that produced them.
      w[0] |= 1ull << 4;
      w[1] = double_bits(s.final_price);
      return;
    }
    w[1] = double_bits(s.a);
    w[2] = double_bits(s.b);
    w[3] = double_bits(s.eps);
    w[4] = std::uint64_t(s.k);
  }

  std::shared_ptr<const SellerSpec> spec_ = std::make_shared<SellerSpec>();
  std::shared_ptr<const std::vector<double>> seq_;
  std::int64_t T_ = 1;
  double terminal_width_ = 1.0;  // 1/T
  std::uint32_t fingerprint_ = 0;
  std::variant<detail::MonotoneState, detail::FastSearchState, detail::PfsState,
               detail::BisectionState>
      st_;
  std::array<std::int64_t, 10> phase_log_{};
};

/// Builds the named pricing algorithm for a T-round game. Monotone machines
/// freeze the price at the first acceptance; fast search enters its terminal
/// phase once the feasible interval is no wider than 1/T; pfs wraps fast
/// search with the repeat-on-rejection rule.
inline SellerMachine make_seller(const SellerSpec& spec, std::int64_t T) {
  if (T < 1) throw ConfigError("make_seller: T must be >= 1");
  SellerMachine m;
  m.T_ = T;
  m.terminal_width_ = 1.0 / double(T);

  switch (spec.kind) {
    case SellerKind::MonotoneGeometric:
      if (!(spec.beta > 0.0 && spec.beta < 1.0))
        throw ConfigError("make_seller: beta must lie in (0, 1)");
      m.st_ = detail::MonotoneState{};
      break;
    case SellerKind::MonotoneSequence: {
      if (spec.prices.empty())
        throw ConfigError("make_seller: explicit price sequence is empty");
      if (spec.prices.front() != 1.0)
        throw ConfigError("make_seller: explicit sequences must start at price 1");
      for (std::size_t i = 0; i < spec.prices.size(); ++i) {
        if (!(spec.prices[i] >= 0.0 && spec.prices[i] <= 1.0))
          throw ConfigError("make_seller: prices must lie in [0, 1]");
        if (i > 0 && spec.prices[i] > spec.prices[i - 1])
          throw ConfigError("make_seller: explicit sequence must be non-increasing");
      }
      m.seq_ = std::make_shared<const std::vector<double>>(spec.prices);
      m.st_ = detail::MonotoneState{};
      break;
    }
    case SellerKind::FastSearch:
      m.st_ = detail::FastSearchState{};
      break;
    case SellerKind::Pfs:
      if (spec.r < 1) throw ConfigError("make_seller: pfs requires r >= 1");
      m.st_ = detail::PfsState{};
      break;
    case SellerKind::Bisection:
      m.st_ = detail::BisectionState{};
      break;
  }

  auto owned = std::make_shared<SellerSpec>(spec);
  if (owned->kind != SellerKind::MonotoneSequence) owned->prices.clear();
  m.spec_ = owned;

  // Parameter fingerprint folded into every state key so keys from machines
  // with different parameters cannot collide.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  mix(std::uint64_t(spec.kind));
  mix(std::uint64_t(T));
  mix(double_bits(spec.beta));
  mix(std::uint64_t(spec.r));
  mix(std::uint64_t(spec.semantics));
  for (double p : spec.prices) mix(double_bits(p));
  m.fingerprint_ = std::uint32_t(h ^ (h >> 32));
  return m;
}

}  // namespace pplab
