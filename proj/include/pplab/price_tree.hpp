#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pplab/common.hpp"
#include "pplab/seller.hpp"

namespace pplab {

template <class M>
concept PricingMachine = requires(M m, const M cm, bool a) {
  { cm.quote() } -> std::convertible_to<double>;
  { m.advance(a) };
  { cm.is_constant() } -> std::convertible_to<bool>;
  { cm.state_key() } -> std::convertible_to<StateKey>;
  { cm.at_fresh_quote() } -> std::convertible_to<bool>;
};

struct PriceTreeNode {
  std::int64_t id = 0;
  std::int64_t parent = -1;
  std::int64_t accept_child = -1;  // reached when the quote is accepted
  std::int64_t reject_child = -1;
  double price = 0.0;
  std::int64_t t = 1;        // rounds consumed to reach the node
  double delta_r = 0.0;      // accept-child price minus own price
  double delta_l = 0.0;      // largest drop over the reject subtree
  double subtree_min = 0.0;  // over the node's own subtree, self included
  double subtree_max = 0.0;
  StateKey key;
};

/// Explicit decision tree of a machine, one node per decision string up to
/// the given depth. Edges are node-level: an accept edge consumes one round,
/// while a reject edge consumes however many rounds the machine re-quotes the
/// rejected price (one for plain machines, r for strict penalties, r + 1 for
/// literal ones), so t(n) is stored per node rather than inferred from the
/// level. Nodes are stored in BFS order with the root at index 0.
struct PriceTree {
  std::vector<PriceTreeNode> nodes;
  int depth = 0;
  std::int64_t distinct_states = 0;  // duplicate-state collapse, reporting only
};

inline constexpr int kMaxTreeDepth = 20;

/// Enumerates every accept/reject sequence to `depth` node levels.
/// Exponential in depth; refuses beyond kMaxTreeDepth.
template <PricingMachine M>
PriceTree build_price_tree(const M& machine, int depth) {
  if (depth < 1) throw ConfigError("build_price_tree: depth must be >= 1");
  if (depth > kMaxTreeDepth)
    throw ConfigError("build_price_tree: depth exceeds the enumeration limit of " +
                      std::to_string(kMaxTreeDepth));

  PriceTree tree;
  tree.depth = depth;
  std::vector<M> frontier{machine};
  std::vector<M> next;
  tree.nodes.push_back(PriceTreeNode{});
  tree.nodes[0].price = machine.quote();
  tree.nodes[0].key = machine.state_key();
  std::vector<std::int64_t> frontier_ids{0};

  for (int level = 1; level < depth; ++level) {
    std::vector<std::int64_t> next_ids;
    next.clear();
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const std::int64_t parent_id = frontier_ids[i];
      for (bool accepted : {true, false}) {
        M child = frontier[i];
        std::int64_t rounds = 0;
        if (accepted) {
          child.advance(true);
          rounds = 1;
        } else {
          do {
            child.advance(false);
            ++rounds;
          } while (!child.at_fresh_quote() && rounds < (std::int64_t{1} << 20));
        }
        PriceTreeNode node;
        node.id = std::int64_t(tree.nodes.size());
        node.parent = parent_id;
        node.price = child.quote();
        node.t = tree.nodes[parent_id].t + rounds;
        node.key = child.state_key();
        (accepted ? tree.nodes[parent_id].accept_child
                  : tree.nodes[parent_id].reject_child) = node.id;
        tree.nodes.push_back(node);
        next_ids.push_back(node.id);
        next.push_back(std::move(child));
      }
    }
    frontier.swap(next);
    frontier_ids.swap(next_ids);
  }

  // Children follow parents in BFS order, so one reverse sweep fills the
  // subtree extrema and the increments.
  for (auto it = tree.nodes.rbegin(); it != tree.nodes.rend(); ++it) {
    PriceTreeNode& n = *it;
    n.subtree_min = n.subtree_max = n.price;
    if (n.accept_child >= 0) {
      n.subtree_min = std::min(n.subtree_min, tree.nodes[n.accept_child].subtree_min);
      n.subtree_max = std::max(n.subtree_max, tree.nodes[n.accept_child].subtree_max);
      n.delta_r = tree.nodes[n.accept_child].price - n.price;
    }
    if (n.reject_child >= 0) {
      n.subtree_min = std::min(n.subtree_min, tree.nodes[n.reject_child].subtree_min);
      n.subtree_max = std::max(n.subtree_max, tree.nodes[n.reject_child].subtree_max);
      n.delta_l = std::max(0.0, n.price - tree.nodes[n.reject_child].subtree_min);
    }
  }

  std::unordered_set<StateKey, StateKeyHash> seen;
  for (const auto& n : tree.nodes) seen.insert(n.key);
  tree.distinct_states = std::int64_t(seen.size());
  return tree;
}

struct ConsistencyReport {
  bool consistent = true;
  std::int64_t violating_node = -1;
  std::string detail;
};

/// A machine is consistent when, for every node, every price in the reject
/// subtree is <= the node's price <= every price in the accept subtree.
template <PricingMachine M>
ConsistencyReport check_consistent(const M& machine, int depth) {
  const PriceTree tree = build_price_tree(machine, depth);
  ConsistencyReport report;
  for (const auto& n : tree.nodes) {
    if (n.reject_child >= 0 && tree.nodes[n.reject_child].subtree_max > n.price) {
      report.consistent = false;
      report.violating_node = n.id;
      report.detail = "reject subtree exceeds node price " + std::to_string(n.price);
      return report;
    }
    if (n.accept_child >= 0 && tree.nodes[n.accept_child].subtree_min < n.price) {
      report.consistent = false;
      report.violating_node = n.id;
      report.detail = "accept subtree drops below node price " + std::to_string(n.price);
      return report;
    }
  }
  return report;
}

/// True iff consecutive drops are non-increasing: p_t - p_{t+1} >= p_{t+1} - p_{t+2}.
/// Comparisons carry a 1e-12 slack so sequences given in decimal literals are
/// not rejected over one-ulp rounding of their differences.
inline bool is_convex_sequence(std::span<const double> prices) {
  for (std::size_t t = 0; t + 2 < prices.size(); ++t)
    if (prices[t] - prices[t + 1] < prices[t + 1] - prices[t + 2] - 1e-12) return false;
  return true;
}

/// Minimum quote reachable from a state within the next `rounds` rounds,
/// current quote included. Memoized across queries; constant states close
/// immediately. Penalty re-quotes are folded into one step, which is exact
/// for consistent machines: an accept taken mid-penalty leads into an accept
/// subtree whose prices cannot undercut the already-counted quote.
template <PricingMachine M>
class MinPriceSearch {
 public:
  explicit MinPriceSearch(std::uint64_t node_cap = 50'000'000) : node_cap_(node_cap) {}

  double min_price(const M& machine, std::int64_t rounds) {
    if (rounds <= 0) return std::numeric_limits<double>::infinity();
    if (machine.is_constant()) return machine.quote();
    if (!machine.at_fresh_quote()) {
      const double p = machine.quote();
      M ahead = machine;
      std::int64_t used = 0;
      while (!ahead.at_fresh_quote() && used < rounds) {
        ahead.advance(false);
        ++used;
      }
      if (used >= rounds) return p;
      return std::min(p, min_price(ahead, rounds - used));
    }
    Key key{machine.state_key(), rounds};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (++visited_ > node_cap_)
      throw TractabilityError("min_price: state space exceeds node cap");
    double best = machine.quote();
    for (bool accepted : {true, false}) {
      M child = machine;
      child.advance(accepted);
      best = std::min(best, min_price(child, rounds - 1));
    }
    memo_.emplace(key, best);
    return best;
  }

  std::uint64_t visited() const { return visited_; }

 private:
  struct Key {
    StateKey state;
    std::int64_t rounds;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return StateKeyHash{}(k.state) ^ (std::size_t(k.rounds) * 0x9e3779b97f4a7c15ull);
    }
  };
  std::uint64_t node_cap_;
  std::uint64_t visited_ = 0;
  std::unordered_map<Key, double, KeyHash> memo_;
};

/// Plain-text indented dump, accept branch first.
inline void dump_price_tree(const PriceTree& tree, std::ostream& os) {
  struct Item {
    std::int64_t id;
    int indent;
    char tag;
  };
  std::vector<Item> stack{{0, 0, '*'}};
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    const auto& n = tree.nodes[item.id];
    for (int i = 0; i < item.indent; ++i) os << "  ";
    os << item.tag << " t=" << n.t << " p=" << n.price;
    if (n.accept_child >= 0) os << " dr=" << n.delta_r << " dl=" << n.delta_l;
    os << '\n';
    if (n.reject_child >= 0) stack.push_back({n.reject_child, item.indent + 1, 'R'});
    if (n.accept_child >= 0) stack.push_back({n.accept_child, item.indent + 1, 'A'});
  }
}

/// Graphviz DOT export; accept edges solid, reject edges dashed.
inline void dump_price_tree_dot(const PriceTree& tree, std::ostream& os) {
  os << "digraph price_tree {\n  node [shape=circle];\n";
  for (const auto& n : tree.nodes) {
    os << "  n" << n.id << " [label=\"" << n.price << "\"];\n";
    if (n.accept_child >= 0)
      os << "  n" << n.id << " -> n" << n.accept_child << " [label=\"a\"];\n";
    if (n.reject_child >= 0)
      os << "  n" << n.id << " -> n" << n.reject_child << " [style=dashed, label=\"r\"];\n";
  }
  os << "}\n";
}

}  // namespace pplab
