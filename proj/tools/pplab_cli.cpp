// Command-line front end: single games, experiment sweeps, bound reports,
// property verification suites, and price-tree exports.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pplab/analysis.hpp"
#include "pplab/engine.hpp"
#include "pplab/harness.hpp"
#include "pplab/price_tree.hpp"
#include "pplab/svg.hpp"
#include "pplab/verify.hpp"

namespace {

struct SellerArgs {
  std::string kind = "fast-search";
  std::string beta = "0.5";   // number or "auto"
  std::string r = "1";        // number, "logT", or "auto"
  std::string semantics = "strict";
  std::vector<double> prices;
};

pplab::SellerMachine build_seller(const SellerArgs& args, std::int64_t T, double gamma,
                                  std::optional<double> gamma0,
                                  std::optional<std::int64_t>* r_used = nullptr,
                                  std::optional<double>* beta_used = nullptr) {
  using namespace pplab;
  SellerSpec spec;
  spec.kind = seller_kind_from_string(args.kind);
  spec.semantics = penalty_semantics_from_string(args.semantics);
  spec.prices = args.prices;
  if (spec.kind == SellerKind::MonotoneGeometric) {
    spec.beta = args.beta == "auto" ? detail::auto_beta(gamma, T) : std::stod(args.beta);
    if (beta_used) *beta_used = spec.beta;
  }
  if (spec.kind == SellerKind::Pfs) {
    if (args.r == "logT") {
      spec.r = detail::ceil_log_horizon(T);
    } else if (args.r == "auto") {
      if (!gamma0) throw ConfigError("--r auto requires --gamma0");
      spec.r = r_star(*gamma0, T).r_star;
    } else {
      spec.r = std::stoll(args.r);
    }
    if (r_used) *r_used = spec.r;
  }
  return make_seller(spec, T);
}

void print_optional(std::ostream& os, const char* label,
                    const std::optional<std::int64_t>& x) {
  os << label;
  if (x)
    os << *x << "\n";
  else
    os << "-\n";
}

int cmd_simulate(const SellerArgs& seller_args, const std::string& buyer_kind,
                 double grid_step, std::int64_t T, double gamma,
                 std::optional<double> gamma0, double v,
                 const std::string& dump_values_path) {
  using namespace pplab;
  const GameConfig cfg{T, gamma, v};
  std::optional<std::int64_t> r_used;
  std::optional<double> beta_used;
  const SellerMachine seller = build_seller(seller_args, T, gamma, gamma0, &r_used, &beta_used);

  BuyerSpec buyer_spec;
  buyer_spec.kind = buyer_kind_from_string(buyer_kind);
  buyer_spec.grid_step = grid_step;
  std::string ran = to_string(buyer_spec.kind);
  BuyerPolicy buyer;
  try {
    buyer = make_buyer(buyer_spec, seller, cfg);
  } catch (const TractabilityError& e) {
    if (buyer_spec.kind != BuyerKind::DpOptimal) throw;
    std::cerr << "note: " << e.what() << "; falling back to the grid buyer\n";
    buyer_spec.kind = BuyerKind::GridFalseValuation;
    ran = "grid";
    buyer = make_buyer(buyer_spec, seller, cfg);
  }
  const GameOutcome out = play_and_score(seller, buyer, cfg);

  if (!dump_values_path.empty()) {
    if (buyer_spec.kind != BuyerKind::DpOptimal)
      throw ConfigError("--dump-values requires the dp buyer");
    BestResponseSolver solver(seller, cfg, buyer_spec.dp_node_cap);
    solver.root_value();
    std::ofstream vf(dump_values_path);
    if (!vf) throw IoError("simulate: cannot open " + dump_values_path);
    solver.export_value_function(vf);
    std::cout << "wrote " << dump_values_path << "\n";
  }

  std::cout << "seller:   " << to_string(seller.kind());
  if (r_used) std::cout << " (r=" << *r_used << ", " << seller_args.semantics << ")";
  if (beta_used) std::cout << " (beta=" << *beta_used << ")";
  std::cout << "\nbuyer:    " << ran;
  if (buyer_spec.kind == BuyerKind::GridFalseValuation)
    std::cout << " (step=" << grid_step << ", v_hat=" << buyer.false_valuation() << ")";
  std::cout << "\nT=" << T << " gamma=" << gamma << " v=" << v << "\n";
  std::cout << "revenue:  " << out.revenue << "\n";
  std::cout << "regret:   " << out.regret << "\n";
  std::cout << "surplus:  " << out.surplus << "\n";
  print_optional(std::cout, "kappa*:   ", out.kappa_star);
  std::cout << "lies:     " << out.lie_count << "\n";
  return 0;
}

int cmd_bounds(double gamma, std::optional<double> gamma0, double v, std::int64_t T,
               std::int64_t r, double kl_constant) {
  using namespace pplab;
  const BoundReport rep = bound_report(gamma, gamma0, v, T, r, kl_constant);
  auto flag = [](bool b) { return b ? "" : "  [not applicable]"; };
  std::cout << "T_gamma:            " << rep.t_gamma << "\n";
  std::cout << "C_gamma:            " << rep.c_gamma << "\n";
  std::cout << "penalty bound:      " << rep.eq_reggamma_bound << "  (r=" << r << ")\n";
  if (gamma0)
    std::cout << "tuned bound:        " << rep.thm1_bound << flag(rep.thm1_applicable)
              << "\n";
  std::cout << "monotone lower:     " << rep.prop1_lower << "\n";
  std::cout << "convex lower:       " << rep.prop6_lower << flag(rep.prop6_applicable)
            << "\n";
  std::cout << "fixed-price lower:  " << rep.kau_lower << "\n";
  std::cout << "loglog lower:       " << rep.kl_lower << "  (C=" << kl_constant << ")\n";
  std::cout << "combined lower:     " << rep.corollary_lower << "\n";
  if (gamma0) {
    const auto rs = r_star(*gamma0, T,
                           (*gamma0 > 0.5 && T > 4) ? RStarMethod::ClosedForm
                                                    : RStarMethod::Scan);
    std::cout << "r*:                 " << rs.r_star << "  (continuous " << rs.r_bar_star
              << ", scan " << rs.scan_argmin << ")\n";
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, std::string csv_path, std::string svg_path,
              bool linear_axes) {
  using namespace pplab;
  ExperimentConfig config = config_from_file(config_path);
  if (csv_path.empty()) csv_path = config.csv_path;
  if (svg_path.empty()) svg_path = config.svg_path;
  const auto rows = run_sweep(config);
  std::cout << "ran " << rows.size() << " cells\n";
  if (!csv_path.empty()) {
    emit_csv(rows, csv_path);
    std::cout << "wrote " << csv_path << "\n";
  }
  if (svg_path.empty() && csv_path.empty()) std::cout << csv_string(rows);
  if (!svg_path.empty()) {
    AxesSpec axes;
    if (linear_axes) axes.x_log = axes.y_log = false;
    emit_plot(rows, svg_path, axes);
    std::cout << "wrote " << svg_path << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& suite) {
  using namespace pplab;
  std::vector<VerifyResult> results;
  if (suite == "dp-oracle") results.push_back(verify_dp_oracle());
  else if (suite == "prop3") results.push_back(verify_prop3());
  else if (suite == "lemma3") results.push_back(verify_lemma3());
  else if (suite == "lemma-numeric") results.push_back(verify_lemma_numeric());
  else if (suite == "rstar") results.push_back(verify_rstar());
  else if (suite == "consistency") results.push_back(verify_consistency());
  else if (suite == "bound-dominance") {
    results.push_back(verify_prop4_dominance());
    results.push_back(verify_thm1_dominance());
  } else if (suite == "truthful-fast-search") {
    results.push_back(verify_truthful_fast_search());
  } else if (suite == "lower-witness") {
    results.push_back(verify_prop1_witness());
  } else if (suite == "comparison-shape") {
    results.push_back(verify_figure2());
  } else if (suite == "all") {
    results = run_all_verifications();
  } else {
    std::cerr << "unknown suite: " << suite
              << " (expected dp-oracle | prop3 | lemma3 | lemma-numeric | rstar | "
                 "consistency | bound-dominance | truthful-fast-search | lower-witness | "
                 "comparison-shape | all)\n";
    return 2;
  }
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << " — " << r.detail << "\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_tree(const SellerArgs& seller_args, std::int64_t T, int depth,
             const std::string& format, const std::string& out_path) {
  using namespace pplab;
  const SellerMachine seller = build_seller(seller_args, T, 0.0, std::nullopt);
  const PriceTree tree = build_price_tree(seller, depth);
  std::ostringstream os;
  if (format == "dot")
    dump_price_tree_dot(tree, os);
  else
    dump_price_tree(tree, os);
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("tree: cannot open " + out_path);
    out << os.str();
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posted-price auction lab: simulators, bounds, and experiment sweeps"};
  app.require_subcommand(1);

  SellerArgs seller_args;
  std::string buyer_kind = "truthful";
  double grid_step = 0.03;
  std::int64_t T = 100;
  double gamma = 0.0, v = 0.5;
  double gamma0_value = -1.0;
  std::int64_t r_bound = 1;
  double kl_constant = 1.0;

  auto add_seller_flags = [&](CLI::App* cmd) {
    cmd->add_option("--seller", seller_args.kind,
                    "monotone | sequence | fast-search | pfs | bisection");
    cmd->add_option("--beta", seller_args.beta, "geometric decay, or 'auto'");
    cmd->add_option("--r", seller_args.r, "penalty length, 'logT', or 'auto'");
    cmd->add_option("--semantics", seller_args.semantics, "strict | literal");
    cmd->add_option("--prices", seller_args.prices, "explicit price sequence");
  };

  std::string dump_values_path;
  auto* simulate = app.add_subcommand("simulate", "play one game and print the outcome");
  add_seller_flags(simulate);
  simulate->add_option("--buyer", buyer_kind, "truthful | dp | grid | brute-force");
  simulate->add_option("--grid-step", grid_step, "grid buyer step");
  simulate->add_option("--T", T, "horizon")->required();
  simulate->add_option("--gamma", gamma, "discount factor")->required();
  simulate->add_option("--gamma0", gamma0_value, "discount upper bound (for --r auto)");
  simulate->add_option("--v", v, "buyer valuation")->required();
  simulate->add_option("--dump-values", dump_values_path,
                       "write the dp value function as CSV (state-key, round, value)");

  std::string config_path, csv_path, svg_path;
  bool linear_axes = false;
  auto* sweep = app.add_subcommand("sweep", "run an experiment config, emit CSV/SVG");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--csv", csv_path, "CSV output path (overrides config)");
  sweep->add_option("--svg", svg_path, "SVG output path (overrides config)");
  sweep->add_flag("--linear", linear_axes, "linear axes instead of log-log");

  auto* bounds = app.add_subcommand("bounds", "print the closed-form bound report");
  bounds->add_option("--gamma", gamma, "discount factor")->required();
  bounds->add_option("--gamma0", gamma0_value, "discount upper bound");
  bounds->add_option("--v", v, "buyer valuation")->required();
  bounds->add_option("--T", T, "horizon")->required();
  bounds->add_option("--r", r_bound, "penalty length");
  bounds->add_option("--kl-constant", kl_constant, "constant of the loglog lower bound");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run a named property suite");
  verify->add_option("suite", suite,
                     "dp-oracle | prop3 | lemma3 | lemma-numeric | rstar | consistency | "
                     "bound-dominance | truthful-fast-search | lower-witness | "
                     "comparison-shape | all");

  int depth = 4;
  std::string tree_format = "text", tree_out;
  auto* tree = app.add_subcommand("tree", "dump a machine's price tree");
  add_seller_flags(tree);
  tree->add_option("--T", T, "horizon the machine is built for")->required();
  tree->add_option("--depth", depth, "node levels to enumerate (<= 20)");
  tree->add_option("--format", tree_format, "text | dot");
  tree->add_option("--out", tree_out, "output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::optional<double> gamma0;
  if (gamma0_value >= 0.0) gamma0 = gamma0_value;

  try {
    if (simulate->parsed())
      return cmd_simulate(seller_args, buyer_kind, grid_step, T, gamma, gamma0, v,
                          dump_values_path);
    if (sweep->parsed()) return cmd_sweep(config_path, csv_path, svg_path, linear_axes);
    if (bounds->parsed()) return cmd_bounds(gamma, gamma0, v, T, r_bound, kl_constant);
    if (verify->parsed()) return cmd_verify(suite);
    if (tree->parsed()) return cmd_tree(seller_args, T, depth, tree_format, tree_out);
  } catch (const pplab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
