// Command-line front end: validate, clear, negotiate, report.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "p2pmarket/errors.hpp"
#include "p2pmarket/instance_io.hpp"
#include "p2pmarket/reporting.hpp"

namespace {

void print_summary(const p2p::MarketReport& report, p2p::Provenance pricing) {
  const auto& game = report.game;
  std::cout << "grand coalition value: " << p2p::format_number(game.grand_value()) << '\n';
  if (game.matching().pairs.empty()) {
    std::cout << "no viable contracts: zero welfare\n";
    return;
  }
  const auto& alloc = report.allocation(pricing);
  const auto prices = p2p::contract_prices(game, alloc);
  std::cout << "pairs (" << p2p::to_string(pricing) << " pricing):\n";
  for (const auto& p : game.matching().pairs) {
    std::cout << "  " << p2p::pair_id(game, p)
              << "  value=" << p2p::format_number(game.matrix().value(p.buyer, p.seller))
              << "  q=" << p2p::format_number(game.matrix().quantity(p.buyer, p.seller))
              << "  price=" << p2p::format_number(prices.at(p)) << '\n';
  }
  const auto split = p2p::welfare_split(game, alloc);
  std::cout << "welfare split buyers/sellers: " << p2p::format_number(split.buyer_percent) << "% / "
            << p2p::format_number(split.seller_percent) << "%\n";
  for (const auto& b : report.baselines) {
    if (b.allocation != pricing) continue;
    std::cout << "average seller revenue improvement: "
              << p2p::format_number(b.average_seller_improvement) << "%\n"
              << "average buyer cost reduction: " << p2p::format_number(b.average_buyer_reduction)
              << "%\n";
  }
  for (const auto& r : report.negotiations) {
    std::cout << "  negotiation " << p2p::pair_id(game, r.pair) << ": "
              << (r.converged ? "converged" : "NOT converged") << " after " << r.iterations
              << " iterations\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilateral peer-to-peer electricity market clearing"};
  app.require_subcommand(1);

  std::string input;
  std::string out_dir = "out";
  std::string allocation = "tau";
  p2p::PipelineConfig config;

  auto add_common = [&](CLI::App* cmd, bool pipeline) {
    cmd->add_option("--input", input, "Market instance JSON file")->required();
    if (!pipeline) return;
    cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", config.seed, "Seed for every weight schedule")->capture_default_str();
    cmd->add_option("--gamma", config.gamma, "Lower bound on negotiation weights")
        ->check(CLI::Range(0.0, 0.5))
        ->capture_default_str();
    cmd->add_option("--family-size", config.family_size, "Number of weight matrices")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--tol", config.tol, "Convergence tolerance")->capture_default_str();
    cmd->add_option("--max-iters", config.max_iters, "Negotiation iteration cap")
        ->capture_default_str();
    cmd->add_option("--allocation", allocation, "Allocation used for pricing summaries")
        ->check(CLI::IsMember({"tau", "buyer-opt", "seller-opt", "negotiated"}))
        ->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check an instance for rationality violations");
  add_common(validate, false);
  auto* clear = app.add_subcommand("clear", "Matrix, optimal matching and core allocations");
  add_common(clear, true);
  auto* negotiate = app.add_subcommand("negotiate", "Clear and run the bilateral negotiation");
  add_common(negotiate, true);
  auto* report = app.add_subcommand("report", "Negotiate and compare against grid-only trading");
  add_common(report, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? p2p::kExitOk : p2p::kExitInvalid;
  }

  if (validate->parsed()) {
    try {
      const auto instance = p2p::load_instance(input);
      const auto violations = p2p::validate_instance(instance);
      for (const auto& v : violations) {
        std::cerr << (v.agent_id.empty() ? "instance" : v.agent_id) << ": " << v.message
                  << " (value " << p2p::format_number(v.value) << ", bound "
                  << p2p::format_number(v.bound) << ")\n";
      }
      if (!violations.empty()) return p2p::kExitInvalid;
      std::cout << "instance valid: " << instance.buyers.size() << " buyers, "
                << instance.sellers.size() << " sellers, "
                << instance.scenario_set.scenarios.size() << " scenarios\n";
      return p2p::kExitOk;
    } catch (const p2p::ParseError& e) {
      std::cerr << e.what() << '\n';
      return p2p::kExitInvalid;
    }
  }

  config.stage = clear->parsed() ? p2p::Stage::Clear
                 : negotiate->parsed() ? p2p::Stage::Negotiate
                                       : p2p::Stage::Report;
  config.pricing = *p2p::parse_provenance(allocation);

  p2p::PipelineResult result;
  try {
    result = p2p::run_pipeline(input, config, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return p2p::kExitInvalid;
  }
  for (const auto& d : result.diagnostics) std::cerr << d << '\n';
  if (result.report) {
    print_summary(*result.report, config.pricing);
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
  }
  return result.exit_code;
}
