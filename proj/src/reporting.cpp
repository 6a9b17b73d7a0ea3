#include "p2pmarket/reporting.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "p2pmarket/errors.hpp"
#include "p2pmarket/instance_io.hpp"

namespace p2p {

using ordered_json = nlohmann::ordered_json;

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

std::string pair_id(const AssignmentGame& game, const MatchedPair& pair) {
  return game.matrix().buyer_ids().at(pair.buyer) + ":" + game.matrix().seller_ids().at(pair.seller);
}

std::optional<Provenance> parse_provenance(std::string_view text) {
  if (text == "tau") return Provenance::Tau;
  if (text == "buyer-opt" || text == "buyer-optimal") return Provenance::BuyerOptimal;
  if (text == "seller-opt" || text == "seller-optimal") return Provenance::SellerOptimal;
  if (text == "negotiated") return Provenance::Negotiated;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

BaselineReport grid_baseline(const MarketInstance& instance, const AssignmentGame& game,
                             const PayoffAllocation& allocation) {
  const double gb = instance.tariff.buy_price;
  const double gs = instance.tariff.sell_price;
  const auto prices = contract_prices(game, allocation);
  const auto& m = game.matrix();

  BaselineReport out;
  out.allocation = allocation.provenance;

  for (std::size_t j = 0; j < instance.sellers.size(); ++j) {
    const auto& s = instance.sellers[j];
    const double supply = expected_generation(s.id, instance.scenario_set);
    AgentBaseline row{s.id, "", gb * supply, gb * supply, 0.0};
    if (const auto i = game.matching().partner_of_seller(j); i != Matching::npos) {
      const double q = m.quantity(i, j);
      row.partner = m.buyer_ids()[i];
      row.market = prices.at({i, j}) * q + gb * std::max(0.0, supply - q);
      if (row.grid_only > 0.0) row.change_percent = 100.0 * (row.market - row.grid_only) / row.grid_only;
    }
    out.sellers.push_back(row);
  }

  for (std::size_t i = 0; i < instance.buyers.size(); ++i) {
    const auto& b = instance.buyers[i];
    AgentBaseline row{b.id, "", gs * b.demand_kwh, gs * b.demand_kwh, 0.0};
    if (const auto j = game.matching().partner_of_buyer(i); j != Matching::npos) {
      const double q = m.quantity(i, j);
      row.partner = m.seller_ids()[j];
      row.market = prices.at({i, j}) * q + gs * (b.demand_kwh - q);
      if (row.grid_only > 0.0) row.change_percent = 100.0 * (row.grid_only - row.market) / row.grid_only;
    }
    out.buyers.push_back(row);
  }

  auto average = [](const std::vector<AgentBaseline>& rows) {
    if (rows.empty()) return 0.0;
    double total = 0.0;
    for (const auto& r : rows) total += r.change_percent;
    return total / static_cast<double>(rows.size());
  };
  out.average_seller_improvement = average(out.sellers);
  out.average_buyer_reduction = average(out.buyers);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<const PayoffAllocation*> MarketReport::allocations() const {
  std::vector<const PayoffAllocation*> out{&buyer_optimal, &seller_optimal, &tau};
  if (negotiated) out.push_back(&*negotiated);
  return out;
}

const PayoffAllocation& MarketReport::allocation(Provenance p) const {
  switch (p) {
    case Provenance::BuyerOptimal: return buyer_optimal;
    case Provenance::SellerOptimal: return seller_optimal;
    case Provenance::Tau: return tau;
    case Provenance::Negotiated:
      if (negotiated) return *negotiated;
      break;
  }
  throw DomainError("negotiated allocation not available at this stage");
}

MarketReport build_report(const MarketInstance& instance, const PipelineConfig& config) {
  AssignmentGame game(build_assignment_matrix(instance));
  auto extremes = extreme_allocations(game);
  auto tau = tau_value(game);
  MarketReport report{instance, std::move(game), std::move(extremes.buyer_optimal),
                      std::move(extremes.seller_optimal), std::move(tau), std::nullopt, {}, {}, true};

  if (config.stage != Stage::Clear) {
    NegotiationConfig nc;
    nc.tol = config.tol;
    nc.max_iters = config.max_iters;
    for (const auto& pair : report.game.matching().pairs) {
      const auto bounds = pair_bounds(report.game, pair);
      const auto schedule =
          make_weight_family(config.gamma, config.family_size, pair_seed(config.seed, pair));
      auto result = run_negotiation(bounds, schedule, nc);
      report.all_converged = report.all_converged && result.converged;
      report.negotiations.push_back(std::move(result));
    }
    report.negotiated = negotiated_allocation(report.game, report.negotiations);
  }

  if (config.stage == Stage::Report) {
    for (const auto* alloc : report.allocations()) {
      report.baselines.push_back(grid_baseline(instance, report.game, *alloc));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

std::string matrix_csv(const MarketReport& report) {
  const auto& m = report.game.matrix();
  std::ostringstream out;
  out << "buyer";
  for (const auto& sid : m.seller_ids()) out << ',' << sid;
  out << '\n';
  for (std::size_t i = 0; i < m.num_buyers(); ++i) {
    out << m.buyer_ids()[i];
    for (std::size_t j = 0; j < m.num_sellers(); ++j) out << ',' << format_number(m.value(i, j));
    out << '\n';
  }
  return out.str();
}

std::string matches_json(const MarketReport& report) {
  const auto& game = report.game;
  const auto& m = game.matrix();
  ordered_json doc;
  doc["grand_value"] = game.grand_value();
  doc["zero_welfare"] = !(game.grand_value() > 0.0);

  std::vector<std::pair<std::string, std::map<MatchedPair, double>>> prices;
  for (const auto* alloc : report.allocations()) {
    prices.emplace_back(std::string(to_string(alloc->provenance)), contract_prices(game, *alloc));
  }

  doc["pairs"] = ordered_json::array();
  for (const auto& p : game.matching().pairs) {
    ordered_json entry;
    entry["pair_id"] = pair_id(game, p);
    entry["buyer"] = m.buyer_ids()[p.buyer];
    entry["seller"] = m.seller_ids()[p.seller];
    entry["source_type"] = report.instance.sellers.at(p.seller).source_type;
    entry["value"] = m.value(p.buyer, p.seller);
    entry["quantity_kwh"] = m.quantity(p.buyer, p.seller);
    entry["bid"] = m.bid(p.buyer, p.seller);
    entry["ask"] = m.ask(p.seller);
    ordered_json lambda;
    for (const auto& [name, table] : prices) lambda[name] = table.at(p);
    entry["contract_price"] = std::move(lambda);
    doc["pairs"].push_back(std::move(entry));
  }

  doc["unmatched_buyers"] = ordered_json::array();
  for (std::size_t i = 0; i < m.num_buyers(); ++i) {
    if (game.matching().partner_of_buyer(i) == Matching::npos) {
      doc["unmatched_buyers"].push_back(m.buyer_ids()[i]);
    }
  }
  doc["unmatched_sellers"] = ordered_json::array();
  for (std::size_t j = 0; j < m.num_sellers(); ++j) {
    if (game.matching().partner_of_seller(j) == Matching::npos) {
      doc["unmatched_sellers"].push_back(m.seller_ids()[j]);
    }
  }

  if (!report.negotiations.empty()) {
    doc["negotiations"] = ordered_json::array();
    for (const auto& r : report.negotiations) {
      doc["negotiations"].push_back({{"pair_id", pair_id(game, r.pair)},
                                     {"converged", r.converged},
                                     {"iterations", r.iterations}});
    }
  }
  return doc.dump(2) + "\n";
}

std::string allocations_json(const MarketReport& report) {
  const auto& m = report.game.matrix();
  ordered_json doc;
  for (const auto* alloc : report.allocations()) {
    ordered_json entry;
    entry["provenance"] = std::string(to_string(alloc->provenance));
    ordered_json buyers, sellers;
    for (std::size_t i = 0; i < m.num_buyers(); ++i) buyers[m.buyer_ids()[i]] = alloc->buyer_payoffs[i];
    for (std::size_t j = 0; j < m.num_sellers(); ++j) {
      sellers[m.seller_ids()[j]] = alloc->seller_payoffs[j];
    }
    entry["buyers"] = std::move(buyers);
    entry["sellers"] = std::move(sellers);
    doc[std::string(to_string(alloc->provenance))] = std::move(entry);
  }
  return doc.dump(2) + "\n";
}

std::string welfare_csv(const MarketReport& report) {
  std::ostringstream out;
  out << "allocation,buyer_total,seller_total,buyer_share_pct,seller_share_pct\n";
  if (!(report.game.grand_value() > 0.0)) return out.str();
  for (const auto* alloc : report.allocations()) {
    const auto split = welfare_split(report.game, *alloc);
    out << to_string(alloc->provenance) << ',' << format_number(alloc->buyer_total()) << ','
        << format_number(alloc->seller_total()) << ',' << format_number(split.buyer_percent) << ','
        << format_number(split.seller_percent) << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const MarketReport& report) {
  std::ostringstream out;
  out << "step,pair_id,buyer_prop_b,buyer_prop_s,seller_prop_b,seller_prop_s,dist_to_tau\n";
  for (const auto& r : report.negotiations) {
    const auto id = pair_id(report.game, r.pair);
    for (const auto& t : r.trajectory) {
      out << t.step << ',' << id << ',' << format_number(t.buyer_proposal[0]) << ','
          << format_number(t.buyer_proposal[1]) << ',' << format_number(t.seller_proposal[0]) << ','
          << format_number(t.seller_proposal[1]) << ',' << format_number(t.dist_to_tau) << '\n';
    }
  }
  return out.str();
}

std::string baseline_csv(const MarketReport& report) {
  std::ostringstream out;
  out << "allocation,side,agent_id,partner,market,grid_only,change_pct\n";
  for (const auto& b : report.baselines) {
    const auto name = to_string(b.allocation);
    auto emit = [&](const char* side, const std::vector<AgentBaseline>& rows, double avg) {
      for (const auto& r : rows) {
        out << name << ',' << side << ',' << r.id << ',' << r.partner << ','
            << format_number(r.market) << ',' << format_number(r.grid_only) << ','
            << format_number(r.change_percent) << '\n';
      }
      out << name << ',' << side << ",average,,,," << format_number(avg) << '\n';
    };
    emit("seller", b.sellers, b.average_seller_improvement);
    emit("buyer", b.buyers, b.average_buyer_reduction);
  }
  return out.str();
}

std::vector<std::filesystem::path> write_report(const MarketReport& report, Stage stage,
                                                const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const char* name, const std::string& content) {
    const auto path = out_dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << content;
    written.push_back(path);
  };
  put("matrix.csv", matrix_csv(report));
  put("matches.json", matches_json(report));
  put("allocations.json", allocations_json(report));
  put("welfare.csv", welfare_csv(report));
  if (stage != Stage::Clear) put("trajectory.csv", trajectory_csv(report));
  if (stage == Stage::Report) put("baseline.csv", baseline_csv(report));
  return written;
}

PipelineResult run_pipeline(const std::filesystem::path& instance_path,
                            const PipelineConfig& config, const std::filesystem::path& out_dir) {
  PipelineResult result;
  MarketInstance instance;
  try {
    instance = load_instance(instance_path);
  } catch (const ParseError& e) {
    result.exit_code = kExitInvalid;
    result.diagnostics.emplace_back(e.what());
    return result;
  }

  const auto violations = validate_instance(instance);
  if (!violations.empty()) {
    result.exit_code = kExitInvalid;
    for (const auto& v : violations) {
      std::string line = v.agent_id.empty() ? std::string("instance") : v.agent_id;
      line += ": " + v.message + " (value " + format_number(v.value) + ", bound " +
              format_number(v.bound) + ")";
      result.diagnostics.push_back(std::move(line));
    }
    return result;
  }
  if (config.pricing == Provenance::Negotiated && config.stage == Stage::Clear) {
    result.exit_code = kExitInvalid;
    result.diagnostics.emplace_back("negotiated pricing requires the negotiate or report stage");
    return result;
  }

  result.report = build_report(instance, config);
  result.files = write_report(*result.report, config.stage, out_dir);
  if (!result.report->all_converged) {
    result.exit_code = kExitNotConverged;
    for (const auto& r : result.report->negotiations) {
      if (!r.converged) {
        result.diagnostics.push_back(pair_id(result.report->game, r.pair) +
                                     ": negotiation did not converge in " +
                                     std::to_string(r.iterations) + " iterations");
      }
    }
  }
  return result;
}

}  // namespace p2p
