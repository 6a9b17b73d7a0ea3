#pragma once

// Market participants, generation scenarios and the per-pair contract value.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace p2p {

/// Absolute tolerance used for every currency / probability comparison.
inline constexpr double kTolerance = 1e-9;

struct GridTariff {
  double buy_price = 0.0;   // paid by the grid to sellers (g_b)
  double sell_price = 0.0;  // charged by the grid to buyers (g_s)
};

struct Seller {
  std::string id;
  double ask_price = 0.0;       // currency per kWh
  double rated_power_kw = 0.0;
  std::string source_type;      // "PV", "ES", ... reporting only
};

struct Buyer {
  std::string id;
  double demand_kwh = 0.0;
  double base_price = 0.0;  // currency per kWh
  std::map<std::string, double> preferences;  // seller id -> alpha >= 1

  /// Preference factor for a seller; sellers not listed are treated with
  /// indifference (alpha = 1).
  [[nodiscard]] double alpha(std::string_view seller_id) const;

  /// Unit bid alpha * p offered to the given seller.
  [[nodiscard]] double bid(std::string_view seller_id) const {
    return alpha(seller_id) * base_price;
  }
};

struct Scenario {
  double probability = 0.0;
  std::map<std::string, double> generation_kwh;  // seller id -> forecast
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
};

struct MarketInstance {
  GridTariff tariff;
  std::vector<Buyer> buyers;
  std::vector<Seller> sellers;
  ScenarioSet scenario_set;
  double slot_hours = 1.0;

  [[nodiscard]] const Buyer& buyer(std::string_view id) const;
  [[nodiscard]] const Seller& seller(std::string_view id) const;
};

struct Violation {
  std::string agent_id;  // empty for instance-level problems
  std::string message;
  double value = 0.0;
  double bound = 0.0;
};

/// Collects every violated invariant of the instance. An empty result means
/// the instance is economically rational and structurally consistent.
[[nodiscard]] std::vector<Violation> validate_instance(const MarketInstance& instance);

/// Probability-weighted generation of a seller over all scenarios.
/// Throws LookupError when the seller is missing from some scenario.
[[nodiscard]] double expected_generation(std::string_view seller_id,
                                         const ScenarioSet& scenario_set);

/// Per-unit surplus of a bid against an ask: max(0, bid - ask).
[[nodiscard]] constexpr double unit_value(double bid, double ask) noexcept {
  return bid > ask ? bid - ask : 0.0;
}

struct ContractValue {
  double value = 0.0;     // currency
  double quantity = 0.0;  // traded kWh, min(demand, expected generation)
};

/// Value of a bilateral contract under generation uncertainty. The traded
/// quantity is capped by whichever of demand and expected generation is
/// smaller; the surplus per kWh is unit_value(alpha * p, c).
[[nodiscard]] ContractValue contract_value(const Buyer& buyer, const Seller& seller,
                                           const ScenarioSet& scenario_set);

/// Replaces the buyer `id` with `copies` identical buyers suffixed "#1".."#k".
/// Lets one agent take part in several one-to-one contracts.
[[nodiscard]] MarketInstance replicate_buyer(const MarketInstance& instance,
                                             std::string_view id, std::size_t copies);

/// Seller counterpart of replicate_buyer. Scenario forecasts and buyer
/// preferences are copied to every clone.
[[nodiscard]] MarketInstance replicate_seller(const MarketInstance& instance,
                                              std::string_view id, std::size_t copies);

}  // namespace p2p
