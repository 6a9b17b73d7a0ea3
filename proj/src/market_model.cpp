#include "p2pmarket/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "p2pmarket/errors.hpp"

namespace p2p {

double Buyer::alpha(std::string_view seller_id) const {
  auto it = preferences.find(std::string(seller_id));
  return it == preferences.end() ? 1.0 : it->second;
}

const Buyer& MarketInstance::buyer(std::string_view id) const {
  auto it = std::find_if(buyers.begin(), buyers.end(),
                         [&](const Buyer& b) { return b.id == id; });
  if (it == buyers.end()) throw LookupError("unknown buyer id '" + std::string(id) + "'");
  return *it;
}

const Seller& MarketInstance::seller(std::string_view id) const {
  auto it = std::find_if(sellers.begin(), sellers.end(),
                         [&](const Seller& s) { return s.id == id; });
  if (it == sellers.end()) throw LookupError("unknown seller id '" + std::string(id) + "'");
  return *it;
}

namespace {

void check_unique_ids(const std::vector<std::string>& ids, const char* side,
                      std::vector<Violation>& out) {
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      out.push_back({id, std::string("duplicate ") + side + " id", 0.0, 0.0});
    }
  }
}

}  // namespace

std::vector<Violation> validate_instance(const MarketInstance& instance) {
  std::vector<Violation> out;
  const auto& tariff = instance.tariff;
  const double gb = tariff.buy_price;
  const double gs = tariff.sell_price;

  if (!(gb > 0.0)) out.push_back({"", "grid buy price must be positive", gb, 0.0});
  if (!(gs > 0.0)) out.push_back({"", "grid sell price must be positive", gs, 0.0});
  if (!(gb < gs)) out.push_back({"", "grid buy price must be below grid sell price", gb, gs});
  if (!(instance.slot_hours > 0.0)) {
    out.push_back({"", "slot_hours must be positive", instance.slot_hours, 0.0});
  }

  if (instance.buyers.empty()) out.push_back({"", "at least one buyer required", 0.0, 1.0});
  if (instance.sellers.empty()) out.push_back({"", "at least one seller required", 0.0, 1.0});

  std::vector<std::string> buyer_ids, seller_ids;
  for (const auto& b : instance.buyers) buyer_ids.push_back(b.id);
  for (const auto& s : instance.sellers) seller_ids.push_back(s.id);
  check_unique_ids(buyer_ids, "buyer", out);
  check_unique_ids(seller_ids, "seller", out);
  const std::set<std::string> known_sellers(seller_ids.begin(), seller_ids.end());

  for (const auto& s : instance.sellers) {
    if (!(s.rated_power_kw > 0.0)) {
      out.push_back({s.id, "rated power must be positive", s.rated_power_kw, 0.0});
    }
    if (s.ask_price < gb - kTolerance) {
      out.push_back({s.id, "ask must not be below grid buy price", s.ask_price, gb});
    }
    if (s.ask_price >= gs - kTolerance) {
      out.push_back({s.id, "ask must be below grid sell price", s.ask_price, gs});
    }
  }

  for (const auto& b : instance.buyers) {
    if (!(b.demand_kwh > 0.0)) out.push_back({b.id, "demand must be positive", b.demand_kwh, 0.0});
    for (const auto& [sid, alpha] : b.preferences) {
      if (!known_sellers.contains(sid)) {
        out.push_back({b.id, "preference for unknown seller '" + sid + "'", alpha, 0.0});
      }
      if (alpha < 1.0 - kTolerance) {
        out.push_back({b.id, "preference factor for '" + sid + "' must be at least 1", alpha, 1.0});
      }
    }
    for (const auto& s : instance.sellers) {
      const double bid = b.bid(s.id);
      if (bid <= gb + kTolerance) {
        out.push_back({b.id, "bid to '" + s.id + "' must exceed grid buy price", bid, gb});
      }
      if (bid > gs + kTolerance) {
        out.push_back({b.id, "bid to '" + s.id + "' must not exceed grid sell price", bid, gs});
      }
    }
  }

  const auto& scenarios = instance.scenario_set.scenarios;
  if (scenarios.empty()) out.push_back({"", "at least one scenario required", 0.0, 1.0});
  double total_probability = 0.0;
  for (std::size_t f = 0; f < scenarios.size(); ++f) {
    const auto& sc = scenarios[f];
    const std::string tag = "scenario " + std::to_string(f);
    total_probability += sc.probability;
    if (!(sc.probability > 0.0)) out.push_back({"", tag + " probability must be positive", sc.probability, 0.0});
    for (const auto& s : instance.sellers) {
      auto it = sc.generation_kwh.find(s.id);
      if (it == sc.generation_kwh.end()) {
        out.push_back({s.id, tag + " has no generation forecast", 0.0, 0.0});
        continue;
      }
      if (it->second < 0.0) {
        out.push_back({s.id, tag + " generation must be nonnegative", it->second, 0.0});
      }
      const double cap = s.rated_power_kw * instance.slot_hours;
      if (it->second > cap + kTolerance) {
        out.push_back({s.id, tag + " generation exceeds rated power times slot hours", it->second, cap});
      }
    }
    for (const auto& [sid, kwh] : sc.generation_kwh) {
      if (!known_sellers.contains(sid)) {
        out.push_back({sid, tag + " forecast for unknown seller", kwh, 0.0});
      }
    }
  }
  if (!scenarios.empty() && std::abs(total_probability - 1.0) > kTolerance) {
    out.push_back({"", "scenario probabilities must sum to 1", total_probability, 1.0});
  }
  return out;
}

double expected_generation(std::string_view seller_id, const ScenarioSet& scenario_set) {
  const std::string key(seller_id);
  double expected = 0.0;
  for (const auto& sc : scenario_set.scenarios) {
    auto it = sc.generation_kwh.find(key);
    if (it == sc.generation_kwh.end()) {
      throw LookupError("seller '" + key + "' missing from a generation scenario");
    }
    expected += sc.probability * it->second;
  }
  return expected;
}

ContractValue contract_value(const Buyer& buyer, const Seller& seller,
                             const ScenarioSet& scenario_set) {
  const double supply = expected_generation(seller.id, scenario_set);
  const double quantity = std::min(buyer.demand_kwh, supply);
  return {unit_value(buyer.bid(seller.id), seller.ask_price) * quantity, quantity};
}

namespace {

std::string clone_id(std::string_view id, std::size_t k) {
  return std::string(id) + "#" + std::to_string(k);
}

}  // namespace

MarketInstance replicate_buyer(const MarketInstance& instance, std::string_view id,
                               std::size_t copies) {
  if (copies == 0) throw ConfigError("replication count must be at least 1");
  MarketInstance out = instance;
  auto it = std::find_if(out.buyers.begin(), out.buyers.end(),
                         [&](const Buyer& b) { return b.id == id; });
  if (it == out.buyers.end()) throw LookupError("unknown buyer id '" + std::string(id) + "'");
  const Buyer original = *it;
  it = out.buyers.erase(it);
  std::vector<Buyer> clones;
  for (std::size_t k = 1; k <= copies; ++k) {
    Buyer b = original;
    b.id = clone_id(id, k);
    clones.push_back(std::move(b));
  }
  out.buyers.insert(it, clones.begin(), clones.end());
  return out;
}

MarketInstance replicate_seller(const MarketInstance& instance, std::string_view id,
                                std::size_t copies) {
  if (copies == 0) throw ConfigError("replication count must be at least 1");
  MarketInstance out = instance;
  auto it = std::find_if(out.sellers.begin(), out.sellers.end(),
                         [&](const Seller& s) { return s.id == id; });
  if (it == out.sellers.end()) throw LookupError("unknown seller id '" + std::string(id) + "'");
  const Seller original = *it;
  const std::string key(id);
  it = out.sellers.erase(it);
  std::vector<Seller> clones;
  for (std::size_t k = 1; k <= copies; ++k) {
    Seller s = original;
    s.id = clone_id(id, k);
    clones.push_back(std::move(s));
  }
  out.sellers.insert(it, clones.begin(), clones.end());

  for (auto& b : out.buyers) {
    auto pref = b.preferences.find(key);
    if (pref == b.preferences.end()) continue;
    const double alpha = pref->second;
    b.preferences.erase(pref);
    for (std::size_t k = 1; k <= copies; ++k) b.preferences[clone_id(id, k)] = alpha;
  }
  for (auto& sc : out.scenario_set.scenarios) {
    auto gen = sc.generation_kwh.find(key);
    if (gen == sc.generation_kwh.end()) continue;
    const double kwh = gen->second;
    sc.generation_kwh.erase(gen);
    for (std::size_t k = 1; k <= copies; ++k) sc.generation_kwh[clone_id(id, k)] = kwh;
  }
  return out;
}

}  // namespace p2p
