#include <doctest.h>

#include <algorithm>
#include <random>

#include "p2pmarket/errors.hpp"
#include "p2pmarket/market_model.hpp"
#include "../support/random_games.hpp"

using namespace p2p;

namespace {

MarketInstance single_pair(double alpha, double base, double ask, double demand, double supply) {
  MarketInstance inst;
  inst.tariff = {0.05, 0.17};
  inst.sellers.push_back({"S1", ask, 5.0, "PV"});
  inst.buyers.push_back({"B1", demand, base, {{"S1", alpha}}});
  inst.scenario_set.scenarios.push_back({1.0, {{"S1", supply}}});
  return inst;
}

bool has_message(const std::vector<Violation>& vs, std::string_view fragment) {
  return std::any_of(vs.begin(), vs.end(),
                     [&](const Violation& v) { return v.message.find(fragment) != std::string::npos; });
}

}  // namespace

TEST_CASE("validate_instance: rationality bounds") {
  SUBCASE("bid equal to grid sell price is allowed") {
    auto inst = single_pair(1.0, 0.17, 0.10, 3.0, 4.0);
    CHECK(validate_instance(inst).empty());
  }
  SUBCASE("bid equal to grid buy price is rejected") {
    auto inst = single_pair(1.0, 0.05, 0.05, 3.0, 4.0);
    const auto vs = validate_instance(inst);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].agent_id == "B1");
    CHECK(has_message(vs, "must exceed grid buy price"));
  }
  SUBCASE("ask equal to grid sell price is rejected") {
    auto inst = single_pair(1.0, 0.17, 0.17, 3.0, 4.0);
    const auto vs = validate_instance(inst);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].agent_id == "S1");
    CHECK(has_message(vs, "ask must be below grid sell price"));
  }
  SUBCASE("ask equal to grid buy price is allowed") {
    auto inst = single_pair(1.0, 0.12, 0.05, 3.0, 4.0);
    CHECK(validate_instance(inst).empty());
  }
  SUBCASE("preference below indifference") {
    auto inst = single_pair(0.9, 0.12, 0.10, 3.0, 4.0);
    CHECK(has_message(validate_instance(inst), "at least 1"));
  }
}

TEST_CASE("validate_instance: structural problems are all reported") {
  auto inst = single_pair(1.0, 0.12, 0.10, 3.0, 4.0);
  inst.tariff = {0.2, 0.1};
  inst.buyers.push_back(inst.buyers.front());
  inst.buyers.back().demand_kwh = 0.0;
  inst.scenario_set.scenarios.push_back({0.5, {}});
  inst.scenario_set.scenarios.front().generation_kwh["S1"] = 6.0;  // over 5 kW x 1 h
  const auto vs = validate_instance(inst);
  CHECK(has_message(vs, "grid buy price must be below grid sell price"));
  CHECK(has_message(vs, "duplicate buyer id"));
  CHECK(has_message(vs, "demand must be positive"));
  CHECK(has_message(vs, "has no generation forecast"));
  CHECK(has_message(vs, "probabilities must sum to 1"));
  CHECK(has_message(vs, "exceeds rated power"));
}

TEST_CASE("validate_instance: empty sides") {
  MarketInstance inst;
  inst.tariff = {0.05, 0.17};
  inst.scenario_set.scenarios.push_back({1.0, {}});
  const auto vs = validate_instance(inst);
  CHECK(has_message(vs, "at least one buyer"));
  CHECK(has_message(vs, "at least one seller"));
}

TEST_CASE("expected_generation") {
  ScenarioSet one{{{1.0, {{"S", 4.0}}}}};
  CHECK(expected_generation("S", one) == 4.0);

  ScenarioSet two{{{0.5, {{"S", 2.0}}}, {0.5, {{"S", 4.0}}}}};
  CHECK(expected_generation("S", two) == 3.0);

  ScenarioSet three{{{0.2, {{"S", 1.0}}}, {0.3, {{"S", 2.0}}}, {0.5, {{"S", 4.0}}}}};
  CHECK(expected_generation("S", three) == doctest::Approx(2.8).epsilon(1e-12));

  CHECK_THROWS_AS((void)expected_generation("X", three), LookupError);
}

TEST_CASE("expected_generation lies between scenario extremes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ScenarioSet set;
    const int n = 1 + trial % 5;
    std::vector<double> weights(n);
    double total = 0.0;
    for (auto& w : weights) total += (w = 0.05 + u(rng));
    double lo = 1e9, hi = -1e9;
    for (int f = 0; f < n; ++f) {
      const double g = 10.0 * u(rng);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
      set.scenarios.push_back({weights[f] / total, {{"S", g}}});
    }
    const double e = expected_generation("S", set);
    CHECK(e >= lo - 1e-12);
    CHECK(e <= hi + 1e-12);
  }
}

TEST_CASE("unit_value") {
  CHECK(unit_value(0.15, 0.10) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(unit_value(0.08, 0.12) == 0.0);
  CHECK(unit_value(0.11, 0.11) == 0.0);
}

TEST_CASE("contract_value: both branches and the non-viable case") {
  const ScenarioSet supply4{{{1.0, {{"S1", 4.0}}}}};
  const Seller seller{"S1", 0.10, 5.0, "PV"};

  const Buyer demand3{"B1", 3.0, 0.12, {{"S1", 1.2}}};
  const auto a = contract_value(demand3, seller, supply4);
  CHECK(a.value == doctest::Approx(0.132).epsilon(1e-12));
  CHECK(a.quantity == 3.0);

  const Buyer demand5{"B1", 5.0, 0.12, {}};
  const auto b = contract_value(demand5, seller, supply4);
  CHECK(b.value == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(b.quantity == 4.0);

  const Seller pricey{"S1", 0.12, 5.0, "PV"};
  const Buyer low{"B1", 3.0, 0.08, {}};
  CHECK(contract_value(low, pricey, supply4).value == 0.0);
}

TEST_CASE("contract_value: branches coincide when demand equals expected supply") {
  const ScenarioSet supply{{{0.5, {{"S1", 2.0}}}, {0.5, {{"S1", 4.0}}}}};
  const Seller seller{"S1", 0.09, 5.0, "PV"};
  const Buyer b{"B1", 3.0, 0.11, {{"S1", 1.1}}};
  const auto cv = contract_value(b, seller, supply);
  CHECK(cv.quantity == 3.0);
  CHECK(cv.value == doctest::Approx((0.121 - 0.09) * 3.0).epsilon(1e-12));
}

TEST_CASE("contract_value properties over random inputs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> price(0.05, 0.17);
  std::uniform_real_distribution<double> alpha(1.0, 1.5);
  std::uniform_real_distribution<double> kwh(0.0, 6.0);
  for (int trial = 0; trial < 500; ++trial) {
    const ScenarioSet supply{{{1.0, {{"S", kwh(rng)}}}}};
    const Seller s{"S", price(rng), 6.0, "PV"};
    const double a = alpha(rng);
    const Buyer b{"B", kwh(rng) + 0.1, price(rng) / 1.5, {{"S", a}}};
    const auto cv = contract_value(b, s, supply);
    CHECK(cv.value >= 0.0);
    const bool zero = b.bid("S") <= s.ask_price || cv.quantity == 0.0;
    CHECK((cv.value == 0.0) == zero);

    Buyer richer = b;
    richer.base_price *= 1.05;
    CHECK(contract_value(richer, s, supply).value >= cv.value);
    Buyer keener = b;
    keener.preferences["S"] = a + 0.1;
    CHECK(contract_value(keener, s, supply).value >= cv.value);
    Seller dearer = s;
    dearer.ask_price += 0.01;
    CHECK(contract_value(b, dearer, supply).value <= cv.value);
  }
}

TEST_CASE("missing preference defaults to indifference") {
  const Buyer b{"B1", 1.0, 0.1, {{"S1", 1.4}}};
  CHECK(b.alpha("S1") == 1.4);
  CHECK(b.alpha("S2") == 1.0);
}

TEST_CASE("replicate_seller clones offers, forecasts and preferences") {
  auto inst = p2p::testing::random_instance(11, 3);
  const std::string id = inst.sellers.front().id;
  const auto out = replicate_seller(inst, id, 2);
  CHECK(out.sellers.size() == inst.sellers.size() + 1);
  CHECK(out.seller(id + "#1").ask_price == inst.seller(id).ask_price);
  CHECK(out.seller(id + "#2").rated_power_kw == inst.seller(id).rated_power_kw);
  CHECK_THROWS_AS((void)out.seller(id), LookupError);
  CHECK(out.buyers.front().alpha(id + "#2") == inst.buyers.front().alpha(id));
  CHECK(validate_instance(out).empty());

  const auto more = replicate_buyer(out, inst.buyers.front().id, 3);
  CHECK(more.buyers.size() == inst.buyers.size() + 2);
  CHECK(validate_instance(more).empty());
  CHECK_THROWS_AS((void)replicate_buyer(inst, "nope", 2), LookupError);
}
