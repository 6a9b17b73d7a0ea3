#include "p2pmarket/instance_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "p2pmarket/errors.hpp"

namespace p2p {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError(path + ": unknown key '" + key + "'");
  }
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  return j;
}

const json& require_field(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + ": missing required key '" + key + "'");
  return *it;
}

double number_at(const json& obj, const std::string& path, const char* key) {
  const json& v = require_field(obj, path, key);
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
  return v.get<double>();
}

std::string string_at(const json& obj, const std::string& path, const char* key) {
  const json& v = require_field(obj, path, key);
  if (!v.is_string()) throw ParseError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::map<std::string, double> number_map(const json& j, const std::string& path) {
  require_object(j, path);
  std::map<std::string, double> out;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ParseError(path + "." + key + ": expected a number");
    out.emplace(key, value.get<double>());
  }
  return out;
}

const json& array_at(const json& obj, const std::string& path, const char* key) {
  const json& v = require_field(obj, path, key);
  if (!v.is_array()) throw ParseError(path + "." + key + ": expected an array");
  return v;
}

}  // namespace

MarketInstance parse_instance(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }

  const std::string root = "$";
  require_object(doc, root);
  reject_unknown_keys(doc, root, {"tariff", "buyers", "sellers", "scenarios", "slot_hours"});

  MarketInstance instance;

  const json& tariff = require_object(require_field(doc, root, "tariff"), root + ".tariff");
  reject_unknown_keys(tariff, root + ".tariff", {"buy_price", "sell_price"});
  instance.tariff.buy_price = number_at(tariff, root + ".tariff", "buy_price");
  instance.tariff.sell_price = number_at(tariff, root + ".tariff", "sell_price");

  const json& buyers = array_at(doc, root, "buyers");
  for (std::size_t i = 0; i < buyers.size(); ++i) {
    const std::string path = root + ".buyers[" + std::to_string(i) + "]";
    const json& b = require_object(buyers[i], path);
    reject_unknown_keys(b, path, {"id", "demand_kwh", "base_price", "preferences"});
    Buyer buyer;
    buyer.id = string_at(b, path, "id");
    buyer.demand_kwh = number_at(b, path, "demand_kwh");
    buyer.base_price = number_at(b, path, "base_price");
    if (auto it = b.find("preferences"); it != b.end()) {
      buyer.preferences = number_map(*it, path + ".preferences");
    }
    instance.buyers.push_back(std::move(buyer));
  }

  const json& sellers = array_at(doc, root, "sellers");
  for (std::size_t j = 0; j < sellers.size(); ++j) {
    const std::string path = root + ".sellers[" + std::to_string(j) + "]";
    const json& s = require_object(sellers[j], path);
    reject_unknown_keys(s, path, {"id", "ask_price", "rated_power_kw", "source_type"});
    Seller seller;
    seller.id = string_at(s, path, "id");
    seller.ask_price = number_at(s, path, "ask_price");
    seller.rated_power_kw = number_at(s, path, "rated_power_kw");
    seller.source_type = string_at(s, path, "source_type");
    instance.sellers.push_back(std::move(seller));
  }

  const json& scenarios = array_at(doc, root, "scenarios");
  for (std::size_t f = 0; f < scenarios.size(); ++f) {
    const std::string path = root + ".scenarios[" + std::to_string(f) + "]";
    const json& sc = require_object(scenarios[f], path);
    reject_unknown_keys(sc, path, {"probability", "generation"});
    Scenario scenario;
    scenario.probability = number_at(sc, path, "probability");
    scenario.generation_kwh = number_map(require_field(sc, path, "generation"), path + ".generation");
    instance.scenario_set.scenarios.push_back(std::move(scenario));
  }

  if (auto it = doc.find("slot_hours"); it != doc.end()) {
    if (!it->is_number()) throw ParseError(root + ".slot_hours: expected a number");
    instance.slot_hours = it->get<double>();
  }
  return instance;
}

MarketInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

std::string dump_instance(const MarketInstance& instance) {
  json doc;
  doc["tariff"] = {{"buy_price", instance.tariff.buy_price},
                   {"sell_price", instance.tariff.sell_price}};
  doc["buyers"] = json::array();
  for (const auto& b : instance.buyers) {
    doc["buyers"].push_back({{"id", b.id},
                             {"demand_kwh", b.demand_kwh},
                             {"base_price", b.base_price},
                             {"preferences", b.preferences}});
  }
  doc["sellers"] = json::array();
  for (const auto& s : instance.sellers) {
    doc["sellers"].push_back({{"id", s.id},
                              {"ask_price", s.ask_price},
                              {"rated_power_kw", s.rated_power_kw},
                              {"source_type", s.source_type}});
  }
  doc["scenarios"] = json::array();
  for (const auto& sc : instance.scenario_set.scenarios) {
    doc["scenarios"].push_back({{"probability", sc.probability}, {"generation", sc.generation_kwh}});
  }
  doc["slot_hours"] = instance.slot_hours;
  return doc.dump(2);
}

}  // namespace p2p
