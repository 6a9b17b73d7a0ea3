#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "p2pmarket/assignment_engine.hpp"
#include "p2pmarket/errors.hpp"
#include "p2pmarket/instance_io.hpp"
#include "p2pmarket/market_model.hpp"
#include "p2pmarket/negotiation_engine.hpp"
#include "p2pmarket/reporting.hpp"
#include "p2pmarket/solution_concepts.hpp"

namespace py = pybind11;
using namespace p2p;

namespace {

using Indices = std::vector<std::size_t>;

py::tuple pair_tuple(const MatchedPair& p) { return py::make_tuple(p.buyer, p.seller); }

MatchedPair to_pair(const std::pair<std::size_t, std::size_t>& p) { return {p.first, p.second}; }

}  // namespace

PYBIND11_MODULE(_p2pmarket, m) {
  m.doc() = "Assignment-game clearing and bilateral negotiation for P2P energy markets";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
  py::register_exception<LookupError>(m, "LookupError", PyExc_KeyError);

  // Market model.
  py::class_<GridTariff>(m, "GridTariff")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("buy_price"), py::arg("sell_price"))
      .def_readwrite("buy_price", &GridTariff::buy_price)
      .def_readwrite("sell_price", &GridTariff::sell_price);

  py::class_<Seller>(m, "Seller")
      .def(py::init<>())
      .def(py::init([](std::string id, double ask, double rated, std::string source) {
             return Seller{std::move(id), ask, rated, std::move(source)};
           }),
           py::arg("id"), py::arg("ask_price"), py::arg("rated_power_kw"),
           py::arg("source_type") = "PV")
      .def_readwrite("id", &Seller::id)
      .def_readwrite("ask_price", &Seller::ask_price)
      .def_readwrite("rated_power_kw", &Seller::rated_power_kw)
      .def_readwrite("source_type", &Seller::source_type);

  py::class_<Buyer>(m, "Buyer")
      .def(py::init<>())
      .def(py::init([](std::string id, double demand, double base,
                       std::map<std::string, double> prefs) {
             return Buyer{std::move(id), demand, base, std::move(prefs)};
           }),
           py::arg("id"), py::arg("demand_kwh"), py::arg("base_price"),
           py::arg("preferences") = std::map<std::string, double>{})
      .def_readwrite("id", &Buyer::id)
      .def_readwrite("demand_kwh", &Buyer::demand_kwh)
      .def_readwrite("base_price", &Buyer::base_price)
      .def_readwrite("preferences", &Buyer::preferences)
      .def("alpha", &Buyer::alpha)
      .def("bid", &Buyer::bid);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def(py::init([](double p, std::map<std::string, double> gen) {
             return Scenario{p, std::move(gen)};
           }),
           py::arg("probability"), py::arg("generation_kwh"))
      .def_readwrite("probability", &Scenario::probability)
      .def_readwrite("generation_kwh", &Scenario::generation_kwh);

  py::class_<ScenarioSet>(m, "ScenarioSet")
      .def(py::init<>())
      .def_readwrite("scenarios", &ScenarioSet::scenarios);

  py::class_<MarketInstance>(m, "MarketInstance")
      .def(py::init<>())
      .def_readwrite("tariff", &MarketInstance::tariff)
      .def_readwrite("buyers", &MarketInstance::buyers)
      .def_readwrite("sellers", &MarketInstance::sellers)
      .def_readwrite("scenario_set", &MarketInstance::scenario_set)
      .def_readwrite("slot_hours", &MarketInstance::slot_hours)
      .def("to_json", &dump_instance);

  py::class_<Violation>(m, "Violation")
      .def_readonly("agent_id", &Violation::agent_id)
      .def_readonly("message", &Violation::message)
      .def_readonly("value", &Violation::value)
      .def_readonly("bound", &Violation::bound)
      .def("__repr__", [](const Violation& v) { return "<Violation " + v.agent_id + ": " + v.message + ">"; });

  py::class_<ContractValue>(m, "ContractValue")
      .def_readonly("value", &ContractValue::value)
      .def_readonly("quantity", &ContractValue::quantity);

  m.def("parse_instance", [](const std::string& text) { return parse_instance(text); }, py::arg("json_text"));
  m.def("load_instance", &load_instance, py::arg("path"));
  m.def("dump_instance", &dump_instance, py::arg("instance"));
  m.def("validate_instance", &validate_instance, py::arg("instance"));
  m.def("expected_generation",
        [](const std::string& id, const ScenarioSet& s) { return expected_generation(id, s); },
        py::arg("seller_id"), py::arg("scenario_set"));
  m.def("contract_value", &contract_value, py::arg("buyer"), py::arg("seller"), py::arg("scenario_set"));

  // Assignment engine.
  py::class_<AssignmentMatrix>(m, "AssignmentMatrix")
      .def(py::init<const std::vector<std::vector<double>>&>(), py::arg("values"))
      .def_property_readonly("num_buyers", &AssignmentMatrix::num_buyers)
      .def_property_readonly("num_sellers", &AssignmentMatrix::num_sellers)
      .def_property_readonly("buyer_ids", &AssignmentMatrix::buyer_ids)
      .def_property_readonly("seller_ids", &AssignmentMatrix::seller_ids)
      .def("value", &AssignmentMatrix::value, py::arg("buyer"), py::arg("seller"))
      .def("quantity", &AssignmentMatrix::quantity, py::arg("buyer"), py::arg("seller"))
      .def("to_list", [](const AssignmentMatrix& a) {
        std::vector<std::vector<double>> rows(a.num_buyers(), std::vector<double>(a.num_sellers()));
        for (std::size_t i = 0; i < a.num_buyers(); ++i)
          for (std::size_t j = 0; j < a.num_sellers(); ++j) rows[i][j] = a.value(i, j);
        return rows;
      });

  py::class_<Matching>(m, "Matching")
      .def_property_readonly("pairs",
                             [](const Matching& mt) {
                               py::list out;
                               for (const auto& p : mt.pairs) out.append(pair_tuple(p));
                               return out;
                             })
      .def_readonly("total_value", &Matching::total_value);

  m.def("build_assignment_matrix", &build_assignment_matrix, py::arg("instance"));
  m.def(
      "solve_optimal_assignment",
      [](const AssignmentMatrix& a, std::optional<Indices> buyers, std::optional<Indices> sellers) {
        const auto b = buyers.value_or(all_agents(a.num_buyers()));
        const auto s = sellers.value_or(all_agents(a.num_sellers()));
        return solve_optimal_assignment(a, b, s);
      },
      py::arg("matrix"), py::arg("buyers") = py::none(), py::arg("sellers") = py::none());
  m.def(
      "brute_force_assignment",
      [](const AssignmentMatrix& a, std::optional<Indices> buyers, std::optional<Indices> sellers) {
        const auto b = buyers.value_or(all_agents(a.num_buyers()));
        const auto s = sellers.value_or(all_agents(a.num_sellers()));
        return brute_force_assignment(a, b, s);
      },
      py::arg("matrix"), py::arg("buyers") = py::none(), py::arg("sellers") = py::none());
  m.def(
      "coalition_value",
      [](const AssignmentMatrix& a, const Indices& b, const Indices& s) { return coalition_value(a, b, s); },
      py::arg("matrix"), py::arg("buyers"), py::arg("sellers"));

  // Solution concepts.
  py::enum_<Provenance>(m, "Provenance")
      .value("BUYER_OPTIMAL", Provenance::BuyerOptimal)
      .value("SELLER_OPTIMAL", Provenance::SellerOptimal)
      .value("TAU", Provenance::Tau)
      .value("NEGOTIATED", Provenance::Negotiated);

  py::class_<AssignmentGame>(m, "AssignmentGame")
      .def(py::init<AssignmentMatrix>(), py::arg("matrix"))
      .def_property_readonly("matrix", &AssignmentGame::matrix)
      .def_property_readonly("matching", &AssignmentGame::matching)
      .def_property_readonly("grand_value", &AssignmentGame::grand_value)
      .def("value_without_buyer", &AssignmentGame::value_without_buyer)
      .def("value_without_seller", &AssignmentGame::value_without_seller);

  py::class_<PayoffAllocation>(m, "PayoffAllocation")
      .def_readonly("buyer_payoffs", &PayoffAllocation::buyer_payoffs)
      .def_readonly("seller_payoffs", &PayoffAllocation::seller_payoffs)
      .def_readonly("provenance", &PayoffAllocation::provenance)
      .def_property_readonly("buyer_total", &PayoffAllocation::buyer_total)
      .def_property_readonly("seller_total", &PayoffAllocation::seller_total);

  py::class_<PairBounds>(m, "PairBounds")
      .def_property_readonly("pair", [](const PairBounds& b) { return pair_tuple(b.pair); })
      .def_readonly("value", &PairBounds::value)
      .def_readonly("buyer_utopia", &PairBounds::buyer_utopia)
      .def_readonly("buyer_min", &PairBounds::buyer_min)
      .def_readonly("seller_utopia", &PairBounds::seller_utopia)
      .def_readonly("seller_min", &PairBounds::seller_min)
      .def_readonly("buyer_mid", &PairBounds::buyer_mid)
      .def_readonly("seller_mid", &PairBounds::seller_mid);

  py::class_<CoreReport>(m, "CoreReport")
      .def_readonly("member", &CoreReport::member)
      .def_property_readonly("violation_count", [](const CoreReport& r) { return r.violations.size(); })
      .def("__bool__", [](const CoreReport& r) { return r.member; });

  py::class_<WelfareSplit>(m, "WelfareSplit")
      .def_readonly("buyer_percent", &WelfareSplit::buyer_percent)
      .def_readonly("seller_percent", &WelfareSplit::seller_percent);

  m.def("utopia_payoff_buyer", &utopia_payoff_buyer, py::arg("game"), py::arg("buyer"));
  m.def("utopia_payoff_seller", &utopia_payoff_seller, py::arg("game"), py::arg("seller"));
  m.def(
      "minimal_rights_buyer",
      [](const AssignmentGame& g, std::pair<std::size_t, std::size_t> p) {
        return minimal_rights_buyer(g, to_pair(p));
      },
      py::arg("game"), py::arg("pair"));
  m.def(
      "pair_bounds",
      [](const AssignmentGame& g, std::pair<std::size_t, std::size_t> p) { return pair_bounds(g, to_pair(p)); },
      py::arg("game"), py::arg("pair"));
  m.def("tau_value", &tau_value, py::arg("game"));
  m.def(
      "extreme_allocations",
      [](const AssignmentGame& g) {
        auto e = extreme_allocations(g);
        return py::make_tuple(e.buyer_optimal, e.seller_optimal);
      },
      py::arg("game"));
  m.def(
      "is_core_member",
      [](const AssignmentGame& g, const PayoffAllocation& a, double tol) { return is_core_member(g, a, tol); },
      py::arg("game"), py::arg("allocation"), py::arg("tolerance") = kTolerance);
  m.def(
      "contract_prices",
      [](const AssignmentGame& g, const PayoffAllocation& a) {
        py::dict out;
        for (const auto& [p, price] : contract_prices(g, a)) out[pair_tuple(p)] = price;
        return out;
      },
      py::arg("game"), py::arg("allocation"));
  m.def("welfare_split", &welfare_split, py::arg("game"), py::arg("allocation"));

  // Negotiation.
  py::class_<WeightSchedule>(m, "WeightSchedule")
      .def_property_readonly("family", &WeightSchedule::family)
      .def_property_readonly("gamma", &WeightSchedule::gamma)
      .def("at", &WeightSchedule::at, py::arg("step"));

  m.def(
      "make_weight_family",
      [](double gamma, std::size_t size, std::uint64_t seed) { return make_weight_family(gamma, size, seed); },
      py::arg("gamma") = 0.2, py::arg("family_size") = 5, py::arg("seed") = 0);

  py::class_<NegotiationResult>(m, "NegotiationResult")
      .def_property_readonly("pair", [](const NegotiationResult& r) { return pair_tuple(r.pair); })
      .def_readonly("payoff", &NegotiationResult::payoff)
      .def_readonly("converged", &NegotiationResult::converged)
      .def_readonly("iterations", &NegotiationResult::iterations)
      .def_property_readonly("dist_to_tau", [](const NegotiationResult& r) {
        std::vector<double> out;
        out.reserve(r.trajectory.size());
        for (const auto& t : r.trajectory) out.push_back(t.dist_to_tau);
        return out;
      });

  m.def(
      "run_negotiation",
      [](const PairBounds& bounds, const WeightSchedule& schedule, double tol, std::uint64_t max_iters,
         std::optional<Payoff2> buyer_opening, std::optional<Payoff2> seller_opening) {
        NegotiationConfig cfg{tol, max_iters, buyer_opening, seller_opening};
        return run_negotiation(bounds, schedule, cfg);
      },
      py::arg("bounds"), py::arg("schedule"), py::arg("tol") = 1e-8, py::arg("max_iters") = 10'000,
      py::arg("buyer_opening") = py::none(), py::arg("seller_opening") = py::none());
  m.def("negotiated_allocation", &negotiated_allocation, py::arg("game"), py::arg("results"));

  // Pipeline.
  m.def(
      "run_pipeline",
      [](const std::filesystem::path& input, const std::filesystem::path& out_dir, const std::string& stage,
         std::uint64_t seed, double gamma, std::size_t family_size, double tol, std::uint64_t max_iters,
         const std::string& allocation) {
        PipelineConfig cfg;
        if (stage == "clear") cfg.stage = Stage::Clear;
        else if (stage == "negotiate") cfg.stage = Stage::Negotiate;
        else if (stage == "report") cfg.stage = Stage::Report;
        else throw ConfigError("unknown stage '" + stage + "'");
        const auto pricing = parse_provenance(allocation);
        if (!pricing) throw ConfigError("unknown allocation '" + allocation + "'");
        cfg.seed = seed;
        cfg.gamma = gamma;
        cfg.family_size = family_size;
        cfg.tol = tol;
        cfg.max_iters = max_iters;
        cfg.pricing = *pricing;
        const auto r = run_pipeline(input, cfg, out_dir);
        return py::make_tuple(r.exit_code, r.diagnostics, r.files);
      },
      py::arg("input"), py::arg("out_dir"), py::arg("stage") = "report", py::arg("seed") = 0,
      py::arg("gamma") = 0.2, py::arg("family_size") = 5, py::arg("tol") = 1e-8, py::arg("max_iters") = 10'000,
      py::arg("allocation") = "tau",
      "Runs the full pipeline and returns (exit_code, diagnostics, written_files).");
}
