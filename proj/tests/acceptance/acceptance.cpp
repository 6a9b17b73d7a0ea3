// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "p2pmarket/assignment_engine.hpp"
#include "p2pmarket/instance_io.hpp"
#include "p2pmarket/negotiation_engine.hpp"
#include "p2pmarket/reporting.hpp"
#include "p2pmarket/solution_concepts.hpp"
#include "../support/random_games.hpp"

using namespace p2p;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kRandomInstances = 200;
constexpr double kCoreTol = 1e-9;
constexpr double kMidpointTol = 1e-9;
constexpr double kNegotiationTol = 1e-8;
constexpr std::uint64_t kNegotiationMaxIters = 10'000;
// Each agent lands within kNegotiationTol of tau, so a pair sum can be off by twice that.
constexpr double kNegotiatedCoreTol = kCoreTol + 2 * kNegotiationTol;
// Slack for rounding in the dist-to-tau sequence.
constexpr double kMonotoneSlack = 1e-12;
constexpr double kOracleBudgetSeconds = 10.0;
constexpr double kConvergenceBudgetSeconds = 30.0;
constexpr std::size_t kConvergenceRuns = 100;
constexpr std::size_t kParacontractionSets = 50;
constexpr std::size_t kParacontractionSamples = 1000;

const fs::path kFixture = P2P_TEST_DATA_DIR "/fixture_3x3.json";

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

void oracle_equivalence() {
  const auto start = Clock::now();
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < kRandomInstances; ++seed) {
    const auto m = testing::random_matrix(seed);
    const auto b = all_agents(m.num_buyers());
    const auto s = all_agents(m.num_sellers());
    if (solve_optimal_assignment(m, b, s).total_value != brute_force_assignment(m, b, s).total_value)
      ++mismatches;
  }
  const double elapsed = seconds_since(start);
  report(1, mismatches == 0 && elapsed < kOracleBudgetSeconds,
         fmt("mismatches=%.0f runtime=%.3fs", double(mismatches), elapsed));
}

void core_properties() {
  std::size_t tau_fail = 0, extreme_fail = 0, midpoint_fail = 0, pairs = 0;
  double worst_midpoint = 0.0;
  for (std::uint64_t seed = 0; seed < kRandomInstances; ++seed) {
    const AssignmentGame g(testing::random_matrix(seed));
    if (!is_core_member(g, tau_value(g), kCoreTol)) ++tau_fail;
    const auto ext = extreme_allocations(g);
    if (!is_core_member(g, ext.buyer_optimal, kCoreTol)) ++extreme_fail;
    if (!is_core_member(g, ext.seller_optimal, kCoreTol)) ++extreme_fail;
    for (const auto& p : g.matching().pairs) {
      const auto bounds = pair_bounds(g, p);
      const double gap = std::abs(bounds.buyer_mid + bounds.seller_mid - bounds.value);
      worst_midpoint = std::max(worst_midpoint, gap);
      if (gap > kMidpointTol) ++midpoint_fail;
      ++pairs;
    }
  }
  report(2, tau_fail == 0, fmt("tau core failures=%.0f of %.0f", double(tau_fail), kRandomInstances));
  report(3, extreme_fail == 0,
         fmt("extreme core failures=%.0f of %.0f", double(extreme_fail), 2.0 * kRandomInstances));
  report(4, midpoint_fail == 0,
         fmt("pairs=%.0f worst |m_i + m_j - v|=%.3g", double(pairs), worst_midpoint));
}

void fixture_convergence() {
  const AssignmentGame g(build_assignment_matrix(load_instance(kFixture)));
  const double gammas[] = {0.05, 0.2, 0.45};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> scale(-1.0, 2.0);
  const auto start = Clock::now();
  std::size_t failed_pairs = 0, core_fail = 0;
  std::uint64_t max_iters_used = 0;
  for (std::size_t run = 0; run < kConvergenceRuns; ++run) {
    const double gamma = gammas[run % 3];
    std::vector<NegotiationResult> results;
    for (const auto& p : g.matching().pairs) {
      const auto bounds = pair_bounds(g, p);
      NegotiationConfig cfg;
      cfg.tol = kNegotiationTol;
      cfg.max_iters = kNegotiationMaxIters;
      cfg.buyer_opening = Payoff2{scale(rng) * bounds.value, scale(rng) * bounds.value};
      cfg.seller_opening = Payoff2{scale(rng) * bounds.value, scale(rng) * bounds.value};
      const auto schedule = make_weight_family(gamma, 5, pair_seed(run, p));
      auto r = run_negotiation(bounds, schedule, cfg);
      if (!r.converged) ++failed_pairs;
      max_iters_used = std::max(max_iters_used, r.iterations);
      results.push_back(std::move(r));
    }
    if (!is_core_member(g, negotiated_allocation(g, results), kNegotiatedCoreTol)) ++core_fail;
  }
  const double elapsed = seconds_since(start);
  std::string detail = fmt("unconverged pairs=%.0f core failures=%.0f", double(failed_pairs),
                           double(core_fail));
  detail += fmt(" max iterations=%.0f runtime=%.3fs", double(max_iters_used), elapsed);
  report(5, failed_pairs == 0 && core_fail == 0 && elapsed < kConvergenceBudgetSeconds, detail);
}

void trajectory_monotonicity() {
  std::vector<MarketReport> reports;
  reports.push_back(build_report(load_instance(kFixture), {}));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    PipelineConfig cfg;
    cfg.seed = seed;
    cfg.gamma = seed % 3 == 0 ? 0.05 : seed % 3 == 1 ? 0.2 : 0.45;
    reports.push_back(build_report(testing::random_instance(seed), cfg));
  }
  std::size_t trajectories = 0, points = 0, increases = 0;
  for (const auto& r : reports) {
    for (const auto& n : r.negotiations) {
      ++trajectories;
      for (std::size_t k = 1; k < n.trajectory.size(); ++k) {
        ++points;
        if (n.trajectory[k].dist_to_tau > n.trajectory[k - 1].dist_to_tau + kMonotoneSlack) ++increases;
      }
    }
  }
  std::string detail = fmt("trajectories=%.0f steps=%.0f", double(trajectories), double(points));
  detail += fmt(" increases=%.0f", double(increases));
  report(6, trajectories > 0 && increases == 0, detail);
}

void welfare_ordering() {
  const auto r = build_report(load_instance(kFixture), {});
  const auto so = welfare_split(r.game, r.seller_optimal);
  const auto tau = welfare_split(r.game, r.tau);
  const auto bo = welfare_split(r.game, r.buyer_optimal);
  bool ok = so.buyer_percent <= tau.buyer_percent && tau.buyer_percent <= bo.buyer_percent;
  if (bo.buyer_percent != so.buyer_percent) {
    ok = ok && so.buyer_percent < tau.buyer_percent && tau.buyer_percent < bo.buyer_percent;
    ok = ok && bo.seller_percent < tau.seller_percent && tau.seller_percent < so.seller_percent;
  }
  std::string detail = fmt("buyer share %% seller-opt=%.4f tau=%.4f", so.buyer_percent, tau.buyer_percent);
  detail += fmt(" buyer-opt=%.4f", bo.buyer_percent);
  report(7, ok, detail);
}

void grid_comparison() {
  const auto inst = load_instance(kFixture);
  const auto r = build_report(inst, {});
  const auto base = grid_baseline(inst, r.game, r.tau);
  std::size_t matched = 0, bad = 0;
  double worst = INFINITY;
  for (const auto* side : {&base.sellers, &base.buyers}) {
    for (const auto& a : *side) {
      if (a.partner.empty()) continue;
      ++matched;
      worst = std::min(worst, a.change_percent);
      if (!(a.change_percent > 0.0)) ++bad;
    }
  }
  report(8, matched > 0 && bad == 0,
         fmt("matched agents=%.0f smallest improvement=%.4f%%", double(matched), worst));
}

void paracontraction() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> value(0.1, 10.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::size_t bad_sets = 0, tested = 0, skipped = 0;
  for (std::size_t k = 0; k < kParacontractionSets; ++k) {
    const double v = value(rng);
    const FavorableSet set{v, frac(rng) * v, k % 2 ? Side::Seller : Side::Buyer};
    const auto check = check_paracontraction(set, kParacontractionSamples, k);
    tested += check.tested;
    skipped += check.skipped;
    if (!check.ok) ++bad_sets;
  }
  std::string detail = fmt("sets=%.0f failing sets=%.0f", double(kParacontractionSets), double(bad_sets));
  detail += fmt(" strict samples=%.0f inside-set samples=%.0f", double(tested), double(skipped));
  report(9, bad_sets == 0, detail);
}

void determinism() {
  const auto dir = fs::temp_directory_path() / "p2pmarket_acceptance";
  fs::remove_all(dir);
  PipelineConfig cfg;
  cfg.seed = 99;
  const auto a = run_pipeline(kFixture, cfg, dir / "a");
  const auto b = run_pipeline(kFixture, cfg, dir / "b");
  bool ok = a.exit_code == kExitOk && b.exit_code == kExitOk && a.files.size() == b.files.size() &&
            !a.files.empty();
  std::size_t differing = 0;
  for (std::size_t k = 0; ok && k < a.files.size(); ++k) {
    if (a.files[k].filename() != b.files[k].filename() || slurp(a.files[k]) != slurp(b.files[k]))
      ++differing;
  }
  fs::remove_all(dir);
  report(10, ok && differing == 0,
         fmt("files=%.0f differing=%.0f", double(a.files.size()), double(differing)));
}

}  // namespace

int main() {
  oracle_equivalence();
  core_properties();
  fixture_convergence();
  trajectory_monotonicity();
  welfare_ordering();
  grid_comparison();
  paracontraction();
  determinism();
  std::printf("%s\n", failures == 0 ? "ALL PASS" : "SOME CRITERIA FAILED");
  return failures == 0 ? 0 : 1;
}
