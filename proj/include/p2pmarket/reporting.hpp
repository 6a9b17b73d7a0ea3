#pragma once

// End-to-end clearing pipeline and the report files it emits.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "p2pmarket/market_model.hpp"
#include "p2pmarket/negotiation_engine.hpp"
#include "p2pmarket/solution_concepts.hpp"

namespace p2p {

struct AgentBaseline {
  std::string id;
  std::string partner;  // empty when unmatched
  double market = 0.0;     // revenue (sellers) or cost (buyers) inside the market
  double grid_only = 0.0;  // same quantity when trading only with the grid
  double change_percent = 0.0;  // revenue improvement / cost reduction
};

struct BaselineReport {
  Provenance allocation = Provenance::Tau;
  std::vector<AgentBaseline> sellers;
  std::vector<AgentBaseline> buyers;
  double average_seller_improvement = 0.0;
  double average_buyer_reduction = 0.0;
};

/// Compares market settlement at the allocation's contract prices against
/// selling all generation to / buying all demand from the grid.
[[nodiscard]] BaselineReport grid_baseline(const MarketInstance& instance,
                                           const AssignmentGame& game,
                                           const PayoffAllocation& allocation);

enum class Stage { Clear, Negotiate, Report };

struct PipelineConfig {
  Stage stage = Stage::Report;
  std::uint64_t seed = 0;
  double gamma = 0.2;
  std::size_t family_size = 5;
  double tol = 1e-8;
  std::uint64_t max_iters = 10'000;
  Provenance pricing = Provenance::Tau;
};

struct MarketReport {
  MarketInstance instance;
  AssignmentGame game;
  PayoffAllocation buyer_optimal;
  PayoffAllocation seller_optimal;
  PayoffAllocation tau;
  std::optional<PayoffAllocation> negotiated;
  std::vector<NegotiationResult> negotiations;
  std::vector<BaselineReport> baselines;  // one per available allocation
  bool all_converged = true;

  /// Allocations in emission order: buyer-optimal, seller-optimal, tau,
  /// negotiated (if present).
  [[nodiscard]] std::vector<const PayoffAllocation*> allocations() const;
  [[nodiscard]] const PayoffAllocation& allocation(Provenance p) const;
};

/// Runs clearing (and, depending on the stage, negotiation and grid
/// comparison) on an already validated instance.
[[nodiscard]] MarketReport build_report(const MarketInstance& instance,
                                        const PipelineConfig& config);

// Report artifacts. Numbers use the shortest round-trip decimal form and all
// orderings are fixed, so identical inputs give byte-identical files.
[[nodiscard]] std::string matrix_csv(const MarketReport& report);
[[nodiscard]] std::string matches_json(const MarketReport& report);
[[nodiscard]] std::string allocations_json(const MarketReport& report);
[[nodiscard]] std::string welfare_csv(const MarketReport& report);
[[nodiscard]] std::string trajectory_csv(const MarketReport& report);
[[nodiscard]] std::string baseline_csv(const MarketReport& report);

/// Writes the files belonging to the configured stage into `out_dir`
/// (created if missing). Returns the written paths.
std::vector<std::filesystem::path> write_report(const MarketReport& report, Stage stage,
                                                const std::filesystem::path& out_dir);

enum ExitCode : int { kExitOk = 0, kExitInvalid = 2, kExitNotConverged = 3 };

struct PipelineResult {
  int exit_code = kExitOk;
  std::vector<std::string> diagnostics;  // parse errors or validation violations
  std::optional<MarketReport> report;
  std::vector<std::filesystem::path> files;
};

/// validate -> build matrix -> match -> bounds/tau/extremes -> negotiate ->
/// baseline -> write files. Exit code 2 on unreadable or invalid input, 3
/// when any pair failed to converge.
[[nodiscard]] PipelineResult run_pipeline(const std::filesystem::path& instance_path,
                                          const PipelineConfig& config,
                                          const std::filesystem::path& out_dir);

[[nodiscard]] std::string pair_id(const AssignmentGame& game, const MatchedPair& pair);
[[nodiscard]] std::string format_number(double value);
[[nodiscard]] std::optional<Provenance> parse_provenance(std::string_view text);

}  // namespace p2p
