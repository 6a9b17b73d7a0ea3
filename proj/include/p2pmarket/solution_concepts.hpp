#pragma once

// Core payoffs of the assignment game: utopia and minimal-rights payoffs, the
// two extreme core points, the tau-value, core membership, contract prices.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "p2pmarket/assignment_engine.hpp"

namespace p2p {

/// Assignment game with the optimal grand-coalition matching and every
/// coalition value the payoff formulas need, all computed up front. Immutable
/// afterwards, so it can be shared freely between threads.
class AssignmentGame {
 public:
  explicit AssignmentGame(AssignmentMatrix matrix);

  [[nodiscard]] const AssignmentMatrix& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const Matching& matching() const noexcept { return matching_; }
  [[nodiscard]] double grand_value() const noexcept { return matching_.total_value; }
  [[nodiscard]] std::size_t num_buyers() const noexcept { return matrix_.num_buyers(); }
  [[nodiscard]] std::size_t num_sellers() const noexcept { return matrix_.num_sellers(); }

  /// v_M of the grand coalition without buyer i.
  [[nodiscard]] double value_without_buyer(std::size_t buyer) const;
  /// v_M of the grand coalition without seller j.
  [[nodiscard]] double value_without_seller(std::size_t seller) const;
  /// v_M without buyer i and seller j (cached for optimally matched pairs).
  [[nodiscard]] double value_without_pair(const MatchedPair& pair) const;

  /// Throws DomainError if the pair is not part of the optimal matching.
  void require_matched(const MatchedPair& pair) const;

 private:
  AssignmentMatrix matrix_;
  Matching matching_;
  std::vector<double> without_buyer_;
  std::vector<double> without_seller_;
  std::vector<double> without_pair_;  // indexed by buyer, NaN when unmatched
};

enum class Provenance { BuyerOptimal, SellerOptimal, Tau, Negotiated };

[[nodiscard]] std::string_view to_string(Provenance p) noexcept;

struct PayoffAllocation {
  std::vector<double> buyer_payoffs;   // x', indexed like the matrix rows
  std::vector<double> seller_payoffs;  // x'', indexed like the matrix columns
  Provenance provenance = Provenance::Tau;

  [[nodiscard]] double buyer_total() const noexcept;
  [[nodiscard]] double seller_total() const noexcept;
};

struct PairBounds {
  MatchedPair pair;
  double value = 0.0;
  double buyer_utopia = 0.0;
  double buyer_min = 0.0;
  double seller_utopia = 0.0;
  double seller_min = 0.0;
  double buyer_mid = 0.0;
  double seller_mid = 0.0;
};

/// Marginal contribution of buyer i to the grand coalition (buyer-optimal
/// payoff).
[[nodiscard]] double utopia_payoff_buyer(const AssignmentGame& game, std::size_t buyer);

/// Marginal contribution of seller j to the grand coalition. Equals the
/// pair complement v - minimal_rights_buyer for matched sellers.
[[nodiscard]] double utopia_payoff_seller(const AssignmentGame& game, std::size_t seller);

/// What buyer i still secures once seller j leaves the market:
/// v_M(N \ {j}) - v_M(N \ {i, j}). Normally j is i's optimal partner; both
/// agents must at least be matched (DomainError otherwise).
[[nodiscard]] double minimal_rights_buyer(const AssignmentGame& game, const MatchedPair& pair);

[[nodiscard]] PairBounds pair_bounds(const AssignmentGame& game, const MatchedPair& pair);

[[nodiscard]] PayoffAllocation tau_value(const AssignmentGame& game);

struct ExtremeAllocations {
  PayoffAllocation buyer_optimal;
  PayoffAllocation seller_optimal;
};

[[nodiscard]] ExtremeAllocations extreme_allocations(const AssignmentGame& game);

enum class CoreViolationKind { Efficiency, PairwiseStability, Nonnegativity };

struct CoreViolation {
  CoreViolationKind kind;
  std::size_t buyer = Matching::npos;
  std::size_t seller = Matching::npos;
  double shortfall = 0.0;  // how far the condition is missed
};

struct CoreReport {
  bool member = true;
  std::vector<CoreViolation> violations;
  explicit operator bool() const noexcept { return member; }
};

/// Checks efficiency, pairwise stability for every buyer/seller pair and
/// nonnegativity. Throws DomainError when the allocation does not cover every
/// agent.
[[nodiscard]] CoreReport is_core_member(const AssignmentGame& game,
                                        const PayoffAllocation& allocation,
                                        double tolerance = kTolerance);

/// Per-kWh settlement price of every matched pair: bid - x'_i / q.
[[nodiscard]] std::map<MatchedPair, double> contract_prices(const AssignmentGame& game,
                                                            const PayoffAllocation& allocation);

struct WelfareSplit {
  double buyer_percent = 0.0;
  double seller_percent = 0.0;
};

[[nodiscard]] WelfareSplit welfare_split(const AssignmentGame& game,
                                         const PayoffAllocation& allocation);

}  // namespace p2p
