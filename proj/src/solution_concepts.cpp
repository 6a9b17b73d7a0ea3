#include "p2pmarket/solution_concepts.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "p2pmarket/errors.hpp"

namespace p2p {

AssignmentGame::AssignmentGame(AssignmentMatrix matrix) : matrix_(std::move(matrix)) {
  const auto nb = matrix_.num_buyers();
  const auto ns = matrix_.num_sellers();
  const auto buyers = all_agents(nb);
  const auto sellers = all_agents(ns);
  matching_ = solve_optimal_assignment(matrix_, buyers, sellers);

  without_buyer_.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    without_buyer_[i] = coalition_value(matrix_, all_agents_except(nb, i), sellers);
  }
  without_seller_.resize(ns);
  for (std::size_t j = 0; j < ns; ++j) {
    without_seller_[j] = coalition_value(matrix_, buyers, all_agents_except(ns, j));
  }
  without_pair_.assign(nb, std::numeric_limits<double>::quiet_NaN());
  for (const auto& p : matching_.pairs) {
    without_pair_[p.buyer] = coalition_value(matrix_, all_agents_except(nb, p.buyer),
                                             all_agents_except(ns, p.seller));
  }
}

double AssignmentGame::value_without_buyer(std::size_t buyer) const {
  if (buyer >= without_buyer_.size()) throw LookupError("buyer index out of range");
  return without_buyer_[buyer];
}

double AssignmentGame::value_without_seller(std::size_t seller) const {
  if (seller >= without_seller_.size()) throw LookupError("seller index out of range");
  return without_seller_[seller];
}

double AssignmentGame::value_without_pair(const MatchedPair& pair) const {
  if (pair.buyer >= num_buyers()) throw LookupError("buyer index out of range");
  if (pair.seller >= num_sellers()) throw LookupError("seller index out of range");
  if (matching_.partner_of_buyer(pair.buyer) == pair.seller) return without_pair_[pair.buyer];
  return coalition_value(matrix_, all_agents_except(num_buyers(), pair.buyer),
                         all_agents_except(num_sellers(), pair.seller));
}

void AssignmentGame::require_matched(const MatchedPair& pair) const {
  if (pair.buyer >= num_buyers()) throw LookupError("buyer index out of range");
  if (pair.seller >= num_sellers()) throw LookupError("seller index out of range");
  if (matching_.partner_of_buyer(pair.buyer) != pair.seller) {
    throw DomainError("(" + matrix_.buyer_ids()[pair.buyer] + ", " +
                      matrix_.seller_ids()[pair.seller] + ") is not an optimally matched pair");
  }
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::BuyerOptimal: return "buyer-optimal";
    case Provenance::SellerOptimal: return "seller-optimal";
    case Provenance::Tau: return "tau";
    case Provenance::Negotiated: return "negotiated";
  }
  return "unknown";
}

double PayoffAllocation::buyer_total() const noexcept {
  return std::accumulate(buyer_payoffs.begin(), buyer_payoffs.end(), 0.0);
}

double PayoffAllocation::seller_total() const noexcept {
  return std::accumulate(seller_payoffs.begin(), seller_payoffs.end(), 0.0);
}

double utopia_payoff_buyer(const AssignmentGame& game, std::size_t buyer) {
  return game.grand_value() - game.value_without_buyer(buyer);
}

double utopia_payoff_seller(const AssignmentGame& game, std::size_t seller) {
  return game.grand_value() - game.value_without_seller(seller);
}

double minimal_rights_buyer(const AssignmentGame& game, const MatchedPair& pair) {
  if (pair.buyer >= game.num_buyers()) throw LookupError("buyer index out of range");
  if (pair.seller >= game.num_sellers()) throw LookupError("seller index out of range");
  if (game.matching().partner_of_buyer(pair.buyer) == Matching::npos ||
      game.matching().partner_of_seller(pair.seller) == Matching::npos) {
    throw DomainError("minimal rights undefined for an unmatched agent");
  }
  return game.value_without_seller(pair.seller) - game.value_without_pair(pair);
}

PairBounds pair_bounds(const AssignmentGame& game, const MatchedPair& pair) {
  game.require_matched(pair);
  PairBounds b;
  b.pair = pair;
  b.value = game.matrix().value(pair.buyer, pair.seller);
  if (!(b.value > 0.0)) throw DomainError("pair bounds undefined for a zero-value pair");
  b.buyer_utopia = utopia_payoff_buyer(game, pair.buyer);
  b.buyer_min = minimal_rights_buyer(game, pair);
  b.seller_min = b.value - b.buyer_utopia;
  b.seller_utopia = b.value - b.buyer_min;
  b.buyer_mid = 0.5 * (b.buyer_utopia + b.buyer_min);
  b.seller_mid = 0.5 * (b.seller_utopia + b.seller_min);
  return b;
}

namespace {

PayoffAllocation empty_allocation(const AssignmentGame& game, Provenance provenance) {
  return {std::vector<double>(game.num_buyers(), 0.0),
          std::vector<double>(game.num_sellers(), 0.0), provenance};
}

}  // namespace

PayoffAllocation tau_value(const AssignmentGame& game) {
  auto alloc = empty_allocation(game, Provenance::Tau);
  for (const auto& p : game.matching().pairs) {
    const auto b = pair_bounds(game, p);
    alloc.buyer_payoffs[p.buyer] = b.buyer_mid;
    alloc.seller_payoffs[p.seller] = b.seller_mid;
  }
  return alloc;
}

ExtremeAllocations extreme_allocations(const AssignmentGame& game) {
  ExtremeAllocations out{empty_allocation(game, Provenance::BuyerOptimal),
                         empty_allocation(game, Provenance::SellerOptimal)};
  for (const auto& p : game.matching().pairs) {
    const auto b = pair_bounds(game, p);
    out.buyer_optimal.buyer_payoffs[p.buyer] = b.buyer_utopia;
    out.buyer_optimal.seller_payoffs[p.seller] = b.seller_min;
    out.seller_optimal.buyer_payoffs[p.buyer] = b.buyer_min;
    out.seller_optimal.seller_payoffs[p.seller] = b.seller_utopia;
  }
  return out;
}

CoreReport is_core_member(const AssignmentGame& game, const PayoffAllocation& allocation,
                          double tolerance) {
  if (allocation.buyer_payoffs.size() != game.num_buyers() ||
      allocation.seller_payoffs.size() != game.num_sellers()) {
    throw DomainError("allocation does not cover every agent of the game");
  }
  CoreReport report;
  auto flag = [&](CoreViolation v) {
    report.member = false;
    report.violations.push_back(v);
  };

  const double distributed = allocation.buyer_total() + allocation.seller_total();
  if (std::abs(distributed - game.grand_value()) > tolerance) {
    flag({CoreViolationKind::Efficiency, Matching::npos, Matching::npos,
          std::abs(distributed - game.grand_value())});
  }
  for (std::size_t i = 0; i < game.num_buyers(); ++i) {
    for (std::size_t j = 0; j < game.num_sellers(); ++j) {
      const double gap = game.matrix().value(i, j) -
                         (allocation.buyer_payoffs[i] + allocation.seller_payoffs[j]);
      if (gap > tolerance) flag({CoreViolationKind::PairwiseStability, i, j, gap});
    }
  }
  for (std::size_t i = 0; i < game.num_buyers(); ++i) {
    if (allocation.buyer_payoffs[i] < -tolerance) {
      flag({CoreViolationKind::Nonnegativity, i, Matching::npos, -allocation.buyer_payoffs[i]});
    }
  }
  for (std::size_t j = 0; j < game.num_sellers(); ++j) {
    if (allocation.seller_payoffs[j] < -tolerance) {
      flag({CoreViolationKind::Nonnegativity, Matching::npos, j, -allocation.seller_payoffs[j]});
    }
  }
  return report;
}

std::map<MatchedPair, double> contract_prices(const AssignmentGame& game,
                                              const PayoffAllocation& allocation) {
  if (allocation.buyer_payoffs.size() != game.num_buyers()) {
    throw DomainError("allocation does not cover every buyer");
  }
  std::map<MatchedPair, double> prices;
  for (const auto& p : game.matching().pairs) {
    const double q = game.matrix().quantity(p.buyer, p.seller);
    if (!(q > 0.0)) throw DomainError("contract price undefined for zero traded quantity");
    prices[p] = game.matrix().bid(p.buyer, p.seller) - allocation.buyer_payoffs[p.buyer] / q;
  }
  return prices;
}

WelfareSplit welfare_split(const AssignmentGame& game, const PayoffAllocation& allocation) {
  const double total = game.grand_value();
  if (!(total > 0.0)) throw DomainError("welfare split undefined for zero total welfare");
  return {100.0 * allocation.buyer_total() / total, 100.0 * allocation.seller_total() / total};
}

}  // namespace p2p
