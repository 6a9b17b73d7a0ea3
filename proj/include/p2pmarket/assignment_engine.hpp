#pragma once

// Assignment matrix construction and exact one-to-one matching.

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "p2pmarket/market_model.hpp"

namespace p2p {

/// Dense buyer x seller table of contract values and traded quantities.
/// Rows are buyers, columns are sellers. Unit bids and asks are carried along
/// when the matrix was built from an instance so that payoffs can be turned
/// back into per-kWh prices.
class AssignmentMatrix {
 public:
  AssignmentMatrix() = default;

  /// Raw value matrix (quantities set to 1 for every positive entry).
  /// Throws std::invalid_argument on ragged rows or negative entries.
  explicit AssignmentMatrix(const std::vector<std::vector<double>>& values);
  explicit AssignmentMatrix(std::initializer_list<std::initializer_list<double>> rows);

  AssignmentMatrix(std::vector<std::string> buyer_ids, std::vector<std::string> seller_ids);

  [[nodiscard]] std::size_t num_buyers() const noexcept { return buyer_ids_.size(); }
  [[nodiscard]] std::size_t num_sellers() const noexcept { return seller_ids_.size(); }

  [[nodiscard]] double value(std::size_t buyer, std::size_t seller) const;
  [[nodiscard]] double quantity(std::size_t buyer, std::size_t seller) const;
  [[nodiscard]] double bid(std::size_t buyer, std::size_t seller) const;
  [[nodiscard]] double ask(std::size_t seller) const;
  [[nodiscard]] bool has_prices() const noexcept { return !bids_.empty(); }

  void set_entry(std::size_t buyer, std::size_t seller, double value, double quantity);
  void set_prices(std::vector<double> bids_row_major, std::vector<double> asks);

  [[nodiscard]] const std::vector<std::string>& buyer_ids() const noexcept { return buyer_ids_; }
  [[nodiscard]] const std::vector<std::string>& seller_ids() const noexcept { return seller_ids_; }

  [[nodiscard]] std::size_t buyer_index(std::string_view id) const;
  [[nodiscard]] std::size_t seller_index(std::string_view id) const;

 private:
  [[nodiscard]] std::size_t offset(std::size_t buyer, std::size_t seller) const;

  std::vector<std::string> buyer_ids_;
  std::vector<std::string> seller_ids_;
  std::vector<double> values_;
  std::vector<double> quantities_;
  std::vector<double> bids_;
  std::vector<double> asks_;
};

struct MatchedPair {
  std::size_t buyer = 0;
  std::size_t seller = 0;
  auto operator<=>(const MatchedPair&) const = default;
};

struct Matching {
  std::vector<MatchedPair> pairs;  // sorted, only strictly positive entries
  double total_value = 0.0;        // sum over `pairs` in sorted order

  /// Seller matched to the buyer, or npos.
  [[nodiscard]] std::size_t partner_of_buyer(std::size_t buyer) const noexcept;
  /// Buyer matched to the seller, or npos.
  [[nodiscard]] std::size_t partner_of_seller(std::size_t seller) const noexcept;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

using AgentSubset = std::span<const std::size_t>;

[[nodiscard]] std::vector<std::size_t> all_agents(std::size_t count);
[[nodiscard]] std::vector<std::size_t> all_agents_except(std::size_t count, std::size_t removed);

/// Evaluates contract_value for every buyer/seller pair.
[[nodiscard]] AssignmentMatrix build_assignment_matrix(const MarketInstance& instance);

/// Maximum-weight one-to-one matching restricted to the given buyer and seller
/// subsets. Among optimal matchings (values within the tie tolerance of the
/// optimum) the one with the lexicographically smallest sorted pair list is
/// returned. Uses the Hungarian algorithm on a zero-padded square matrix.
[[nodiscard]] Matching solve_optimal_assignment(const AssignmentMatrix& matrix,
                                                AgentSubset buyers, AgentSubset sellers);
[[nodiscard]] Matching solve_optimal_assignment(const AssignmentMatrix& matrix);

/// Value of the coalition formed by the given buyers and sellers.
[[nodiscard]] double coalition_value(const AssignmentMatrix& matrix, AgentSubset buyers,
                                     AgentSubset sellers);

/// Exhaustive enumeration of every matching configuration; same tie rule as
/// solve_optimal_assignment. Limited to 8 agents per side.
[[nodiscard]] Matching brute_force_assignment(const AssignmentMatrix& matrix, AgentSubset buyers,
                                              AgentSubset sellers);

inline constexpr std::size_t kBruteForceMaxSide = 8;

/// Two matching values closer than this are treated as tied.
[[nodiscard]] double tie_tolerance(double optimum) noexcept;

/// Optimal value of a dense rows x cols maximum-weight assignment problem
/// (rectangular, entries >= 0). `assignment[r]` receives the chosen column or
/// npos for rows left on padding.
double hungarian_max_weight(std::span<const double> weights, std::size_t rows, std::size_t cols,
                            std::vector<std::size_t>* assignment = nullptr);

}  // namespace p2p
