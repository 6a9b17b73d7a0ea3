#include "p2pmarket/assignment_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "p2pmarket/errors.hpp"

namespace p2p {

// ---------------------------------------------------------------------------
// AssignmentMatrix

AssignmentMatrix::AssignmentMatrix(const std::vector<std::vector<double>>& values) {
  const std::size_t rows = values.size();
  const std::size_t cols = rows == 0 ? 0 : values.front().size();
  for (std::size_t i = 0; i < rows; ++i) buyer_ids_.push_back("B" + std::to_string(i + 1));
  for (std::size_t j = 0; j < cols; ++j) seller_ids_.push_back("S" + std::to_string(j + 1));
  values_.assign(rows * cols, 0.0);
  quantities_.assign(rows * cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (values[i].size() != cols) throw std::invalid_argument("ragged assignment matrix");
    for (std::size_t j = 0; j < cols; ++j) {
      set_entry(i, j, values[i][j], values[i][j] > 0.0 ? 1.0 : 0.0);
    }
  }
}

AssignmentMatrix::AssignmentMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : AssignmentMatrix(std::vector<std::vector<double>>(rows.begin(), rows.end())) {}

AssignmentMatrix::AssignmentMatrix(std::vector<std::string> buyer_ids,
                                   std::vector<std::string> seller_ids)
    : buyer_ids_(std::move(buyer_ids)),
      seller_ids_(std::move(seller_ids)),
      values_(buyer_ids_.size() * seller_ids_.size(), 0.0),
      quantities_(values_.size(), 0.0) {}

std::size_t AssignmentMatrix::offset(std::size_t buyer, std::size_t seller) const {
  if (buyer >= num_buyers()) throw LookupError("buyer index out of range");
  if (seller >= num_sellers()) throw LookupError("seller index out of range");
  return buyer * num_sellers() + seller;
}

double AssignmentMatrix::value(std::size_t buyer, std::size_t seller) const {
  return values_[offset(buyer, seller)];
}

double AssignmentMatrix::quantity(std::size_t buyer, std::size_t seller) const {
  return quantities_[offset(buyer, seller)];
}

double AssignmentMatrix::bid(std::size_t buyer, std::size_t seller) const {
  if (!has_prices()) throw DomainError("assignment matrix carries no unit prices");
  return bids_[offset(buyer, seller)];
}

double AssignmentMatrix::ask(std::size_t seller) const {
  if (!has_prices()) throw DomainError("assignment matrix carries no unit prices");
  if (seller >= num_sellers()) throw LookupError("seller index out of range");
  return asks_[seller];
}

void AssignmentMatrix::set_entry(std::size_t buyer, std::size_t seller, double value,
                                 double quantity) {
  if (!(value >= 0.0)) throw std::invalid_argument("assignment values must be nonnegative");
  const auto k = offset(buyer, seller);
  values_[k] = value;
  quantities_[k] = quantity;
}

void AssignmentMatrix::set_prices(std::vector<double> bids_row_major, std::vector<double> asks) {
  if (bids_row_major.size() != values_.size() || asks.size() != num_sellers()) {
    throw std::invalid_argument("price table dimensions do not match the matrix");
  }
  bids_ = std::move(bids_row_major);
  asks_ = std::move(asks);
}

std::size_t AssignmentMatrix::buyer_index(std::string_view id) const {
  auto it = std::find(buyer_ids_.begin(), buyer_ids_.end(), id);
  if (it == buyer_ids_.end()) throw LookupError("unknown buyer id '" + std::string(id) + "'");
  return static_cast<std::size_t>(it - buyer_ids_.begin());
}

std::size_t AssignmentMatrix::seller_index(std::string_view id) const {
  auto it = std::find(seller_ids_.begin(), seller_ids_.end(), id);
  if (it == seller_ids_.end()) throw LookupError("unknown seller id '" + std::string(id) + "'");
  return static_cast<std::size_t>(it - seller_ids_.begin());
}

std::size_t Matching::partner_of_buyer(std::size_t buyer) const noexcept {
  for (const auto& p : pairs) {
    if (p.buyer == buyer) return p.seller;
  }
  return npos;
}

std::size_t Matching::partner_of_seller(std::size_t seller) const noexcept {
  for (const auto& p : pairs) {
    if (p.seller == seller) return p.buyer;
  }
  return npos;
}

std::vector<std::size_t> all_agents(std::size_t count) {
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

std::vector<std::size_t> all_agents_except(std::size_t count, std::size_t removed) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < count; ++k) {
    if (k != removed) out.push_back(k);
  }
  return out;
}

AssignmentMatrix build_assignment_matrix(const MarketInstance& instance) {
  std::vector<std::string> buyer_ids, seller_ids;
  for (const auto& b : instance.buyers) buyer_ids.push_back(b.id);
  for (const auto& s : instance.sellers) seller_ids.push_back(s.id);
  AssignmentMatrix matrix(std::move(buyer_ids), std::move(seller_ids));

  std::vector<double> bids;
  std::vector<double> asks;
  for (const auto& s : instance.sellers) asks.push_back(s.ask_price);
  for (std::size_t i = 0; i < instance.buyers.size(); ++i) {
    const auto& b = instance.buyers[i];
    for (std::size_t j = 0; j < instance.sellers.size(); ++j) {
      const auto& s = instance.sellers[j];
      const auto cv = contract_value(b, s, instance.scenario_set);
      matrix.set_entry(i, j, cv.value, cv.quantity);
      bids.push_back(b.bid(s.id));
    }
  }
  matrix.set_prices(std::move(bids), std::move(asks));
  return matrix;
}

double tie_tolerance(double optimum) noexcept {
  return kTolerance * std::max(1.0, std::abs(optimum));
}

// ---------------------------------------------------------------------------
// Hungarian algorithm (shortest augmenting path with potentials), minimising
// the negated weights on a square matrix padded with zeros.

double hungarian_max_weight(std::span<const double> weights, std::size_t rows, std::size_t cols,
                            std::vector<std::size_t>* assignment) {
  if (weights.size() != rows * cols) throw std::invalid_argument("weight table size mismatch");
  const std::size_t n = std::max(rows, cols);
  if (assignment) assignment->assign(rows, Matching::npos);
  if (rows == 0 || cols == 0) return 0.0;

  auto cost = [&](std::size_t r, std::size_t c) -> double {
    // 1-based indices into the padded square.
    if (r > rows || c > cols) return 0.0;
    return -weights[(r - 1) * cols + (c - 1)];
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t r = 1; r <= n; ++r) {
    p[0] = r;
    std::size_t c0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[c0] = 1;
      const std::size_t r0 = p[c0];
      double delta = inf;
      std::size_t c1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = cost(r0, c) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = c0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          c1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[p[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      c0 = c1;
    } while (p[c0] != 0);
    do {
      const std::size_t c1 = way[c0];
      p[c0] = p[c1];
      c0 = c1;
    } while (c0 != 0);
  }

  double total = 0.0;
  for (std::size_t c = 1; c <= n; ++c) {
    const std::size_t r = p[c];
    if (r == 0 || r > rows || c > cols) continue;
    total += weights[(r - 1) * cols + (c - 1)];
    if (assignment) (*assignment)[r - 1] = c - 1;
  }
  return total;
}

namespace {

std::vector<std::size_t> normalized(AgentSubset subset, std::size_t limit, const char* side) {
  std::vector<std::size_t> out(subset.begin(), subset.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (!out.empty() && out.back() >= limit) {
    throw LookupError(std::string(side) + " index out of range in coalition");
  }
  return out;
}

// Local (subset-relative) dense view of the matrix.
struct LocalProblem {
  std::vector<std::size_t> buyers;
  std::vector<std::size_t> sellers;
  std::vector<double> w;  // buyers.size() x sellers.size()

  LocalProblem(const AssignmentMatrix& m, AgentSubset b, AgentSubset s)
      : buyers(normalized(b, m.num_buyers(), "buyer")),
        sellers(normalized(s, m.num_sellers(), "seller")) {
    w.reserve(buyers.size() * sellers.size());
    for (auto i : buyers) {
      for (auto j : sellers) w.push_back(m.value(i, j));
    }
  }

  [[nodiscard]] std::size_t rows() const { return buyers.size(); }
  [[nodiscard]] std::size_t cols() const { return sellers.size(); }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return w[r * cols() + c]; }
};

using LocalPair = std::pair<std::size_t, std::size_t>;

Matching to_matching(const LocalProblem& lp, const std::vector<LocalPair>& local) {
  Matching m;
  for (const auto& [r, c] : local) {
    m.pairs.push_back({lp.buyers[r], lp.sellers[c]});
    m.total_value += lp.at(r, c);
  }
  return m;
}

}  // namespace

Matching solve_optimal_assignment(const AssignmentMatrix& matrix, AgentSubset buyers,
                                  AgentSubset sellers) {
  const LocalProblem lp(matrix, buyers, sellers);
  if (lp.rows() == 0 || lp.cols() == 0) return {};

  const double optimum = hungarian_max_weight(lp.w, lp.rows(), lp.cols());
  const double threshold = optimum - tie_tolerance(optimum);

  // Build the lexicographically smallest optimal pair list one element at a
  // time: a candidate pair q is accepted when some optimal matching contains
  // the fixed prefix, q, and otherwise only pairs greater than q.
  std::vector<LocalPair> fixed;
  double fixed_value = 0.0;
  std::vector<char> row_used(lp.rows(), 0), col_used(lp.cols(), 0);
  std::vector<double> sub(lp.w.size());

  while (fixed_value < threshold) {
    bool extended = false;
    const std::size_t start_row = fixed.empty() ? 0 : fixed.back().first + 1;
    for (std::size_t r = start_row; r < lp.rows() && !extended; ++r) {
      if (row_used[r]) continue;
      for (std::size_t c = 0; c < lp.cols() && !extended; ++c) {
        if (col_used[c] || !(lp.at(r, c) > 0.0)) continue;
        // Only pairs strictly after (r, c) among still-free agents remain.
        for (std::size_t rr = 0; rr < lp.rows(); ++rr) {
          for (std::size_t cc = 0; cc < lp.cols(); ++cc) {
            const bool free = !row_used[rr] && !col_used[cc] && rr != r && cc != c;
            const bool later = LocalPair{rr, cc} > LocalPair{r, c};
            sub[rr * lp.cols() + cc] = free && later ? lp.at(rr, cc) : 0.0;
          }
        }
        const double best_rest = hungarian_max_weight(sub, lp.rows(), lp.cols());
        if (fixed_value + lp.at(r, c) + best_rest >= threshold) {
          fixed.emplace_back(r, c);
          fixed_value += lp.at(r, c);
          row_used[r] = 1;
          col_used[c] = 1;
          extended = true;
        }
      }
    }
    if (!extended) throw std::logic_error("tie-break search failed to reach the optimum");
  }
  return to_matching(lp, fixed);
}

Matching solve_optimal_assignment(const AssignmentMatrix& matrix) {
  const auto b = all_agents(matrix.num_buyers());
  const auto s = all_agents(matrix.num_sellers());
  return solve_optimal_assignment(matrix, b, s);
}

double coalition_value(const AssignmentMatrix& matrix, AgentSubset buyers, AgentSubset sellers) {
  return solve_optimal_assignment(matrix, buyers, sellers).total_value;
}

namespace {

struct Enumerator {
  const LocalProblem& lp;
  std::vector<char> col_used;
  std::vector<LocalPair> current;
  double best = -1.0;
  // Second pass: lexicographically smallest list at or above the threshold.
  bool selecting = false;
  double threshold = 0.0;
  std::vector<LocalPair> chosen;
  bool have_choice = false;

  explicit Enumerator(const LocalProblem& p) : lp(p), col_used(p.cols(), 0) {}

  void visit(std::size_t row) {
    if (row == lp.rows()) {
      double total = 0.0;
      for (const auto& [r, c] : current) total += lp.at(r, c);
      if (!selecting) {
        best = std::max(best, total);
      } else if (total >= threshold && (!have_choice || current < chosen)) {
        chosen = current;
        have_choice = true;
      }
      return;
    }
    visit(row + 1);  // row left unmatched
    for (std::size_t c = 0; c < lp.cols(); ++c) {
      if (col_used[c] || !(lp.at(row, c) > 0.0)) continue;
      col_used[c] = 1;
      current.emplace_back(row, c);
      visit(row + 1);
      current.pop_back();
      col_used[c] = 0;
    }
  }
};

}  // namespace

Matching brute_force_assignment(const AssignmentMatrix& matrix, AgentSubset buyers,
                                AgentSubset sellers) {
  const LocalProblem lp(matrix, buyers, sellers);
  if (lp.rows() > kBruteForceMaxSide || lp.cols() > kBruteForceMaxSide) {
    throw SizeError("brute-force assignment limited to 8 agents per side");
  }
  if (lp.rows() == 0 || lp.cols() == 0) return {};

  Enumerator e(lp);
  e.visit(0);
  e.selecting = true;
  e.threshold = e.best - tie_tolerance(e.best);
  e.visit(0);
  return to_matching(lp, e.chosen);
}

}  // namespace p2p
