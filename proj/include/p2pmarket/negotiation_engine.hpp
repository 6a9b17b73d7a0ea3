#pragma once

// Bilateral negotiation between the two members of a matched pair: each round
// both agents average their own and their partner's proposal with a
// row-stochastic weight matrix, then apply a paracontraction whose fixed set is
// their favorable-payoff ray.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "p2pmarket/solution_concepts.hpp"

namespace p2p {

/// Payoff proposal for one pair: (buyer share, seller share).
using Payoff2 = std::array<double, 2>;

/// Rows/columns ordered (buyer, seller).
using WeightMatrix = std::array<std::array<double, 2>, 2>;

enum class Side { Buyer, Seller };

/// {(a, b) : a + b = value, own coordinate >= own_mid}.
struct FavorableSet {
  double value = 0.0;
  double own_mid = 0.0;
  Side side = Side::Buyer;

  [[nodiscard]] bool contains(const Payoff2& point, double tolerance = 1e-12) const noexcept;
  /// The unique point shared by the buyer and seller sets of a pair.
  [[nodiscard]] Payoff2 endpoint() const noexcept;
};

[[nodiscard]] FavorableSet buyer_favorable_set(const PairBounds& bounds) noexcept;
[[nodiscard]] FavorableSet seller_favorable_set(const PairBounds& bounds) noexcept;

/// Exact Euclidean projection onto a favorable-payoff ray.
[[nodiscard]] Payoff2 project_favorable(const Payoff2& point, const FavorableSet& set) noexcept;

/// Operator applied by an agent after averaging. Its fixed-point set must be
/// the agent's favorable set.
class PayoffOperator {
 public:
  virtual ~PayoffOperator() = default;
  [[nodiscard]] virtual Payoff2 apply(const Payoff2& point) const = 0;
  [[nodiscard]] virtual const FavorableSet& fixed_set() const noexcept = 0;
};

class ProjectionOperator final : public PayoffOperator {
 public:
  explicit ProjectionOperator(FavorableSet set) : set_(set) {}
  [[nodiscard]] Payoff2 apply(const Payoff2& point) const override {
    return project_favorable(point, set_);
  }
  [[nodiscard]] const FavorableSet& fixed_set() const noexcept override { return set_; }

 private:
  FavorableSet set_;
};

enum class Selection { Random, RoundRobin };

/// Finite family of 2x2 row-stochastic matrices with entries >= gamma and a
/// reproducible step -> member selection.
class WeightSchedule {
 public:
  WeightSchedule(std::vector<WeightMatrix> family, double gamma, std::uint64_t seed,
                 Selection selection);

  [[nodiscard]] const WeightMatrix& at(std::uint64_t step) const;
  [[nodiscard]] std::size_t index_at(std::uint64_t step) const;
  [[nodiscard]] const std::vector<WeightMatrix>& family() const noexcept { return family_; }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] Selection selection() const noexcept { return selection_; }

 private:
  std::vector<WeightMatrix> family_;
  double gamma_;
  std::uint64_t seed_;
  Selection selection_;
};

/// Draws `family_size` matrices [[1-w, w], [w', 1-w']] with w, w' uniform in
/// [gamma, 1-gamma]. Throws ConfigError unless 0 < gamma <= 0.5 and
/// family_size >= 1.
[[nodiscard]] WeightSchedule make_weight_family(double gamma, std::size_t family_size,
                                                std::uint64_t seed,
                                                Selection selection = Selection::Random);

/// Mixes a global seed with a pair identity so every pair gets its own stream.
[[nodiscard]] std::uint64_t pair_seed(std::uint64_t global_seed, const MatchedPair& pair) noexcept;

struct TrajectoryPoint {
  std::uint64_t step = 0;
  Payoff2 buyer_proposal{};
  Payoff2 seller_proposal{};
  double dist_to_tau = 0.0;  // Euclidean norm of the stacked 4-vector
};

struct NegotiationState {
  MatchedPair pair;
  Payoff2 buyer_proposal{};
  Payoff2 seller_proposal{};
  Payoff2 tau{};  // target used for trajectory distances
  std::uint64_t step = 0;
  std::vector<TrajectoryPoint> trajectory;

  [[nodiscard]] double dist_to_tau() const noexcept;
  /// max over both agents of the 2-norm distance to tau.
  [[nodiscard]] double lyapunov() const noexcept;
};

[[nodiscard]] NegotiationState make_negotiation_state(const PairBounds& bounds,
                                                      const Payoff2& buyer_opening,
                                                      const Payoff2& seller_opening);

/// One synchronous round; both agents read the previous proposals.
[[nodiscard]] NegotiationState negotiation_step(NegotiationState state, const WeightMatrix& w,
                                                const PayoffOperator& buyer_op,
                                                const PayoffOperator& seller_op);
[[nodiscard]] NegotiationState negotiation_step(NegotiationState state, const WeightMatrix& w,
                                                const FavorableSet& buyer_set,
                                                const FavorableSet& seller_set);

struct NegotiationConfig {
  double tol = 1e-8;
  std::uint64_t max_iters = 10'000;
  std::optional<Payoff2> buyer_opening;   // default (v, 0)
  std::optional<Payoff2> seller_opening;  // default (0, v)
};

struct NegotiationResult {
  MatchedPair pair;
  Payoff2 payoff{};  // agreed (buyer, seller) split; last buyer proposal if not converged
  bool converged = false;
  std::uint64_t iterations = 0;
  std::vector<TrajectoryPoint> trajectory;
};

/// Iterates negotiation_step until both proposals agree and sit within `tol`
/// of the tau split, or `max_iters` is hit (converged = false).
[[nodiscard]] NegotiationResult run_negotiation(const PairBounds& bounds,
                                                const WeightSchedule& schedule,
                                                const NegotiationConfig& config = {});

/// Same as above with caller-supplied operators.
[[nodiscard]] NegotiationResult run_negotiation(const PairBounds& bounds,
                                                const WeightSchedule& schedule,
                                                const NegotiationConfig& config,
                                                const PayoffOperator& buyer_op,
                                                const PayoffOperator& seller_op);

/// Collects per-pair negotiated payoffs into a game-wide allocation; agents
/// without a result keep 0.
[[nodiscard]] PayoffAllocation negotiated_allocation(const AssignmentGame& game,
                                                     const std::vector<NegotiationResult>& results);

struct ParacontractionCheck {
  bool ok = true;
  std::size_t tested = 0;
  std::size_t skipped = 0;  // samples that fell inside the set
  Payoff2 counterexample_x{};
  Payoff2 counterexample_y{};
};

/// Samples x outside and y inside the set and verifies
/// |P(x) - y| < |x - y| strictly.
[[nodiscard]] ParacontractionCheck check_paracontraction(const FavorableSet& set,
                                                         std::size_t sample_count,
                                                         std::uint64_t seed);

/// Single-sample form of the check; returns nullopt when x is in the set.
[[nodiscard]] std::optional<bool> paracontracts(const FavorableSet& set, const Payoff2& x,
                                                const Payoff2& y);

}  // namespace p2p
