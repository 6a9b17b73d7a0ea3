#include "p2pmarket/negotiation_engine.hpp"

#include <algorithm>
#include <cmath>

#include "p2pmarket/errors.hpp"
#include "random.hpp"

namespace p2p {

namespace {

std::size_t own(Side side) noexcept { return side == Side::Buyer ? 0 : 1; }

double norm2(const Payoff2& a, const Payoff2& b) noexcept {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

Payoff2 mix(double w_self, const Payoff2& self, double w_other, const Payoff2& other) noexcept {
  return {w_self * self[0] + w_other * other[0], w_self * self[1] + w_other * other[1]};
}

}  // namespace

bool FavorableSet::contains(const Payoff2& point, double tolerance) const noexcept {
  return std::abs(point[0] + point[1] - value) <= tolerance &&
         point[own(side)] >= own_mid - tolerance;
}

Payoff2 FavorableSet::endpoint() const noexcept {
  return side == Side::Buyer ? Payoff2{own_mid, value - own_mid}
                             : Payoff2{value - own_mid, own_mid};
}

FavorableSet buyer_favorable_set(const PairBounds& bounds) noexcept {
  return {bounds.value, bounds.buyer_mid, Side::Buyer};
}

FavorableSet seller_favorable_set(const PairBounds& bounds) noexcept {
  return {bounds.value, bounds.seller_mid, Side::Seller};
}

Payoff2 project_favorable(const Payoff2& point, const FavorableSet& set) noexcept {
  const double a = point[0];
  const double b = point[1];
  const Payoff2 on_line{(a - b + set.value) / 2.0, (b - a + set.value) / 2.0};
  if (on_line[own(set.side)] < set.own_mid) return set.endpoint();
  return on_line;
}

// ---------------------------------------------------------------------------

WeightSchedule::WeightSchedule(std::vector<WeightMatrix> family, double gamma,
                               std::uint64_t seed, Selection selection)
    : family_(std::move(family)), gamma_(gamma), seed_(seed), selection_(selection) {
  if (family_.empty()) throw ConfigError("weight family must not be empty");
  if (!(gamma_ > 0.0)) throw ConfigError("gamma must be positive");
  for (const auto& w : family_) {
    for (const auto& row : w) {
      if (std::abs(row[0] + row[1] - 1.0) > 1e-12) {
        throw ConfigError("weight matrix rows must sum to 1");
      }
      if (row[0] < gamma_ || row[1] < gamma_) {
        throw ConfigError("weight matrix entries must be at least gamma");
      }
    }
  }
}

std::size_t WeightSchedule::index_at(std::uint64_t step) const {
  if (selection_ == Selection::RoundRobin) return step % family_.size();
  return detail::splitmix64(seed_ ^ detail::splitmix64(step)) % family_.size();
}

const WeightMatrix& WeightSchedule::at(std::uint64_t step) const {
  return family_[index_at(step)];
}

WeightSchedule make_weight_family(double gamma, std::size_t family_size, std::uint64_t seed,
                                  Selection selection) {
  if (!(gamma > 0.0 && gamma <= 0.5)) throw ConfigError("gamma must lie in (0, 0.5]");
  if (family_size == 0) throw ConfigError("family size must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<WeightMatrix> family;
  family.reserve(family_size);
  for (std::size_t k = 0; k < family_size; ++k) {
    const double w = detail::uniform(rng, gamma, 1.0 - gamma);
    const double w2 = detail::uniform(rng, gamma, 1.0 - gamma);
    family.push_back({{{1.0 - w, w}, {w2, 1.0 - w2}}});
  }
  return WeightSchedule(std::move(family), gamma, seed, selection);
}

std::uint64_t pair_seed(std::uint64_t global_seed, const MatchedPair& pair) noexcept {
  std::uint64_t h = detail::splitmix64(global_seed);
  h = detail::splitmix64(h ^ pair.buyer);
  return detail::splitmix64(h ^ (pair.seller + 0x51ed27ULL));
}

// ---------------------------------------------------------------------------

double NegotiationState::dist_to_tau() const noexcept {
  const double db = norm2(buyer_proposal, tau);
  const double ds = norm2(seller_proposal, tau);
  return std::sqrt(db * db + ds * ds);
}

double NegotiationState::lyapunov() const noexcept {
  return std::max(norm2(buyer_proposal, tau), norm2(seller_proposal, tau));
}

NegotiationState make_negotiation_state(const PairBounds& bounds, const Payoff2& buyer_opening,
                                        const Payoff2& seller_opening) {
  NegotiationState s;
  s.pair = bounds.pair;
  s.buyer_proposal = buyer_opening;
  s.seller_proposal = seller_opening;
  s.tau = {bounds.buyer_mid, bounds.seller_mid};
  s.trajectory.push_back({0, s.buyer_proposal, s.seller_proposal, s.dist_to_tau()});
  return s;
}

NegotiationState negotiation_step(NegotiationState state, const WeightMatrix& w,
                                  const PayoffOperator& buyer_op,
                                  const PayoffOperator& seller_op) {
  const Payoff2 buyer_avg = mix(w[0][0], state.buyer_proposal, w[0][1], state.seller_proposal);
  const Payoff2 seller_avg = mix(w[1][1], state.seller_proposal, w[1][0], state.buyer_proposal);
  state.buyer_proposal = buyer_op.apply(buyer_avg);
  state.seller_proposal = seller_op.apply(seller_avg);
  ++state.step;
  state.trajectory.push_back(
      {state.step, state.buyer_proposal, state.seller_proposal, state.dist_to_tau()});
  return state;
}

NegotiationState negotiation_step(NegotiationState state, const WeightMatrix& w,
                                  const FavorableSet& buyer_set, const FavorableSet& seller_set) {
  return negotiation_step(std::move(state), w, ProjectionOperator(buyer_set), ProjectionOperator(seller_set));
}

namespace {

bool settled(const NegotiationState& s, double tol) noexcept {
  const double consensus = std::max(std::abs(s.buyer_proposal[0] - s.seller_proposal[0]),
                                    std::abs(s.buyer_proposal[1] - s.seller_proposal[1]));
  return std::max({consensus, norm2(s.buyer_proposal, s.tau), norm2(s.seller_proposal, s.tau)}) <=
         tol;
}

}  // namespace

NegotiationResult run_negotiation(const PairBounds& bounds, const WeightSchedule& schedule,
                                  const NegotiationConfig& config) {
  return run_negotiation(bounds, schedule, config, ProjectionOperator(buyer_favorable_set(bounds)),
                         ProjectionOperator(seller_favorable_set(bounds)));
}

NegotiationResult run_negotiation(const PairBounds& bounds, const WeightSchedule& schedule,
                                  const NegotiationConfig& config, const PayoffOperator& buyer_op,
                                  const PayoffOperator& seller_op) {
  if (!(bounds.value > 0.0)) throw DomainError("negotiation requires a pair with positive value");
  const Payoff2 buyer_opening = config.buyer_opening.value_or(Payoff2{bounds.value, 0.0});
  const Payoff2 seller_opening = config.seller_opening.value_or(Payoff2{0.0, bounds.value});

  NegotiationState state = make_negotiation_state(bounds, buyer_opening, seller_opening);
  bool converged = settled(state, config.tol);
  while (!converged && state.step < config.max_iters) {
    state = negotiation_step(std::move(state), schedule.at(state.step), buyer_op, seller_op);
    converged = settled(state, config.tol);
  }

  NegotiationResult result;
  result.pair = bounds.pair;
  result.payoff = state.buyer_proposal;
  result.converged = converged;
  result.iterations = state.step;
  result.trajectory = std::move(state.trajectory);
  return result;
}

PayoffAllocation negotiated_allocation(const AssignmentGame& game,
                                       const std::vector<NegotiationResult>& results) {
  PayoffAllocation alloc{std::vector<double>(game.num_buyers(), 0.0),
                         std::vector<double>(game.num_sellers(), 0.0), Provenance::Negotiated};
  for (const auto& r : results) {
    game.require_matched(r.pair);
    alloc.buyer_payoffs[r.pair.buyer] = r.payoff[0];
    alloc.seller_payoffs[r.pair.seller] = r.payoff[1];
  }
  return alloc;
}

// ---------------------------------------------------------------------------

std::optional<bool> paracontracts(const FavorableSet& set, const Payoff2& x, const Payoff2& y) {
  if (set.contains(x)) return std::nullopt;
  return norm2(project_favorable(x, set), y) < norm2(x, y);
}

ParacontractionCheck check_paracontraction(const FavorableSet& set, std::size_t sample_count,
                                           std::uint64_t seed) {
  if (sample_count == 0) throw ConfigError("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  const double span = std::max(1.0, std::abs(set.value));
  ParacontractionCheck out;
  for (std::size_t k = 0; k < sample_count; ++k) {
    const Payoff2 x{detail::uniform(rng, -span, 2.0 * span), detail::uniform(rng, -span, 2.0 * span)};
    const double own_share = set.own_mid + detail::uniform(rng, 0.0, 2.0 * span);
    const Payoff2 y = set.side == Side::Buyer ? Payoff2{own_share, set.value - own_share}
                                              : Payoff2{set.value - own_share, own_share};
    const auto verdict = paracontracts(set, x, y);
    if (!verdict) {
      ++out.skipped;
      continue;
    }
    ++out.tested;
    if (!*verdict && out.ok) {
      out.ok = false;
      out.counterexample_x = x;
      out.counterexample_y = y;
    }
  }
  return out;
}

}  // namespace p2p
