#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "digimkt/certify.hpp"
#include "digimkt/state.hpp"

namespace digimkt {

enum class PriceRule { multiplicative, argmax };
enum class UpdateOrder { jacobi, gauss_seidel };

const char* price_rule_name(PriceRule r);
PriceRule price_rule_from_name(const std::string& name);
const char* update_order_name(UpdateOrder o);
UpdateOrder update_order_from_name(const std::string& name);

struct SolveConfig {
  PriceRule rule = PriceRule::multiplicative;
  UpdateOrder order = UpdateOrder::jacobi;
  double eta = 0.1;            // price step size
  double damping = 0.5;        // production plan step size
  double tol = 1e-6;
  long long max_iters = 50'000;
  long long certify_every = 1;
  std::uint64_t seed = 0;      // drives restarts on stalls
};

/// One row of the iteration log.
struct IterationRow {
  long long iter = 0;
  std::vector<double> prices;
  double res_cond1 = 0.0;
  double res_cond2 = 0.0;
  double res_cond3 = 0.0;
  double total_earnings = 0.0;
};

struct SolveResult {
  bool converged = false;
  long long iterations = 0;
  MarketState state;       // best state seen (passing state when converged)
  Certificate certificate; // certificate of `state`
  std::vector<IterationRow> log;
};

/// Prices that maximize q . value_ratio over the simplex: uniform over the
/// coordinates attaining the best bought/sold ratio. Bread's ratio is
/// (b_0 + 1) / (s_0 + 1) so an empty market moves nothing.
std::vector<double> argmax_prices(const MarketTotals& totals);

/// Next price vector from current prices and totals, then renormalized.
/// multiplicative: p_j scaled by ratio_j^eta; argmax: convex step toward
/// argmax_prices.
std::vector<double> price_update(std::span<const double> prices,
                                 const MarketTotals& totals, PriceRule rule,
                                 double eta);

/// One synchronous application of the market map: all demands at current
/// budgets, all best responses against the current state, the price step,
/// then budgets from the new state's earnings. Fixed points of this map are
/// exactly the states certify() accepts.
MarketState f_map(const MarketInstance& inst, const MarketState& state,
                  PriceRule rule, double eta);

/// Uniform prices, bread-only production, empty demand, matching budgets.
MarketState initial_state(const MarketInstance& inst);

/// Damped iteration of the market map until the certifier accepts a state or
/// the iteration budget runs out. Returns the best state seen either way.
SolveResult solve(const MarketInstance& inst, const SolveConfig& cfg);

/// Equilibrium under wealth transfers: buyer budgets are decoupled from
/// earnings and steered so realized utilities become proportional to
/// `targets`, with the total budget matching total earnings.
struct TransferResult {
  bool converged = false;
  long long iterations = 0;
  MarketState state;
  std::vector<double> budgets;   // final transfer budgets w
  double gamma = 0.0;            // total wealth distributed
  double alpha = 0.0;            // common utility/target factor
  TransferReport report;
  std::vector<IterationRow> log;
};

TransferResult solve_with_transfers(const MarketInstance& inst,
                                    std::span<const double> targets,
                                    const SolveConfig& cfg);

}  // namespace digimkt
