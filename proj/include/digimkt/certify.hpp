#pragma once

#include <span>
#include <vector>

#include "digimkt/production.hpp"
#include "digimkt/state.hpp"

namespace digimkt {

/// Equilibrium certificate. A state passes at tolerance `tol` when
///   1. no producer can raise her revenue by replanning (per-agent gap),
///   2. every buyer's bundle is utility-optimal at her budget and the bundle
///      exactly spends it,
///   3. the market clears: bread bought equals bread sold, no unmet digital
///      demand, every positively priced supply is fully bought by someone,
///      and nobody buys past an entity's supply.
struct Certificate {
  bool pass = false;
  double tol = 0.0;

  std::vector<double> production_gap;   // per agent
  std::vector<double> utility_gap;      // per agent
  std::vector<double> budget_slack;     // per agent
  double bread_imbalance = 0.0;
  double max_unsold_gap = 0.0;
  double max_unmet_demand = 0.0;
  double max_oversold = 0.0;

  // Aggregates, one per condition (max over the pieces above).
  double res_cond1 = 0.0;
  double res_cond2 = 0.0;
  double res_cond3 = 0.0;
  double worst = 0.0;
};

/// Certify with buyer budgets taken from the state's own earnings.
Certificate certify(const MarketInstance& inst, const MarketState& state,
                    double tol);

/// Certify against externally fixed budgets (wealth transfers).
Certificate certify_with_budgets(const MarketInstance& inst,
                                 const MarketState& state,
                                 std::span<const double> budgets, double tol);

/// Accounting identity per digital category: the bought/sold gap equals
/// total unmet demand minus total unsold copies, and the two never coexist.
struct BalanceReport {
  std::vector<double> unmet_total;     // per category
  std::vector<double> unsold_total;    // per category
  std::vector<double> identity_gap;    // per category
  double max_identity_gap = 0.0;
  bool mutual_exclusion = true;
};

BalanceReport check_balance_identity(const MarketInstance& inst,
                                     const DetailedAllocation& x,
                                     const Production& y);

/// Grid search for a bread reallocation that Pareto-dominates the state.
/// Digital production and purchases stay fixed; the labor they leave over is
/// redistributed into bread on a grid of the given step. A strict gain must
/// exceed a per-agent slack covering the grid resolution before it counts.
struct ParetoReport {
  bool dominated = false;
  bool exhaustive = true;               // full grid visited within max_points
  long long points_checked = 0;
  std::vector<double> base_utilities;   // u_i at the state
  std::vector<double> witness_bread;    // dominating bread split, if any
  std::vector<double> witness_utilities;
  double grid_step = 0.0;
};

ParetoReport check_partial_pareto(const MarketInstance& inst,
                                  const MarketState& state, double grid_step,
                                  double tol,
                                  long long max_points = 50'000'000);

/// Verdict for a state solved under transferred wealth: it must certify
/// against the transfer budgets and realize utilities proportional to the
/// targets with a common factor alpha >= 1.
struct TransferReport {
  bool pass = false;
  double alpha = 0.0;
  std::vector<double> ratios;    // realized utility / target, per agent
  double max_deviation = 0.0;    // max_i |u_i - alpha * target_i|
  Certificate certificate;
};

TransferReport check_transfer_equilibrium(const MarketInstance& inst,
                                          const MarketState& state,
                                          std::span<const double> budgets,
                                          std::span<const double> targets,
                                          double tol);

}  // namespace digimkt
