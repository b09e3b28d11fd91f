#pragma once

#include <span>
#include <vector>

#include "digimkt/demand.hpp"
#include "digimkt/model.hpp"

namespace digimkt {

/// Income of agent i at a state: bread output valued at p_0 plus every copy
/// sold of her initial songs and of her produced supply, at category prices.
/// Market-maker flows are not income.
double earnings(const MarketInstance& inst, std::span<const double> prices,
                const DetailedAllocation& x, const Production& y, int agent);

std::vector<double> all_earnings(const MarketInstance& inst,
                                 std::span<const double> prices,
                                 const DetailedAllocation& x,
                                 const Production& y);

/// Quantity of agent i's produced supply in category j that buyers would
/// absorb, as a function of the amount she offers. Concave piecewise-linear:
/// value(t) = sum_i' min(t, residual_i'), one residual per buyer who reaches
/// agent i in her ranking with demand left.
struct SoldCurve {
  std::vector<PwlSegment> segments;  // increasing lengths, integer slopes

  double value(double t) const;
  /// Slope of the curve on [t, t+eps).
  double slope_at(double t) const;
};

SoldCurve sold_curve(const MarketInstance& inst,
                     std::span<const double> category_totals, int agent,
                     int category, const Production& y);

/// Revenue agent i's current plan earns against the sold curves implied by
/// the current demand totals (her own supply removed from each walk).
double production_objective(const MarketInstance& inst,
                            std::span<const double> prices,
                            const DetailedAllocation& x, const Production& y,
                            int agent);

struct BestResponse {
  Bundle plan;         // optimal row for the agent, size g+1
  double value = 0.0;  // revenue of the plan against the same curves
};

/// Revenue-maximizing plan for agent i under her labor constraint, holding
/// prices, every other plan, and buyers' category totals fixed. Greedy on
/// marginal revenue per unit labor; exact at segment breakpoints.
BestResponse best_response(const MarketInstance& inst,
                           std::span<const double> prices,
                           const DetailedAllocation& x, const Production& y,
                           int agent);

}  // namespace digimkt
