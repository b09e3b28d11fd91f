#pragma once

#include <span>
#include <utility>
#include <vector>

#include "digimkt/model.hpp"

namespace digimkt {

/// Utility-maximizing bundle at given prices under a budget, with every
/// coordinate capped. Prices are used exactly as passed (no normalization),
/// so demand is invariant under scaling prices and budget together.
/// A free digital category is taken up to the cap; free bread is taken up to
/// the cap only when it has positive marginal value at zero.
Bundle coarse_demand(const UtilitySpec& u, std::span<const double> prices,
                     double budget, double cap);

/// Result of spending a category total along one buyer's ranking.
struct WalkResult {
  // (entity, amount) pairs with amount > 0, in ranking order.
  std::vector<std::pair<EntityRef, double>> bought;
  // Demand left over after the whole ranking is exhausted.
  double excess = 0.0;
};

/// Walk the ranking front to back, buying each entity up to its supply until
/// `amount` is spent. supplies[r] is the available quantity of order[r].
WalkResult detailed_allocation(std::span<const EntityRef> order,
                               std::span<const double> supplies, double amount);

/// Full demand side of a state: per-buyer bread amounts, per-category walks,
/// and the excess (unmet demand) absorbed by the market maker.
struct DetailedAllocation {
  std::vector<double> bread;                                 // size n
  std::vector<std::vector<WalkResult>> purchases;            // [i][j-1]
  std::vector<std::vector<double>> excess;                   // [i][j-1]

  /// Amount of entity k in category j bought by agent i.
  double amount(int agent, int category, const EntityRef& k) const;
  /// Total purchased in category j by agent i, excess included.
  double category_total(int agent, int category) const;
  /// The coarse bundle this allocation realizes for agent i.
  Bundle coarse_of(int agent, int goods) const;
};

/// Supplies aligned with one buyer's ranking for a category.
std::vector<double> order_supplies(const MarketInstance& inst, int agent,
                                   int category, const Production& y);

/// Coarse demand for every agent followed by the ranking walk per category.
DetailedAllocation all_agents_demand(const MarketInstance& inst,
                                     std::span<const double> prices,
                                     std::span<const double> budgets,
                                     const Production& y);

/// Aggregated bought/sold totals per good, market-maker flows included:
/// unmet demand counts toward bought, unsold copies toward sold.
struct MarketTotals {
  std::vector<double> bought;  // size g+1
  std::vector<double> sold;    // size g+1
};

MarketTotals market_totals(const MarketInstance& inst,
                           const DetailedAllocation& x, const Production& y);

/// Unsold quantity of every entity in a category, enumerated songs first and
/// then agents (same convention as EntityRef).
std::vector<double> unsold_amounts(const MarketInstance& inst, int category,
                                   const DetailedAllocation& x,
                                   const Production& y);

}  // namespace digimkt
