#pragma once

#include <vector>

#include "digimkt/demand.hpp"
#include "digimkt/model.hpp"

namespace digimkt {

/// One full market configuration: prices on the simplex, the demand side,
/// the production side, and the budgets the demand side was computed at.
struct MarketState {
  std::vector<double> prices;  // size g+1, nonnegative, sums to 1
  DetailedAllocation x;
  Production y;
  std::vector<double> budgets;  // size n
};

}  // namespace digimkt
