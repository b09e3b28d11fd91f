#include "digimkt/demand.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace digimkt {

namespace {

// Positive-price goods receive money by family rule; zero-price digital
// categories are taken to the cap outright, zero-price bread only when it has
// value at zero.
void fill_free_goods(const UtilitySpec& u, std::span<const double> prices,
                     double cap, Bundle& z) {
  for (size_t j = 0; j < prices.size(); ++j) {
    if (prices[j] > 0.0) continue;
    if (j >= 1 || marginal_at_zero(u, 0) > 0.0) z[j] = cap;
  }
}

void linear_demand(const UtilitySpec& u, std::span<const double> prices,
                   double money, double cap, Bundle& z) {
  std::vector<int> goods;
  for (size_t j = 0; j < prices.size(); ++j) {
    if (prices[j] > 0.0 && u.coefficients[j] > 0.0) {
      goods.push_back(static_cast<int>(j));
    }
  }
  std::sort(goods.begin(), goods.end(), [&](int a, int b) {
    const double ra = u.coefficients[a] / prices[a];
    const double rb = u.coefficients[b] / prices[b];
    if (ra != rb) return ra > rb;
    return a < b;
  });
  for (int j : goods) {
    if (money <= 0.0) break;
    const double take = std::min(cap, money / prices[j]);
    z[j] = take;
    money -= take * prices[j];
  }
}

void cobb_douglas_demand(const UtilitySpec& u, std::span<const double> prices,
                         double money, double cap, Bundle& z) {
  std::vector<int> active;
  for (size_t j = 0; j < prices.size(); ++j) {
    if (prices[j] > 0.0 && u.exponents[j] > 0.0) {
      active.push_back(static_cast<int>(j));
    }
  }
  // Proportional spending; goods pushed past the cap are pinned there and
  // their money is redistributed over the rest.
  while (!active.empty() && money > 0.0) {
    double total = 0.0;
    for (int j : active) total += u.exponents[j];
    bool capped = false;
    for (size_t t = 0; t < active.size();) {
      const int j = active[t];
      if (u.exponents[j] * money / (total * prices[j]) > cap) {
        z[j] = cap;
        money = std::max(0.0, money - cap * prices[j]);
        active.erase(active.begin() + t);
        capped = true;
      } else {
        ++t;
      }
    }
    if (capped) continue;
    for (int j : active) {
      z[j] = u.exponents[j] * money / (total * prices[j]);
    }
    break;
  }
}

void pwl_demand(const UtilitySpec& u, std::span<const double> prices,
                double money, double cap, Bundle& z) {
  struct Item {
    double ratio;  // slope per unit money
    int good;
    int seg;
    double length;
  };
  std::vector<Item> items;
  for (size_t j = 0; j < prices.size(); ++j) {
    if (prices[j] <= 0.0) continue;
    double used = 0.0;
    for (size_t t = 0; t < u.segments[j].size(); ++t) {
      const PwlSegment& seg = u.segments[j][t];
      if (used >= cap) break;
      const double len = std::min(seg.length, cap - used);
      used += len;
      if (seg.slope <= 0.0) break;
      items.push_back(Item{seg.slope / prices[j], static_cast<int>(j),
                           static_cast<int>(t), len});
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(b.ratio, a.good, a.seg) < std::tie(a.ratio, b.good, b.seg);
  });
  for (const Item& it : items) {
    if (money <= 0.0) break;
    const double take = std::min(it.length, money / prices[it.good]);
    z[it.good] += take;
    money -= take * prices[it.good];
  }
}

}  // namespace

Bundle coarse_demand(const UtilitySpec& u, std::span<const double> prices,
                     double budget, double cap) {
  Bundle z(prices.size(), 0.0);
  fill_free_goods(u, prices, cap, z);
  const double money = std::max(budget, 0.0);
  switch (u.family) {
    case UtilityFamily::linear:
      linear_demand(u, prices, money, cap, z);
      break;
    case UtilityFamily::cobb_douglas:
      cobb_douglas_demand(u, prices, money, cap, z);
      break;
    case UtilityFamily::pwl_concave:
      pwl_demand(u, prices, money, cap, z);
      break;
  }
  return z;
}

WalkResult detailed_allocation(std::span<const EntityRef> order,
                               std::span<const double> supplies,
                               double amount) {
  WalkResult out;
  double remaining = std::max(amount, 0.0);
  for (size_t r = 0; r < order.size() && remaining > 0.0; ++r) {
    const double take = std::min(remaining, supplies[r]);
    if (take > 0.0) {
      out.bought.emplace_back(order[r], take);
      remaining -= take;
    }
  }
  out.excess = std::max(remaining, 0.0);
  return out;
}

double DetailedAllocation::amount(int agent, int category,
                                  const EntityRef& k) const {
  for (const auto& [ref, amt] : purchases[agent][category - 1].bought) {
    if (ref == k) return amt;
  }
  return 0.0;
}

double DetailedAllocation::category_total(int agent, int category) const {
  double total = excess[agent][category - 1];
  for (const auto& [ref, amt] : purchases[agent][category - 1].bought) {
    total += amt;
  }
  return total;
}

Bundle DetailedAllocation::coarse_of(int agent, int goods) const {
  Bundle z(goods, 0.0);
  z[0] = bread[agent];
  for (int j = 1; j < goods; ++j) z[j] = category_total(agent, j);
  return z;
}

std::vector<double> order_supplies(const MarketInstance& inst, int agent,
                                   int category, const Production& y) {
  const std::vector<EntityRef>& order = inst.order(agent, category);
  std::vector<double> out(order.size());
  for (size_t r = 0; r < order.size(); ++r) {
    out[r] = y.supply(category, order[r]);
  }
  return out;
}

DetailedAllocation all_agents_demand(const MarketInstance& inst,
                                     std::span<const double> prices,
                                     std::span<const double> budgets,
                                     const Production& y) {
  const int n = inst.num_agents();
  const int g = inst.num_categories();
  const double cap = compute_bounds(inst).cap;

  DetailedAllocation x;
  x.bread.assign(n, 0.0);
  x.purchases.assign(n, std::vector<WalkResult>(g));
  x.excess.assign(n, std::vector<double>(g, 0.0));
  for (int i = 0; i < n; ++i) {
    const Bundle z =
        coarse_demand(inst.agents[i].utility, prices, budgets[i], cap);
    x.bread[i] = z[0];
    for (int j = 1; j <= g; ++j) {
      const std::vector<double> supplies = order_supplies(inst, i, j, y);
      WalkResult walk =
          detailed_allocation(inst.order(i, j), supplies, z[j]);
      x.excess[i][j - 1] = walk.excess;
      x.purchases[i][j - 1] = std::move(walk);
    }
  }
  return x;
}

std::vector<double> unsold_amounts(const MarketInstance& inst, int category,
                                   const DetailedAllocation& x,
                                   const Production& y) {
  const int n = inst.num_agents();
  const int songs = static_cast<int>(inst.songs(category).size());
  std::vector<double> out(songs + n, 0.0);
  for (int t = 0; t < songs + n; ++t) {
    const EntityRef k{t < songs ? EntityRef::Kind::song : EntityRef::Kind::agent,
                      t < songs ? t : t - songs};
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      best = std::max(best, x.amount(i, category, k));
    }
    out[t] = std::max(0.0, y.supply(category, k) - best);
  }
  return out;
}

MarketTotals market_totals(const MarketInstance& inst,
                           const DetailedAllocation& x, const Production& y) {
  const int n = inst.num_agents();
  const int goods = inst.num_goods();
  MarketTotals totals;
  totals.bought.assign(goods, 0.0);
  totals.sold.assign(goods, 0.0);
  for (int i = 0; i < n; ++i) {
    totals.bought[0] += x.bread[i];
    totals.sold[0] += y.rows[i][0];
  }
  for (int j = 1; j < goods; ++j) {
    for (int i = 0; i < n; ++i) {
      totals.bought[j] += x.category_total(i, j);
      for (const auto& [ref, amt] : x.purchases[i][j - 1].bought) {
        totals.sold[j] += amt;
      }
    }
    for (double l : unsold_amounts(inst, j, x, y)) totals.sold[j] += l;
  }
  return totals;
}

}  // namespace digimkt
