#include "digimkt/production.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace digimkt {

double earnings(const MarketInstance& inst, std::span<const double> prices,
                const DetailedAllocation& x, const Production& y, int agent) {
  double income = prices[0] * y.rows[agent][0];
  for (int j = 1; j <= inst.num_categories(); ++j) {
    const std::vector<Song>& songs = inst.songs(j);
    double copies = 0.0;
    for (int i = 0; i < inst.num_agents(); ++i) {
      for (const auto& [ref, amt] : x.purchases[i][j - 1].bought) {
        const bool owned = ref.kind == EntityRef::Kind::song
                               ? songs[ref.index].owner == agent
                               : ref.index == agent;
        if (owned) copies += amt;
      }
    }
    income += prices[j] * copies;
  }
  return income;
}

std::vector<double> all_earnings(const MarketInstance& inst,
                                 std::span<const double> prices,
                                 const DetailedAllocation& x,
                                 const Production& y) {
  std::vector<double> out(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    out[i] = earnings(inst, prices, x, y, i);
  }
  return out;
}

double SoldCurve::value(double t) const {
  double v = 0.0;
  double rem = std::max(t, 0.0);
  for (const PwlSegment& seg : segments) {
    if (rem <= 0.0) break;
    const double take = std::min(rem, seg.length);
    v += take * seg.slope;
    rem -= take;
  }
  return v;
}

double SoldCurve::slope_at(double t) const {
  double pos = std::max(t, 0.0);
  for (const PwlSegment& seg : segments) {
    if (pos < seg.length) return seg.slope;
    pos -= seg.length;
  }
  return 0.0;
}

SoldCurve sold_curve(const MarketInstance& inst,
                     std::span<const double> category_totals, int agent,
                     int category, const Production& y) {
  std::vector<double> residuals;
  for (int i = 0; i < inst.num_agents(); ++i) {
    double above = 0.0;
    for (const EntityRef& k : inst.order(i, category)) {
      if (k.kind == EntityRef::Kind::agent && k.index == agent) break;
      above += y.supply(category, k);
    }
    const double r = category_totals[i] - above;
    if (r > 0.0) residuals.push_back(r);
  }
  std::sort(residuals.begin(), residuals.end());

  SoldCurve curve;
  double prev = 0.0;
  for (size_t t = 0; t < residuals.size(); ++t) {
    const double len = residuals[t] - prev;
    const double slope = static_cast<double>(residuals.size() - t);
    if (len > 0.0) curve.segments.push_back(PwlSegment{len, slope});
    prev = residuals[t];
  }
  return curve;
}

namespace {

std::vector<double> totals_for_category(const MarketInstance& inst,
                                        const DetailedAllocation& x,
                                        int category) {
  std::vector<double> z(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    z[i] = x.category_total(i, category);
  }
  return z;
}

std::vector<SoldCurve> curves_for_agent(const MarketInstance& inst,
                                        const DetailedAllocation& x,
                                        const Production& y, int agent) {
  std::vector<SoldCurve> curves;
  for (int j = 1; j <= inst.num_categories(); ++j) {
    curves.push_back(
        sold_curve(inst, totals_for_category(inst, x, j), agent, j, y));
  }
  return curves;
}

}  // namespace

double production_objective(const MarketInstance& inst,
                            std::span<const double> prices,
                            const DetailedAllocation& x, const Production& y,
                            int agent) {
  const std::vector<SoldCurve> curves = curves_for_agent(inst, x, y, agent);
  double v = prices[0] * y.rows[agent][0];
  for (int j = 1; j <= inst.num_categories(); ++j) {
    v += prices[j] * curves[j - 1].value(y.rows[agent][j]);
  }
  return v;
}

BestResponse best_response(const MarketInstance& inst,
                           std::span<const double> prices,
                           const DetailedAllocation& x, const Production& y,
                           int agent) {
  const AgentSpec& spec = inst.agents[agent];
  const int goods = inst.num_goods();
  const std::vector<SoldCurve> curves = curves_for_agent(inst, x, y, agent);
  const double bread_rate = prices[0] / spec.costs[0];

  struct Item {
    double rate;  // revenue per unit labor
    int category;
    int seg;
    double length;
  };
  std::vector<Item> items;
  for (int j = 1; j < goods; ++j) {
    if (prices[j] <= 0.0) continue;
    const std::vector<PwlSegment>& segs = curves[j - 1].segments;
    for (size_t t = 0; t < segs.size(); ++t) {
      const double rate = prices[j] * segs[t].slope / spec.costs[j];
      // Ties go to bread, so only strictly better segments are produced.
      if (rate > bread_rate) {
        items.push_back(
            Item{rate, j, static_cast<int>(t), segs[t].length});
      }
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(b.rate, a.category, a.seg) <
           std::tie(a.rate, b.category, b.seg);
  });

  BestResponse out;
  out.plan.assign(goods, 0.0);
  double labor = spec.labor;
  for (const Item& it : items) {
    if (labor <= 0.0) break;
    const double needed = it.length * spec.costs[it.category];
    if (labor >= needed) {
      out.plan[it.category] += it.length;
      labor -= needed;
    } else {
      out.plan[it.category] += labor / spec.costs[it.category];
      labor = 0.0;
    }
  }
  out.plan[0] = std::max(labor, 0.0) / spec.costs[0];

  out.value = prices[0] * out.plan[0];
  for (int j = 1; j < goods; ++j) {
    out.value += prices[j] * curves[j - 1].value(out.plan[j]);
  }
  return out;
}

}  // namespace digimkt
