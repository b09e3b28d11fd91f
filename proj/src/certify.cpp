#include "digimkt/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace digimkt {

Certificate certify_with_budgets(const MarketInstance& inst,
                                 const MarketState& state,
                                 std::span<const double> budgets, double tol) {
  const int n = inst.num_agents();
  const int goods = inst.num_goods();
  if (static_cast<int>(state.prices.size()) != goods ||
      static_cast<int>(state.y.rows.size()) != n ||
      static_cast<int>(state.x.bread.size()) != n ||
      static_cast<int>(budgets.size()) != n) {
    throw std::invalid_argument("certify: state dimensions do not match");
  }
  const double cap = compute_bounds(inst).cap;

  Certificate cert;
  cert.tol = tol;
  cert.production_gap.resize(n);
  cert.utility_gap.resize(n);
  cert.budget_slack.resize(n);

  for (int i = 0; i < n; ++i) {
    const BestResponse br =
        best_response(inst, state.prices, state.x, state.y, i);
    const double current =
        production_objective(inst, state.prices, state.x, state.y, i);
    cert.production_gap[i] = std::max(0.0, br.value - current);

    const Bundle z = state.x.coarse_of(i, goods);
    const double achieved =
        utility_value(inst.agents[i].utility, z, cap);
    const Bundle best =
        coarse_demand(inst.agents[i].utility, state.prices, budgets[i], cap);
    const double optimal =
        utility_value(inst.agents[i].utility, best, cap);
    cert.utility_gap[i] = std::max(0.0, optimal - achieved);

    double spending = 0.0;
    for (int j = 0; j < goods; ++j) spending += state.prices[j] * z[j];
    cert.budget_slack[i] = std::abs(spending - budgets[i]);
  }

  const MarketTotals totals = market_totals(inst, state.x, state.y);
  cert.bread_imbalance = std::abs(totals.bought[0] - totals.sold[0]);
  for (int j = 1; j < goods; ++j) {
    double supply_total = 0.0;
    const std::vector<double> unsold = unsold_amounts(inst, j, state.x, state.y);
    const int songs = static_cast<int>(inst.songs(j).size());
    for (int t = 0; t < songs + n; ++t) {
      const EntityRef k{
          t < songs ? EntityRef::Kind::song : EntityRef::Kind::agent,
          t < songs ? t : t - songs};
      const double supply = state.y.supply(j, k);
      supply_total += supply;
      if (state.prices[j] > tol && supply > 0.0) {
        cert.max_unsold_gap = std::max(cert.max_unsold_gap, unsold[t]);
      }
      for (int i = 0; i < n; ++i) {
        cert.max_oversold = std::max(
            cert.max_oversold, state.x.amount(i, j, k) - supply);
      }
    }
    for (int i = 0; i < n; ++i) {
      cert.max_unmet_demand =
          std::max(cert.max_unmet_demand, state.x.excess[i][j - 1]);
      const double allocated =
          state.x.category_total(i, j) - state.x.excess[i][j - 1];
      cert.max_oversold =
          std::max(cert.max_oversold, allocated - supply_total);
    }
  }
  cert.max_oversold = std::max(cert.max_oversold, 0.0);

  for (int i = 0; i < n; ++i) {
    cert.res_cond1 = std::max(cert.res_cond1, cert.production_gap[i]);
    cert.res_cond2 =
        std::max(cert.res_cond2, cert.utility_gap[i] + cert.budget_slack[i]);
  }
  cert.res_cond3 = std::max({cert.bread_imbalance, cert.max_unsold_gap,
                             cert.max_unmet_demand, cert.max_oversold});
  cert.worst = std::max({cert.res_cond1, cert.res_cond2, cert.res_cond3});
  cert.pass = cert.worst <= tol;
  return cert;
}

Certificate certify(const MarketInstance& inst, const MarketState& state,
                    double tol) {
  const std::vector<double> budgets =
      all_earnings(inst, state.prices, state.x, state.y);
  return certify_with_budgets(inst, state, budgets, tol);
}

BalanceReport check_balance_identity(const MarketInstance& inst,
                                     const DetailedAllocation& x,
                                     const Production& y) {
  const int n = inst.num_agents();
  const int g = inst.num_categories();
  const MarketTotals totals = market_totals(inst, x, y);

  BalanceReport report;
  report.unmet_total.resize(g);
  report.unsold_total.resize(g);
  report.identity_gap.resize(g);
  for (int j = 1; j <= g; ++j) {
    double unmet = 0.0;
    for (int i = 0; i < n; ++i) unmet += x.excess[i][j - 1];
    double unsold = 0.0;
    for (double l : unsold_amounts(inst, j, x, y)) unsold += l;
    report.unmet_total[j - 1] = unmet;
    report.unsold_total[j - 1] = unsold;
    report.identity_gap[j - 1] = std::abs(
        (totals.bought[j] - totals.sold[j]) - (unmet - unsold));
    report.max_identity_gap =
        std::max(report.max_identity_gap, report.identity_gap[j - 1]);
    if (unmet > 0.0 && unsold > 0.0) report.mutual_exclusion = false;
  }
  return report;
}

namespace {

// Largest per-coordinate derivative over the comparison region, per family.
// Cobb-Douglas has no global bound near zero, so it is localized around the
// base bundle: df/dz_j = a_j f(z)/z_j <= f(z) a_max / z_min.
double lipschitz_bound(const UtilitySpec& u, const Bundle& base,
                       double base_utility, double grid_step) {
  switch (u.family) {
    case UtilityFamily::linear:
      return *std::max_element(u.coefficients.begin(), u.coefficients.end());
    case UtilityFamily::pwl_concave: {
      double m = 0.0;
      for (const auto& segs : u.segments) {
        if (!segs.empty()) m = std::max(m, segs.front().slope);
      }
      return m;
    }
    case UtilityFamily::cobb_douglas: {
      double a_max = 0.0;
      double z_min = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < u.exponents.size(); ++j) {
        if (u.exponents[j] <= 0.0) continue;
        a_max = std::max(a_max, u.exponents[j]);
        z_min = std::min(z_min, base[j]);
      }
      return base_utility * a_max / std::max(z_min, grid_step);
    }
  }
  return 0.0;
}

}  // namespace

ParetoReport check_partial_pareto(const MarketInstance& inst,
                                  const MarketState& state, double grid_step,
                                  double tol, long long max_points) {
  const int n = inst.num_agents();
  const int goods = inst.num_goods();
  const double cap = compute_bounds(inst).cap;

  ParetoReport report;
  report.grid_step = grid_step;
  report.base_utilities.resize(n);

  std::vector<Bundle> base(n);
  for (int i = 0; i < n; ++i) {
    base[i] = state.x.coarse_of(i, goods);
    report.base_utilities[i] =
        utility_value(inst.agents[i].utility, base[i], cap);
  }

  // Labor left after the fixed digital production, all convertible to bread.
  double total_bread = 0.0;
  for (int i = 0; i < n; ++i) {
    double used = 0.0;
    for (int j = 1; j < goods; ++j) {
      used += inst.agents[i].costs[j] * state.y.rows[i][j];
    }
    total_bread +=
        std::max(0.0, inst.agents[i].labor - used) / inst.agents[i].costs[0];
  }
  const long long m =
      static_cast<long long>(std::floor(total_bread / grid_step + 1e-9));

  if (static_cast<long long>(n) * (m + 1) > max_points) {
    report.exhaustive = false;
    return report;
  }

  // Utilities are nondecreasing in own bread with the digital part fixed, so
  // only two thresholds per agent matter: the least bread keeping her at the
  // base utility, and the least bread beating it by more than the grid slack.
  // A dominating split of the m grid units exists iff the keep thresholds fit
  // with room for someone's beat threshold.
  std::vector<long long> keep_units(n, m + 1);
  std::vector<long long> beat_units(n, m + 1);
  for (int i = 0; i < n; ++i) {
    const UtilitySpec& u = inst.agents[i].utility;
    const double slack =
        lipschitz_bound(u, base[i], report.base_utilities[i], grid_step) *
        grid_step * goods;
    Bundle z = base[i];
    for (long long k = 0; k <= m; ++k) {
      z[0] = static_cast<double>(k) * grid_step;
      const double v = utility_value(u, z, cap);
      ++report.points_checked;
      if (keep_units[i] > m && v >= report.base_utilities[i] - 1e-12) {
        keep_units[i] = k;
      }
      if (v > report.base_utilities[i] + slack + tol) {
        beat_units[i] = k;
        break;
      }
    }
  }

  long long keep_sum = 0;
  bool all_keep = true;
  for (int i = 0; i < n; ++i) {
    if (keep_units[i] > m) all_keep = false;
    keep_sum += keep_units[i];
  }
  if (!all_keep || keep_sum > m) return report;

  for (int i = 0; i < n; ++i) {
    if (beat_units[i] > m) continue;
    if (keep_sum - keep_units[i] + beat_units[i] <= m) {
      report.dominated = true;
      report.witness_bread.resize(n);
      long long left = m;
      for (int t = 0; t < n; ++t) {
        const long long k = t == i ? beat_units[t] : keep_units[t];
        report.witness_bread[t] = static_cast<double>(k) * grid_step;
        left -= k;
      }
      // Leftover grid units cannot hurt; hand them to the improving agent.
      report.witness_bread[i] += static_cast<double>(left) * grid_step;
      report.witness_utilities.resize(n);
      for (int t = 0; t < n; ++t) {
        Bundle z = base[t];
        z[0] = report.witness_bread[t];
        report.witness_utilities[t] =
            utility_value(inst.agents[t].utility, z, cap);
      }
      return report;
    }
  }
  return report;
}

TransferReport check_transfer_equilibrium(const MarketInstance& inst,
                                          const MarketState& state,
                                          std::span<const double> budgets,
                                          std::span<const double> targets,
                                          double tol) {
  const int n = inst.num_agents();
  if (static_cast<int>(targets.size()) != n) {
    throw std::invalid_argument("targets: expected one entry per agent");
  }
  for (double u : targets) {
    if (!(u > 0.0)) {
      throw std::invalid_argument("targets: must be positive");
    }
  }
  const double cap = compute_bounds(inst).cap;

  TransferReport report;
  report.certificate = certify_with_budgets(inst, state, budgets, tol);
  report.ratios.resize(n);
  double mean = 0.0;
  std::vector<double> achieved(n);
  for (int i = 0; i < n; ++i) {
    achieved[i] = utility_value(inst.agents[i].utility,
                                state.x.coarse_of(i, inst.num_goods()), cap);
    report.ratios[i] = achieved[i] / targets[i];
    mean += report.ratios[i];
  }
  report.alpha = mean / n;

  bool within = true;
  for (int i = 0; i < n; ++i) {
    const double dev = std::abs(achieved[i] - report.alpha * targets[i]);
    report.max_deviation = std::max(report.max_deviation, dev);
    if (dev > tol * std::max(1.0, report.alpha * targets[i])) within = false;
  }
  report.pass =
      report.certificate.pass && within && report.alpha >= 1.0 - tol;
  return report;
}

}  // namespace digimkt
