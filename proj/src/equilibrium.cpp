#include "digimkt/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "digimkt/production.hpp"

namespace digimkt {

const char* price_rule_name(PriceRule r) {
  return r == PriceRule::multiplicative ? "multiplicative" : "argmax";
}

PriceRule price_rule_from_name(const std::string& name) {
  if (name == "multiplicative") return PriceRule::multiplicative;
  if (name == "argmax") return PriceRule::argmax;
  throw std::invalid_argument("unknown price rule \"" + name + "\"");
}

const char* update_order_name(UpdateOrder o) {
  return o == UpdateOrder::jacobi ? "jacobi" : "gauss_seidel";
}

UpdateOrder update_order_from_name(const std::string& name) {
  if (name == "jacobi") return UpdateOrder::jacobi;
  if (name == "gauss_seidel") return UpdateOrder::gauss_seidel;
  throw std::invalid_argument("unknown update order \"" + name + "\"");
}

namespace {

constexpr double kPriceFloor = 1e-12;
constexpr double kRatioClamp = 1e8;
constexpr long long kStallWindow = 1500;

std::vector<double> value_ratios(const MarketTotals& totals) {
  std::vector<double> r(totals.bought.size());
  r[0] = (totals.bought[0] + 1.0) / (totals.sold[0] + 1.0);
  for (size_t j = 1; j < r.size(); ++j) {
    r[j] = totals.bought[j] / totals.sold[j];
  }
  return r;
}

void renormalize(std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) sum += v;
  for (double& v : p) v /= sum;
}

struct Rng {
  std::uint64_t s;

  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

DetailedAllocation empty_allocation(const MarketInstance& inst) {
  DetailedAllocation x;
  x.bread.assign(inst.num_agents(), 0.0);
  x.purchases.assign(inst.num_agents(),
                     std::vector<WalkResult>(inst.num_categories()));
  x.excess.assign(inst.num_agents(),
                  std::vector<double>(inst.num_categories(), 0.0));
  return x;
}

void validate_config(const SolveConfig& cfg) {
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) {
    throw std::invalid_argument("eta must lie in (0, 1]");
  }
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1]");
  }
  if (cfg.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (cfg.certify_every < 1) {
    throw std::invalid_argument("certify_every must be >= 1");
  }
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

Production blended_responses(const MarketInstance& inst,
                             std::span<const double> prices,
                             const DetailedAllocation& x_old,
                             const DetailedAllocation& x_new,
                             const Production& y, UpdateOrder order,
                             double damping) {
  Production out = y;
  if (order == UpdateOrder::jacobi) {
    for (int i = 0; i < inst.num_agents(); ++i) {
      const BestResponse br = best_response(inst, prices, x_old, y, i);
      for (size_t j = 0; j < br.plan.size(); ++j) {
        out.rows[i][j] = (1.0 - damping) * y.rows[i][j] + damping * br.plan[j];
      }
    }
  } else {
    for (int i = 0; i < inst.num_agents(); ++i) {
      const BestResponse br = best_response(inst, prices, x_new, out, i);
      for (size_t j = 0; j < br.plan.size(); ++j) {
        out.rows[i][j] = (1.0 - damping) * out.rows[i][j] + damping * br.plan[j];
      }
    }
  }
  return out;
}

IterationRow make_row(long long iter, const MarketState& s,
                      const Certificate& cert) {
  IterationRow row;
  row.iter = iter;
  row.prices = s.prices;
  row.res_cond1 = cert.res_cond1;
  row.res_cond2 = cert.res_cond2;
  row.res_cond3 = cert.res_cond3;
  for (double w : s.budgets) row.total_earnings += w;
  return row;
}

}  // namespace

std::vector<double> argmax_prices(const MarketTotals& totals) {
  const std::vector<double> r = value_ratios(totals);
  const double rmax = *std::max_element(r.begin(), r.end());
  const double face_tol = 1e-12 * std::max(1.0, std::abs(rmax));
  std::vector<double> p(r.size(), 0.0);
  int count = 0;
  for (size_t j = 0; j < r.size(); ++j) {
    if (r[j] >= rmax - face_tol) {
      p[j] = 1.0;
      ++count;
    }
  }
  for (double& v : p) v /= count;
  return p;
}

std::vector<double> price_update(std::span<const double> prices,
                                 const MarketTotals& totals, PriceRule rule,
                                 double eta) {
  std::vector<double> p(prices.begin(), prices.end());
  if (rule == PriceRule::argmax) {
    const std::vector<double> target = argmax_prices(totals);
    for (size_t j = 0; j < p.size(); ++j) {
      p[j] = (1.0 - eta) * p[j] + eta * target[j];
    }
  } else {
    const std::vector<double> r = value_ratios(totals);
    for (size_t j = 0; j < p.size(); ++j) {
      const double ratio =
          std::clamp(r[j], 1.0 / kRatioClamp, kRatioClamp);
      p[j] = std::max(p[j], kPriceFloor) * std::pow(ratio, eta);
    }
  }
  renormalize(p);
  return p;
}

MarketState f_map(const MarketInstance& inst, const MarketState& state,
                  PriceRule rule, double eta) {
  const std::vector<double> w =
      all_earnings(inst, state.prices, state.x, state.y);
  MarketState out;
  out.x = all_agents_demand(inst, state.prices, w, state.y);
  out.y = state.y;
  for (int i = 0; i < inst.num_agents(); ++i) {
    out.y.rows[i] = best_response(inst, state.prices, state.x, state.y, i).plan;
  }
  out.prices =
      price_update(state.prices, market_totals(inst, state.x, state.y), rule,
                   eta);
  out.budgets = w;
  return out;
}

MarketState initial_state(const MarketInstance& inst) {
  MarketState s;
  s.prices.assign(inst.num_goods(), 1.0 / inst.num_goods());
  s.y = Production::bread_only(inst);
  s.x = empty_allocation(inst);
  s.budgets = all_earnings(inst, s.prices, s.x, s.y);
  return s;
}

SolveResult solve(const MarketInstance& inst, const SolveConfig& cfg) {
  validate_config(cfg);
  Rng rng{cfg.seed};

  MarketState state = initial_state(inst);
  SolveResult result;
  result.state = state;
  result.certificate = certify(inst, state, cfg.tol);
  if (cfg.max_iters == 0) {
    result.converged = result.certificate.pass;
    result.log.push_back(make_row(0, state, result.certificate));
    return result;
  }

  double best_worst = result.certificate.worst;
  long long last_progress = 0;

  for (long long iter = 1; iter <= cfg.max_iters; ++iter) {
    const DetailedAllocation x_new =
        all_agents_demand(inst, state.prices, state.budgets, state.y);
    Production y_new =
        blended_responses(inst, state.prices, state.x, x_new, state.y,
                          cfg.order, cfg.damping);
    MarketState next;
    next.prices = state.prices;
    next.x = x_new;
    next.y = std::move(y_new);
    next.budgets = all_earnings(inst, next.prices, next.x, next.y);

    if (iter % cfg.certify_every == 0 || iter == cfg.max_iters) {
      const Certificate cert = certify(inst, next, cfg.tol);
      result.log.push_back(make_row(iter, next, cert));
      if (cert.worst < best_worst) {
        best_worst = cert.worst;
        result.state = next;
        result.certificate = cert;
        last_progress = iter;
      }
      if (cert.pass) {
        result.converged = true;
        result.iterations = iter;
        result.state = next;
        result.certificate = cert;
        return result;
      }
      // A long stretch without improvement means the iteration is stuck on a
      // non-equilibrium cycle; shake the prices and keep going.
      if (iter - last_progress >= kStallWindow) {
        for (double& p : next.prices) {
          p = std::max(p, kPriceFloor) *
              std::exp(0.25 * (2.0 * rng.uniform() - 1.0));
        }
        renormalize(next.prices);
        last_progress = iter;
      }
    }

    next.prices = price_update(
        next.prices, market_totals(inst, next.x, next.y), cfg.rule, cfg.eta);
    state = std::move(next);
  }
  result.iterations = cfg.max_iters;
  return result;
}

TransferResult solve_with_transfers(const MarketInstance& inst,
                                    std::span<const double> targets,
                                    const SolveConfig& cfg) {
  validate_config(cfg);
  const int n = inst.num_agents();
  if (static_cast<int>(targets.size()) != n) {
    throw std::invalid_argument("targets: expected one entry per agent");
  }
  for (double u : targets) {
    if (!(u > 0.0)) throw std::invalid_argument("targets: must be positive");
  }
  const double cap = compute_bounds(inst).cap;
  Rng rng{cfg.seed};

  MarketState state = initial_state(inst);
  double gamma = 0.0;
  for (double w : state.budgets) gamma += w;
  state.budgets.assign(n, gamma / n);

  TransferResult result;
  result.state = state;
  result.budgets = state.budgets;
  result.gamma = gamma;
  result.report =
      check_transfer_equilibrium(inst, state, state.budgets, targets, cfg.tol);
  result.alpha = result.report.alpha;
  if (cfg.max_iters == 0) {
    result.converged = result.report.pass;
    return result;
  }

  auto score_of = [](const TransferReport& r) {
    return std::max(r.certificate.worst,
                    std::max(r.max_deviation, 1.0 - r.alpha));
  };
  double best_score = score_of(result.report);
  long long last_progress = 0;

  for (long long iter = 1; iter <= cfg.max_iters; ++iter) {
    const DetailedAllocation x_new =
        all_agents_demand(inst, state.prices, state.budgets, state.y);
    Production y_new =
        blended_responses(inst, state.prices, state.x, x_new, state.y,
                          cfg.order, cfg.damping);

    MarketState next;
    next.prices = state.prices;
    next.x = x_new;
    next.y = std::move(y_new);

    const std::vector<double> earned =
        all_earnings(inst, next.prices, next.x, next.y);
    gamma = 0.0;
    for (double w : earned) gamma += w;

    // Exponentiated step toward equal utility/target ratios: agents above
    // the mean ratio give up budget, agents below gain, total pinned to the
    // earnings pool.
    std::vector<double> ratios(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = utility_value(
          inst.agents[i].utility, next.x.coarse_of(i, inst.num_goods()), cap);
      ratios[i] = v / targets[i];
      mean += ratios[i];
    }
    mean /= n;
    next.budgets.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double arg =
          mean > 0.0 ? std::clamp(-cfg.eta * (ratios[i] / mean - 1.0), -30.0,
                                  30.0)
                     : 0.0;
      next.budgets[i] = state.budgets[i] * std::exp(arg);
      total += next.budgets[i];
    }
    for (double& w : next.budgets) w *= gamma / total;

    if (iter % cfg.certify_every == 0 || iter == cfg.max_iters) {
      // Judge the state against the budgets its demand was computed at.
      MarketState judged = next;
      judged.budgets = state.budgets;
      const TransferReport report = check_transfer_equilibrium(
          inst, judged, judged.budgets, targets, cfg.tol);
      IterationRow row = make_row(iter, judged, report.certificate);
      row.total_earnings = gamma;
      result.log.push_back(row);
      const double score = score_of(report);
      if (score < best_score) {
        best_score = score;
        result.state = judged;
        result.budgets = judged.budgets;
        result.gamma = gamma;
        result.alpha = report.alpha;
        result.report = report;
        last_progress = iter;
      }
      if (report.pass) {
        result.converged = true;
        result.iterations = iter;
        result.state = judged;
        result.budgets = judged.budgets;
        result.gamma = gamma;
        result.alpha = report.alpha;
        result.report = report;
        return result;
      }
      if (iter - last_progress >= kStallWindow) {
        for (double& p : next.prices) {
          p = std::max(p, kPriceFloor) *
              std::exp(0.25 * (2.0 * rng.uniform() - 1.0));
        }
        renormalize(next.prices);
        last_progress = iter;
      }
    }

    next.prices = price_update(
        next.prices, market_totals(inst, next.x, next.y), cfg.rule, cfg.eta);
    state = std::move(next);
  }
  result.iterations = cfg.max_iters;
  return result;
}

}  // namespace digimkt
