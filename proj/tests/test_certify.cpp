#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "digimkt/certify.hpp"
#include "digimkt/demand.hpp"
#include "digimkt/model.hpp"
#include "oracle.hpp"

using namespace digimkt;

namespace {

// One agent, one song she owns, Cobb-Douglas (0.5, 0.5). At prices
// (0.5, 0.5) her unique equilibrium is budget 1, bundle (1, 1), all labor
// in bread, the song bought outright.
MarketInstance autarky_instance() {
  return parse_instance(R"({
    "agents": [
      {"labor": 1.0, "costs": [1.0, 0.5],
       "utility": {"family": "cobb_douglas", "exponents": [0.5, 0.5]},
       "orders": {"1": ["song:a", "agent:0"]}}
    ],
    "categories": [{"songs": [{"id": "a", "owner": 0}]}]
  })");
}

MarketState autarky_state() {
  MarketState s;
  s.prices = {0.5, 0.5};
  s.x.bread = {1.0};
  s.x.purchases = {{WalkResult{{{EntityRef{EntityRef::Kind::song, 0}, 1.0}},
                               0.0}}};
  s.x.excess = {{0.0}};
  s.y.rows = {{1.0, 0.0}};
  s.budgets = {1.0};
  return s;
}

}  // namespace

TEST_CASE("a hand-built one-agent equilibrium certifies to machine precision") {
  const MarketInstance inst = autarky_instance();
  const MarketState s = autarky_state();
  const Certificate cert = certify(inst, s, 1e-9);
  CHECK(cert.pass);
  CHECK(cert.worst <= 1e-12);
  CHECK(cert.res_cond1 <= 1e-12);
  CHECK(cert.res_cond2 <= 1e-12);
  CHECK(cert.res_cond3 <= 1e-12);

  const Certificate fixed = certify_with_budgets(inst, s, s.budgets, 1e-9);
  CHECK(fixed.pass);
}

TEST_CASE("an unsold positively priced song fails market clearing") {
  const MarketInstance inst = autarky_instance();
  MarketState s = autarky_state();
  s.x.purchases[0][0].bought[0].second = 0.4;
  const Certificate cert = certify(inst, s, 1e-6);
  CHECK_FALSE(cert.pass);
  CHECK(cert.max_unsold_gap == doctest::Approx(0.6));
  CHECK(cert.res_cond3 >= 0.6 - 1e-12);
}

TEST_CASE("a suboptimal bundle is charged its full utility gap") {
  const MarketInstance inst = autarky_instance();
  MarketState s = autarky_state();
  // Spend the same budget as (1.6, 0.4): utility 0.8 against optimum 1.
  s.x.bread = {1.6};
  s.x.purchases[0][0].bought[0].second = 0.4;
  s.y.rows[0][0] = 1.6;
  const Certificate cert = certify(inst, s, 1e-6);
  CHECK_FALSE(cert.pass);
  CHECK(cert.utility_gap[0] == doctest::Approx(0.2));
  CHECK(cert.budget_slack[0] <= 1e-12);
  CHECK(cert.res_cond2 >= 0.2 - 1e-9);
}

TEST_CASE("oversold supply is reported") {
  const MarketInstance inst = autarky_instance();
  MarketState s = autarky_state();
  s.x.purchases[0][0].bought[0].second = 1.5;
  const Certificate cert = certify(inst, s, 1e-6);
  CHECK_FALSE(cert.pass);
  CHECK(cert.max_oversold == doctest::Approx(0.5));
}

TEST_CASE("certify validates dimensions") {
  const MarketInstance inst = autarky_instance();
  MarketState s = autarky_state();
  const std::vector<double> short_budgets;
  CHECK_THROWS_AS(certify_with_budgets(inst, s, short_budgets, 1e-6),
                  std::invalid_argument);
  s.prices = {1.0};
  CHECK_THROWS_AS(certify(inst, s, 1e-6), std::invalid_argument);
}

TEST_CASE("bought minus sold equals unmet minus unsold on random states") {
  testutil::Rng rng{2024};
  GenParams params;
  params.agents = 3;
  params.categories = 2;
  params.songs_per_category = 2;
  params.family = UtilityFamily::pwl_concave;
  for (int t = 0; t < 40; ++t) {
    const MarketInstance inst = generate_instance(params, 11000 + t);
    Production y = Production::zeros(3, 3);
    for (auto& row : y.rows) {
      for (double& v : row) v = rng.range(0.0, 1.2);
    }
    std::vector<double> p{rng.range(0.1, 1.0), rng.range(0.1, 1.0),
                          rng.range(0.1, 1.0)};
    const double sum = p[0] + p[1] + p[2];
    for (double& v : p) v /= sum;
    const std::vector<double> budgets{rng.range(0.0, 2.0), rng.range(0.0, 2.0),
                                      rng.range(0.0, 2.0)};
    const DetailedAllocation x = all_agents_demand(inst, p, budgets, y);
    const BalanceReport report = check_balance_identity(inst, x, y);
    CHECK(report.max_identity_gap <= 1e-9);
    CHECK(report.mutual_exclusion);

    // Whenever the category balances exactly, both flows vanish.
    const MarketTotals totals = market_totals(inst, x, y);
    for (int j = 1; j <= 2; ++j) {
      if (std::abs(totals.bought[j] - totals.sold[j]) <= 1e-12) {
        CHECK(report.unmet_total[j - 1] <= 1e-9);
        CHECK(report.unsold_total[j - 1] <= 1e-9);
      }
    }
  }
}

TEST_CASE("wasted labor is caught by the bread reallocation search") {
  const MarketInstance inst = parse_instance(R"({
    "agents": [
      {"labor": 1.0, "costs": [1.0, 1.0],
       "utility": {"family": "linear", "coefficients": [1.0, 0.2]},
       "orders": {"1": ["song:a", "agent:0", "agent:1"]}},
      {"labor": 1.0, "costs": [1.0, 1.0],
       "utility": {"family": "linear", "coefficients": [1.0, 0.2]},
       "orders": {"1": ["song:a", "agent:1", "agent:0"]}}
    ],
    "categories": [{"songs": [{"id": "a", "owner": 0}]}]
  })");
  MarketState s;
  s.prices = {0.5, 0.5};
  s.x.bread = {0.2, 0.2};
  s.x.purchases = {{WalkResult{}}, {WalkResult{}}};
  s.x.excess = {{0.0}, {0.0}};
  s.y.rows = {{0.2, 0.0}, {0.2, 0.0}};
  s.budgets = {0.1, 0.1};

  const ParetoReport report = check_partial_pareto(inst, s, 0.05, 1e-6);
  CHECK(report.exhaustive);
  CHECK(report.dominated);
  REQUIRE(report.witness_bread.size() == 2);
  CHECK(report.witness_bread[0] + report.witness_bread[1] <= 2.0 + 1e-9);
  for (int i = 0; i < 2; ++i) {
    CHECK(report.witness_utilities[i] >= report.base_utilities[i] - 1e-12);
  }
  CHECK(report.witness_utilities[0] + report.witness_utilities[1] >
        report.base_utilities[0] + report.base_utilities[1]);
}

TEST_CASE("a state already at maximal bread is undominated") {
  const MarketInstance inst = autarky_instance();
  const MarketState s = autarky_state();
  const ParetoReport report = check_partial_pareto(inst, s, 0.05, 1e-6);
  CHECK(report.exhaustive);
  CHECK_FALSE(report.dominated);
  CHECK(report.base_utilities[0] == doctest::Approx(1.0));
}

TEST_CASE("transfer verdicts scale with the common factor alpha") {
  const MarketInstance inst = autarky_instance();
  const MarketState s = autarky_state();

  std::vector<double> targets{1.0};
  TransferReport exact =
      check_transfer_equilibrium(inst, s, s.budgets, targets, 1e-6);
  CHECK(exact.pass);
  CHECK(exact.alpha == doctest::Approx(1.0));
  CHECK(exact.max_deviation <= 1e-9);

  targets = {0.5};
  TransferReport shy =
      check_transfer_equilibrium(inst, s, s.budgets, targets, 1e-6);
  CHECK(shy.pass);
  CHECK(shy.alpha == doctest::Approx(2.0));

  targets = {2.0};
  TransferReport infeasible =
      check_transfer_equilibrium(inst, s, s.budgets, targets, 1e-6);
  CHECK_FALSE(infeasible.pass);
  CHECK(infeasible.alpha == doctest::Approx(0.5));

  targets = {0.0};
  CHECK_THROWS_AS(
      check_transfer_equilibrium(inst, s, s.budgets, targets, 1e-6),
      std::invalid_argument);
}
