#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "digimkt/demand.hpp"
#include "digimkt/model.hpp"
#include "digimkt/production.hpp"
#include "oracle.hpp"

using namespace digimkt;

namespace {

MarketInstance two_agent_instance() {
  return parse_instance(R"({
    "agents": [
      {"labor": 1.0, "costs": [1.0, 1.0],
       "utility": {"family": "linear", "coefficients": [1.0, 1.0]},
       "orders": {"1": ["agent:0", "song:a", "agent:1"]}},
      {"labor": 1.0, "costs": [1.0, 1.0],
       "utility": {"family": "linear", "coefficients": [1.0, 1.0]},
       "orders": {"1": ["agent:0", "song:a", "agent:1"]}}
    ],
    "categories": [{"songs": [{"id": "a", "owner": 0}]}]
  })");
}

DetailedAllocation empty_x(int n, int g) {
  DetailedAllocation x;
  x.bread.assign(n, 0.0);
  x.purchases.assign(n, std::vector<WalkResult>(g));
  x.excess.assign(n, std::vector<double>(g, 0.0));
  return x;
}

}  // namespace

TEST_CASE("earnings sum bread revenue and copies sold over buyers") {
  const MarketInstance inst = two_agent_instance();
  const std::vector<double> p{0.5, 0.5};
  Production y = Production::zeros(2, 2);
  DetailedAllocation x = empty_x(2, 1);

  x.purchases[0][0].bought = {{EntityRef{EntityRef::Kind::song, 0}, 1.0}};
  x.purchases[1][0].bought = {{EntityRef{EntityRef::Kind::song, 0}, 1.0}};
  CHECK(earnings(inst, p, x, y, 0) == doctest::Approx(1.0));
  CHECK(earnings(inst, p, x, y, 1) == 0.0);

  y.rows[0][0] = 2.0;
  const std::vector<double> p2{0.25, 0.75};
  DetailedAllocation none = empty_x(2, 1);
  CHECK(earnings(inst, p2, none, y, 0) == doctest::Approx(0.5));

  // Buying your own song still counts as income.
  Production zeros = Production::zeros(2, 2);
  DetailedAllocation self = empty_x(2, 1);
  self.purchases[0][0].bought = {{EntityRef{EntityRef::Kind::song, 0}, 1.0}};
  const std::vector<double> p3{0.7, 0.3};
  CHECK(earnings(inst, p3, self, zeros, 0) == doctest::Approx(0.3));
}

TEST_CASE("sold curve clamps each buyer's residual demand") {
  const MarketInstance inst = two_agent_instance();
  const Production y = Production::zeros(2, 2);

  // Both buyers rank agent 0 first, so residuals equal their totals.
  const std::vector<double> totals{1.0, 2.0};
  const SoldCurve curve = sold_curve(inst, totals, 0, 1, y);
  CHECK(curve.value(0.5) == doctest::Approx(1.0));
  CHECK(curve.value(1.5) == doctest::Approx(2.5));
  CHECK(curve.value(3.0) == doctest::Approx(3.0));
  CHECK(curve.slope_at(0.0) == 2.0);

  // Slopes are nonincreasing: the curve is concave.
  for (size_t t = 1; t < curve.segments.size(); ++t) {
    CHECK(curve.segments[t].slope < curve.segments[t - 1].slope);
  }

  const std::vector<double> single{2.0, 0.0};
  const SoldCurve one = sold_curve(inst, single, 0, 1, y);
  CHECK(one.value(1.0) == doctest::Approx(1.0));
  CHECK(one.value(5.0) == doctest::Approx(2.0));
}

TEST_CASE("supply ranked above the producer exhausts residual demand") {
  const MarketInstance inst = parse_instance(R"({
    "agents": [
      {"labor": 1.0, "costs": [1.0, 1.0],
       "utility": {"family": "linear", "coefficients": [1.0, 1.0]},
       "orders": {"1": ["song:a", "agent:1", "agent:0"]}},
      {"labor": 1.0, "costs": [1.0, 1.0],
       "utility": {"family": "linear", "coefficients": [1.0, 1.0]},
       "orders": {"1": ["song:a", "agent:1", "agent:0"]}}
    ],
    "categories": [{"songs": [{"id": "a", "owner": 0}]}]
  })");
  const Production y = Production::zeros(2, 2);
  const std::vector<double> totals{1.0, 0.0};
  const SoldCurve curve = sold_curve(inst, totals, 1, 1, y);
  CHECK(curve.segments.empty());
  CHECK(curve.value(3.0) == 0.0);
}

TEST_CASE("best response produces the song when its rate beats bread") {
  const MarketInstance inst = two_agent_instance();
  const Production y = Production::zeros(2, 2);
  DetailedAllocation x = empty_x(2, 1);
  x.purchases[0][0].bought = {{EntityRef{EntityRef::Kind::agent, 0}, 1.5}};
  x.purchases[1][0].bought = {{EntityRef{EntityRef::Kind::agent, 0}, 1.2}};
  const std::vector<double> p{0.5, 0.5};

  const BestResponse br = best_response(inst, p, x, y, 0);
  CHECK(br.plan[0] == 0.0);
  CHECK(br.plan[1] == doctest::Approx(1.0));
  CHECK(br.value == doctest::Approx(1.0));
}

TEST_CASE("no residual demand means the whole budget goes to bread") {
  const MarketInstance inst = two_agent_instance();
  const Production y = Production::zeros(2, 2);
  const DetailedAllocation x = empty_x(2, 1);
  const std::vector<double> p{0.5, 0.5};
  const BestResponse br = best_response(inst, p, x, y, 1);
  CHECK(br.plan[0] == doctest::Approx(1.0));
  CHECK(br.plan[1] == 0.0);
  CHECK(br.value == doctest::Approx(0.5));
}

TEST_CASE("greedy best response matches the labor-split grid oracle") {
  testutil::Rng rng{99};
  GenParams params;
  params.agents = 2;
  params.categories = 2;
  params.songs_per_category = 1;
  params.family = UtilityFamily::linear;
  for (int t = 0; t < 30; ++t) {
    const MarketInstance inst = generate_instance(params, 5000 + t);
    Production y = Production::zeros(2, 3);
    for (int i = 0; i < 2; ++i) {
      for (int j = 1; j <= 2; ++j) y.rows[i][j] = rng.range(0.0, 0.8);
    }
    DetailedAllocation x = empty_x(2, 2);
    std::vector<double> z_flat(2 * 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 1; j <= 2; ++j) {
        const double z = rng.range(0.0, 2.5);
        z_flat[i * 2 + (j - 1)] = z;
        const std::vector<double> supplies = order_supplies(inst, i, j, y);
        x.purchases[i][j - 1] =
            detailed_allocation(inst.order(i, j), supplies, z);
        x.excess[i][j - 1] = x.purchases[i][j - 1].excess;
      }
    }
    std::vector<double> p{rng.range(0.1, 1.0), rng.range(0.1, 1.0),
                          rng.range(0.1, 1.0)};
    const double sum = p[0] + p[1] + p[2];
    for (double& v : p) v /= sum;

    const int agent = t % 2;
    const BestResponse br = best_response(inst, p, x, y, agent);
    const double oracle = testutil::grid_best_response_value(
        inst, p, z_flat, y, agent, 0.01);
    CHECK(br.value >= oracle - 1e-6);
    const double replay =
        testutil::split_revenue(inst, p, z_flat, y, agent, br.plan);
    CHECK(br.value == doctest::Approx(replay).epsilon(1e-9));

    double labor = 0.0;
    for (int j = 0; j <= 2; ++j) {
      CHECK(br.plan[j] >= 0.0);
      labor += inst.agents[agent].costs[j] * br.plan[j];
    }
    CHECK(labor <= inst.agents[agent].labor + 1e-9);

    // Fall-back dominance and no unsold marginal production.
    CHECK(br.value >=
          p[0] * inst.agents[agent].labor / inst.agents[agent].costs[0] -
              1e-12);
    const std::vector<double> cat1{z_flat[0], z_flat[2]};
    const std::vector<double> cat2{z_flat[1], z_flat[3]};
    const std::vector<SoldCurve> curves = {sold_curve(inst, cat1, agent, 1, y),
                                           sold_curve(inst, cat2, agent, 2, y)};
    for (int j = 1; j <= 2; ++j) {
      if (br.plan[j] > 0.0 && p[0] > 0.0) {
        CHECK(curves[j - 1].slope_at(br.plan[j] - 1e-12) > 0.0);
      }
    }
  }
}

TEST_CASE("allocator purchases equal the sold-curve prediction") {
  testutil::Rng rng{123};
  GenParams params;
  params.agents = 3;
  params.categories = 2;
  params.songs_per_category = 2;
  params.family = UtilityFamily::cobb_douglas;
  for (int t = 0; t < 20; ++t) {
    const MarketInstance inst = generate_instance(params, 7000 + t);
    Production y = Production::zeros(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 1; j <= 2; ++j) y.rows[i][j] = rng.range(0.0, 1.0);
      y.rows[i][0] = rng.range(0.0, 1.0);
    }
    std::vector<double> p{rng.range(0.1, 1.0), rng.range(0.1, 1.0),
                          rng.range(0.1, 1.0)};
    const double sum = p[0] + p[1] + p[2];
    for (double& v : p) v /= sum;
    const std::vector<double> budgets{rng.range(0.1, 1.5), rng.range(0.1, 1.5),
                                      rng.range(0.1, 1.5)};
    const DetailedAllocation x = all_agents_demand(inst, p, budgets, y);

    for (int agent = 0; agent < 3; ++agent) {
      double direct = p[0] * y.rows[agent][0];
      for (int j = 1; j <= 2; ++j) {
        double copies = 0.0;
        for (int i = 0; i < 3; ++i) {
          copies += x.amount(i, j, EntityRef{EntityRef::Kind::agent, agent});
        }
        direct += p[j] * copies;
      }
      const double predicted = production_objective(inst, p, x, y, agent);
      CHECK(std::abs(predicted - direct) <= 1e-9);
    }
  }
}
