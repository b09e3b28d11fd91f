#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "digimkt/model.hpp"

using namespace digimkt;

namespace {

const char* kMinimalDoc = R"({
  "agents": [
    {
      "labor": 1.0,
      "costs": [1.0, 0.5],
      "utility": {"family": "linear", "coefficients": [1.0, 0.5]},
      "orders": {"1": ["song:a", "agent:0"]}
    }
  ],
  "categories": [{"songs": [{"id": "a", "owner": 0}]}]
})";

std::string expect_error(const std::string& doc) {
  try {
    parse_instance(doc);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("linear utility sums coefficient-weighted capped amounts") {
  UtilitySpec u;
  u.family = UtilityFamily::linear;
  u.coefficients = {1.0, 3.0};
  const Bundle z{2.0, 0.5};
  CHECK(utility_value(u, z, 100.0) == doctest::Approx(3.5));
  const Bundle big{50.0, 50.0};
  CHECK(utility_value(u, big, 10.0) == doctest::Approx(40.0));
}

TEST_CASE("cobb_douglas utility is the exponent-weighted product") {
  UtilitySpec u;
  u.family = UtilityFamily::cobb_douglas;
  u.exponents = {0.25, 0.75};
  const Bundle z{1.0, 3.0};
  CHECK(utility_value(u, z, 100.0) == doctest::Approx(std::pow(3.0, 0.75)));
  const Bundle zero{0.0, 3.0};
  CHECK(utility_value(u, zero, 100.0) == 0.0);
}

TEST_CASE("pwl utility walks segments and flattens past them") {
  UtilitySpec u;
  u.family = UtilityFamily::pwl_concave;
  u.segments = {{{1.0, 2.0}, {1.0, 1.0}}, {{0.5, 4.0}}};
  const Bundle z{1.5, 10.0};
  CHECK(utility_value(u, z, 100.0) == doctest::Approx(2.5 + 2.0));
  CHECK(marginal_at_zero(u, 0) == 2.0);
  CHECK(marginal_at_zero(u, 1) == 4.0);
}

TEST_CASE("compute_bounds evaluates the max over bread and categories") {
  MarketInstance inst = parse_instance(kMinimalDoc);
  inst.agents[0].costs = {1.0, 1.0};
  const GlobalBounds b = compute_bounds(inst);
  CHECK(b.supply_bound == doctest::Approx(2.0));
  CHECK(b.cap == 1.1 * b.supply_bound);

  MarketInstance two = inst;
  two.agents.push_back(inst.agents[0]);
  two.agents[0].costs = {0.5, 1.0};
  two.agents[1].costs = {0.5, 1.0};
  two.categories[0] = {Song{"a", 0}, Song{"b", 0}, Song{"c", 1}};
  const GlobalBounds b2 = compute_bounds(two);
  CHECK(b2.supply_bound == doctest::Approx(5.0));
  CHECK(b2.cap / b2.supply_bound == 1.1);
}

TEST_CASE("minimal document parses and round-trips") {
  const MarketInstance inst = parse_instance(kMinimalDoc);
  CHECK(inst.num_agents() == 1);
  CHECK(inst.num_categories() == 1);
  CHECK(inst.songs(1).size() == 1);
  CHECK(inst.songs(1)[0].id == "a");
  CHECK(inst.order(0, 1).size() == 2);

  const std::string text = serialize_instance(inst);
  const MarketInstance again = parse_instance(text);
  CHECK(serialize_instance(again) == text);
}

TEST_CASE("empty initial song set is rejected by name") {
  const std::string doc = R"({
    "agents": [
      {
        "labor": 1.0,
        "costs": [1.0, 0.5],
        "utility": {"family": "linear", "coefficients": [1.0, 0.5]},
        "orders": {"1": ["agent:0"]}
      }
    ],
    "categories": [{"songs": []}]
  })";
  const std::string msg = expect_error(doc);
  CHECK(msg.find("category 1 has empty initial song set") != std::string::npos);
}

TEST_CASE("order missing an agent id is rejected naming the order") {
  const std::string doc = R"({
    "agents": [
      {
        "labor": 1.0,
        "costs": [1.0, 0.5],
        "utility": {"family": "linear", "coefficients": [1.0, 0.5]},
        "orders": {"1": ["song:a", "agent:0"]}
      },
      {
        "labor": 1.0,
        "costs": [1.0, 0.5],
        "utility": {"family": "linear", "coefficients": [1.0, 0.5]},
        "orders": {"1": ["song:a", "agent:0", "agent:1"]}
      }
    ],
    "categories": [{"songs": [{"id": "a", "owner": 0}]}]
  })";
  const std::string msg = expect_error(doc);
  CHECK(msg.find("T_01") != std::string::npos);
}

TEST_CASE("order entity repeats are rejected naming the order") {
  const std::string doc = R"({
    "agents": [
      {
        "labor": 1.0,
        "costs": [1.0, 0.5],
        "utility": {"family": "linear", "coefficients": [1.0, 0.5]},
        "orders": {"1": ["song:a", "song:a"]}
      }
    ],
    "categories": [{"songs": [{"id": "a", "owner": 0}]}]
  })";
  const std::string msg = expect_error(doc);
  CHECK(msg.find("T_01") != std::string::npos);
  CHECK(msg.find("repeats") != std::string::npos);
}

TEST_CASE("duplicate song ids are rejected with a field path") {
  const std::string doc = R"({
    "agents": [
      {
        "labor": 1.0,
        "costs": [1.0, 0.5, 0.5],
        "utility": {"family": "linear", "coefficients": [1.0, 0.5, 0.5]},
        "orders": {"1": ["song:a", "agent:0"], "2": ["song:a", "agent:0"]}
      }
    ],
    "categories": [
      {"songs": [{"id": "a", "owner": 0}]},
      {"songs": [{"id": "a", "owner": 0}]}
    ]
  })";
  const std::string msg = expect_error(doc);
  CHECK(msg.find("duplicate song id") != std::string::npos);
  CHECK(msg.find("categories[1]") != std::string::npos);
}

TEST_CASE("non-positive costs and labor are rejected") {
  MarketInstance inst = parse_instance(kMinimalDoc);
  std::string doc = serialize_instance(inst);
  {
    std::string bad = doc;
    const auto pos = bad.find("\"labor\": 1.0");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 12, "\"labor\": 0.0");
    CHECK(expect_error(bad).find("labor") != std::string::npos);
  }
  {
    std::string bad = doc;
    const auto pos = bad.find("0.5");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 3, "-1y");
    CHECK(expect_error(bad) != "");
  }
}

TEST_CASE("cobb_douglas exponents must sum to one") {
  const std::string doc = R"({
    "agents": [
      {
        "labor": 1.0,
        "costs": [1.0, 0.5],
        "utility": {"family": "cobb_douglas", "exponents": [0.5, 0.6]},
        "orders": {"1": ["song:a", "agent:0"]}
      }
    ],
    "categories": [{"songs": [{"id": "a", "owner": 0}]}]
  })";
  CHECK(expect_error(doc).find("sum to 1") != std::string::npos);
}

TEST_CASE("pwl slopes must strictly decrease") {
  const std::string doc = R"({
    "agents": [
      {
        "labor": 1.0,
        "costs": [1.0, 0.5],
        "utility": {"family": "pwl_concave",
                    "segments": [[[1.0, 1.0], [1.0, 1.0]], [[1.0, 0.5]]]},
        "orders": {"1": ["song:a", "agent:0"]}
      }
    ],
    "categories": [{"songs": [{"id": "a", "owner": 0}]}]
  })";
  CHECK(expect_error(doc).find("strictly decreasing") != std::string::npos);
}

TEST_CASE("generation is deterministic per seed") {
  GenParams params;
  params.agents = 2;
  params.categories = 1;
  params.songs_per_category = 1;
  params.family = UtilityFamily::linear;
  const std::string a = serialize_instance(generate_instance(params, 7));
  const std::string b = serialize_instance(generate_instance(params, 7));
  CHECK(a == b);
  const std::string c = serialize_instance(generate_instance(params, 8));
  CHECK(a != c);
}

TEST_CASE("generated instances validate and respect family invariants") {
  GenParams params;
  params.agents = 3;
  params.categories = 2;
  params.songs_per_category = 2;
  params.family = UtilityFamily::cobb_douglas;
  const MarketInstance inst = generate_instance(params, 1);
  const MarketInstance parsed = parse_instance(serialize_instance(inst));
  CHECK(parsed.num_agents() == 3);
  for (const AgentSpec& a : inst.agents) {
    double sum = 0.0;
    for (double e : a.utility.exponents) sum += e;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }

  params.family = UtilityFamily::pwl_concave;
  params.agents = 2;
  params.categories = 1;
  params.songs_per_category = 1;
  const MarketInstance pwl = generate_instance(params, 3);
  parse_instance(serialize_instance(pwl));
  for (const AgentSpec& a : pwl.agents) {
    for (const auto& segs : a.utility.segments) {
      for (size_t t = 1; t < segs.size(); ++t) {
        CHECK(segs[t].slope < segs[t - 1].slope);
      }
    }
  }
}

TEST_CASE("generation rejects invalid sizes") {
  GenParams params;
  params.agents = 0;
  CHECK_THROWS_AS(generate_instance(params, 1), std::invalid_argument);
}
