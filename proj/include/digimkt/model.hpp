#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace digimkt {

/// One amount per good. Index 0 is bread, indices 1..g are digital categories.
using Bundle = std::vector<double>;

enum class UtilityFamily { linear, cobb_douglas, pwl_concave };

const char* family_name(UtilityFamily f);
UtilityFamily family_from_name(const std::string& name);

struct PwlSegment {
  double length;
  double slope;
};

/// Concave per-agent utility over bundles. Exactly one parameter block is
/// populated, matching `family`:
///   linear       - coefficients[j] >= 0, at least one positive
///   cobb_douglas - exponents[j] >= 0 summing to 1
///   pwl_concave  - segments[j]: strictly decreasing nonnegative slopes
struct UtilitySpec {
  UtilityFamily family = UtilityFamily::linear;
  std::vector<double> coefficients;
  std::vector<double> exponents;
  std::vector<std::vector<PwlSegment>> segments;
};

/// Utility of a bundle; every coordinate saturates at `cap` (the function is
/// flat beyond it).
double utility_value(const UtilitySpec& u, std::span<const double> z, double cap);

/// Marginal value of good j at the zero bundle (first slope / coefficient /
/// exponent). Used to decide whether a free good is worth taking.
double marginal_at_zero(const UtilitySpec& u, int good);

/// An entry of a buyer's per-category ranking: either one of the category's
/// initial songs (index into the category song list) or an agent viewed as a
/// producer of songs in that category.
struct EntityRef {
  enum class Kind { song, agent };
  Kind kind = Kind::song;
  int index = 0;

  friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

struct Song {
  std::string id;
  int owner = 0;
};

struct AgentSpec {
  double labor = 1.0;
  std::vector<double> costs;  // unit labor cost per good, size g+1
  UtilitySpec utility;
  // orders[j-1] is this agent's ranking for category j: a permutation of the
  // category's initial songs plus every agent as producer.
  std::vector<std::vector<EntityRef>> orders;
};

struct MarketInstance {
  std::vector<AgentSpec> agents;
  std::vector<std::vector<Song>> categories;  // categories[j-1] holds S_j

  int num_agents() const { return static_cast<int>(agents.size()); }
  int num_categories() const { return static_cast<int>(categories.size()); }
  int num_goods() const { return num_categories() + 1; }

  const std::vector<EntityRef>& order(int agent, int category) const {
    return agents[agent].orders[category - 1];
  }
  const std::vector<Song>& songs(int category) const {
    return categories[category - 1];
  }
};

/// Production plan: rows[i][j] is agent i's output of good j. Initial songs
/// count as one full unit of supply each, on top of any produced amount.
struct Production {
  std::vector<Bundle> rows;

  static Production zeros(int n, int goods);
  /// Every agent spends her whole labor budget on bread.
  static Production bread_only(const MarketInstance& inst);

  /// Supply of an order entity in category j: 1 for an initial song, the
  /// produced amount for an agent.
  double supply(int category, const EntityRef& k) const {
    return k.kind == EntityRef::Kind::song ? 1.0 : rows[k.index][category];
  }
};

/// Global quantity bounds: no good can ever have more than `supply_bound`
/// units available, and demand saturates at `cap` = 1.1 * supply_bound.
struct GlobalBounds {
  double supply_bound = 0.0;
  double cap = 0.0;
};

GlobalBounds compute_bounds(const MarketInstance& inst);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parse and fully validate an instance document. Throws ParseError with a
/// field path on any schema or invariant violation.
MarketInstance parse_instance(const std::string& json_text);

/// Canonical JSON form; parse_instance(serialize_instance(m)) reproduces m.
std::string serialize_instance(const MarketInstance& inst);

struct GenParams {
  int agents = 2;
  int categories = 1;
  int songs_per_category = 1;
  UtilityFamily family = UtilityFamily::cobb_douglas;
};

/// Deterministic random instance; identical (params, seed) give identical
/// instances byte for byte.
MarketInstance generate_instance(const GenParams& params, std::uint64_t seed);

}  // namespace digimkt
