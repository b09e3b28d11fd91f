#include "digimkt/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

namespace digimkt {

using nlohmann::json;

const char* family_name(UtilityFamily f) {
  switch (f) {
    case UtilityFamily::linear: return "linear";
    case UtilityFamily::cobb_douglas: return "cobb_douglas";
    case UtilityFamily::pwl_concave: return "pwl_concave";
  }
  return "linear";
}

UtilityFamily family_from_name(const std::string& name) {
  if (name == "linear") return UtilityFamily::linear;
  if (name == "cobb_douglas") return UtilityFamily::cobb_douglas;
  if (name == "pwl_concave") return UtilityFamily::pwl_concave;
  throw ParseError("utility.family: unknown family \"" + name + "\"");
}

double utility_value(const UtilitySpec& u, std::span<const double> z,
                     double cap) {
  const int goods = static_cast<int>(z.size());
  switch (u.family) {
    case UtilityFamily::linear: {
      double v = 0.0;
      for (int j = 0; j < goods; ++j) {
        v += u.coefficients[j] * std::min(std::max(z[j], 0.0), cap);
      }
      return v;
    }
    case UtilityFamily::cobb_douglas: {
      double v = 1.0;
      for (int j = 0; j < goods; ++j) {
        const double a = u.exponents[j];
        if (a == 0.0) continue;
        v *= std::pow(std::min(std::max(z[j], 0.0), cap), a);
      }
      return v;
    }
    case UtilityFamily::pwl_concave: {
      double v = 0.0;
      for (int j = 0; j < goods; ++j) {
        double t = std::min(std::max(z[j], 0.0), cap);
        for (const PwlSegment& seg : u.segments[j]) {
          if (t <= 0.0) break;
          const double take = std::min(t, seg.length);
          v += take * seg.slope;
          t -= take;
        }
      }
      return v;
    }
  }
  return 0.0;
}

double marginal_at_zero(const UtilitySpec& u, int good) {
  switch (u.family) {
    case UtilityFamily::linear: return u.coefficients[good];
    case UtilityFamily::cobb_douglas: return u.exponents[good];
    case UtilityFamily::pwl_concave:
      return u.segments[good].empty() ? 0.0 : u.segments[good].front().slope;
  }
  return 0.0;
}

Production Production::zeros(int n, int goods) {
  Production y;
  y.rows.assign(n, Bundle(goods, 0.0));
  return y;
}

Production Production::bread_only(const MarketInstance& inst) {
  Production y = zeros(inst.num_agents(), inst.num_goods());
  for (int i = 0; i < inst.num_agents(); ++i) {
    y.rows[i][0] = inst.agents[i].labor / inst.agents[i].costs[0];
  }
  return y;
}

GlobalBounds compute_bounds(const MarketInstance& inst) {
  double m = 0.0;
  for (const AgentSpec& a : inst.agents) m += a.labor / a.costs[0];
  for (int j = 1; j <= inst.num_categories(); ++j) {
    double cat = static_cast<double>(inst.songs(j).size());
    for (const AgentSpec& a : inst.agents) cat += a.labor / a.costs[j];
    m = std::max(m, cat);
  }
  return GlobalBounds{m, 1.1 * m};
}

namespace {

std::string order_name(int agent, int category) {
  return "T_" + std::to_string(agent) + std::to_string(category);
}

const json& require_field(const json& obj, const char* key,
                          const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(path + ": missing field \"" + key + "\"");
  }
  return *it;
}

double require_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path + ": not finite");
  return d;
}

double require_positive(const json& v, const std::string& path) {
  const double d = require_number(v, path);
  if (d <= 0.0) throw ParseError(path + ": must be positive");
  return d;
}

std::vector<double> require_number_array(const json& v, const std::string& path,
                                         int size) {
  if (!v.is_array()) throw ParseError(path + ": expected an array");
  if (size >= 0 && static_cast<int>(v.size()) != size) {
    throw ParseError(path + ": expected " + std::to_string(size) +
                     " entries, got " + std::to_string(v.size()));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (size_t t = 0; t < v.size(); ++t) {
    out.push_back(
        require_number(v[t], path + "[" + std::to_string(t) + "]"));
  }
  return out;
}

UtilitySpec parse_utility(const json& v, const std::string& path, int goods) {
  if (!v.is_object()) throw ParseError(path + ": expected an object");
  UtilitySpec u;
  const json& fam = require_field(v, "family", path);
  if (!fam.is_string()) throw ParseError(path + ".family: expected a string");
  u.family = family_from_name(fam.get<std::string>());
  switch (u.family) {
    case UtilityFamily::linear: {
      u.coefficients = require_number_array(
          require_field(v, "coefficients", path), path + ".coefficients",
          goods);
      bool any = false;
      for (int j = 0; j < goods; ++j) {
        const std::string p =
            path + ".coefficients[" + std::to_string(j) + "]";
        if (u.coefficients[j] < 0.0) throw ParseError(p + ": must be >= 0");
        any = any || u.coefficients[j] > 0.0;
      }
      if (!any) {
        throw ParseError(path +
                         ".coefficients: needs at least one positive entry");
      }
      break;
    }
    case UtilityFamily::cobb_douglas: {
      u.exponents = require_number_array(require_field(v, "exponents", path),
                                         path + ".exponents", goods);
      double sum = 0.0;
      bool any = false;
      for (int j = 0; j < goods; ++j) {
        const std::string p = path + ".exponents[" + std::to_string(j) + "]";
        if (u.exponents[j] < 0.0) throw ParseError(p + ": must be >= 0");
        any = any || u.exponents[j] > 0.0;
        sum += u.exponents[j];
      }
      if (!any) {
        throw ParseError(path + ".exponents: needs at least one positive entry");
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ParseError(path + ".exponents: must sum to 1");
      }
      break;
    }
    case UtilityFamily::pwl_concave: {
      const json& segs = require_field(v, "segments", path);
      if (!segs.is_array() || static_cast<int>(segs.size()) != goods) {
        throw ParseError(path + ".segments: expected one segment list per good");
      }
      u.segments.resize(goods);
      bool any = false;
      for (int j = 0; j < goods; ++j) {
        const std::string gp = path + ".segments[" + std::to_string(j) + "]";
        const json& list = segs[j];
        if (!list.is_array()) throw ParseError(gp + ": expected an array");
        double prev_slope = 0.0;
        for (size_t t = 0; t < list.size(); ++t) {
          const std::string sp = gp + "[" + std::to_string(t) + "]";
          const json& pair = list[t];
          if (!pair.is_array() || pair.size() != 2) {
            throw ParseError(sp + ": expected [length, slope]");
          }
          PwlSegment seg{require_positive(pair[0], sp + "[0]"),
                         require_number(pair[1], sp + "[1]")};
          if (seg.slope < 0.0) throw ParseError(sp + "[1]: must be >= 0");
          if (t > 0 && seg.slope >= prev_slope) {
            throw ParseError(gp + ": slopes must be strictly decreasing");
          }
          prev_slope = seg.slope;
          u.segments[j].push_back(seg);
        }
        if (!u.segments[j].empty() && u.segments[j].front().slope > 0.0) {
          any = true;
        }
      }
      if (!any) {
        throw ParseError(path +
                         ".segments: needs at least one positive first slope");
      }
      break;
    }
  }
  return u;
}

EntityRef parse_entity(const std::string& text, const std::string& path,
                       const std::vector<Song>& songs, int n) {
  if (text.rfind("song:", 0) == 0) {
    const std::string id = text.substr(5);
    for (size_t k = 0; k < songs.size(); ++k) {
      if (songs[k].id == id) {
        return EntityRef{EntityRef::Kind::song, static_cast<int>(k)};
      }
    }
    throw ParseError(path + ": unknown song id \"" + id + "\"");
  }
  if (text.rfind("agent:", 0) == 0) {
    int idx = -1;
    try {
      size_t used = 0;
      idx = std::stoi(text.substr(6), &used);
      if (used != text.size() - 6) idx = -1;
    } catch (const std::exception&) {
      idx = -1;
    }
    if (idx < 0 || idx >= n) {
      throw ParseError(path + ": agent index out of range in \"" + text + "\"");
    }
    return EntityRef{EntityRef::Kind::agent, idx};
  }
  throw ParseError(path + ": entity must be \"song:<id>\" or \"agent:<index>\"");
}

}  // namespace

MarketInstance parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("document: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("document: expected an object");

  MarketInstance inst;
  const json& cats = require_field(doc, "categories", "document");
  if (!cats.is_array()) throw ParseError("categories: expected an array");
  const json& agents = require_field(doc, "agents", "document");
  if (!agents.is_array() || agents.empty()) {
    throw ParseError("agents: expected a non-empty array");
  }
  const int n = static_cast<int>(agents.size());
  const int g = static_cast<int>(cats.size());

  std::set<std::string> seen_ids;
  for (int j = 1; j <= g; ++j) {
    const std::string cp = "categories[" + std::to_string(j - 1) + "]";
    const json& cat = cats[j - 1];
    if (!cat.is_object()) throw ParseError(cp + ": expected an object");
    const json& songs = require_field(cat, "songs", cp);
    if (!songs.is_array() || songs.empty()) {
      throw ParseError(cp + ": category " + std::to_string(j) +
                       " has empty initial song set");
    }
    std::vector<Song> list;
    for (size_t t = 0; t < songs.size(); ++t) {
      const std::string sp = cp + ".songs[" + std::to_string(t) + "]";
      const json& s = songs[t];
      if (!s.is_object()) throw ParseError(sp + ": expected an object");
      const json& id = require_field(s, "id", sp);
      if (!id.is_string() || id.get<std::string>().empty()) {
        throw ParseError(sp + ".id: expected a non-empty string");
      }
      const json& owner = require_field(s, "owner", sp);
      if (!owner.is_number_integer()) {
        throw ParseError(sp + ".owner: expected an integer");
      }
      const int ow = owner.get<int>();
      if (ow < 0 || ow >= n) {
        throw ParseError(sp + ".owner: agent index out of range");
      }
      if (!seen_ids.insert(id.get<std::string>()).second) {
        throw ParseError(sp + ".id: duplicate song id \"" +
                         id.get<std::string>() + "\"");
      }
      list.push_back(Song{id.get<std::string>(), ow});
    }
    inst.categories.push_back(std::move(list));
  }

  for (int i = 0; i < n; ++i) {
    const std::string ap = "agents[" + std::to_string(i) + "]";
    const json& a = agents[i];
    if (!a.is_object()) throw ParseError(ap + ": expected an object");
    AgentSpec spec;
    spec.labor = require_positive(require_field(a, "labor", ap), ap + ".labor");
    spec.costs =
        require_number_array(require_field(a, "costs", ap), ap + ".costs",
                             g + 1);
    for (int j = 0; j <= g; ++j) {
      if (spec.costs[j] <= 0.0) {
        throw ParseError(ap + ".costs[" + std::to_string(j) +
                         "]: must be positive");
      }
    }
    spec.utility =
        parse_utility(require_field(a, "utility", ap), ap + ".utility", g + 1);

    const json& orders = require_field(a, "orders", ap);
    if (!orders.is_object()) throw ParseError(ap + ".orders: expected an object");
    spec.orders.resize(g);
    for (int j = 1; j <= g; ++j) {
      const std::string key = std::to_string(j);
      const std::string op = ap + ".orders[\"" + key + "\"]";
      auto it = orders.find(key);
      if (it == orders.end()) {
        throw ParseError(op + ": missing order " + order_name(i, j));
      }
      if (!it->is_array()) throw ParseError(op + ": expected an array");
      const std::vector<Song>& songs = inst.categories[j - 1];
      const size_t want = songs.size() + static_cast<size_t>(n);
      if (it->size() != want) {
        throw ParseError(op + ": order " + order_name(i, j) +
                         " must rank every song of category " +
                         std::to_string(j) + " and every agent exactly once");
      }
      std::vector<EntityRef> order;
      std::set<std::pair<int, int>> seen;
      for (size_t t = 0; t < it->size(); ++t) {
        const std::string ep = op + "[" + std::to_string(t) + "]";
        const json& e = (*it)[t];
        if (!e.is_string()) throw ParseError(ep + ": expected a string");
        EntityRef ref = parse_entity(e.get<std::string>(), ep, songs, n);
        if (!seen.insert({static_cast<int>(ref.kind), ref.index}).second) {
          throw ParseError(ep + ": order " + order_name(i, j) +
                           " repeats entity \"" + e.get<std::string>() + "\"");
        }
        order.push_back(ref);
      }
      spec.orders[j - 1] = std::move(order);
    }
    for (auto it = orders.begin(); it != orders.end(); ++it) {
      int j = 0;
      try {
        size_t used = 0;
        j = std::stoi(it.key(), &used);
        if (used != it.key().size()) j = 0;
      } catch (const std::exception&) {
        j = 0;
      }
      if (j < 1 || j > g) {
        throw ParseError(ap + ".orders[\"" + it.key() +
                         "\"]: not a category number");
      }
    }
    inst.agents.push_back(std::move(spec));
  }
  return inst;
}

namespace {

json utility_to_json(const UtilitySpec& u) {
  json v;
  v["family"] = family_name(u.family);
  switch (u.family) {
    case UtilityFamily::linear:
      v["coefficients"] = u.coefficients;
      break;
    case UtilityFamily::cobb_douglas:
      v["exponents"] = u.exponents;
      break;
    case UtilityFamily::pwl_concave: {
      json segs = json::array();
      for (const auto& good : u.segments) {
        json list = json::array();
        for (const PwlSegment& s : good) {
          list.push_back(json::array({s.length, s.slope}));
        }
        segs.push_back(std::move(list));
      }
      v["segments"] = std::move(segs);
      break;
    }
  }
  return v;
}

std::string entity_to_string(const MarketInstance& inst, int category,
                             const EntityRef& k) {
  if (k.kind == EntityRef::Kind::song) {
    return "song:" + inst.songs(category)[k.index].id;
  }
  return "agent:" + std::to_string(k.index);
}

}  // namespace

std::string serialize_instance(const MarketInstance& inst) {
  json doc;
  json agents = json::array();
  for (int i = 0; i < inst.num_agents(); ++i) {
    const AgentSpec& a = inst.agents[i];
    json av;
    av["labor"] = a.labor;
    av["costs"] = a.costs;
    av["utility"] = utility_to_json(a.utility);
    json orders;
    for (int j = 1; j <= inst.num_categories(); ++j) {
      json list = json::array();
      for (const EntityRef& k : a.orders[j - 1]) {
        list.push_back(entity_to_string(inst, j, k));
      }
      orders[std::to_string(j)] = std::move(list);
    }
    av["orders"] = std::move(orders);
    agents.push_back(std::move(av));
  }
  json cats = json::array();
  for (const auto& songs : inst.categories) {
    json list = json::array();
    for (const Song& s : songs) {
      json sv;
      sv["id"] = s.id;
      sv["owner"] = s.owner;
      list.push_back(std::move(sv));
    }
    json cv;
    cv["songs"] = std::move(list);
    cats.push_back(std::move(cv));
  }
  doc["agents"] = std::move(agents);
  doc["categories"] = std::move(cats);
  return doc.dump(2) + "\n";
}

namespace {

// SplitMix64; fixed draw order makes generation reproducible across builds.
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
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int t = static_cast<int>(v.size()) - 1; t > 0; --t) {
      std::swap(v[t], v[below(t + 1)]);
    }
  }
};

}  // namespace

MarketInstance generate_instance(const GenParams& params, std::uint64_t seed) {
  if (params.agents < 1 || params.categories < 1 ||
      params.songs_per_category < 1) {
    throw std::invalid_argument("generate_instance: sizes must be >= 1");
  }
  Rng rng{seed};
  const int n = params.agents;
  const int g = params.categories;
  const int goods = g + 1;

  MarketInstance inst;
  inst.agents.resize(n);
  for (int i = 0; i < n; ++i) {
    inst.agents[i].labor = rng.range(0.5, 2.0);
    inst.agents[i].costs.resize(goods);
    for (int j = 0; j < goods; ++j) {
      inst.agents[i].costs[j] = rng.range(0.5, 2.0);
    }
  }
  for (int j = 1; j <= g; ++j) {
    std::vector<Song> songs;
    for (int t = 0; t < params.songs_per_category; ++t) {
      songs.push_back(Song{
          "s" + std::to_string(j) + "_" + std::to_string(t), rng.below(n)});
    }
    inst.categories.push_back(std::move(songs));
  }

  const GlobalBounds bounds = compute_bounds(inst);
  for (int i = 0; i < n; ++i) {
    UtilitySpec u;
    u.family = params.family;
    switch (params.family) {
      case UtilityFamily::linear:
        u.coefficients.resize(goods);
        for (int j = 0; j < goods; ++j) {
          u.coefficients[j] = rng.range(0.1, 1.0);
        }
        break;
      case UtilityFamily::cobb_douglas: {
        u.exponents.resize(goods);
        double sum = 0.0;
        for (int j = 0; j < goods; ++j) {
          u.exponents[j] = rng.range(0.1, 1.0);
          sum += u.exponents[j];
        }
        double partial = 0.0;
        for (int j = 0; j + 1 < goods; ++j) {
          u.exponents[j] /= sum;
          partial += u.exponents[j];
        }
        u.exponents[goods - 1] = 1.0 - partial;
        break;
      }
      case UtilityFamily::pwl_concave: {
        u.segments.resize(goods);
        for (int j = 0; j < goods; ++j) {
          const int nseg = 2 + rng.below(2);
          double slope = rng.range(0.5, 1.5);
          for (int t = 0; t < nseg; ++t) {
            // Last segment spans past the cap so marginal value stays
            // positive over the whole feasible range.
            const double len =
                t + 1 == nseg ? bounds.cap : rng.range(0.5, 1.5);
            u.segments[j].push_back(PwlSegment{len, slope});
            slope *= rng.range(0.3, 0.8);
          }
        }
        break;
      }
    }
    inst.agents[i].utility = std::move(u);

    inst.agents[i].orders.resize(g);
    for (int j = 1; j <= g; ++j) {
      std::vector<EntityRef> order;
      for (int t = 0; t < params.songs_per_category; ++t) {
        order.push_back(EntityRef{EntityRef::Kind::song, t});
      }
      for (int k = 0; k < n; ++k) {
        order.push_back(EntityRef{EntityRef::Kind::agent, k});
      }
      rng.shuffle(order);
      inst.agents[i].orders[j - 1] = std::move(order);
    }
  }
  return inst;
}

}  // namespace digimkt
