#include "digimkt/json_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace digimkt {

using nlohmann::json;

namespace {

std::string entity_string(const MarketInstance& inst, int category,
                          const EntityRef& k) {
  if (k.kind == EntityRef::Kind::song) {
    return "song:" + inst.songs(category)[k.index].id;
  }
  return "agent:" + std::to_string(k.index);
}

EntityRef entity_from_string(const MarketInstance& inst, int category,
                             const std::string& text,
                             const std::string& path) {
  if (text.rfind("song:", 0) == 0) {
    const std::string id = text.substr(5);
    const std::vector<Song>& songs = inst.songs(category);
    for (size_t t = 0; t < songs.size(); ++t) {
      if (songs[t].id == id) {
        return EntityRef{EntityRef::Kind::song, static_cast<int>(t)};
      }
    }
    throw ParseError(path + ": unknown song id \"" + id + "\" in category " +
                     std::to_string(category));
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
    if (idx < 0 || idx >= inst.num_agents()) {
      throw ParseError(path + ": agent index out of range in \"" + text + "\"");
    }
    return EntityRef{EntityRef::Kind::agent, idx};
  }
  throw ParseError(path + ": entity must be \"song:<id>\", \"agent:<index>\"" +
                   " or \"bread\"");
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path + ": not finite");
  return d;
}

int index_at(const json& v, const std::string& path, int limit) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
  const int i = v.get<int>();
  if (i < 0 || i >= limit) throw ParseError(path + ": index out of range");
  return i;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

std::string serialize_state(const MarketInstance& inst, const MarketState& s) {
  const int n = inst.num_agents();
  const int g = inst.num_categories();
  json doc;
  doc["prices"] = s.prices;
  doc["budgets"] = s.budgets;

  json x = json::array();
  for (int i = 0; i < n; ++i) {
    if (s.x.bread[i] != 0.0) {
      x.push_back(json::array({i, 0, "bread", s.x.bread[i]}));
    }
    for (int j = 1; j <= g; ++j) {
      for (const auto& [ref, amt] : s.x.purchases[i][j - 1].bought) {
        x.push_back(json::array({i, j, entity_string(inst, j, ref), amt}));
      }
    }
  }
  doc["x"] = std::move(x);

  json d = json::array();
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= g; ++j) {
      d.push_back(json::array({i, j, s.x.excess[i][j - 1]}));
    }
  }
  doc["d"] = std::move(d);
  doc["y"] = s.y.rows;
  return doc.dump(2) + "\n";
}

MarketState parse_state(const MarketInstance& inst, const std::string& text) {
  const int n = inst.num_agents();
  const int g = inst.num_categories();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("state: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("state: expected an object");

  MarketState s;
  auto prices = doc.find("prices");
  if (prices == doc.end() || !prices->is_array() ||
      static_cast<int>(prices->size()) != g + 1) {
    throw ParseError("state.prices: expected an array of g+1 numbers");
  }
  for (size_t j = 0; j < prices->size(); ++j) {
    s.prices.push_back(
        number_at((*prices)[j], "state.prices[" + std::to_string(j) + "]"));
  }

  auto budgets = doc.find("budgets");
  if (budgets == doc.end() || !budgets->is_array() ||
      static_cast<int>(budgets->size()) != n) {
    throw ParseError("state.budgets: expected an array of n numbers");
  }
  for (size_t i = 0; i < budgets->size(); ++i) {
    s.budgets.push_back(
        number_at((*budgets)[i], "state.budgets[" + std::to_string(i) + "]"));
  }

  auto y = doc.find("y");
  if (y == doc.end() || !y->is_array() || static_cast<int>(y->size()) != n) {
    throw ParseError("state.y: expected an array of n rows");
  }
  for (int i = 0; i < n; ++i) {
    const std::string path = "state.y[" + std::to_string(i) + "]";
    const json& row = (*y)[i];
    if (!row.is_array() || static_cast<int>(row.size()) != g + 1) {
      throw ParseError(path + ": expected g+1 numbers");
    }
    Bundle b;
    for (size_t j = 0; j < row.size(); ++j) {
      const double v =
          number_at(row[j], path + "[" + std::to_string(j) + "]");
      if (v < 0.0) throw ParseError(path + ": production must be >= 0");
      b.push_back(v);
    }
    s.y.rows.push_back(std::move(b));
  }

  s.x.bread.assign(n, 0.0);
  s.x.purchases.assign(n, std::vector<WalkResult>(g));
  s.x.excess.assign(n, std::vector<double>(g, 0.0));

  auto x = doc.find("x");
  if (x == doc.end() || !x->is_array()) {
    throw ParseError("state.x: expected an array");
  }
  for (size_t t = 0; t < x->size(); ++t) {
    const std::string path = "state.x[" + std::to_string(t) + "]";
    const json& row = (*x)[t];
    if (!row.is_array() || row.size() != 4) {
      throw ParseError(path + ": expected [buyer, category, entity, amount]");
    }
    const int buyer = index_at(row[0], path + "[0]", n);
    if (!row[1].is_number_integer()) {
      throw ParseError(path + "[1]: expected an integer");
    }
    const int category = row[1].get<int>();
    if (!row[2].is_string()) throw ParseError(path + "[2]: expected a string");
    const double amount = number_at(row[3], path + "[3]");
    if (amount < 0.0) throw ParseError(path + "[3]: amount must be >= 0");
    const std::string entity = row[2].get<std::string>();
    if (category == 0) {
      if (entity != "bread") {
        throw ParseError(path + "[2]: category 0 rows must be \"bread\"");
      }
      s.x.bread[buyer] += amount;
    } else {
      if (category < 1 || category > g) {
        throw ParseError(path + "[1]: category out of range");
      }
      const EntityRef ref =
          entity_from_string(inst, category, entity, path + "[2]");
      s.x.purchases[buyer][category - 1].bought.emplace_back(ref, amount);
    }
  }

  auto d = doc.find("d");
  if (d == doc.end() || !d->is_array()) {
    throw ParseError("state.d: expected an array");
  }
  for (size_t t = 0; t < d->size(); ++t) {
    const std::string path = "state.d[" + std::to_string(t) + "]";
    const json& row = (*d)[t];
    if (!row.is_array() || row.size() != 3) {
      throw ParseError(path + ": expected [buyer, category, amount]");
    }
    const int buyer = index_at(row[0], path + "[0]", n);
    if (!row[1].is_number_integer() || row[1].get<int>() < 1 ||
        row[1].get<int>() > g) {
      throw ParseError(path + "[1]: category out of range");
    }
    const double amount = number_at(row[2], path + "[2]");
    if (amount < 0.0) throw ParseError(path + "[2]: amount must be >= 0");
    const int category = row[1].get<int>();
    s.x.excess[buyer][category - 1] = amount;
    s.x.purchases[buyer][category - 1].excess = amount;
  }
  return s;
}

std::string serialize_certificate(const Certificate& cert) {
  json doc;
  doc["pass"] = cert.pass;
  doc["tol"] = cert.tol;
  doc["production_gap"] = cert.production_gap;
  doc["utility_gap"] = cert.utility_gap;
  doc["budget_slack"] = cert.budget_slack;
  doc["bread_imbalance"] = cert.bread_imbalance;
  doc["max_unsold_gap"] = cert.max_unsold_gap;
  doc["max_unmet_demand"] = cert.max_unmet_demand;
  doc["max_oversold"] = cert.max_oversold;
  doc["res_cond1"] = cert.res_cond1;
  doc["res_cond2"] = cert.res_cond2;
  doc["res_cond3"] = cert.res_cond3;
  doc["worst"] = cert.worst;
  return doc.dump(2) + "\n";
}

std::string serialize_transfer(const TransferResult& result) {
  json doc;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["budgets"] = result.budgets;
  doc["gamma"] = result.gamma;
  doc["alpha"] = result.alpha;
  doc["ratios"] = result.report.ratios;
  doc["max_deviation"] = result.report.max_deviation;
  doc["pass"] = result.report.pass;
  return doc.dump(2) + "\n";
}

std::string serialize_pareto(const ParetoReport& report) {
  json doc;
  doc["dominated"] = report.dominated;
  doc["exhaustive"] = report.exhaustive;
  doc["points_checked"] = report.points_checked;
  doc["grid_step"] = report.grid_step;
  doc["base_utilities"] = report.base_utilities;
  doc["witness_bread"] = report.witness_bread;
  doc["witness_utilities"] = report.witness_utilities;
  return doc.dump(2) + "\n";
}

std::string iteration_log_csv(std::span<const IterationRow> rows, int goods) {
  std::ostringstream out;
  out << "iter";
  for (int j = 0; j < goods; ++j) out << ",p_" << j;
  out << ",res_cond1,res_cond2,res_cond3,total_earnings\n";
  for (const IterationRow& row : rows) {
    out << row.iter;
    for (double p : row.prices) out << ',' << format_double(p);
    out << ',' << format_double(row.res_cond1) << ','
        << format_double(row.res_cond2) << ',' << format_double(row.res_cond3)
        << ',' << format_double(row.total_earnings) << '\n';
  }
  return out.str();
}

std::string instance_digest(const MarketInstance& inst) {
  const std::string text = serialize_instance(inst);
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
  return std::string(buf);
}

}  // namespace digimkt
