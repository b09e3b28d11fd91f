#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "digimkt/certify.hpp"
#include "digimkt/equilibrium.hpp"
#include "digimkt/state.hpp"

namespace digimkt {

/// State document: prices, the purchase table (bread rows use the synthetic
/// entity "bread"), unmet-demand rows, production rows, budgets. Canonical
/// key order and number formatting; identical states serialize to identical
/// bytes.
std::string serialize_state(const MarketInstance& inst, const MarketState& s);
MarketState parse_state(const MarketInstance& inst, const std::string& text);

std::string serialize_certificate(const Certificate& cert);
std::string serialize_transfer(const TransferResult& result);
std::string serialize_pareto(const ParetoReport& report);

/// CSV with header: iter, p_0..p_g, res_cond1, res_cond2, res_cond3,
/// total_earnings.
std::string iteration_log_csv(std::span<const IterationRow> rows, int goods);

/// FNV-1a 64 over the canonical instance serialization, as 16 hex digits.
std::string instance_digest(const MarketInstance& inst);

}  // namespace digimkt
