#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "digimkt/equilibrium.hpp"
#include "digimkt/json_io.hpp"
#include "json.hpp"

namespace {

enum class LogLevel { quiet, info, trace };

LogLevel log_level() {
  const char* env = std::getenv("DIGIMKT_LOG");
  if (env == nullptr) return LogLevel::info;
  const std::string v = env;
  if (v == "quiet") return LogLevel::quiet;
  if (v == "trace") return LogLevel::trace;
  return LogLevel::info;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw digimkt::ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw digimkt::ParseError(path + ": cannot open for writing");
  out << content;
  if (!out) throw digimkt::ParseError(path + ": write failed");
}

struct Report {
  std::vector<std::pair<std::string, std::string>> lines;

  void add(const std::string& key, const std::string& value) {
    lines.emplace_back(key, value);
  }
  void print() const {
    if (log_level() == LogLevel::quiet) return;
    for (const auto& [key, value] : lines) {
      std::cout << key << ": " << value << "\n";
    }
  }
};

void trace_log(const std::vector<digimkt::IterationRow>& log) {
  if (log_level() != LogLevel::trace) return;
  for (const auto& row : log) {
    std::cout << "iter " << row.iter << " res " << row.res_cond1 << " "
              << row.res_cond2 << " " << row.res_cond3 << "\n";
  }
}

std::string double_str(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::vector<double> parse_targets(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw digimkt::ParseError(std::string("targets: invalid JSON: ") +
                              e.what());
  }
  const nlohmann::json* arr = &doc;
  if (doc.is_object()) {
    auto it = doc.find("targets");
    if (it == doc.end()) {
      throw digimkt::ParseError("targets: expected an array or {\"targets\": [...]}");
    }
    arr = &*it;
  }
  if (!arr->is_array()) throw digimkt::ParseError("targets: expected an array");
  std::vector<double> out;
  for (size_t i = 0; i < arr->size(); ++i) {
    const nlohmann::json& v = (*arr)[i];
    if (!v.is_number()) {
      throw digimkt::ParseError("targets[" + std::to_string(i) +
                                "]: expected a number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"digimkt: mixed bread-and-songs market toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random instance");
  int gen_agents = 2, gen_categories = 1, gen_songs = 1;
  std::string gen_family = "cobb_douglas";
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--agents", gen_agents, "number of agents");
  gen->add_option("--categories", gen_categories, "number of song categories");
  gen->add_option("--songs", gen_songs, "initial songs per category");
  gen->add_option("--family", gen_family,
                  "utility family: linear|cobb_douglas|pwl_concave");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "instance output path")->required();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "search for an equilibrium");
  std::string solve_instance, solve_rule = "multiplicative",
              solve_order = "jacobi";
  digimkt::SolveConfig solve_cfg;
  std::string solve_state_out, solve_cert_out, solve_log_out;
  solve_cmd->add_option("--instance", solve_instance, "instance JSON path")
      ->required();
  solve_cmd->add_option("--rule", solve_rule,
                        "price rule: multiplicative|argmax");
  solve_cmd->add_option("--eta", solve_cfg.eta, "price step size");
  solve_cmd->add_option("--damping", solve_cfg.damping,
                        "production damping factor");
  solve_cmd->add_option("--order", solve_order,
                        "update order: jacobi|gauss_seidel");
  solve_cmd->add_option("--max-iters", solve_cfg.max_iters, "iteration budget");
  solve_cmd->add_option("--tol", solve_cfg.tol, "certification tolerance");
  solve_cmd->add_option("--certify-every", solve_cfg.certify_every,
                        "certification cadence");
  solve_cmd->add_option("--seed", solve_cfg.seed, "restart seed");
  solve_cmd->add_option("--state-out", solve_state_out, "state JSON path");
  solve_cmd->add_option("--cert-out", solve_cert_out, "certificate JSON path");
  solve_cmd->add_option("--log-out", solve_log_out, "iteration CSV path");

  // certify
  auto* cert_cmd = app.add_subcommand("certify", "certify a state file");
  std::string cert_instance, cert_state, cert_out;
  double cert_tol = 1e-6;
  cert_cmd->add_option("--instance", cert_instance, "instance JSON path")
      ->required();
  cert_cmd->add_option("--state", cert_state, "state JSON path")->required();
  cert_cmd->add_option("--tol", cert_tol, "certification tolerance");
  cert_cmd->add_option("--out", cert_out, "certificate JSON path");

  // welfare1
  auto* w1_cmd = app.add_subcommand(
      "welfare1", "grid search for a bread reallocation dominating a state");
  std::string w1_instance, w1_state, w1_out;
  double w1_grid = 0.05, w1_tol = 1e-6;
  w1_cmd->add_option("--instance", w1_instance, "instance JSON path")
      ->required();
  w1_cmd->add_option("--state", w1_state, "state JSON path")->required();
  w1_cmd->add_option("--grid-step", w1_grid, "bread grid step");
  w1_cmd->add_option("--tol", w1_tol, "tolerance");
  w1_cmd->add_option("--out", w1_out, "verdict JSON path");

  // welfare2
  auto* w2_cmd = app.add_subcommand(
      "welfare2", "search for an equilibrium with wealth transfers");
  std::string w2_instance, w2_targets, w2_rule = "multiplicative",
              w2_order = "jacobi";
  digimkt::SolveConfig w2_cfg;
  std::string w2_state_out, w2_transfer_out, w2_log_out;
  w2_cmd->add_option("--instance", w2_instance, "instance JSON path")
      ->required();
  w2_cmd->add_option("--targets", w2_targets, "target utilities JSON path")
      ->required();
  w2_cmd->add_option("--rule", w2_rule, "price rule: multiplicative|argmax");
  w2_cmd->add_option("--eta", w2_cfg.eta, "price step size");
  w2_cmd->add_option("--damping", w2_cfg.damping, "production damping factor");
  w2_cmd->add_option("--order", w2_order, "update order: jacobi|gauss_seidel");
  w2_cmd->add_option("--max-iters", w2_cfg.max_iters, "iteration budget");
  w2_cmd->add_option("--tol", w2_cfg.tol, "certification tolerance");
  w2_cmd->add_option("--certify-every", w2_cfg.certify_every,
                     "certification cadence");
  w2_cmd->add_option("--seed", w2_cfg.seed, "restart seed");
  w2_cmd->add_option("--state-out", w2_state_out, "state JSON path");
  w2_cmd->add_option("--transfer-out", w2_transfer_out, "transfer JSON path");
  w2_cmd->add_option("--log-out", w2_log_out, "iteration CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 3;
  }

  try {
    if (gen->parsed()) {
      digimkt::GenParams params;
      params.agents = gen_agents;
      params.categories = gen_categories;
      params.songs_per_category = gen_songs;
      params.family = digimkt::family_from_name(gen_family);
      const digimkt::MarketInstance inst =
          digimkt::generate_instance(params, gen_seed);
      write_file(gen_out, digimkt::serialize_instance(inst));
      Report report;
      report.add("command", "gen");
      report.add("digest", digimkt::instance_digest(inst));
      report.add("config", "agents=" + std::to_string(gen_agents) +
                               " categories=" + std::to_string(gen_categories) +
                               " songs=" + std::to_string(gen_songs) +
                               " family=" + gen_family +
                               " seed=" + std::to_string(gen_seed));
      report.add("outcome", "converged");
      report.add("instance", gen_out);
      report.print();
      return 0;
    }

    if (solve_cmd->parsed()) {
      solve_cfg.rule = digimkt::price_rule_from_name(solve_rule);
      solve_cfg.order = digimkt::update_order_from_name(solve_order);
      const digimkt::MarketInstance inst =
          digimkt::parse_instance(read_file(solve_instance));
      const digimkt::SolveResult result = digimkt::solve(inst, solve_cfg);
      trace_log(result.log);
      if (!solve_state_out.empty()) {
        write_file(solve_state_out,
                   digimkt::serialize_state(inst, result.state));
      }
      if (!solve_cert_out.empty()) {
        write_file(solve_cert_out,
                   digimkt::serialize_certificate(result.certificate));
      }
      if (!solve_log_out.empty()) {
        write_file(solve_log_out,
                   digimkt::iteration_log_csv(result.log, inst.num_goods()));
      }
      Report report;
      report.add("command", "solve");
      report.add("digest", digimkt::instance_digest(inst));
      report.add("config",
                 std::string("rule=") + digimkt::price_rule_name(solve_cfg.rule) +
                     " order=" + digimkt::update_order_name(solve_cfg.order) +
                     " eta=" + double_str(solve_cfg.eta) +
                     " damping=" + double_str(solve_cfg.damping) +
                     " tol=" + double_str(solve_cfg.tol) +
                     " max_iters=" + std::to_string(solve_cfg.max_iters) +
                     " certify_every=" + std::to_string(solve_cfg.certify_every) +
                     " seed=" + std::to_string(solve_cfg.seed));
      report.add("outcome", result.converged ? "converged" : "max_iters");
      report.add("iterations", std::to_string(result.iterations));
      report.add("worst_residual", double_str(result.certificate.worst));
      if (!solve_state_out.empty()) report.add("state", solve_state_out);
      if (!solve_cert_out.empty()) report.add("certificate", solve_cert_out);
      if (!solve_log_out.empty()) report.add("log", solve_log_out);
      report.print();
      return result.converged ? 0 : 2;
    }

    if (cert_cmd->parsed()) {
      const digimkt::MarketInstance inst =
          digimkt::parse_instance(read_file(cert_instance));
      const digimkt::MarketState state =
          digimkt::parse_state(inst, read_file(cert_state));
      const digimkt::Certificate cert = digimkt::certify(inst, state, cert_tol);
      if (!cert_out.empty()) {
        write_file(cert_out, digimkt::serialize_certificate(cert));
      }
      Report report;
      report.add("command", "certify");
      report.add("digest", digimkt::instance_digest(inst));
      report.add("config", "tol=" + double_str(cert_tol));
      report.add("outcome", cert.pass ? "converged" : "cert_fail");
      report.add("res_cond1", double_str(cert.res_cond1));
      report.add("res_cond2", double_str(cert.res_cond2));
      report.add("res_cond3", double_str(cert.res_cond3));
      if (!cert_out.empty()) report.add("certificate", cert_out);
      report.print();
      return cert.pass ? 0 : 1;
    }

    if (w1_cmd->parsed()) {
      const digimkt::MarketInstance inst =
          digimkt::parse_instance(read_file(w1_instance));
      const digimkt::MarketState state =
          digimkt::parse_state(inst, read_file(w1_state));
      const digimkt::ParetoReport verdict =
          digimkt::check_partial_pareto(inst, state, w1_grid, w1_tol);
      if (!w1_out.empty()) {
        write_file(w1_out, digimkt::serialize_pareto(verdict));
      }
      Report report;
      report.add("command", "welfare1");
      report.add("digest", digimkt::instance_digest(inst));
      report.add("config", "grid_step=" + double_str(w1_grid) +
                               " tol=" + double_str(w1_tol));
      report.add("outcome", verdict.dominated ? "cert_fail" : "converged");
      report.add("dominated", verdict.dominated ? "true" : "false");
      report.add("points_checked", std::to_string(verdict.points_checked));
      if (!w1_out.empty()) report.add("verdict", w1_out);
      report.print();
      return verdict.dominated ? 1 : 0;
    }

    if (w2_cmd->parsed()) {
      w2_cfg.rule = digimkt::price_rule_from_name(w2_rule);
      w2_cfg.order = digimkt::update_order_from_name(w2_order);
      const digimkt::MarketInstance inst =
          digimkt::parse_instance(read_file(w2_instance));
      const std::vector<double> targets =
          parse_targets(read_file(w2_targets));
      const digimkt::TransferResult result =
          digimkt::solve_with_transfers(inst, targets, w2_cfg);
      trace_log(result.log);
      if (!w2_state_out.empty()) {
        write_file(w2_state_out, digimkt::serialize_state(inst, result.state));
      }
      if (!w2_transfer_out.empty()) {
        write_file(w2_transfer_out, digimkt::serialize_transfer(result));
      }
      if (!w2_log_out.empty()) {
        write_file(w2_log_out,
                   digimkt::iteration_log_csv(result.log, inst.num_goods()));
      }
      Report report;
      report.add("command", "welfare2");
      report.add("digest", digimkt::instance_digest(inst));
      report.add("config",
                 std::string("rule=") + digimkt::price_rule_name(w2_cfg.rule) +
                     " order=" + digimkt::update_order_name(w2_cfg.order) +
                     " eta=" + double_str(w2_cfg.eta) +
                     " damping=" + double_str(w2_cfg.damping) +
                     " tol=" + double_str(w2_cfg.tol) +
                     " max_iters=" + std::to_string(w2_cfg.max_iters) +
                     " seed=" + std::to_string(w2_cfg.seed));
      report.add("outcome", result.converged ? "converged" : "max_iters");
      report.add("iterations", std::to_string(result.iterations));
      report.add("alpha", double_str(result.alpha));
      report.add("max_deviation", double_str(result.report.max_deviation));
      if (!w2_state_out.empty()) report.add("state", w2_state_out);
      if (!w2_transfer_out.empty()) report.add("transfer", w2_transfer_out);
      if (!w2_log_out.empty()) report.add("log", w2_log_out);
      report.print();
      return result.converged ? 0 : 2;
    }
  } catch (const digimkt::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (log_level() != LogLevel::quiet) {
      std::cout << "outcome: input_error\n";
    }
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (log_level() != LogLevel::quiet) {
      std::cout << "outcome: input_error\n";
    }
    return 3;
  }
  return 3;
}
