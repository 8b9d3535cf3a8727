#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "idp/io.hpp"
#include "idp/limiter.hpp"

namespace idp::sim {

/// Run parameters shared by the simulation drivers.
struct SimConfig {
  std::size_t mesh_n = 40;
  double cfl = 0.2;
  double t_end = 0.05;
  std::optional<double> dt;
  double gamma_gas = 1.4;
  double epsilon = 1e-13;
  int degree = 2;
  LimiterOptions limiter{};
  // Off leaves only the scaling limiter; any inadmissible average then aborts.
  bool cell_average_limiter = true;
  std::uint64_t rng_seed = 1;
  int snapshot_every = 0;  // 0 = initial and final only
  std::filesystem::path out_dir;

  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must be in (0, 1]");
    if (mesh_n < 4) throw std::invalid_argument("mesh_n must be >= 4");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
    if (dt && !(*dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(gamma_gas > 1.0)) throw std::invalid_argument("gamma_gas must be > 1");
    limiter.solver.validate();
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"mesh_n", mesh_n},
                     {"cfl", cfl},
                     {"t_end", t_end},
                     {"gamma_gas", gamma_gas},
                     {"epsilon", epsilon},
                     {"degree", degree},
                     {"norm", to_string(limiter.norm)},
                     {"gamma", limiter.solver.gamma_step},
                     {"lambda", limiter.solver.lambda_relax},
                     {"tol", limiter.solver.tol},
                     {"max_iter", limiter.solver.max_iter},
                     {"alpha", limiter.alpha},
                     {"restrict_region", limiter.restrict_region},
                     {"region_threshold", limiter.region_threshold},
                     {"conservation_polish", limiter.conservation_polish},
                     {"cell_average_limiter", cell_average_limiter},
                     {"seed", rng_seed},
                     {"snapshot_every", snapshot_every}};
    j["dt"] = dt ? nlohmann::json(*dt) : nlohmann::json(nullptr);
    return j;
  }
};

/// Reads `key = value` lines; `#` starts a comment.
inline std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int n = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("config line " + std::to_string(n) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

/// Applies recognised keys to `cfg`; unknown keys are an error.
inline void apply_key_values(const std::map<std::string, std::string>& kv, SimConfig& cfg) {
  auto num = [](const std::string& k, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw IoError("config key '" + k + "': not a number: '" + v + "'");
    }
  };
  auto boolean = [](const std::string& k, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw IoError("config key '" + k + "': not a boolean: '" + v + "'");
  };
  for (const auto& [k, v] : kv) {
    if (k == "mesh_n") cfg.mesh_n = static_cast<std::size_t>(num(k, v));
    else if (k == "cfl") cfg.cfl = num(k, v);
    else if (k == "t_end") cfg.t_end = num(k, v);
    else if (k == "dt") cfg.dt = num(k, v);
    else if (k == "gamma_gas") { cfg.gamma_gas = num(k, v); cfg.limiter.set.gamma_gas = cfg.gamma_gas; }
    else if (k == "epsilon") { cfg.epsilon = num(k, v); cfg.limiter.set.epsilon = cfg.epsilon; }
    else if (k == "degree") cfg.degree = static_cast<int>(num(k, v));
    else if (k == "norm") cfg.limiter.norm = parse_norm(v);
    else if (k == "gamma") cfg.limiter.solver.gamma_step = num(k, v);
    else if (k == "lambda") cfg.limiter.solver.lambda_relax = num(k, v);
    else if (k == "tol") cfg.limiter.solver.tol = num(k, v);
    else if (k == "max_iter") cfg.limiter.solver.max_iter = static_cast<int>(num(k, v));
    else if (k == "alpha") cfg.limiter.alpha = num(k, v);
    else if (k == "restrict_region") cfg.limiter.restrict_region = boolean(k, v);
    else if (k == "region_threshold") cfg.limiter.region_threshold = num(k, v);
    else if (k == "conservation_polish") cfg.limiter.conservation_polish = boolean(k, v);
    else if (k == "cell_average_limiter") cfg.cell_average_limiter = boolean(k, v);
    else if (k == "seed") cfg.rng_seed = static_cast<std::uint64_t>(num(k, v));
    else if (k == "snapshot_every") cfg.snapshot_every = static_cast<int>(num(k, v));
    else if (k == "out") cfg.out_dir = v;
    else throw IoError("unknown config key '" + k + "'");
  }
}

}  // namespace idp::sim
