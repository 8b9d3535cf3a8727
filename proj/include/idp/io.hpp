#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "idp/field.hpp"
#include "idp/splitting.hpp"

namespace idp {

/// Raised for unreadable or malformed input files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json to_json(const SolveReport& r) {
  return nlohmann::json{{"iterations", r.iterations},
                        {"projections", r.projections},
                        {"converged", r.converged},
                        {"residuals", r.residual_history},
                        {"gamma", r.gamma},
                        {"lambda", r.lambda},
                        {"tol", r.tol},
                        {"fallback_events", r.fallback_events},
                        {"inner_iterations", r.inner_iterations},
                        {"conservation_residual", r.conservation_residual},
                        {"wall_time_s", r.wall_time_s}};
}

inline std::string csv_header(int dim) { return dim == 1 ? "rho,m1,E" : "rho,m1,m2,E"; }

/// Writes `path` (CSV, header rho,m1[,m2],E) and `path` + ".json" metadata.
template <int Dim>
void write_field(const std::filesystem::path& path, const CellAverageField<Dim>& f,
                 double epsilon, const nlohmann::json& extra_meta = nlohmann::json::object()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << csv_header(Dim) << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < f.n_cells(); ++i) {
    for (int c = 0; c < Dim + 2; ++c) out << (c ? "," : "") << f(i, c);
    out << '\n';
  }
  nlohmann::json meta{{"n_cells", f.n_cells()},
                      {"dim", Dim},
                      {"h", f.h()},
                      {"domain_box", f.domain_box()},
                      {"epsilon", epsilon}};
  meta.update(extra_meta);
  std::ofstream side(path.string() + ".json");
  if (!side) throw IoError("cannot open sidecar for " + path.string());
  side << meta.dump(2) << '\n';
}

struct FieldFileInfo {
  int dim = 1;
  std::size_t n_cells = 0;
  double h = 1.0;
  std::vector<double> domain_box;
  double epsilon = 1e-13;
  bool has_sidecar = false;
};

/// Reads the header and sidecar of a field CSV without loading the data.
inline FieldFileInfo inspect_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  FieldFileInfo info;
  if (header == csv_header(1))
    info.dim = 1;
  else if (header == csv_header(2))
    info.dim = 2;
  else
    throw IoError("unexpected CSV header '" + header + "' in " + path.string());
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line != "\r") ++info.n_cells;
  const std::filesystem::path side = path.string() + ".json";
  if (std::filesystem::exists(side)) {
    std::ifstream s(side);
    nlohmann::json meta;
    try {
      s >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed sidecar " + side.string() + ": " + e.what());
    }
    info.has_sidecar = true;
    info.h = meta.value("h", 1.0);
    info.epsilon = meta.value("epsilon", 1e-13);
    if (meta.contains("domain_box")) info.domain_box = meta["domain_box"].get<std::vector<double>>();
    if (meta.value("dim", info.dim) != info.dim)
      throw IoError("sidecar dim disagrees with CSV header in " + path.string());
  }
  return info;
}

template <int Dim>
CellAverageField<Dim> read_field(const std::filesystem::path& path) {
  const FieldFileInfo info = inspect_field(path);
  if (info.dim != Dim) throw IoError("field in " + path.string() + " has the wrong dimension");
  if (info.n_cells == 0) throw IoError("field in " + path.string() + " has no rows");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<double> data;
  data.reserve(info.n_cells * (Dim + 2));
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        data.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' on data row " + std::to_string(row));
      }
      ++cols;
    }
    if (cols != Dim + 2)
      throw IoError("data row " + std::to_string(row) + " has " + std::to_string(cols) +
                    " columns");
  }
  std::array<double, 2 * Dim> box{};
  for (std::size_t i = 0; i < box.size() && i < info.domain_box.size(); ++i) box[i] = info.domain_box[i];
  return CellAverageField<Dim>(info.n_cells, info.h, std::move(data), box);
}

/// Appends one JSON object per line.
class JsonlWriter {
 public:
  JsonlWriter() = default;
  explicit JsonlWriter(const std::filesystem::path& path) { open(path); }
  void open(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path);
    if (!out_) throw IoError("cannot open " + path.string());
  }
  bool is_open() const { return out_.is_open(); }
  void write(const nlohmann::json& j) {
    if (out_.is_open()) out_ << j.dump() << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace idp
