// SPDX-License-Identifier: Apache-2.0
#include "helmres/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "helmres/errors.hpp"
#include "helmres/fem.hpp"
#include "helmres/specfun.hpp"

namespace helmres
{

namespace
{

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep)
{
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    parts.push_back(trim(item));
  }
  return parts;
}

double parse_double(const std::string &key, const std::string &text)
{
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("invalid number '" + text + "' for " + key);
  }
  return v;
}

int parse_int(const std::string &key, const std::string &text)
{
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("invalid integer '" + text + "' for " + key);
  }
  return v;
}

bool parse_bool(const std::string &key, const std::string &text)
{
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") {
    return true;
  }
  if (t == "false" || t == "0" || t == "no") {
    return false;
  }
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

std::vector<double> parse_list(const std::string &key, const std::string &text, std::size_t expected)
{
  std::vector<double> values;
  for (const auto &part : split(text, ',')) {
    values.push_back(parse_double(key, part));
  }
  if (expected != 0 && values.size() != expected) {
    throw ConfigError(key + " expects " + std::to_string(expected) + " comma-separated values");
  }
  return values;
}

double rounded(double x)
{
  return std::isfinite(x) ? std::stod(format_number(x)) : x;
}

nlohmann::json candidate_to_json(const ResonanceCandidate &c)
{
  return {{"k_re", rounded(c.k.real())}, {"k_im", rounded(c.k.imag())}, {"absdet", rounded(c.absdet)},
          {"n", c.n},                    {"refined", c.refined},        {"refine_tol", rounded(c.refine_tol)}};
}

constexpr double study_jump = 0.02;

// Global minimum of |det| on the 0.001 lattice around the seed: +-0.015 in
// Re k, +-0.002 in Im k, capped at Im k = -0.001.
Complex window_minimum(Complex seed, const DetFunction &det, unsigned threads)
{
  ScanRegion r;
  r.n = 1000;
  r.re_min = seed.real() - 0.015;
  r.re_max = seed.real() + 0.015;
  r.im_max = std::min(seed.imag() + 0.002, -0.001);
  r.im_min = std::min(seed.imag() - 0.002, r.im_max);
  const ScanResult grid = scan(r, det, ThresholdMode::minima, std::nullopt, threads);
  const auto best = std::min_element(grid.log_abs_det.begin(), grid.log_abs_det.end());
  return grid.k[static_cast<std::size_t>(best - grid.log_abs_det.begin())];
}

}  // namespace

std::string to_string(BoundaryCondition bc)
{
  return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
}

void RunConfig::validate() const
{
  if (!(R > 1.0)) {
    throw ConfigError("R must exceed 1 (the cutoff band is [R-1, R])");
  }
  if (!(h > 0.0)) {
    throw ConfigError("h must be positive");
  }
  if (N < 1) {
    throw ConfigError("N must be at least 1");
  }
  if (!(grid_step > 0.0)) {
    throw ConfigError("grid_step must be positive");
  }
  if (!(refine_tol > 0.0)) {
    throw ConfigError("refine_tol must be positive");
  }
  if (eig_count < 1 || eig_count > 50) {
    throw ConfigError("eig_count must lie in [1, 50]");
  }
  for (int n : n_list) {
    if (n < 3) {
      throw ConfigError("study parameters must be at least 3 (h = 1/n < 0.5)");
    }
  }
  if (localize_radius && !(*localize_radius > 0.0)) {
    throw ConfigError("localize_radius must be positive");
  }
  if (region && tile) {
    throw ConfigError("region and tile are mutually exclusive");
  }
  if (mode == OperatorMode::theoretical && bc != BoundaryCondition::dirichlet) {
    throw ConfigError("mode = theoretical requires bc = dirichlet");
  }
  const Obstacle u = make_obstacle();
  if (bc == BoundaryCondition::neumann && !u.has_boundary_param()) {
    throw ConfigError("bc = neumann requires an obstacle with a boundary parametrization");
  }
  if (u.bound_radius() > Cutoff(R).r0) {
    throw ConfigError("obstacle reaches into the cutoff band (|x| > R - 0.9)");
  }
}

Obstacle RunConfig::make_obstacle() const
{
  return Obstacle::from_spec(obstacle, params);
}

int RunConfig::lattice_density() const
{
  const double n = std::round(1.0 / grid_step);
  if (!(n >= 2.0) || n > 1e9) {
    throw ConfigError("grid_step must give a lattice density between 2 and 1e9");
  }
  return static_cast<int>(n);
}

ScanRegion RunConfig::scan_region() const
{
  ScanRegion r;
  if (region) {
    r.re_min = (*region)[0];
    r.re_max = (*region)[1];
    r.im_min = (*region)[2];
    r.im_max = (*region)[3];
    r.n = lattice_density();
  } else if (tile) {
    r = spiral_tiles(*tile, lattice_density());
  } else {
    throw ConfigError("scan needs a region or a tile");
  }
  r.validate();
  return r;
}

OperatorSettings RunConfig::operator_settings() const
{
  OperatorSettings s;
  s.R = R;
  s.N = N;
  s.mode = mode;
  s.bc = bc == BoundaryCondition::dirichlet ? BcMode::dirichlet_all : BcMode::dirichlet_outer_neumann_inner;
  return s;
}

void apply_setting(RunConfig &config, const std::string &key, const std::string &value)
{
  const std::string v = trim(value);
  if (key == "obstacle") {
    config.obstacle = v;
  } else if (key == "param") {
    const auto eq = v.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("param expects name=value, got '" + v + "'");
    }
    config.params[trim(v.substr(0, eq))] = parse_double(key, v.substr(eq + 1));
  } else if (key == "R") {
    config.R = parse_double(key, v);
  } else if (key == "h") {
    config.h = parse_double(key, v);
  } else if (key == "N") {
    config.N = parse_int(key, v);
  } else if (key == "bc") {
    if (v == "dirichlet") {
      config.bc = BoundaryCondition::dirichlet;
    } else if (v == "neumann") {
      config.bc = BoundaryCondition::neumann;
    } else {
      throw ConfigError("bc must be dirichlet or neumann");
    }
  } else if (key == "mode") {
    if (v == "direct") {
      config.mode = OperatorMode::direct;
    } else if (v == "theoretical") {
      config.mode = OperatorMode::theoretical;
    } else {
      throw ConfigError("mode must be direct or theoretical");
    }
  } else if (key == "region") {
    const auto r = parse_list(key, v, 4);
    config.region = std::array<double, 4>{r[0], r[1], r[2], r[3]};
  } else if (key == "tile") {
    config.tile = parse_int(key, v);
  } else if (key == "grid_step") {
    config.grid_step = parse_double(key, v);
  } else if (key == "threshold_mode") {
    config.threshold_mode = threshold_mode_from_string(v);
  } else if (key == "threshold") {
    config.threshold = parse_double(key, v);
  } else if (key == "refine_tol") {
    config.refine_tol = parse_double(key, v);
  } else if (key == "refine_candidates") {
    config.refine_candidates = parse_bool(key, v);
  } else if (key == "k0") {
    const auto z = parse_list(key, v, 2);
    config.k0 = Complex(z[0], z[1]);
  } else if (key == "localize_radius") {
    config.localize_radius = parse_double(key, v);
  } else if (key == "n_list") {
    config.n_list.clear();
    for (const auto &part : split(v, ',')) {
      config.n_list.push_back(parse_int(key, part));
    }
  } else if (key == "eig_count") {
    config.eig_count = parse_int(key, v);
  } else if (key == "threads") {
    config.threads = static_cast<unsigned>(std::max(0, parse_int(key, v)));
  } else if (key == "out") {
    config.out = v;
  } else if (key == "export_mesh") {
    config.export_mesh = v;
  } else if (key == "candidates") {
    config.candidates = v;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void parse_config(std::istream &in, RunConfig &config)
{
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void load_config_file(const std::string &path, RunConfig &config)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path);
  }
  parse_config(in, config);
}

std::shared_ptr<const TriMesh> build_run_mesh(const Obstacle &obstacle, double R, double h)
{
  const TriMesh raw = build_mesh(obstacle, R, h, Stencil::compact9);
  SnapOptions options;
  options.inner = obstacle.has_boundary_param();
  options.smoothing_sweeps = 3;
  return std::make_shared<const TriMesh>(snap_boundary(raw, obstacle, options));
}

MeshSummary summarize_mesh(const TriMesh &mesh, const Obstacle &obstacle)
{
  MeshSummary s;
  s.nodes = mesh.num_nodes();
  s.triangles = mesh.triangles.size();
  s.min_boundary_distance = std::numeric_limits<double>::infinity();
  const bool curve = obstacle.has_boundary_param() && !obstacle.boundary().empty();
  for (std::size_t v = 0; v < mesh.num_nodes(); ++v) {
    if (mesh.node_class[v] != NodeClass::interior) {
      ++s.boundary_nodes;
      continue;
    }
    double d = mesh.R - mesh.nodes[v].norm();
    if (curve) {
      d = std::min(d, obstacle.boundary().distance(mesh.nodes[v]));
    }
    s.min_boundary_distance = std::min(s.min_boundary_distance, d);
  }
  return s;
}

OperatorBuilder make_builder(const RunConfig &config)
{
  const Obstacle u = config.make_obstacle();
  auto system = std::make_shared<const AssembledSystem>(assemble(build_run_mesh(u, config.R, config.h)));
  return OperatorBuilder(std::move(system), config.operator_settings());
}

ScanOutput run_scan(const RunConfig &config, const DetFunction &det)
{
  ScanOutput out;
  out.grid = scan(config.scan_region(), det, config.threshold_mode, config.threshold, config.threads);
  out.candidates = out.grid.selected;
  if (!config.refine_candidates) {
    return out;
  }
  RefineOptions options;
  options.stop_tol = config.refine_tol;
  for (auto &c : out.candidates) {
    try {
      const ResonanceCandidate r = refine(c.k, det, options);
      c.k = r.k;
      c.absdet = r.absdet;
      c.refined = r.refined;
    } catch (const RefineError &) {
      c.refined = false;
    }
    c.refine_tol = config.refine_tol;
  }
  return out;
}

std::vector<ChamberEigenvalue> chamber_eigenvalues(double r_inner, int count)
{
  if (!(r_inner > 0.0)) {
    throw ConfigError("r_inner must be positive");
  }
  if (count < 1 || count > 50) {
    throw ConfigError("eigenvalue count must lie in [1, 50]");
  }
  std::vector<ChamberEigenvalue> all;
  for (int n = 0; n <= count; ++n) {
    for (int m = 1; m <= count; ++m) {
      const double k = bessel_zero(n, m) / r_inner;
      all.push_back({k, n, m});
      if (n > 0) {
        all.push_back({k, -n, m});
      }
    }
  }
  std::sort(all.begin(), all.end(), [](const ChamberEigenvalue &a, const ChamberEigenvalue &b) {
    return a.k != b.k ? a.k < b.k : a.n > b.n;
  });
  all.resize(static_cast<std::size_t>(count));
  return all;
}

std::vector<StudyRow> convergence_study(const RunConfig &config)
{
  if (!config.k0) {
    throw ConfigError("study needs a starting point k0");
  }
  std::vector<int> ns = config.n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  RefineOptions options;
  options.stop_tol = config.refine_tol;
  std::vector<StudyRow> rows;
  Complex seed = *config.k0;
  for (int n : ns) {
    RunConfig c = config;
    c.N = n;
    c.h = 1.0 / n;
    const OperatorBuilder builder = make_builder(c);
    const DetFunction det = det_function(builder);
    StudyRow row;
    row.n = n;
    row.z = refine(seed, det, options);
    if (!row.z.refined || std::abs(row.z.k - seed) > study_jump) {
      row.z = refine(window_minimum(seed, det, config.threads), det, options);
    }
    row.z.n = n;
    seed = row.z.k;
    rows.push_back(row);
  }
  for (auto &row : rows) {
    for (const auto &other : rows) {
      if (other.n == 2 * row.n) {
        row.succ_err = std::abs(other.z.k - row.z.k);
      }
    }
  }
  return rows;
}

std::optional<double> empirical_order(const std::vector<StudyRow> &rows)
{
  std::vector<std::pair<double, double>> pts;
  for (const auto &r : rows) {
    if (r.succ_err && *r.succ_err > 0.0) {
      pts.emplace_back(std::log2(static_cast<double>(r.n)), std::log2(*r.succ_err));
    }
  }
  if (pts.size() < 2) {
    return std::nullopt;
  }
  double mx = 0.0, my = 0.0;
  for (const auto &[x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto &[x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return -sxy / sxx;
}

std::string format_number(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_scan_csv(std::ostream &out, const ScanResult &grid)
{
  out << "re,im,logabsdet\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_number(grid.k[i].real()) << ',' << format_number(grid.k[i].imag()) << ','
        << format_number(grid.log_abs_det[i]) << '\n';
  }
}

void write_candidates_json(std::ostream &out, const std::vector<ResonanceCandidate> &candidates)
{
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &c : candidates) {
    arr.push_back(candidate_to_json(c));
  }
  out << arr.dump(2) << '\n';
}

void write_candidate_json(std::ostream &out, const ResonanceCandidate &candidate)
{
  out << candidate_to_json(candidate).dump(2) << '\n';
}

void write_study_csv(std::ostream &out, const std::vector<StudyRow> &rows)
{
  out << "n,re,im,succ_err\n";
  for (const auto &r : rows) {
    out << r.n << ',' << format_number(r.z.k.real()) << ',' << format_number(r.z.k.imag()) << ','
        << (r.succ_err ? format_number(*r.succ_err) : std::string()) << '\n';
  }
}

void write_eigs_csv(std::ostream &out, const std::vector<ChamberEigenvalue> &eigs)
{
  out << "k,n,m\n";
  for (const auto &e : eigs) {
    out << format_number(e.k) << ',' << e.n << ',' << e.m << '\n';
  }
}

}  // namespace helmres
