// SPDX-License-Identifier: Apache-2.0
// helmres: mesh, scan, refine, eigs and study commands over one RunConfig.
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "helmres/errors.hpp"
#include "helmres/pipeline.hpp"

namespace
{

using namespace helmres;

enum ExitCode
{
  exit_ok = 0,
  exit_config = 2,
  exit_numerical = 3,
  exit_refine = 4
};

struct Invocation
{
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> settings;
  bool refine_candidates = false;
};

void add_setting(CLI::App *app, Invocation &inv, const std::string &flag, const std::string &key,
                 const std::string &help)
{
  app->add_option_function<std::vector<std::string>>(
         flag, [&inv, key](const std::vector<std::string> &values) {
           for (const auto &v : values) {
             inv.settings.emplace_back(key, v);
           }
         },
         help)
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
}

void add_common(CLI::App *app, Invocation &inv)
{
  app->add_option("--config", inv.config_path, "key = value config file; flags override it");
  add_setting(app, inv, "--obstacle", "obstacle", "circular_chamber, four_disks, disk, annulus_with_gap, empty");
  add_setting(app, inv, "--param", "param", "obstacle parameter name=value (repeatable)");
  add_setting(app, inv, "--R", "R", "DtN circle radius");
  add_setting(app, inv, "--h", "h", "mesh size");
  add_setting(app, inv, "--N", "N", "truncation order");
  add_setting(app, inv, "--bc", "bc", "dirichlet or neumann");
  add_setting(app, inv, "--mode", "mode", "direct or theoretical");
  add_setting(app, inv, "--region", "region", "re0,re1,im0,im1");
  add_setting(app, inv, "--tile", "tile", "spiral tile index");
  add_setting(app, inv, "--grid-step", "grid_step", "lattice step");
  add_setting(app, inv, "--threshold", "threshold_mode", "paper or minima");
  add_setting(app, inv, "--threshold-value", "threshold", "override of the 1/log n threshold");
  add_setting(app, inv, "--refine-tol", "refine_tol", "descent stopping tolerance on |det|");
  add_setting(app, inv, "--k0", "k0", "starting point re,im");
  add_setting(app, inv, "--localize-radius", "localize_radius", "refine: background-corrected Newton on this disk first");
  add_setting(app, inv, "--n-list", "n_list", "study parameters, comma-separated");
  add_setting(app, inv, "--count", "eig_count", "number of eigenvalues");
  add_setting(app, inv, "--threads", "threads", "scan threads (0 = hardware)");
  add_setting(app, inv, "--out", "out", "output path");
  add_setting(app, inv, "--export-mesh", "export_mesh", "mesh export path");
  add_setting(app, inv, "--candidates", "candidates", "candidates JSON path (default stdout)");
}

RunConfig resolve(const Invocation &inv)
{
  RunConfig config;
  if (!inv.config_path.empty()) {
    load_config_file(inv.config_path, config);
  }
  for (const auto &[key, value] : inv.settings) {
    apply_setting(config, key, value);
  }
  if (inv.refine_candidates) {
    config.refine_candidates = true;
  }
  config.validate();
  return config;
}

// Runs `body` against the file at `path`, or stdout when empty.
void emit(const std::string &path, const std::function<void(std::ostream &)> &body)
{
  if (path.empty()) {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write " + path);
  }
  body(out);
  if (!out) {
    throw ConfigError("write failed for " + path);
  }
}

int cmd_mesh(const RunConfig &config)
{
  const Obstacle u = config.make_obstacle();
  const auto mesh = build_run_mesh(u, config.R, config.h);
  const MeshSummary s = summarize_mesh(*mesh, u);
  const std::string path = config.export_mesh.empty() ? config.out : config.export_mesh;
  if (!path.empty()) {
    emit(path, [&](std::ostream &o) { write_mesh(o, *mesh); });
  }
  std::cout << "nodes " << s.nodes << "\ntriangles " << s.triangles << "\nboundary_nodes " << s.boundary_nodes
            << "\nmin_boundary_distance " << format_number(s.min_boundary_distance) << '\n';
  return exit_ok;
}

int cmd_scan(const RunConfig &config)
{
  const ScanRegion region = config.scan_region();
  const OperatorBuilder builder = make_builder(config);
  const ScanOutput result = run_scan(config, det_function(builder));
  if (!config.out.empty()) {
    emit(config.out, [&](std::ostream &o) { write_scan_csv(o, result.grid); });
  }
  emit(config.candidates, [&](std::ostream &o) { write_candidates_json(o, result.candidates); });
  std::cerr << "scanned " << result.grid.size() << " points at n = " << region.n << ", "
            << result.candidates.size() << " candidates\n";
  return exit_ok;
}

int cmd_refine(const RunConfig &config)
{
  if (!config.k0) {
    throw ConfigError("refine needs --k0 re,im");
  }
  const OperatorBuilder builder = make_builder(config);
  RefineOptions options;
  options.stop_tol = config.refine_tol;
  ResonanceCandidate c;
  try {
    if (config.localize_radius) {
      LocalizeOptions local;
      local.radius = *config.localize_radius;
      local.refine = options;
      c = localize(*config.k0, det_function(builder), local);
    } else {
      c = refine(*config.k0, det_function(builder), options);
    }
  } catch (const RefineError &e) {
    c.k = e.best_k;
    c.absdet = e.best_absdet;
    c.refine_tol = config.refine_tol;
    c.refined = false;
  }
  c.n = config.N;
  emit(config.out, [&](std::ostream &o) { write_candidate_json(o, c); });
  if (!c.refined) {
    std::cerr << "refine: |det| = " << format_number(c.absdet) << " did not reach " << format_number(config.refine_tol)
              << '\n';
    return exit_refine;
  }
  return exit_ok;
}

int cmd_eigs(const RunConfig &config)
{
  const Obstacle u = config.make_obstacle();
  const auto it = u.params().find("r_inner");
  if (it == u.params().end()) {
    throw ConfigError("eigs needs a chamber-type obstacle with r_inner");
  }
  const auto eigs = chamber_eigenvalues(it->second, config.eig_count);
  emit(config.out, [&](std::ostream &o) { write_eigs_csv(o, eigs); });
  return exit_ok;
}

int cmd_study(const RunConfig &config)
{
  const auto rows = convergence_study(config);
  emit(config.out, [&](std::ostream &o) { write_study_csv(o, rows); });
  if (const auto order = empirical_order(rows)) {
    std::cerr << "empirical order " << format_number(*order) << '\n';
  }
  for (const auto &r : rows) {
    if (!r.z.refined) {
      return exit_refine;
    }
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Scattering resonances of 2D obstacles from a characteristic-function oracle", "helmres"};
  app.require_subcommand(1);
  Invocation inv;
  std::function<int(const RunConfig &)> command;

  const std::vector<std::pair<std::string, std::function<int(const RunConfig &)>>> commands = {
      {"mesh", cmd_mesh}, {"scan", cmd_scan}, {"refine", cmd_refine}, {"eigs", cmd_eigs}, {"study", cmd_study}};
  const std::map<std::string, std::string> help = {
      {"mesh", "build and export the triangulation"},
      {"scan", "evaluate |det| on a lattice and select candidates"},
      {"refine", "descend on |det| from --k0"},
      {"eigs", "Dirichlet eigenvalues of the closed chamber"},
      {"study", "convergence table over --n-list"}};
  for (const auto &[name, fn] : commands) {
    CLI::App *sub = app.add_subcommand(name, help.at(name));
    sub->set_help_flag("--help", "print this help message and exit");
    add_common(sub, inv);
    if (name == "scan") {
      sub->add_flag("--refine", inv.refine_candidates, "refine every selected candidate");
    }
    sub->callback([&command, f = fn]() { command = f; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    return command(resolve(inv));
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const RefineError &e) {
    std::cerr << "refine failure: " << e.what() << '\n';
    return exit_refine;
  } catch (const NumericalError &e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
