// skoro: command-line front end for the Skorokhod-problem toolkit.
//
// Subcommands: analyze, solve, oracle2d, counterexample, simulate, export-csv.
// Every flag may also be supplied through --config cfg.json (keys are the
// long flag names without leading dashes); explicit flags take precedence.
//
// Exit codes: 0 success, 1 usage/input error, 2 solver non-convergence,
// 3 unsupported regime.

#include "skorokhod/io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace skorokhod;

struct ConfigFile {
  json data = json::object();

  static ConfigFile load(const std::string& path) {
    ConfigFile cfg;
    if (!path.empty()) {
      cfg.data = load_json(path);
      if (!cfg.data.is_object()) throw DomainError("config file must hold a JSON object");
    }
    return cfg;
  }

  template <typename T>
  void apply(const CLI::App& sub, const std::string& flag, T& var) const {
    const std::string key = flag.substr(2);
    if (!data.contains(key)) return;
    if (sub.get_option(flag)->count() > 0) return;  // command line wins
    var = data.at(key).get<T>();
  }
};

ReflectionMatrixXd load_matrix(const std::string& filename) {
  return normalize<double>(matrix_from_json(load_json(filename)));
}

void emit(const json& j, const std::string& out) {
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    save_json(j, out);
}

SolveOptions::Scheme parse_scheme(const std::string& name) {
  if (name == "averaged") return SolveOptions::Scheme::Averaged;
  if (name == "picard") return SolveOptions::Scheme::Picard;
  throw DomainError("unknown scheme '" + name + "' (expected averaged or picard)");
}

SolveOptions::Mode parse_mode(const std::string& name) {
  if (name == "cascade") return SolveOptions::Mode::Cascade;
  if (name == "direct") return SolveOptions::Mode::Direct;
  throw DomainError("unknown mode '" + name + "' (expected cascade or direct)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver and analysis toolkit for the Skorokhod problem in the "
               "non-negative orthant"};
  app.require_subcommand(1);

  // ---- analyze ----
  auto* analyze = app.add_subcommand("analyze", "static analysis of a reflection matrix");
  std::string an_matrix, an_out, an_config;
  analyze->add_option("--matrix", an_matrix, "matrix JSON file {\"R\": [[...], ...]}");
  analyze->add_option("--out", an_out, "output report file (stdout when omitted)");
  analyze->add_option("--config", an_config, "JSON config supplying flag defaults");

  // ---- solve ----
  auto* solve_cmd = app.add_subcommand("solve", "solve the Skorokhod problem for a driver");
  std::string so_matrix, so_path, so_out, so_config;
  std::string so_scheme = "averaged", so_mode = "cascade";
  double so_tol = 1e-9;
  std::int64_t so_max_iter = 200000;
  bool so_allow = false;
  solve_cmd->add_option("--matrix", so_matrix, "matrix JSON file");
  solve_cmd->add_option("--path", so_path, "driving path JSON file");
  solve_cmd->add_option("--tol", so_tol, "stopping tolerance on successive iterates");
  solve_cmd->add_option("--max-iter", so_max_iter, "iteration budget");
  solve_cmd->add_flag("--allow-supercritical", so_allow,
                      "accept spectral radius above 1 (convergence unguaranteed)");
  solve_cmd->add_option("--scheme", so_scheme, "averaged (default) or picard");
  solve_cmd->add_option("--mode", so_mode, "cascade (default) or direct");
  solve_cmd->add_option("--out", so_out, "solution JSON file (stdout when omitted)");
  solve_cmd->add_option("--config", so_config, "JSON config supplying flag defaults");

  // ---- oracle2d ----
  auto* oracle = app.add_subcommand(
      "oracle2d", "closed-form critical-case solution (a1, a2 > 0 with a1 a2 = 1)");
  std::string or_path, or_out, or_config;
  double or_a1 = 0, or_a2 = 0;
  oracle->add_option("--a1", or_a1, "off-diagonal entry R12");
  oracle->add_option("--a2", or_a2, "off-diagonal entry R21");
  oracle->add_option("--path", or_path, "driving path JSON file");
  oracle->add_option("--out", or_out, "solution JSON file (stdout when omitted)");
  oracle->add_option("--config", or_config, "JSON config supplying flag defaults");

  // ---- counterexample ----
  auto* counter = app.add_subcommand(
      "counterexample", "emit two distinct solutions of one planar problem (gamma > 1)");
  std::string ce_dir, ce_config;
  double ce_gamma = 2.0;
  std::int64_t ce_depth = 12;
  counter->add_option("--gamma", ce_gamma, "off-diagonal entry R12 (> 1)");
  counter->add_option("--depth", ce_depth, "number of dyadic blocks");
  counter->add_option("--out-dir", ce_dir, "directory for f/g/g_bar/m/m_bar JSON files");
  counter->add_option("--config", ce_config, "JSON config supplying flag defaults");

  // ---- simulate ----
  auto* simulate = app.add_subcommand(
      "simulate", "restart-invariance experiment on a seeded Brownian driver");
  std::string si_matrix, si_out, si_config;
  std::vector<double> si_x0;
  double si_horizon = 1.0, si_tol = 1e-9;
  std::int64_t si_steps = 256, si_seed = 1, si_restarts = 5, si_max_iter = 200000;
  bool si_allow = false;
  simulate->add_option("--matrix", si_matrix, "matrix JSON file");
  simulate->add_option("--x0", si_x0, "starting point (one value per dimension)");
  simulate->add_option("--horizon", si_horizon, "time horizon");
  simulate->add_option("--steps", si_steps, "number of grid steps");
  simulate->add_option("--seed", si_seed, "PRNG seed for the driver");
  simulate->add_option("--restarts", si_restarts, "solver restarts from distinct iterates");
  simulate->add_option("--tol", si_tol, "solver stopping tolerance");
  simulate->add_option("--max-iter", si_max_iter, "solver iteration budget");
  simulate->add_flag("--allow-supercritical", si_allow,
                     "run even when the spectral radius exceeds 1");
  simulate->add_option("--out", si_out, "report JSON file (stdout when omitted)");
  simulate->add_option("--config", si_config, "JSON config supplying flag defaults");

  // ---- export-csv ----
  auto* export_csv = app.add_subcommand("export-csv", "convert a path JSON file to CSV");
  std::string ex_in, ex_out, ex_config;
  export_csv->add_option("--in", ex_in, "path JSON file");
  export_csv->add_option("--out", ex_out, "CSV output file");
  export_csv->add_option("--config", ex_config, "JSON config supplying flag defaults");

  try {
    app.parse(argc, argv);

    if (*analyze) {
      auto cfg = ConfigFile::load(an_config);
      cfg.apply(*analyze, "--matrix", an_matrix);
      cfg.apply(*analyze, "--out", an_out);
      if (an_matrix.empty()) throw DomainError("analyze requires --matrix");
      emit(analysis_report_to_json(load_matrix(an_matrix)), an_out);
    } else if (*solve_cmd) {
      auto cfg = ConfigFile::load(so_config);
      cfg.apply(*solve_cmd, "--matrix", so_matrix);
      cfg.apply(*solve_cmd, "--path", so_path);
      cfg.apply(*solve_cmd, "--tol", so_tol);
      cfg.apply(*solve_cmd, "--max-iter", so_max_iter);
      cfg.apply(*solve_cmd, "--allow-supercritical", so_allow);
      cfg.apply(*solve_cmd, "--scheme", so_scheme);
      cfg.apply(*solve_cmd, "--mode", so_mode);
      cfg.apply(*solve_cmd, "--out", so_out);
      if (so_matrix.empty() || so_path.empty())
        throw DomainError("solve requires --matrix and --path");
      SkorokhodProblemXd prob(load_matrix(so_matrix),
                              path_from_json(load_json(so_path)), so_allow);
      SolveOptions opts;
      opts.tol = so_tol;
      opts.max_iter = so_max_iter;
      opts.scheme = parse_scheme(so_scheme);
      opts.mode = parse_mode(so_mode);
      emit(solution_to_json(solve(prob, opts)), so_out);
    } else if (*oracle) {
      auto cfg = ConfigFile::load(or_config);
      cfg.apply(*oracle, "--a1", or_a1);
      cfg.apply(*oracle, "--a2", or_a2);
      cfg.apply(*oracle, "--path", or_path);
      cfg.apply(*oracle, "--out", or_out);
      if (or_path.empty()) throw DomainError("oracle2d requires --path");
      emit(solution_to_json(
               solve_critical_exact(or_a1, or_a2, path_from_json(load_json(or_path)))),
           or_out);
    } else if (*counter) {
      auto cfg = ConfigFile::load(ce_config);
      cfg.apply(*counter, "--gamma", ce_gamma);
      cfg.apply(*counter, "--depth", ce_depth);
      cfg.apply(*counter, "--out-dir", ce_dir);
      if (ce_dir.empty()) throw DomainError("counterexample requires --out-dir");
      std::filesystem::create_directories(ce_dir);
      const auto bundle = build_counterexample(ce_gamma, static_cast<Index>(ce_depth));
      const auto M = counterexample_matrix(bundle.gamma);
      const std::filesystem::path dir(ce_dir);
      save_json(path_to_json(bundle.f), (dir / "f.json").string());
      save_json(path_to_json(bundle.g), (dir / "g.json").string());
      save_json(path_to_json(bundle.g_bar), (dir / "g_bar.json").string());
      save_json(path_to_json(bundle.m.path()), (dir / "m.json").string());
      save_json(path_to_json(bundle.m_bar.path()), (dir / "m_bar.json").string());
      json report{{"gamma", bundle.gamma},
                  {"depth", bundle.depth},
                  {"separation", sup_distance(bundle.g, bundle.g_bar)},
                  {"pair", validation_report_to_json(
                               validate(M, bundle.f, bundle.g, bundle.m.path()))},
                  {"pair_bar", validation_report_to_json(
                                   validate(M, bundle.f, bundle.g_bar, bundle.m_bar.path()))}};
      save_json(report, (dir / "validation_report.json").string());
      std::cout << "wrote counterexample bundle to " << ce_dir << '\n';
    } else if (*simulate) {
      auto cfg = ConfigFile::load(si_config);
      cfg.apply(*simulate, "--matrix", si_matrix);
      cfg.apply(*simulate, "--x0", si_x0);
      cfg.apply(*simulate, "--horizon", si_horizon);
      cfg.apply(*simulate, "--steps", si_steps);
      cfg.apply(*simulate, "--seed", si_seed);
      cfg.apply(*simulate, "--restarts", si_restarts);
      cfg.apply(*simulate, "--tol", si_tol);
      cfg.apply(*simulate, "--max-iter", si_max_iter);
      cfg.apply(*simulate, "--allow-supercritical", si_allow);
      cfg.apply(*simulate, "--out", si_out);
      if (si_matrix.empty()) throw DomainError("simulate requires --matrix");
      const auto M = load_matrix(si_matrix);
      BrownianSpecXd spec;
      spec.d = M.d;
      spec.x0 = Vector<double>::Zero(M.d);
      if (!si_x0.empty()) {
        if (static_cast<Index>(si_x0.size()) != M.d)
          throw DimensionError("--x0 needs one value per matrix dimension");
        spec.x0 = Eigen::Map<const Vector<double>>(si_x0.data(), M.d);
      }
      spec.horizon = si_horizon;
      spec.n_steps = si_steps;
      spec.seed = static_cast<std::uint64_t>(si_seed);
      SolveOptions opts;
      opts.tol = si_tol;
      opts.max_iter = si_max_iter;
      emit(experiment_report_to_json(uniqueness_experiment(
               M, spec, static_cast<Index>(si_restarts), opts, si_allow)),
           si_out);
    } else if (*export_csv) {
      auto cfg = ConfigFile::load(ex_config);
      cfg.apply(*export_csv, "--in", ex_in);
      cfg.apply(*export_csv, "--out", ex_out);
      if (ex_in.empty() || ex_out.empty())
        throw DomainError("export-csv requires --in and --out");
      save_path_csv(path_from_json(load_json(ex_in)), ex_out);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << " (residual " << e.residual
              << " after " << e.iterations << " iterations)\n";
    return 2;
  } catch (const RegimeError& e) {
    std::cerr << "unsupported regime: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
