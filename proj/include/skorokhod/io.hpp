#pragma once

#include "skorokhod/matrix_analysis.hpp"
#include "skorokhod/path.hpp"
#include "skorokhod/planar.hpp"
#include "skorokhod/simulate.hpp"
#include "skorokhod/solver.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace skorokhod {

using nlohmann::json;

// ---------------------------------------------------------------------------
// matrix JSON: {"R": [[...], ...]} row-major
// ---------------------------------------------------------------------------

inline Matrix<double> matrix_from_json(const json& j) {
  if (!j.contains("R") || !j["R"].is_array() || j["R"].empty())
    throw DomainError("matrix JSON must contain a non-empty row-major array \"R\"");
  const auto& rows = j["R"];
  const Index d = static_cast<Index>(rows.size());
  Matrix<double> R(d, d);
  for (Index i = 0; i < d; ++i) {
    if (!rows[i].is_array() || static_cast<Index>(rows[i].size()) != d)
      throw DomainError("matrix JSON rows must all have length " + std::to_string(d));
    for (Index k = 0; k < d; ++k) R(i, k) = rows[i][k].get<double>();
  }
  return R;
}

inline json matrix_to_json(const Matrix<double>& R) {
  json rows = json::array();
  for (Index i = 0; i < R.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < R.cols(); ++k) row.push_back(R(i, k));
    rows.push_back(std::move(row));
  }
  return json{{"R", std::move(rows)}};
}

// ---------------------------------------------------------------------------
// path JSON: {"d": int, "times": [...], "values": [[...], ...]} with one
// d-vector per breakpoint
// ---------------------------------------------------------------------------

inline json path_to_json(const PiecewisePathXd& p) {
  json times = json::array();
  for (Index k = 0; k < p.breakpoints(); ++k) times.push_back(p.times()[k]);
  json values = json::array();
  for (Index k = 0; k < p.breakpoints(); ++k) {
    json point = json::array();
    for (Index i = 0; i < p.dimension(); ++i) point.push_back(p.values()(i, k));
    values.push_back(std::move(point));
  }
  return json{{"d", p.dimension()}, {"times", std::move(times)}, {"values", std::move(values)}};
}

inline PiecewisePathXd path_from_json(const json& j) {
  if (!j.contains("d") || !j.contains("times") || !j.contains("values"))
    throw DomainError("path JSON needs fields d, times, values");
  const Index d = j["d"].get<Index>();
  const auto& jt = j["times"];
  const auto& jv = j["values"];
  if (!jt.is_array() || !jv.is_array() || jt.size() != jv.size())
    throw DomainError("path JSON times and values must be arrays of equal length");
  const Index n = static_cast<Index>(jt.size());
  Vector<double> times(n);
  Matrix<double> values(d, n);
  for (Index k = 0; k < n; ++k) {
    times[k] = jt[k].get<double>();
    if (static_cast<Index>(jv[k].size()) != d)
      throw DomainError("path JSON point " + std::to_string(k) + " has wrong dimension");
    for (Index i = 0; i < d; ++i) values(i, k) = jv[k][i].get<double>();
  }
  return PiecewisePathXd(std::move(times), std::move(values));
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

inline json validation_report_to_json(const ValidationReportXd& r) {
  json defect = json::array(), bound = json::array();
  for (Index i = 0; i < r.complementarity_defect.size(); ++i) {
    defect.push_back(r.complementarity_defect[i]);
    bound.push_back(r.defect_bound[i]);
  }
  return json{{"equation_residual", r.equation_residual},
              {"min_g", r.min_g},
              {"monotone_ok", r.monotone_ok},
              {"complementarity_defect", std::move(defect)},
              {"defect_bound", std::move(bound)},
              {"pass", r.pass}};
}

inline json solution_to_json(const SkorokhodSolutionXd& sol) {
  json defect = json::array();
  for (Index i = 0; i < sol.complementarity_defect.size(); ++i)
    defect.push_back(sol.complementarity_defect[i]);
  return json{{"g", path_to_json(sol.g)},
              {"m", path_to_json(sol.m.path())},
              {"residual", sol.residual},
              {"iterations", sol.iterations},
              {"complementarity_defect", std::move(defect)},
              {"m_unique", sol.m_unique}};
}

/// Full static-analysis report for a reflection matrix. `classes` and
/// `solve_order` use 1-based indices; `completely_S` is null above the
/// enumeration cap; `case_2d` appears only in dimension 2.
inline json analysis_report_to_json(const ReflectionMatrixXd& M) {
  const SpectralDataXd spectral = spectral_data(M);
  const ClassDecomposition dec = decompose(M);

  json j;
  j["d"] = M.d;
  j["rho"] = spectral.rho;
  j["rho_qplus"] = spectral.rho_qplus;
  j["rho_p"] = spectral.rho_p;
  j["irreducible"] = spectral.irreducible;
  if (spectral.y) {
    json y = json::array();
    for (Index i = 0; i < M.d; ++i) y.push_back((*spectral.y)[i]);
    j["perron_y"] = std::move(y);
  } else {
    j["perron_y"] = nullptr;
  }
  if (M.d <= 20)
    j["completely_S"] = check_completely_S(M).completely_S;
  else
    j["completely_S"] = nullptr;

  json classes = json::array();
  for (const auto& cls : dec.classes) {
    json one = json::array();
    for (Index v : cls) one.push_back(v + 1);
    classes.push_back(std::move(one));
  }
  j["classes"] = std::move(classes);
  json order = json::array();
  for (Index c : dec.solve_order) order.push_back(c + 1);
  j["solve_order"] = std::move(order);

  if (M.d == 2) {
    const auto planar_case = classify(M.R(0, 1), M.R(1, 0));
    j["case_2d"] = json{{"a1", planar_case.a1},
                        {"a2", planar_case.a2},
                        {"case", to_string(planar_case.case_id)},
                        {"description", describe(planar_case.case_id)},
                        {"borderline", planar_case.borderline}};
  }
  return j;
}

inline json experiment_report_to_json(const ExperimentReportXd& report) {
  json runs = json::array();
  for (const auto& run : report.runs) {
    json one{{"restart", run.restart},
             {"start_seed", run.start_seed},
             {"converged", run.converged},
             {"residual", run.residual},
             {"iterations", run.iterations}};
    if (run.converged) {
      json defect = json::array(), g_final = json::array();
      for (Index i = 0; i < run.complementarity_defect.size(); ++i)
        defect.push_back(run.complementarity_defect[i]);
      for (Index i = 0; i < run.g_final.size(); ++i) g_final.push_back(run.g_final[i]);
      one["complementarity_defect"] = std::move(defect);
      one["g_final"] = std::move(g_final);
    }
    runs.push_back(std::move(one));
  }
  return json{{"note",
               "restart agreement is a necessary numerical shadow of pathwise "
               "uniqueness, not a proof of it"},
              {"seed", report.seed},
              {"rho", report.rho},
              {"runs", std::move(runs)},
              {"max_pairwise_g_distance", report.max_pairwise_g_distance},
              {"tolerance", report.tolerance},
              {"verdict", to_string(report.verdict)}};
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

inline json load_json(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw DomainError("cannot open " + filename);
  json j;
  in >> j;
  return j;
}

inline void save_json(const json& j, const std::string& filename) {
  std::ofstream out(filename);
  if (!out) throw DomainError("cannot write " + filename);
  out << j.dump(2) << '\n';
}

inline void save_path_csv(const PiecewisePathXd& p, const std::string& filename) {
  std::ofstream out(filename);
  if (!out) throw DomainError("cannot write " + filename);
  out << 't';
  for (Index i = 0; i < p.dimension(); ++i) out << ",x" << (i + 1);
  out << '\n';
  out << std::setprecision(17);
  for (Index k = 0; k < p.breakpoints(); ++k) {
    out << p.times()[k];
    for (Index i = 0; i < p.dimension(); ++i) out << ',' << p.values()(i, k);
    out << '\n';
  }
}

}  // namespace skorokhod
