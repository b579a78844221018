#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evolv/solver.hpp"
#include "evolv/verify.hpp"

namespace evolv {

using Json = nlohmann::ordered_json;

/// Arithmetic expression of t: literals, + - * /, unary minus, parentheses
/// and the functions sin, cos, exp, abs. No external code, no other
/// variables.
class Expr {
 public:
  struct Node;

  static Expr parse(const std::string& text);
  static Expr constant(double value);

  double eval(double t) const;
  const std::string& text() const noexcept { return text_; }

 private:
  Expr(std::shared_ptr<const Node> root, std::string text);
  std::shared_ptr<const Node> root_;
  std::string text_;
};

using ExprMatrix = std::vector<std::vector<Expr>>;

struct KernelSpec {
  std::optional<Matrix> delta;  // d x d block added at lag 0
  struct Conv {
    double amplitude = 0.0;
    double rate = 0.0;  // kernel amplitude * h * exp(-rate * m * h), m >= 0
  };
  std::optional<Conv> conv;
  std::vector<Matrix> blocks;  // literal kernel blocks, added in

  std::vector<Matrix> realize(const TimeGrid& grid, Index dim) const;
};

struct MaterialSpec {
  MaterialLaw::Kind kind = MaterialLaw::Kind::autonomous;
  Index dim = 0;
  double min_nu = 0.0;
  // autonomous
  KernelSpec m_kernel, n_kernel;
  // nonautonomous
  ExprMatrix m0, m0dot, m1;
  bool m0dot_finite_difference = false;
  // block
  std::vector<MaterialSpec> components;

  MaterialLaw realize(const TimeGrid& grid) const;
};

/// 1-D staggered gradient/divergence pair on [0, 1]: potential unknowns at
/// interior nodes, fluxes at cell midpoints, div = -grad^T exactly, so the
/// assembled block A = coeff * [[0, div], [grad, 0]] is exactly skew.
struct GradDiv1D {
  Index n_potential = 0;
  Index n_flux = 0;
  double dx = 0.0;
  Eigen::MatrixXd grad;  // n_flux x n_potential
  Matrix coupled;        // full (n_potential + n_flux)^2 skew block
  std::vector<double> potential_nodes;
  std::vector<double> flux_nodes;
};

GradDiv1D make_grad_div_1d(Index points, const std::string& bc, double coefficient);

struct SpatialSpec {
  enum class Kind { matrix, grad_div_1d } kind = Kind::matrix;
  Matrix value;  // matrix kind
  Index points = 0;
  std::string bc = "dirichlet";
  double coefficient = 1.0;

  Matrix realize(Index state_dim) const;
};

struct SourceSpec {
  enum class Kind { expression, impulse, csv } kind = Kind::expression;
  std::vector<Expr> components;  // expression kind, one per state component
  Index k = 0;                   // impulse kind
  Index component = 0;
  Complex value = Complex(1.0, 0.0);
  std::string path;  // csv kind

  Trajectory realize(const TimeGrid& grid, Index dim,
                     const std::filesystem::path& base_dir) const;
};

struct Scenario {
  std::string label;
  double t0 = 0.0;
  double h = 0.0;
  Index n = 0;
  std::vector<double> nus;
  Index state_dim = 0;
  MaterialSpec material;
  SpatialSpec spatial;
  SourceSpec source;
  std::string out_csv;     // default "<label>_solution.csv"
  std::string out_report;  // default "<label>_report.json"

  static Scenario from_json(const Json& j);
  Json to_json() const;

  TimeGrid make_grid() const;
  EvolutionaryProblem build_problem(double nu, const std::filesystem::path& base_dir) const;
};

/// Load a scenario from a file path or a named example (heat1d, wave_memory,
/// tdide, optionally with defaults overridden later).
Scenario load_scenario(const std::string& path_or_name);

std::vector<std::string> named_example_list();
Scenario named_example(const std::string& name);

/// Heat example parameters, exposed for the convergence study.
struct HeatParams {
  Index points = 6;     // flux cells; state_dim = 2 * points - 1
  double conductivity = 0.5;
  Index n = 48;
  double t_end = 1.0;
  double nu = 1.0;
};
Scenario heat1d_scenario(const HeatParams& params);

// ---- artifacts ------------------------------------------------------------

/// CSV layout: header "k,t,re_u1,im_u1,...", LF endings, 17 significant
/// digits, written atomically (temp file + rename).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& u);
Trajectory read_trajectory_csv(const std::filesystem::path& path, const TimeGrid& grid,
                               Index dim);

void write_json_atomic(const std::filesystem::path& path, const Json& j);

Json certificate_to_json(const Certificate& cert);
Json solve_report_to_json(const SolveReport& report);
Json convergence_report_to_json(const std::string& study, const ConvergenceReport& report);
Json check_result_to_json(const CheckResult& result);

}  // namespace evolv
