#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evolv/solver.hpp"

namespace evolv {

/// Convergence study record: parameter sequence (h or eps), measured errors,
/// and the least-squares slope of log(error) against log(parameter).
struct ConvergenceReport {
  std::vector<double> params;
  std::vector<double> errors;
  double observed_order = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Least-squares slope of log(err) vs log(param); +inf when every error is
/// zero to machine precision (exact agreement).
double observed_order(const std::vector<double>& params, const std::vector<double>& errors);

ConvergenceReport make_convergence_report(std::vector<double> params,
                                          std::vector<double> errors, double threshold);

/// One machine-readable verdict per executed check.
struct CheckResult {
  std::string name;
  std::uint64_t seed = 0;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Residual of the regularizer commutator identity
///   [(1+eps D)^{-1}, D M] = eps D (1+eps D)^{-1} C (1+eps D)^{-1},
/// C = M D - D M, in the weighted operator norm. Exact algebra at matrix
/// level: anything beyond roundoff indicates an assembly bug.
double verify_commutator_identity(const MaterialLaw& law, double eps, const Weight& w);

/// Relative error of D# against -D + 2 nu on the standard smooth profile,
/// swept over the step sizes (fixed window [t0, t1]); first order in h.
ConvergenceReport verify_adjoint_formula(double nu, double t0, double t1,
                                         const std::vector<double>& hs);

struct CausalityResult {
  bool pass = false;
  double measured = 0.0;   // max solution difference on t <= a
  double threshold = 0.0;  // 1e-12 * ||u||_nu
};

/// Perturb the source beyond the cutoff a and compare solutions on t <= a.
/// With anticausal_inject the assembled operator is replaced by its weighted
/// adjoint and solved densely; the check then fails by design.
CausalityResult verify_causality(const EvolutionaryProblem& p, double a, std::uint64_t seed,
                                 bool anticausal_inject = false);

/// Max pairwise relative difference of nu-sweep solutions.
double verify_nu_independence(const EvolutionaryProblem& p, const std::vector<double>& nus);

/// ||(1+eps D)^{-1} u - u||_nu over an eps sweep; first order for smooth u.
ConvergenceReport verify_yosida_convergence(const Trajectory& u, const Weight& w,
                                            const std::vector<double>& epss);

/// Drift of the regularized solve against the plain solve over an eps sweep.
ConvergenceReport verify_regularized_solve_convergence(const EvolutionaryProblem& p,
                                                       const std::vector<double>& epss);

/// Low-frequency check of the spectral symbol: transform(D u) against
/// (i xi + nu) transform(u) on the lowest tenth of the frequencies, swept
/// over h on a fixed window.
ConvergenceReport verify_spectral_representation(double nu, double t0, double t1,
                                                 const std::vector<double>& hs);

enum class ProblemKind { maria, tdide, autonomous };

/// Seeded generator of problems satisfying the well-posedness hypotheses by
/// construction: positive-definite time-varying M0 with bounded derivative,
/// bounded M1, spatial block skew plus optional PSD part, autonomous kernels
/// with summable decay. Deterministic per seed.
EvolutionaryProblem random_problem(std::uint64_t seed, Index n, Index d, ProblemKind kind);

}  // namespace evolv
