#include "evolv/solver.hpp"

#include <Eigen/LU>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

namespace evolv {

using detail::MultiplicationRep;
using detail::OpNode;
using detail::ProductRep;
using detail::ScaleRep;
using detail::SpatialRep;
using detail::SumRep;
using detail::ToeplitzRep;

EvolutionaryProblem::EvolutionaryProblem(const TimeGrid& g, double nu, MaterialLaw l,
                                         Matrix a, Trajectory f, std::string lab)
    : grid(g), weight(g, nu), law(std::move(l)), spatial(std::move(a)),
      source(std::move(f)), label(std::move(lab)) {
  if (law.grid() != grid) throw ShapeError("material law lives on a different grid");
  if (spatial.rows() != law.dim() || spatial.cols() != law.dim()) {
    throw ShapeError("spatial block dimension does not match the material law");
  }
  if (!spatial.allFinite()) throw NumericError("spatial block has non-finite entries");
  if (source.grid() != grid || source.dim() != law.dim()) {
    throw ShapeError("source trajectory does not match the problem shape");
  }
  if (nu <= 0.0) throw ParameterError("evolutionary problems require nu > 0");
  if (nu < law.min_nu) {
    throw ParameterError("weight nu = " + std::to_string(nu) + " below min_nu of law '" +
                         law.label + "'");
  }
}

CausalOperator assemble(const EvolutionaryProblem& p) {
  const CausalOperator d = time_derivative(p.grid, p.dim());
  return d * p.law.M_op + p.law.N_op + CausalOperator::spatial_constant(p.grid, p.spatial);
}

namespace {

// ---- streaming evaluation of a causal operator, one time step at a time ----
//
// Each node reports, for step k, the diagonal block multiplying u_k and the
// contribution of already-committed inputs; after u_k is fixed the step is
// committed downward. This keeps banded kernels at O(band d^2) per step and
// full Toeplitz memory at O(k d^2), which is where the solver's complexity
// contract comes from.

struct StepData {
  Vector past;
  Matrix diag;
};

class StepEval {
 public:
  virtual ~StepEval() = default;
  virtual const StepData& begin(Index k) = 0;
  virtual void commit(Index k, const Vector& u) = 0;
};

using EvalPtr = std::unique_ptr<StepEval>;

EvalPtr build_eval(const detail::NodePtr& node);

class ToeplitzEval final : public StepEval {
 public:
  explicit ToeplitzEval(const detail::NodePtr& node)
      : node_(node), rep_(&std::get<ToeplitzRep>(node->rep)),
        history_(node->d_in, node->grid.n()) {
    if (rep_->anticausal && rep_->band > 1) {
      throw StructuralError("forward substitution requires a causal operator");
    }
    data_.diag = rep_->band > 0 ? rep_->blocks[0] : Matrix::Zero(node->d_out, node->d_in);
  }

  const StepData& begin(Index k) override {
    data_.past = Vector::Zero(node_->d_out);
    const Index mmax = std::min<Index>(k, rep_->band - 1);
    for (Index m = 1; m <= mmax; ++m) {
      data_.past.noalias() += rep_->blocks[static_cast<std::size_t>(m)] * history_.col(k - m);
    }
    return data_;
  }

  void commit(Index k, const Vector& u) override { history_.col(k) = u; }

 private:
  detail::NodePtr node_;
  const ToeplitzRep* rep_;
  Matrix history_;
  StepData data_;
};

class MultiplicationEval final : public StepEval {
 public:
  explicit MultiplicationEval(const detail::NodePtr& node)
      : node_(node), rep_(&std::get<MultiplicationRep>(node->rep)) {
    data_.past = Vector::Zero(node->d_out);
  }
  const StepData& begin(Index k) override {
    data_.diag = rep_->factors[static_cast<std::size_t>(k)];
    return data_;
  }
  void commit(Index, const Vector&) override {}

 private:
  detail::NodePtr node_;
  const MultiplicationRep* rep_;
  StepData data_;
};

class SpatialEval final : public StepEval {
 public:
  explicit SpatialEval(const detail::NodePtr& node) : node_(node) {
    data_.past = Vector::Zero(node->d_out);
    data_.diag = std::get<SpatialRep>(node->rep).a;
  }
  const StepData& begin(Index) override { return data_; }
  void commit(Index, const Vector&) override {}

 private:
  detail::NodePtr node_;
  StepData data_;
};

class SumEval final : public StepEval {
 public:
  SumEval(const detail::NodePtr& node, EvalPtr lhs, EvalPtr rhs)
      : node_(node), lhs_(std::move(lhs)), rhs_(std::move(rhs)) {}
  const StepData& begin(Index k) override {
    const StepData& a = lhs_->begin(k);
    const StepData& b = rhs_->begin(k);
    data_.past = a.past + b.past;
    data_.diag = a.diag + b.diag;
    return data_;
  }
  void commit(Index k, const Vector& u) override {
    lhs_->commit(k, u);
    rhs_->commit(k, u);
  }

 private:
  detail::NodePtr node_;
  EvalPtr lhs_, rhs_;
  StepData data_;
};

class ProductEval final : public StepEval {
 public:
  ProductEval(const detail::NodePtr& node, EvalPtr outer, EvalPtr inner)
      : node_(node), outer_(std::move(outer)), inner_(std::move(inner)) {}
  const StepData& begin(Index k) override {
    const StepData& in = inner_->begin(k);
    const StepData& out = outer_->begin(k);
    inner_past_ = in.past;
    inner_diag_ = in.diag;
    data_.past = out.past + out.diag * in.past;
    data_.diag = out.diag * in.diag;
    return data_;
  }
  void commit(Index k, const Vector& u) override {
    const Vector v = inner_diag_ * u + inner_past_;
    inner_->commit(k, u);
    outer_->commit(k, v);
  }

 private:
  detail::NodePtr node_;
  EvalPtr outer_, inner_;
  Vector inner_past_;
  Matrix inner_diag_;
  StepData data_;
};

class ScaleEval final : public StepEval {
 public:
  ScaleEval(const detail::NodePtr& node, EvalPtr base)
      : factor_(std::get<ScaleRep>(node->rep).factor), base_(std::move(base)) {}
  const StepData& begin(Index k) override {
    const StepData& b = base_->begin(k);
    data_.past = factor_ * b.past;
    data_.diag = factor_ * b.diag;
    return data_;
  }
  void commit(Index k, const Vector& u) override { base_->commit(k, u); }

 private:
  Complex factor_;
  EvalPtr base_;
  StepData data_;
};

EvalPtr build_eval(const detail::NodePtr& node) {
  return std::visit(
      [&](const auto& rep) -> EvalPtr {
        using R = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<R, ToeplitzRep>) {
          return std::make_unique<ToeplitzEval>(node);
        } else if constexpr (std::is_same_v<R, MultiplicationRep>) {
          return std::make_unique<MultiplicationEval>(node);
        } else if constexpr (std::is_same_v<R, SpatialRep>) {
          return std::make_unique<SpatialEval>(node);
        } else if constexpr (std::is_same_v<R, SumRep>) {
          return std::make_unique<SumEval>(node, build_eval(rep.lhs), build_eval(rep.rhs));
        } else if constexpr (std::is_same_v<R, ProductRep>) {
          return std::make_unique<ProductEval>(node, build_eval(rep.outer), build_eval(rep.inner));
        } else {
          static_assert(std::is_same_v<R, ScaleRep>);
          return std::make_unique<ScaleEval>(node, build_eval(rep.base));
        }
      },
      node->rep);
}

struct ForwardResult {
  Matrix u;
  double max_condition = 0.0;
};

ForwardResult forward_substitution(const CausalOperator& b, const Matrix& rhs) {
  if (!b.structurally_causal()) {
    throw StructuralError("forward substitution requires a causal operator");
  }
  const Index n = b.grid().n();
  const Index d = b.dim_out();
  if (b.dim_in() != d) throw ShapeError("forward substitution needs a square operator");
  if (d == 0) return ForwardResult{Matrix(0, n), 0.0};

  EvalPtr root = build_eval(b.node());
  ForwardResult result;
  result.u.resize(d, n);

  Eigen::FullPivLU<Matrix> lu;
  Matrix cached_diag;
  for (Index k = 0; k < n; ++k) {
    const StepData& step = root->begin(k);
    if (k == 0 || step.diag != cached_diag) {
      cached_diag = step.diag;
      lu.compute(cached_diag);
      if (!lu.isInvertible()) {
        throw DegenerateStepError(
            "singular diagonal block at time index " + std::to_string(k) +
                ": the discrete step is algebraically unsolvable",
            static_cast<std::size_t>(k));
      }
      const auto u_diag = lu.matrixLU().diagonal().cwiseAbs();
      const double cond = u_diag.maxCoeff() / u_diag.minCoeff();
      result.max_condition = std::max(result.max_condition, cond);
    }
    result.u.col(k) = lu.solve(Vector(rhs.col(k) - step.past));
    root->commit(k, result.u.col(k));
  }
  return result;
}

double relative_or_zero(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace

SolveReport solve_with_operator(const EvolutionaryProblem& p, const CausalOperator& b,
                                const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();

  ForwardResult fw = forward_substitution(b, p.source.values());
  Trajectory u(p.grid, std::move(fw.u));

  const double f_norm = weighted_norm(p.source, p.weight);
  const Trajectory residual = b.apply(u) - p.source;

  SolveReport report{std::move(u)};
  report.label = p.label;
  report.max_step_condition = fw.max_condition;
  report.residual_rel = relative_or_zero(weighted_norm(residual, p.weight), f_norm);
  report.norm_ratio = relative_or_zero(weighted_norm(report.u, p.weight), f_norm);

  report.causality_ok = b.structurally_causal();
  if (report.causality_ok && p.grid.n() * p.dim() <= options.causality_check_cap) {
    report.causality_ok = is_causal_structure(b, 0.0).causal;
  }

  if (options.compute_certificate) {
    report.certificate = certify_operator(b, p.weight, options.cutoff_samples, &p.law);
  } else {
    report.certificate.c = std::numeric_limits<double>::quiet_NaN();
    report.certificate.c_adjoint = report.certificate.c;
    report.certificate.norm_bound = report.certificate.c;
    report.certificate.nu = p.weight.nu();
  }

  report.wallclock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SolveReport solve(const EvolutionaryProblem& p, const SolveOptions& options) {
  return solve_with_operator(p, assemble(p), options);
}

Trajectory solve_dense_oracle(const EvolutionaryProblem& p, Index cap) {
  const Index size = p.grid.n() * p.dim();
  if (size > cap) throw CapExceededError("dense oracle cap exceeded");
  const Matrix b = assemble(p).materialize(std::max(cap, size));
  Eigen::VectorXcd rhs(size);
  for (Index k = 0; k < p.grid.n(); ++k) {
    rhs.segment(k * p.dim(), p.dim()) = p.source.values().col(k);
  }
  Eigen::PartialPivLU<Matrix> lu(b);
  const Eigen::VectorXcd x = lu.solve(rhs);
  Matrix u(p.dim(), p.grid.n());
  for (Index k = 0; k < p.grid.n(); ++k) {
    u.col(k) = x.segment(k * p.dim(), p.dim());
  }
  return Trajectory(p.grid, std::move(u));
}

Trajectory solve_regularized(const EvolutionaryProblem& p, double eps,
                             const SolveOptions& options) {
  if (eps < 0.0) throw ParameterError("regularization needs eps >= 0");
  SolveOptions opts = options;
  opts.compute_certificate = false;
  const SolveReport base = solve(p, opts);
  return yosida(p.grid, p.dim(), eps).apply(base.u);
}

std::vector<SolveReport> nu_sweep(const EvolutionaryProblem& p, const std::vector<double>& nus,
                                  const SolveOptions& options) {
  if (nus.empty()) throw ParameterError("nu sweep needs at least one weight");
  for (double nu : nus) {
    if (nu <= 0.0) throw ParameterError("nu = " + std::to_string(nu) + " refused: must be > 0");
    if (nu < p.law.min_nu) {
      throw ParameterError("nu = " + std::to_string(nu) + " refused: below min_nu = " +
                           std::to_string(p.law.min_nu) + " of law '" + p.law.label + "'");
    }
  }
  const CausalOperator b = assemble(p);
  std::vector<SolveReport> reports;
  reports.reserve(nus.size());
  for (double nu : nus) {
    EvolutionaryProblem q(p.grid, nu, p.law, p.spatial, p.source, p.label);
    reports.push_back(solve_with_operator(q, b, options));
  }
  return reports;
}

Certificate certify_problem(const EvolutionaryProblem& p, Index cutoff_count) {
  return certify_operator(assemble(p), p.weight, cutoff_count, &p.law);
}

}  // namespace evolv
