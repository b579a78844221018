#include "evolv/cli.hpp"

#include <cmath>
#include <numbers>
#include <filesystem>
#include <iostream>

#include "evolv/profile.hpp"
#include "evolv/scenario.hpp"

namespace evolv::cli {

namespace fs = std::filesystem;

namespace {

struct LoadedScenario {
  Scenario scenario;
  fs::path base_dir;  // directory for relative csv sources
};

LoadedScenario load(const Options& opts) {
  if (opts.scenario.empty()) throw SchemaError("no scenario given (use --scenario)");
  LoadedScenario out{load_scenario(opts.scenario), fs::path(".")};
  const fs::path p(opts.scenario);
  if (p.has_parent_path() && fs::exists(p)) out.base_dir = p.parent_path();
  if (!opts.nus.empty()) out.scenario.nus = opts.nus;
  return out;
}

void emit_verdict(const CheckResult& r, bool& all_pass) {
  std::cout << check_result_to_json(r).dump() << "\n";
  all_pass = all_pass && r.pass;
}

double primary_nu(const Scenario& s) { return s.nus.front(); }

// ---- heat manufactured-solution studies -----------------------------------
//
// Smooth startup with all derivatives vanishing at t = 0, so the zero
// history convention is met exactly.
double startup(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double startup_dot(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

struct HeatStudyPieces {
  GradDiv1D gd;
  Eigen::VectorXd sine;       // sin(pi x) at potential nodes
  Eigen::VectorXd lap_sine;   // discrete div grad of sine
  Eigen::VectorXd grad_sine;  // discrete grad of sine at flux nodes
};

HeatStudyPieces heat_pieces(Index points) {
  HeatStudyPieces p{make_grad_div_1d(points, "dirichlet", 1.0), {}, {}, {}};
  p.sine.resize(p.gd.n_potential);
  for (Index i = 0; i < p.gd.n_potential; ++i) {
    p.sine[i] = std::sin(std::numbers::pi * p.gd.potential_nodes[static_cast<std::size_t>(i)]);
  }
  p.grad_sine = p.gd.grad * p.sine;
  p.lap_sine = -p.gd.grad.transpose() * p.grad_sine;  // div grad
  return p;
}

}  // namespace

/// Temporal study: the manufactured solution is exact for the spatially
/// discrete system (theta* = s(t) sine, q* = -k s(t) grad sine with the
/// discrete gradient), so the measured error is the time-stepping error
/// alone.
ConvergenceReport heat_temporal_study(const HeatParams& params, Index halvings) {
  const HeatStudyPieces pieces = heat_pieces(params.points);
  const Index d = pieces.gd.n_potential + pieces.gd.n_flux;
  const double k_cond = params.conductivity;

  std::vector<double> hs, errors;
  Index n = 20;
  for (Index level = 0; level <= halvings; ++level, n *= 2) {
    const double h = params.t_end / static_cast<double>(n);
    Scenario s = heat1d_scenario(params);
    s.n = n;
    s.h = h;
    const TimeGrid grid = s.make_grid();

    Matrix f = Matrix::Zero(d, grid.n());
    Matrix exact = Matrix::Zero(d, grid.n());
    for (Index kk = 0; kk < grid.n(); ++kk) {
      const double t = grid.time(kk);
      const double st = startup(t);
      const double sdot = startup_dot(t);
      for (Index i = 0; i < pieces.gd.n_potential; ++i) {
        f(i, kk) = sdot * pieces.sine[i] - k_cond * st * pieces.lap_sine[i];
        exact(i, kk) = st * pieces.sine[i];
      }
      for (Index i = 0; i < pieces.gd.n_flux; ++i) {
        exact(pieces.gd.n_potential + i, kk) = -k_cond * st * pieces.grad_sine[i];
      }
    }

    EvolutionaryProblem problem(grid, params.nu, s.material.realize(grid),
                                s.spatial.realize(d), Trajectory(grid, f), "heat_mms_t");
    SolveOptions opts;
    opts.compute_certificate = false;
    opts.causality_check_cap = 0;
    const Trajectory u = solve(problem, opts).u;
    const Weight w(grid, params.nu);
    const Trajectory exact_traj(grid, exact);
    errors.push_back(weighted_norm(u - exact_traj, w) / weighted_norm(exact_traj, w));
    hs.push_back(h);
  }
  return make_convergence_report(std::move(hs), std::move(errors), 0.8);
}

/// Spatial study: continuum manufactured source at a fixed small time step,
/// error measured against the sampled continuum solution.
ConvergenceReport heat_spatial_study(const HeatParams& params, Index halvings) {
  const double k_cond = params.conductivity;
  const double t_end = 0.25;
  // Small enough that the time-stepping error stays below the finest
  // spatial error; the startup profile has violent early derivatives.
  const double h = 2.0e-5;
  const Index n = static_cast<Index>(std::llround(t_end / h));
  const double pi = std::numbers::pi;

  std::vector<double> dxs, errors;
  Index points = 3;
  for (Index level = 0; level <= halvings; ++level, points *= 2) {
    const HeatStudyPieces pieces = heat_pieces(points);
    const Index d = pieces.gd.n_potential + pieces.gd.n_flux;
    const TimeGrid grid(0.0, h, n);

    Matrix f = Matrix::Zero(d, grid.n());
    Matrix exact = Matrix::Zero(d, grid.n());
    for (Index kk = 0; kk < grid.n(); ++kk) {
      const double t = grid.time(kk);
      const double st = startup(t);
      const double sdot = startup_dot(t);
      for (Index i = 0; i < pieces.gd.n_potential; ++i) {
        const double x = pieces.gd.potential_nodes[static_cast<std::size_t>(i)];
        f(i, kk) = (sdot + k_cond * pi * pi * st) * std::sin(pi * x);
        exact(i, kk) = st * std::sin(pi * x);
      }
      for (Index i = 0; i < pieces.gd.n_flux; ++i) {
        const double x = pieces.gd.flux_nodes[static_cast<std::size_t>(i)];
        exact(pieces.gd.n_potential + i, kk) = -k_cond * st * pi * std::cos(pi * x);
      }
    }

    HeatParams local = params;
    local.points = points;
    local.n = n;
    local.t_end = t_end;
    Scenario s = heat1d_scenario(local);

    EvolutionaryProblem problem(grid, params.nu, s.material.realize(grid),
                                s.spatial.realize(d), Trajectory(grid, f), "heat_mms_x");
    SolveOptions opts;
    opts.compute_certificate = false;
    opts.causality_check_cap = 0;
    const Trajectory u = solve(problem, opts).u;
    const Weight w(grid, params.nu);
    const Trajectory exact_traj(grid, exact);
    errors.push_back(weighted_norm(u - exact_traj, w) / weighted_norm(exact_traj, w));
    dxs.push_back(pieces.gd.dx);
  }
  return make_convergence_report(std::move(dxs), std::move(errors), 1.8);
}

namespace {

/// Generic fallback: self-convergence against the finest grid at shared
/// time points.
ConvergenceReport generic_temporal_study(const Scenario& scenario, const fs::path& base_dir,
                                         Index halvings) {
  const double nu = primary_nu(scenario);
  std::vector<Trajectory> solutions;
  std::vector<double> hs;
  for (Index level = 0; level <= halvings + 1; ++level) {
    Scenario s = scenario;
    s.n = scenario.n << level;
    s.h = scenario.h / static_cast<double>(Index(1) << level);
    SolveOptions opts;
    opts.compute_certificate = false;
    opts.causality_check_cap = 0;
    solutions.push_back(solve(s.build_problem(nu, base_dir), opts).u);
    if (level <= halvings) hs.push_back(s.h);
  }
  const Trajectory& reference = solutions.back();
  const double ref_scale = std::max(reference.max_abs(), 1e-300);

  std::vector<double> errors;
  for (Index level = 0; level <= halvings; ++level) {
    const Trajectory& u = solutions[static_cast<std::size_t>(level)];
    const Index stride = Index(1) << (halvings + 1 - level);
    double worst = 0.0;
    for (Index k = 0; k < u.n(); ++k) {
      worst = std::max(worst, (u.values().col(k) - reference.values().col(k * stride))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    errors.push_back(worst / ref_scale);
  }
  return make_convergence_report(std::move(hs), std::move(errors), 0.8);
}

}  // namespace

int cmd_solve(const Options& opts) {
  const LoadedScenario loaded = load(opts);
  const Scenario& s = loaded.scenario;
  if (opts.dump_scenario) {
    std::cout << s.to_json().dump(2) << "\n";
    return kExitPass;
  }

  const EvolutionaryProblem problem = s.build_problem(primary_nu(s), loaded.base_dir);
  const SolveReport report = solve(problem);

  Json report_json = solve_report_to_json(report);
  if (s.nus.size() > 1) {
    const std::vector<SolveReport> sweep = nu_sweep(problem, s.nus);
    double worst = 0.0;
    Json certs = Json::array();
    const double scale = std::max(sweep.front().u.max_abs(), 1e-300);
    for (const SolveReport& r : sweep) {
      certs.push_back(certificate_to_json(r.certificate));
      worst = std::max(worst, (r.u - sweep.front().u).max_abs() / scale);
    }
    report_json["nu_sweep"] =
        Json{{"nus", s.nus}, {"max_rel_difference", worst}, {"certificates", std::move(certs)}};
  }

  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);
  write_trajectory_csv(out_dir / s.out_csv, report.u);
  write_json_atomic(out_dir / s.out_report, report_json);

  std::cout << "solve " << s.label << ": residual_rel=" << report.residual_rel
            << " c=" << report.certificate.c << " norm_ratio=" << report.norm_ratio << "\n";

  const bool ok = report.residual_ok(opts.tol) && report.norm_bound_ok();
  return ok ? kExitPass : kExitCheckFailed;
}

int cmd_certify(const Options& opts) {
  const LoadedScenario loaded = load(opts);
  const Scenario& s = loaded.scenario;
  if (opts.dump_scenario) {
    std::cout << s.to_json().dump(2) << "\n";
    return kExitPass;
  }

  const EvolutionaryProblem problem = s.build_problem(primary_nu(s), loaded.base_dir);
  const Certificate cert = certify_problem(problem);

  Json j;
  j["format"] = 1;
  j["label"] = s.label;
  j["certificate"] = certificate_to_json(cert);

  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);
  write_json_atomic(out_dir / (s.label + "_certificate.json"), j);

  std::cout << "certify " << s.label << ": c=" << cert.c << " (nu=" << cert.nu << ")"
            << (cert.certified() ? "" : "  [uncertified]") << "\n";
  return cert.certified() ? kExitPass : kExitCheckFailed;
}

int cmd_verify(const std::string& suite, const Options& opts) {
  bool all_pass = true;

  if (suite == "causality") {
    const Scenario s = load_scenario(opts.scenario.empty() ? "heat1d" : opts.scenario);
    const EvolutionaryProblem p = s.build_problem(primary_nu(s), ".");
    const double a = p.grid.time(p.grid.n() / 2);
    if (opts.anticausal) {
      const CausalityResult r = verify_causality(p, a, opts.seed, true);
      emit_verdict({"causality/anticausal-control", opts.seed, r.measured, r.threshold, r.pass},
                   all_pass);
    } else {
      for (std::uint64_t i = 0; i < 10; ++i) {
        const CausalityResult r = verify_causality(p, a, opts.seed + i);
        emit_verdict({"causality/tail-" + std::to_string(i), opts.seed + i, r.measured,
                      r.threshold, r.pass},
                     all_pass);
      }
    }
  } else if (suite == "nu-independence") {
    const Scenario s = load_scenario(opts.scenario.empty() ? "heat1d" : opts.scenario);
    const std::vector<double> nus = opts.nus.empty() ? std::vector<double>{1.0, 2.0, 4.0}
                                                     : opts.nus;
    const EvolutionaryProblem p = s.build_problem(nus.front(), ".");
    const double measured = verify_nu_independence(p, nus);
    emit_verdict({"nu-independence/" + s.label, opts.seed, measured, 1e-12, measured <= 1e-12},
                 all_pass);
  } else if (suite == "commutator") {
    for (std::uint64_t i = 0; i < 10; ++i) {
      const EvolutionaryProblem p = random_problem(opts.seed + i, 24, 2, ProblemKind::maria);
      for (double eps : {0.01, 0.1, 1.0}) {
        const double r = verify_commutator_identity(p.law, eps, p.weight);
        emit_verdict({"commutator/seed-" + std::to_string(opts.seed + i) + "/eps-" +
                          std::to_string(eps),
                      opts.seed + i, r, 1e-12, r <= 1e-12},
                     all_pass);
      }
    }
  } else if (suite == "adjoint") {
    const ConvergenceReport r =
        verify_adjoint_formula(0.5, 0.0, 8.0, {0.1, 0.05, 0.025, 0.0125, 0.00625});
    emit_verdict({"adjoint/order", opts.seed, r.observed_order, r.threshold, r.pass}, all_pass);
  } else if (suite == "yosida") {
    const TimeGrid g(0.0, 1.0 / 64.0, 512);
    const Weight w(g, 1.0);
    const ConvergenceReport r = verify_yosida_convergence(
        standard_bump(g, 1), w, {0.05, 0.025, 0.0125, 0.00625, 0.003125});
    emit_verdict({"yosida/order", opts.seed, r.observed_order, r.threshold, r.pass}, all_pass);

    const EvolutionaryProblem base = random_problem(opts.seed, 48, 2, ProblemKind::maria);
    const EvolutionaryProblem smooth(base.grid, base.weight.nu(), base.law, base.spatial,
                                     standard_bump(base.grid, base.dim()), "smooth");
    const ConvergenceReport drift = verify_regularized_solve_convergence(
        smooth, {0.05, 0.025, 0.0125, 0.00625, 0.003125});
    emit_verdict({"yosida/solve-drift", opts.seed, drift.observed_order, drift.threshold,
                  drift.pass},
                 all_pass);
  } else if (suite == "spectral") {
    const ConvergenceReport r =
        verify_spectral_representation(1.0, 0.0, 8.0, {0.1, 0.05, 0.025, 0.0125});
    emit_verdict({"spectral/order", opts.seed, r.observed_order, r.threshold, r.pass}, all_pass);
  } else if (suite == "oracle") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const ProblemKind kind = i % 2 == 0 ? ProblemKind::maria : ProblemKind::autonomous;
      const EvolutionaryProblem p =
          random_problem(opts.seed + i, 16 + static_cast<Index>(i % 5) * 8, 3, kind);
      SolveOptions sopts;
      sopts.compute_certificate = false;
      const Trajectory structured = solve(p, sopts).u;
      const Trajectory dense = solve_dense_oracle(p);
      const double rel = (structured - dense).max_abs() / std::max(dense.max_abs(), 1e-300);
      emit_verdict({"oracle/seed-" + std::to_string(opts.seed + i), opts.seed + i, rel, 1e-10,
                    rel <= 1e-10},
                   all_pass);
    }
  } else if (suite == "corpus") {
    for (std::uint64_t i = 0; i < 100; ++i) {
      const ProblemKind kind = i % 3 == 0   ? ProblemKind::autonomous
                               : i % 3 == 1 ? ProblemKind::maria
                                            : ProblemKind::tdide;
      const Index n = 16 + static_cast<Index>(i % 4) * 16;
      const Index d = 2 + static_cast<Index>(i % 5);
      const EvolutionaryProblem p = random_problem(opts.seed + i, n, d, kind);
      const SolveReport r = solve(p);
      const bool ok = r.certificate.certified() && r.residual_ok(1e-10) && r.norm_bound_ok();
      emit_verdict({"corpus/" + p.label, opts.seed + i,
                    std::max(r.residual_rel, r.norm_ratio - 1.0 / std::max(r.certificate.c, 1e-300)),
                    1e-10, ok},
                   all_pass);
    }
  } else {
    throw SchemaError("unknown verify suite '" + suite + "'");
  }

  return all_pass ? kExitPass : kExitCheckFailed;
}

int cmd_convergence(const Options& opts) {
  const LoadedScenario loaded = load(opts);
  const Scenario& s = loaded.scenario;
  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);

  bool all_pass = true;
  auto run_study = [&](const std::string& name, const ConvergenceReport& report) {
    write_json_atomic(out_dir / (s.label + "_convergence_" + name + ".json"),
                      convergence_report_to_json(name, report));
    std::cout << "convergence " << s.label << "/" << name << ": order=" << report.observed_order
              << " threshold=" << report.threshold << (report.pass ? " pass" : " FAIL") << "\n";
    all_pass = all_pass && report.pass;
  };

  if (s.label == "heat1d") {
    HeatParams params;
    params.nu = primary_nu(s);
    if (opts.mode == "temporal" || opts.mode == "both") {
      run_study("temporal", heat_temporal_study(params, opts.halvings));
    }
    if (opts.mode == "spatial" || opts.mode == "both") {
      run_study("spatial", heat_spatial_study(params, std::min<Index>(opts.halvings, 3)));
    }
  } else {
    run_study("temporal", generic_temporal_study(s, loaded.base_dir, opts.halvings));
  }
  return all_pass ? kExitPass : kExitCheckFailed;
}

int cmd_examples(const Options& opts, const std::string& name) {
  if (name.empty()) {
    for (const std::string& example : named_example_list()) std::cout << example << "\n";
    return kExitPass;
  }
  const Scenario s = named_example(name);
  if (opts.dump_scenario) {
    std::cout << s.to_json().dump(2) << "\n";
  } else {
    std::cout << s.label << ": state_dim=" << s.state_dim << " n=" << s.n << " h=" << s.h
              << " nu=" << primary_nu(s) << "\n";
  }
  return kExitPass;
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const SchemaError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InvalidGridError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ParameterError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ShapeError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const DegenerateStepError& e) {
    std::cerr << "degenerate step: " << e.what() << "\n";
    return kExitDegenerateStep;
  } catch (const Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumericError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumericError;
  }
}

}  // namespace evolv::cli
