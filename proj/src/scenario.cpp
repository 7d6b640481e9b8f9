#include "gldual/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "gldual/optcrit.hpp"
#include "gldual/proxdual.hpp"
#include "gldual/tensordual.hpp"

namespace gldual {

namespace {

constexpr double kGapTol = 1e-9;
constexpr double kDualGradTol = 1e-8;
constexpr double kNestedTol = 5e-3;
constexpr double kJ8Tol = 1e-3;
constexpr double kCriticalTol = 1e-8;

CriticalPoint solve_point(const Scenario& s, const Grid& grid) {
    return newton(s.params, grid, initial_guess(s, grid), s.tol, s.maxit);
}

void echo_point(Report& r, const CriticalPoint& cp, const ModelParams& params, const Grid& grid) {
    r.scalar("J", energy_J(params, grid, cp.u0));
    r.scalar("grad_norm", cp.residual_norm);
    r.scalar("min_eig_hess", cp.min_eig_hess);
    r.scalar("max_eig_hess", cp.max_eig_hess);
    r.scalar("newton_iterations", cp.iterations);
    r.label("classification", std::string(to_string(cp.classification)));
}

void curvature_table(Report& r, const std::vector<CurvatureRow>& rows, const std::string& kind) {
    for (const CurvatureRow& row : rows) {
        r.table.add_row({kind, static_cast<double>(row.direction), row.finite_difference, row.predicted,
                         row.rel_mismatch, row.slope});
    }
}

double worst_mismatch(const std::vector<CurvatureRow>& rows) {
    double worst = 0.0;
    for (const CurvatureRow& row : rows) worst = std::max(worst, row.rel_mismatch);
    return worst;
}

void run_solve_primal(const Scenario& s, const Grid& grid, Report& r) {
    const CriticalPoint cp = solve_point(s, grid);
    echo_point(r, cp, s.params, grid);
    r.scalar("convexity_K", convexity_K(s.params, grid, cp.u0));
    r.check("critical_point", s.tol - cp.residual_norm);
    r.table.columns = {"node", "x", "u"};
    for (std::size_t i = 0; i < cp.u0.size(); ++i) {
        r.table.add_row({static_cast<double>(i), grid.coordinate(i, 0), cp.u0[i]});
    }
}

void thm1_verdicts(const Thm1Result& t, Report& r) {
    r.scalar("Jstar", t.Jstar);
    r.scalar("gap", t.gap);
    r.scalar("dual_grad_norm", t.dual_grad_norm);
    r.scalar("bstar_margin", t.bstar_margin);
    r.check("in_Bstar", t.bstar_margin - kMatrixMargin);
    if (!t.in_bstar) return;
    r.check("zero_gap", kGapTol * (1.0 + std::abs(t.J)) - t.gap);
    r.check("dual_stationarity", kDualGradTol - t.dual_grad_norm);
    if (!t.nested_rows.empty()) {
        r.scalar("nested_value", t.nested_value);
        r.label("nested_interior", t.nested_interior ? "true" : "false");
        r.check("nested_curvature", kNestedTol - worst_mismatch(t.nested_rows));
        r.check("j8_pp_curvature", kJ8Tol - worst_mismatch(t.j8_pp_rows));
    }
}

void run_thm1(const Scenario& s, const Grid& grid, Report& r) {
    const CriticalPoint cp = solve_point(s, grid);
    echo_point(r, cp, s.params, grid);
    Thm1Options opts;
    opts.ndirs = s.ndirs;
    opts.seed = s.seed;
    opts.radius = s.radius.value_or(0.0);
    const Thm1Result t = verify_thm1(s.params, grid, cp.u0, opts);
    thm1_verdicts(t, r);
    r.table.columns = {"check", "direction", "finite_difference", "predicted", "rel_mismatch", "slope"};
    curvature_table(r, t.nested_rows, cp.classification == Classification::LocalMax ? "J5" : "J3");
    curvature_table(r, t.j8_pp_rows, "J8_pp");
}

void run_thm2(const Scenario& s, const Grid& grid, Report& r) {
    const Thm2Result t = verify_thm2(s.params, grid, s.nsamples, s.nsamples, s.seed);
    r.scalar("hypothesis_margin", t.hypothesis_margin);
    r.scalar("best_over_U", t.best_over_U);
    r.scalar("best_over_Aplus", t.best_over_Aplus);
    r.scalar("sign_align_samples", t.sign_align_samples);
    r.scalar("max_sign_align_increase", t.max_sign_align_increase);
    r.scalar("probe_pairs", t.probe.pairs);
    r.scalar("probe_combinations", t.probe.combinations);
    r.scalar("probe_passes", t.probe.passes);
    r.scalar("probe_rejected_samples", t.probe.rejected_samples);
    r.scalar("h_equivalence_checked", t.probe.h_equivalence_checked);
    r.scalar("h_equivalence_mismatches", t.probe.h_equivalence_mismatches);
    r.check("sign_align_monotone", 1e-12 - t.max_sign_align_increase);
    r.table.columns = {"counterexample", "lambda", "min_eig_hess", "u1", "u2"};
    for (std::size_t k = 0; k < t.probe.counterexamples.size(); ++k) {
        const ConvexityCounterexample& c = t.probe.counterexamples[k];
        auto join = [](const Field& f) {
            std::string out;
            for (std::size_t i = 0; i < f.size(); ++i) out += (i ? " " : "") + format_double(f[i]);
            return out;
        };
        r.table.add_row({static_cast<double>(k), c.lambda, c.min_eig_hess, join(c.u1), join(c.u2)});
    }
}

void run_thm3(const Scenario& s, const Grid& grid, Report& r) {
    const CriticalPoint cp = solve_point(s, grid);
    echo_point(r, cp, s.params, grid);
    const Thm3Result t = verify_thm3(s.params, grid, cp.u0, s.nsamples, s.seed);
    r.scalar("Jstar", t.Jstar);
    r.scalar("gap", t.gap);
    r.scalar("best_primal", t.best_primal);
    r.scalar("weak_duality_samples", t.weak_duality_samples);
    r.scalar("min_weak_duality_margin", t.min_weak_duality_margin);
    r.scalar("max_sign_align_increase", t.max_sign_align_increase);
    r.label("in_Aplus", t.membership.in_Aplus ? "true" : "false");
    r.label("in_Bplus", t.membership.in_Bplus ? "true" : "false");
    r.check("zero_gap", 1e-7 - t.gap);
    r.check("weak_duality", t.min_weak_duality_margin + 1e-8);
    r.check("global_minimum", 1e-8 * (1.0 + std::abs(t.J)) - (t.J - t.best_primal));
}

void run_thm4(const Scenario& s, const Grid& grid, Report& r) {
    const KMat km{s.params.K, s.params.K12};
    Thm4Options opts;
    opts.tol = std::min(s.tol, 1e-8);
    opts.maxit = s.maxit;
    opts.ndirs = s.ndirs;
    opts.nstarts = s.nstarts;
    opts.seed = s.seed;
    const Thm4Result t = verify_thm4(s.params, grid, km, std::nullopt, opts);
    const Field& u0 = t.saddle.u0;
    const double grad = grad_J(s.params, grid, u0).norm2();
    r.scalar("J", t.J);
    r.scalar("Jstar", t.Jstar);
    r.scalar("gap", t.gap);
    r.scalar("saddle_residual", t.saddle.residual);
    r.scalar("saddle_iterations", t.saddle.iterations);
    r.scalar("primal_grad_norm", grad);
    r.scalar("dual_grad_norm", t.grad_norm);
    r.scalar("cstar_min_eig", t.cstar_min_eig);
    r.scalar("diag_equality_error", t.diag_equality_error);
    r.scalar("best_in_uhat", t.best_in_uhat);
    r.scalar("min_vstar_curvature", t.min_vstar_curvature);
    r.scalar("max_v0_curvature", t.max_v0_curvature);
    r.label("K_dominant", t.k_dominant ? "true" : "false");
    r.label("used_fallback", t.saddle.used_fallback ? "true" : "false");
    r.check("saddle_residual", 1e-8 - t.saddle.residual);
    r.check("primal_critical", 1e-6 - grad);
    r.check("zero_gap", 1e-6 - std::abs(t.gap));
    r.check("in_Dstar", t.saddle.in_dstar ? 0.0 : -1.0, "membership flag");
    r.check("in_Bstar_t", 0.25 * km.K12 - std::max({t.saddle.t.s11.norm_inf(), t.saddle.t.s12.norm_inf(),
                                                   t.saddle.t.s22.norm_inf()}));
    r.check("in_Cstar", t.cstar_min_eig - kMatrixMargin);
    r.check("in_Uhat", std::pow(km.K, 0.25) - w1inf_norm(grid, u0));
    r.check("diag_equality", 1e-8 - t.diag_equality_error);
    r.check("convex_in_vstar", t.min_vstar_curvature + 1e-6);
    r.check("concave_in_v0star", 1e-6 - t.max_v0_curvature);
    r.check("global_in_uhat", 1e-8 * (1.0 + std::abs(t.J)) - (t.J - t.best_in_uhat));
}

void run_naive(const Scenario& s, const Grid& grid, Report& r) {
    const CriticalPoint cp = solve_point(s, grid);
    echo_point(r, cp, s.params, grid);
    const NaiveDualDiagnosis d = naive_dual_curvature(s.params, grid, cp.u0);
    r.scalar("naive_min_eig", d.min_eig);
    r.scalar("naive_max_eig", d.max_eig);
    r.scalar("convexity_K", convexity_K(s.params, grid, cp.u0));
    r.label("naive_definiteness", std::string(to_string(d.definiteness)));
    r.check("critical_point", kCriticalTol - cp.residual_norm);
}

struct SweepRow {
    double value = 0.0;
    Thm1Result result;
    std::string error;
};

void run_sweep(const Scenario& s, const Grid& grid, Report& r) {
    // The critical point does not depend on K or eps, so it is solved once.
    const CriticalPoint cp = solve_point(s, grid);
    echo_point(r, cp, s.params, grid);

    std::vector<SweepRow> rows(s.sweep_values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            ModelParams p = s.params;
            (s.sweep_param == "K" ? p.K : p.eps) = s.sweep_values[i];
            rows[i].value = s.sweep_values[i];
            Thm1Options opts;
            opts.ndirs = 0;
            opts.seed = s.seed;
            try {
                rows[i].result = verify_thm1(p, grid, cp.u0, opts);
            } catch (const Error& e) {
                rows[i].error = e.what();
            }
        }
    };
    const unsigned n = std::min<unsigned>(worker_threads(), static_cast<unsigned>(rows.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();

    r.table.columns = {s.sweep_param, "in_Bstar", "bstar_margin", "J", "Jstar", "gap", "dual_grad_norm"};
    for (const SweepRow& row : rows) {
        const std::string name = s.sweep_param + "=" + format_double(row.value);
        if (!row.error.empty()) {
            r.fail(name, row.error);
            continue;
        }
        const Thm1Result& t = row.result;
        const double nan = std::nan("");
        r.table.add_row({row.value, t.in_bstar ? "true" : "false", t.bstar_margin, t.J,
                         t.in_bstar ? t.Jstar : nan, t.in_bstar ? t.gap : nan,
                         t.in_bstar ? t.dual_grad_norm : nan});
        if (t.in_bstar) r.check(name + " zero_gap", kGapTol * (1.0 + std::abs(t.J)) - t.gap);
    }
}

}  // namespace

unsigned worker_threads() {
    if (const char* env = std::getenv("GLDUAL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(std::min(v, 256L));
    }
    return 1;
}

Report run_scenario(const Scenario& s) {
    Report r;
    r.scenario = describe(s);
    try {
        const Grid grid = build_grid(s.grid);
        validate(s.params, grid);
        switch (s.task) {
            case Task::SolvePrimal: run_solve_primal(s, grid, r); break;
            case Task::VerifyThm1: run_thm1(s, grid, r); break;
            case Task::VerifyThm2: run_thm2(s, grid, r); break;
            case Task::VerifyThm3: run_thm3(s, grid, r); break;
            case Task::VerifyThm4: run_thm4(s, grid, r); break;
            case Task::NaiveDualDiag: run_naive(s, grid, r); break;
            case Task::Sweep: run_sweep(s, grid, r); break;
        }
    } catch (const Error& e) {
        r.fail(std::string(to_string(e.kind())), e.what());
    }
    return r;
}

}  // namespace gldual
