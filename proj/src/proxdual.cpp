#include "gldual/proxdual.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace gldual {

namespace {

constexpr std::size_t kDenseLimit = 2000;
constexpr int kMaxHalvings = 40;

Eigen::MatrixXd dense_dual_operator(const ModelParams& params, const Grid& grid, const Field& v0) {
    return dual_operator(params, grid, v0).to_dense();
}

/// Cholesky of A - (K/2 + margin) I succeeds exactly when v0 is inside B*.
bool dense_in_bstar(const ModelParams& params, const Eigen::MatrixXd& a) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() -= 0.5 * params.K + kMatrixMargin;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    return llt.info() == Eigen::Success;
}

double neg_gstar_part(const ModelParams& params, const Grid& grid, const Field& w, const Field& z,
                      const Field& v0) {
    double quad = 0.0;
    double sq = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        quad += w[i] * z[i];
        sq += v0[i] * v0[i];
        lin += v0[i];
    }
    const double wgt = grid.quadrature_weight();
    return -(0.5 * wgt * quad + wgt * sq / (2.0 * params.alpha) + params.beta * wgt * lin);
}

Field stationarity(const ModelParams& params, const Field& z, const Field& v0) {
    Field g(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) g[i] = z[i] * z[i] - v0[i] / params.alpha - params.beta;
    return g;
}

SupV0Result sup_v0_fixed_point(const ModelParams& params, const Grid& grid, const Field& vstar,
                               const Field& p, Field v, const NestedOptions& opts) {
    const Field w = vstar + params.K * p;
    const double tail = eval_Fstar(params, grid, vstar) + eval_H(params, grid, p);
    double relax = 0.5;
    for (int it = 0; it < 50 * opts.maxit; ++it) {
        const Field z = solve_spd(dual_operator(params, grid, v), w, 1e-13);
        const Field g = stationarity(params, z, v);
        if (g.norm2() <= opts.tol) {
            return {v, z, neg_gstar_part(params, grid, w, z, v) + tail, it};
        }
        Field target(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) target[i] = params.alpha * (z[i] * z[i] - params.beta);
        bool moved = false;
        for (int k = 0; k < kMaxHalvings && !moved; ++k, relax *= 0.5) {
            Field trial = v + relax * (target - v);
            if (in_Bstar(params, grid, trial)) {
                v = std::move(trial);
                moved = true;
            }
        }
        if (!moved) throw Error(ErrorKind::LeftBstar, "fixed-point iterate cannot stay in B*");
        relax = std::min(0.5, 2.0 * relax);
    }
    throw NoConvergence("sup_v0 fixed point did not converge", v.values(), 0.0);
}

Field project_ball(const BallSpec& ball, const Field& p) {
    const Field d = p - ball.center;
    const double n = d.norm2();
    if (n <= ball.radius) return p;
    return ball.center + (ball.radius / n) * d;
}

NestedResult nested_p_opt(const ModelParams& params, const Grid& grid, const Field& vstar,
                          const BallSpec& ball, const NestedOptions& opts, bool maximize) {
    grid.check(vstar);
    grid.check(ball.center);
    if (!(ball.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be positive");
    const double sense = maximize ? -1.0 : 1.0;  // minimise sense * value
    const Eigen::MatrixXd lap = neg_laplacian(params, grid).to_dense();
    const auto n = static_cast<Eigen::Index>(vstar.size());

    Field p = ball.center;
    SupV0Result inner = sup_v0(params, grid, vstar, p, opts);
    auto p_gradient = [&](const Field& pp, const SupV0Result& r) { return params.K * (pp - r.z); };
    // Projected-gradient measure with step 1/K.
    auto pg_norm = [&](const Field& pp, const Field& g) {
        const double s = 1.0 / params.K;
        const Field moved = project_ball(ball, pp - (sense * s) * g);
        return ((pp - moved) * (1.0 / s)).norm2();
    };

    // The p-gradient carries a factor K, so the stopping test scales with it.
    const double tol = opts.tol * (1.0 + params.K * (1.0 + ball.center.norm_inf() + ball.radius));

    NestedResult out;
    int it = 0;
    for (; it < opts.maxit; ++it) {
        const Field g = p_gradient(p, inner);
        const double measure = pg_norm(p, g);
        if (measure <= tol) break;

        Eigen::MatrixXd m = lap;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            m(i, i) += 2.0 * inner.v0star[ii] + 4.0 * params.alpha * inner.z[ii] * inner.z[ii] +
                       params.K + params.eps;
        }
        Eigen::MatrixXd hp = -params.K * params.K * m.inverse();
        hp.diagonal().array() += params.K;
        Eigen::VectorXd dir = hp.fullPivLu().solve(-to_eigen(g));
        const double along = sense * dir.dot(to_eigen(g));
        if (!dir.allFinite() || !(along < 0.0)) dir = -sense * to_eigen(g) / params.K;
        // On the sphere the projected Newton step can point uphill, so the
        // projected gradient step is tried second.
        const Field candidates[] = {to_field(dir), (-sense / params.K) * g};

        bool accepted = false;
        for (const Field& d : candidates) {
            double step = 1.0;
            for (int k = 0; k < kMaxHalvings && !accepted; ++k, step *= 0.5) {
                Field trial = project_ball(ball, p + step * d);
                SupV0Result tr;
                try {
                    tr = sup_v0_from(params, grid, vstar, trial, inner.v0star, opts);
                } catch (const Error&) {
                    continue;
                }
                const double improve = sense * (inner.value - tr.value);
                const bool flat = improve >= -1e-15 * std::max(1.0, std::abs(inner.value)) &&
                                  pg_norm(trial, p_gradient(trial, tr)) < (1.0 - 1e-4) * measure;
                if (improve > 0.0 || flat) {
                    p = std::move(trial);
                    inner = std::move(tr);
                    accepted = true;
                }
            }
            if (accepted) break;
        }
        if (!accepted) {
            if (measure <= 1e3 * tol) break;
            throw NoConvergence("nested p-optimisation stalled", p.values(), measure);
        }
    }
    if (it >= opts.maxit) {
        const double measure = pg_norm(p, p_gradient(p, inner));
        if (measure > 1e3 * tol) {
            throw NoConvergence("nested p-optimisation hit iteration cap", p.values(), measure);
        }
    }
    out.value = inner.value;
    out.interior = (p - ball.center).norm2() < ball.radius * (1.0 - 1e-9);
    out.p = std::move(p);
    out.v0star = std::move(inner.v0star);
    out.iterations = it;
    return out;
}

Eigen::VectorXd unit_direction(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = normal(rng);
    return d.normalized();
}

}  // namespace

double default_radius(const Field& center) { return 0.25 * (1.0 + center.norm2()); }

DualTriple build_dual_triple(const ModelParams& params, const Grid& grid, const Field& u0) {
    grid.check(u0);
    grid.check(params.f);
    DualTriple t{Field(u0.size()), Field(u0.size()), u0};
    for (std::size_t i = 0; i < u0.size(); ++i) {
        t.v0star[i] = params.alpha * (u0[i] * u0[i] - params.beta);
        t.vstar[i] = params.eps * u0[i] + params.f[i];
    }
    return t;
}

SymOp dual_operator(const ModelParams& params, const Grid& grid, const Field& v0star) {
    grid.check(v0star);
    return add_diag(neg_laplacian(params, grid), 2.0 * v0star + Field(v0star.size(), params.K + params.eps));
}

double bstar_margin(const ModelParams& params, const Grid& grid, const Field& v0star) {
    return min_eig(dual_operator(params, grid, v0star)) - 0.5 * params.K;
}

bool in_Bstar(const ModelParams& params, const Grid& grid, const Field& v0star) {
    return matrix_gt(dual_operator(params, grid, v0star), 0.5 * params.K);
}

double eval_Gstar(const ModelParams& params, const Grid& grid, const DualTriple& t) {
    grid.check(t.vstar);
    grid.check(t.p);
    if (!in_Bstar(params, grid, t.v0star)) {
        throw Error(ErrorKind::NotInBstar, "v0* violates A(v0*) > K/2");
    }
    const Field w = t.vstar + params.K * t.p;
    const Field z = solve_spd(dual_operator(params, grid, t.v0star), w, 1e-14);
    return 0.5 * inner(grid, z, w) + integrate(grid, hadamard(t.v0star, t.v0star)) / (2.0 * params.alpha) +
           params.beta * integrate(grid, t.v0star);
}

double eval_Fstar(const ModelParams& params, const Grid& grid, const Field& vstar) {
    const Field d = vstar - params.f;
    return inner(grid, d, d) / (2.0 * params.eps);
}

double eval_H(const ModelParams& params, const Grid& grid, const Field& p) {
    return 0.5 * params.K * inner(grid, p, p);
}

double eval_Jstar(const ModelParams& params, const Grid& grid, const DualTriple& t) {
    return -eval_Gstar(params, grid, t) + eval_Fstar(params, grid, t.vstar) + eval_H(params, grid, t.p);
}

double DualGradient::norm() const {
    const double a = d_vstar.norm2();
    const double b = d_v0star.norm2();
    const double c = d_p.norm2();
    return std::sqrt(a * a + b * b + c * c);
}

DualGradient grad_Jstar(const ModelParams& params, const Grid& grid, const DualTriple& t) {
    if (!in_Bstar(params, grid, t.v0star)) {
        throw Error(ErrorKind::NotInBstar, "v0* violates A(v0*) > K/2");
    }
    const Field w = t.vstar + params.K * t.p;
    const Field z = solve_spd(dual_operator(params, grid, t.v0star), w, 1e-14);
    DualGradient g{Field(z.size()), Field(z.size()), Field(z.size())};
    for (std::size_t i = 0; i < z.size(); ++i) {
        g.d_vstar[i] = (t.vstar[i] - params.f[i]) / params.eps - z[i];
        g.d_v0star[i] = z[i] * z[i] - t.v0star[i] / params.alpha - params.beta;
        g.d_p[i] = params.K * t.p[i] - params.K * z[i];
    }
    return g;
}

SupV0Result sup_v0(const ModelParams& params, const Grid& grid, const Field& vstar, const Field& p,
                   const NestedOptions& opts) {
    grid.check(vstar);
    grid.check(p);
    // Start from the well multiplier of the v0* = 0 response when it is
    // feasible; v0* = 0 itself always lies in B* since L > 0.
    const Field zero = grid.zeros();
    const Field z0 = solve_spd(dual_operator(params, grid, zero), vstar + params.K * p, 1e-13);
    Field start(z0.size());
    for (std::size_t i = 0; i < z0.size(); ++i) start[i] = params.alpha * (z0[i] * z0[i] - params.beta);
    if (!in_Bstar(params, grid, start)) start = zero;
    return sup_v0_from(params, grid, vstar, p, start, opts);
}

SupV0Result sup_v0_from(const ModelParams& params, const Grid& grid, const Field& vstar,
                        const Field& p, const Field& v0_start, const NestedOptions& opts) {
    grid.check(vstar);
    grid.check(p);
    grid.check(v0_start);
    if (vstar.size() > kDenseLimit) return sup_v0_fixed_point(params, grid, vstar, p, v0_start, opts);

    const Field w = vstar + params.K * p;
    const Eigen::VectorXd wv = to_eigen(w);
    const double tail = eval_Fstar(params, grid, vstar) + eval_H(params, grid, p);
    const auto n = static_cast<Eigen::Index>(w.size());
    const double wgt = grid.quadrature_weight();

    struct State {
        Field v;
        Field z;
        Field g;
        double value;
        Eigen::MatrixXd a;
    };
    auto evaluate = [&](Field v) -> std::optional<State> {
        Eigen::MatrixXd a = dense_dual_operator(params, grid, v);
        if (!dense_in_bstar(params, a)) return std::nullopt;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        Eigen::VectorXd zv = llt.solve(wv);
        zv += llt.solve(wv - a * zv);
        Field z = to_field(zv);
        Field g = stationarity(params, z, v);
        const double value = neg_gstar_part(params, grid, w, z, v) + tail;
        return State{std::move(v), std::move(z), std::move(g), value, std::move(a)};
    };

    std::optional<State> cur = evaluate(v0_start);
    if (!cur) throw Error(ErrorKind::LeftBstar, "starting v0* is outside B*");

    // The gradient z^2 - v/alpha - beta cancels terms of size beta + max z^2.
    auto tolerance = [&](const State& s) {
        return opts.tol * (1.0 + params.beta + s.z.norm_inf() * s.z.norm_inf());
    };

    for (int it = 0; it < opts.maxit; ++it) {
        const double gnorm = cur->g.norm2();
        const double tol = tolerance(*cur);
        if (gnorm <= tol) return {cur->v, cur->z, cur->value, it};

        // -Hessian = 1/alpha + 4 diag(z) A^{-1} diag(z), positive definite.
        Eigen::MatrixXd ainv = cur->a.llt().solve(Eigen::MatrixXd::Identity(n, n));
        const Eigen::VectorXd zv = to_eigen(cur->z);
        Eigen::MatrixXd neg_hess = 4.0 * zv.asDiagonal() * ainv * zv.asDiagonal();
        neg_hess.diagonal().array() += 1.0 / params.alpha;
        const Field d = to_field(neg_hess.llt().solve(to_eigen(cur->g)));
        const double slope = wgt * dot(cur->g, d);

        double step = 1.0;
        bool accepted = false;
        bool left = false;
        for (int k = 0; k < kMaxHalvings; ++k, step *= 0.5) {
            std::optional<State> trial = evaluate(cur->v + step * d);
            if (!trial) {
                left = true;
                continue;
            }
            const bool armijo = trial->value >= cur->value + 1e-4 * step * slope;
            // Near the maximiser the value change drowns in rounding; a
            // shrinking gradient is then the reliable signal.
            const bool flat = trial->value >= cur->value - 1e-10 * (1.0 + std::abs(cur->value)) &&
                              trial->g.norm2() < (1.0 - 1e-4 * step) * gnorm;
            if (armijo || flat) {
                cur = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (gnorm <= 1e3 * tol) return {cur->v, cur->z, cur->value, it};
            if (left) throw Error(ErrorKind::LeftBstar, "sup over v0* runs into the boundary of B*");
            throw NoConvergence("sup_v0 line search failed", cur->v.values(), gnorm);
        }
    }
    if (cur->g.norm2() <= 1e3 * tolerance(*cur)) return {cur->v, cur->z, cur->value, opts.maxit};
    throw NoConvergence("sup_v0 hit iteration cap", cur->v.values(), cur->g.norm2());
}

NestedResult eval_J3(const ModelParams& params, const Grid& grid, const Field& vstar,
                     const BallSpec& ball, const NestedOptions& opts) {
    return nested_p_opt(params, grid, vstar, ball, opts, false);
}

NestedResult eval_J5(const ModelParams& params, const Grid& grid, const Field& vstar,
                     const BallSpec& ball, const NestedOptions& opts) {
    return nested_p_opt(params, grid, vstar, ball, opts, true);
}

std::vector<CurvatureRow> d2_J3_check(const ModelParams& params, const Grid& grid, const Field& u0,
                                      int ndirs, std::uint64_t seed, bool use_sup, double radius) {
    const DualTriple t = build_dual_triple(params, grid, u0);
    if (!in_Bstar(params, grid, t.v0star)) throw Error(ErrorKind::NotInBstar, "triple outside B*");
    const BallSpec ball{t.p, radius > 0.0 ? radius : default_radius(t.p)};
    const auto n = static_cast<Eigen::Index>(u0.size());

    Eigen::MatrixXd shifted = hess_J(params, grid, u0).to_dense();
    shifted.diagonal().array() += params.eps;
    Eigen::MatrixXd form = -shifted.inverse();
    form.diagonal().array() += 1.0 / params.eps;

    auto value = [&](const Field& v) {
        return use_sup ? eval_J5(params, grid, v, ball).value : eval_J3(params, grid, v, ball).value;
    };
    const double step = 1e-4 * (1.0 + t.vstar.norm2());
    const double centre = value(t.vstar);

    std::mt19937_64 rng(seed);
    std::vector<CurvatureRow> rows;
    for (int k = 0; k < ndirs; ++k) {
        const Eigen::VectorXd dv = unit_direction(rng, n);
        const Field d = to_field(dv);
        const double plus = value(t.vstar + step * d);
        const double minus = value(t.vstar - step * d);
        CurvatureRow row;
        row.direction = k;
        row.finite_difference = (plus - 2.0 * centre + minus) / (step * step);
        row.predicted = grid.quadrature_weight() * dv.dot(form * dv);
        row.rel_mismatch = std::abs(row.finite_difference - row.predicted) / std::abs(row.predicted);
        row.slope = (plus - minus) / (2.0 * step);
        rows.push_back(row);
    }
    return rows;
}

std::vector<CurvatureRow> d2_J8_p_check(const ModelParams& params, const Grid& grid,
                                        const Field& u0, int ndirs, std::uint64_t seed) {
    const DualTriple t = build_dual_triple(params, grid, u0);
    if (!in_Bstar(params, grid, t.v0star)) throw Error(ErrorKind::NotInBstar, "triple outside B*");
    const auto n = static_cast<Eigen::Index>(u0.size());

    const Eigen::MatrixXd h = hess_J(params, grid, u0).to_dense();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd form = params.K * (h + params.eps * id) * (h + (params.K + params.eps) * id).inverse();

    auto value = [&](const Field& p) { return sup_v0_from(params, grid, t.vstar, p, t.v0star).value; };
    const double step = 1e-4 * (1.0 + t.p.norm2());
    const double centre = value(t.p);

    std::mt19937_64 rng(seed + 1);
    std::vector<CurvatureRow> rows;
    for (int k = 0; k < ndirs; ++k) {
        const Eigen::VectorXd dv = unit_direction(rng, n);
        const Field d = to_field(dv);
        const double plus = value(t.p + step * d);
        const double minus = value(t.p - step * d);
        CurvatureRow row;
        row.direction = k;
        row.finite_difference = (plus - 2.0 * centre + minus) / (step * step);
        row.predicted = grid.quadrature_weight() * dv.dot(form * dv);
        row.rel_mismatch = std::abs(row.finite_difference - row.predicted) / std::abs(row.predicted);
        row.slope = (plus - minus) / (2.0 * step);
        rows.push_back(row);
    }
    return rows;
}

std::string_view to_string(Definiteness d) {
    switch (d) {
    case Definiteness::PositiveDefinite: return "PositiveDefinite";
    case Definiteness::NegativeDefinite: return "NegativeDefinite";
    case Definiteness::Indefinite: return "Indefinite";
    case Definiteness::Degenerate: return "Degenerate";
    }
    return "Unknown";
}

NaiveDualDiagnosis naive_dual_curvature(const ModelParams& params, const Grid& grid, const Field& u) {
    grid.check(u);
    Field shift(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        shift[i] = 2.0 * params.alpha * (u[i] * u[i] - params.beta) - params.eps;
    }
    const Extremes e = extremal_eigs(add_diag(neg_laplacian(params, grid), shift));
    NaiveDualDiagnosis out{e.min, e.max, Definiteness::Degenerate};
    switch (classify_spectrum(e.min, e.max)) {
    case Classification::LocalMin: out.definiteness = Definiteness::PositiveDefinite; break;
    case Classification::LocalMax: out.definiteness = Definiteness::NegativeDefinite; break;
    case Classification::Saddle: out.definiteness = Definiteness::Indefinite; break;
    case Classification::Degenerate: out.definiteness = Definiteness::Degenerate; break;
    }
    return out;
}

Thm1Result verify_thm1(const ModelParams& params, const Grid& grid, const Field& u0,
                       const Thm1Options& opts) {
    validate(params, grid);
    Thm1Result r;
    r.point = describe_point(params, grid, u0, 0);
    if (r.point.residual_norm > opts.precondition_tol) {
        throw Error(ErrorKind::PreconditionViolated,
                    "u0 is not critical: ||grad J|| = " + std::to_string(r.point.residual_norm));
    }
    r.triple = build_dual_triple(params, grid, u0);
    r.J = energy_J(params, grid, u0);
    r.bstar_margin = bstar_margin(params, grid, r.triple.v0star);
    r.in_bstar = in_Bstar(params, grid, r.triple.v0star);
    if (!r.in_bstar) return r;

    r.Jstar = eval_Jstar(params, grid, r.triple);
    r.gap = std::abs(r.J - r.Jstar);
    r.dual_grad_norm = grad_Jstar(params, grid, r.triple).norm();

    const bool is_min = r.point.classification == Classification::LocalMin;
    const bool is_max = r.point.classification == Classification::LocalMax;
    if (is_min || is_max) {
        const BallSpec ball{r.triple.p, opts.radius > 0.0 ? opts.radius : default_radius(r.triple.p)};
        const NestedResult nested = is_min ? eval_J3(params, grid, r.triple.vstar, ball)
                                           : eval_J5(params, grid, r.triple.vstar, ball);
        r.nested_value = nested.value;
        r.nested_interior = nested.interior;
        r.nested_rows = d2_J3_check(params, grid, u0, opts.ndirs, opts.seed, is_max, ball.radius);
        r.j8_pp_rows = d2_J8_p_check(params, grid, u0, opts.ndirs, opts.seed);
    }
    return r;
}

}  // namespace gldual
