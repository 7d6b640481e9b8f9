#include "gldual/tensordual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "gldual/sampling.hpp"

namespace gldual {

namespace {

constexpr double kCstarMargin = 1e-10;
constexpr double kSingularTol = 1e-10;

void check_sizes(const Grid& grid, const TensorDual& t) {
    grid.check(t.v1);
    grid.check(t.v2);
    grid.check(t.s11);
    grid.check(t.s12);
    grid.check(t.s22);
}

Eigen::VectorXd stack(const TensorDual& t) {
    const auto n = static_cast<Eigen::Index>(t.v1.size());
    Eigen::VectorXd x(5 * n);
    x << to_eigen(t.v1), to_eigen(t.v2), to_eigen(t.s11), to_eigen(t.s12), to_eigen(t.s22);
    return x;
}

TensorDual unstack(const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size() / 5;
    return {to_field(x.segment(0, n)), to_field(x.segment(n, n)), to_field(x.segment(2 * n, n)),
            to_field(x.segment(3 * n, n)), to_field(x.segment(4 * n, n))};
}

/// Cached dense factorisation of L + sum K, shared by the Newton iterations.
struct PrimalFactor {
    Eigen::MatrixXd R;  // explicit inverse; the systems here are small
    Eigen::LLT<Eigen::MatrixXd> llt;

    PrimalFactor(const ModelParams& params, const Grid& grid, const KMat& km)
        : llt(tensor_primal_operator(params, grid, km).to_dense()) {
        if (llt.info() != Eigen::Success) {
            throw Error(ErrorKind::NotPositiveDefinite, "L + sum K is not positive definite");
        }
        R = llt.solve(Eigen::MatrixXd::Identity(llt.rows(), llt.cols()));
    }

    Eigen::VectorXd u_of(const TensorDual& t, const Field& f) const {
        return llt.solve(to_eigen(t.v1 + t.v2 + f));
    }
};

Eigen::VectorXd residual(const ModelParams& params, const KMat& km, const TensorDual& t,
                         const Eigen::VectorXd& u) {
    const auto n = static_cast<Eigen::Index>(t.v1.size());
    Eigen::VectorXd r(5 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double c1 = km.K + km.K12 - 2.0 * t.s11[k] - 2.0 * t.s12[k];
        const double c2 = km.K12 + km.K - 2.0 * t.s12[k] - 2.0 * t.s22[k];
        const double target = 0.25 * params.alpha * (u[i] * u[i] - params.beta);
        r[i] = t.v1[k] - c1 * u[i];
        r[n + i] = t.v2[k] - c2 * u[i];
        r[2 * n + i] = t.s11[k] - target;
        r[3 * n + i] = t.s12[k] - target;
        r[4 * n + i] = t.s22[k] - target;
    }
    return r;
}

Eigen::MatrixXd jacobian(const ModelParams& params, const KMat& km, const TensorDual& t,
                         const Eigen::VectorXd& u, const Eigen::MatrixXd& R) {
    const Eigen::Index n = u.size();
    Eigen::VectorXd c1(n), c2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        c1[i] = km.K + km.K12 - 2.0 * t.s11[k] - 2.0 * t.s12[k];
        c2[i] = km.K12 + km.K - 2.0 * t.s12[k] - 2.0 * t.s22[k];
    }
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd c1R = c1.asDiagonal() * R;
    const Eigen::MatrixXd c2R = c2.asDiagonal() * R;
    const Eigen::MatrixXd uR = (-0.5 * params.alpha * u).asDiagonal() * R;
    const Eigen::MatrixXd twoU = (2.0 * u).asDiagonal();

    Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(5 * n, 5 * n);
    Jm.block(0, 0, n, n) = I - c1R;
    Jm.block(0, n, n, n) = -c1R;
    Jm.block(0, 2 * n, n, n) = twoU;
    Jm.block(0, 3 * n, n, n) = twoU;
    Jm.block(n, 0, n, n) = -c2R;
    Jm.block(n, n, n, n) = I - c2R;
    Jm.block(n, 3 * n, n, n) = twoU;
    Jm.block(n, 4 * n, n, n) = twoU;
    for (int b = 2; b < 5; ++b) {
        Jm.block(b * n, 0, n, n) = uR;
        Jm.block(b * n, n, n, n) = uR;
        Jm.block(b * n, b * n, n, n) = I;
    }
    return Jm;
}

/// One relaxed sweep: u from v, then s and v from u.
TensorDual alternating_sweep(const ModelParams& params, const KMat& km, const TensorDual& t,
                             const Eigen::VectorXd& u, double relax) {
    const Field uf = to_field(u);
    const TensorDual target = tensor_dual_from_primal(params, km, uf);
    auto mix = [relax](const Field& a, const Field& b) { return (1.0 - relax) * a + relax * b; };
    return {mix(t.v1, target.v1), mix(t.v2, target.v2), mix(t.s11, target.s11), mix(t.s12, target.s12),
            mix(t.s22, target.s22)};
}

/// The closed form without the B* check; verification reports the gap even
/// when the saddle point lies outside B*.
double gstar_t_value(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    const NodeInverse m = nodewise_inverse(km, t);
    Field density(t.v1.size());
    for (std::size_t i = 0; i < density.size(); ++i) {
        const double v1 = t.v1[i];
        const double v2 = t.v2[i];
        const double quad = m.m11[i] * v1 * v1 + 2.0 * m.m12[i] * v1 * v2 + m.m22[i] * v2 * v2;
        const double sq = t.s11[i] * t.s11[i] + 2.0 * t.s12[i] * t.s12[i] + t.s22[i] * t.s22[i];
        const double lin = t.s11[i] + 2.0 * t.s12[i] + t.s22[i];
        density[i] = -0.5 * quad - (2.0 / params.alpha) * sq - params.beta * lin;
    }
    return integrate(grid, density);
}

void fill_membership(const ModelParams& params, const Grid& grid, const KMat& km, SaddleResult& out) {
    out.in_bstar = in_Bstar_t(out.t, km);
    try {
        out.in_cstar = in_Cstar(params, grid, km, out.t);
    } catch (const Error&) {
        out.in_cstar = false;
    }
    out.in_dstar = in_Dstar(out.t, km, params.alpha);
    out.in_uhat = in_Uhat(grid, out.u0, km);
}

}  // namespace

TensorDual TensorDual::zeros(std::size_t n) {
    return {Field(n), Field(n), Field(n), Field(n), Field(n)};
}

NodeInverse nodewise_inverse(const KMat& km, const TensorDual& t) {
    const std::size_t n = t.s11.size();
    NodeInverse out{Field(n), Field(n), Field(n)};
    const double tol = kSingularTol * km.K * km.K;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * t.s11[i] - km.K;
        const double b = 2.0 * t.s12[i] - km.K12;
        const double d = 2.0 * t.s22[i] - km.K;
        const double det = a * d - b * b;
        if (!(std::abs(det) >= tol)) {
            throw Error(ErrorKind::SingularNode, "M is singular at node " + std::to_string(i));
        }
        out.m11[i] = d / det;
        out.m12[i] = -b / det;
        out.m22[i] = a / det;
    }
    return out;
}

SymOp tensor_primal_operator(const ModelParams& params, const Grid& grid, const KMat& km) {
    return add_diag(neg_laplacian(params, grid), km.sum());
}

double eval_Gstar_t(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    check_sizes(grid, t);
    if (!in_Bstar_t(t, km)) throw Error(ErrorKind::NotInBstarT, "v0* has an entry above K12/4");
    return gstar_t_value(params, grid, km, t);
}

double eval_Fstar_t(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    check_sizes(grid, t);
    const Field w = t.v1 + t.v2 + params.f;
    const Field u = solve_spd(tensor_primal_operator(params, grid, km), w, 1e-14);
    return 0.5 * inner(grid, u, w);
}

double eval_Jstar_t(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    return -eval_Fstar_t(params, grid, km, t) + eval_Gstar_t(params, grid, km, t);
}

bool in_Bstar_t(const TensorDual& t, const KMat& km) {
    const double bound = 0.25 * km.K12;
    return t.s11.norm_inf() <= bound && t.s12.norm_inf() <= bound && t.s22.norm_inf() <= bound;
}

bool in_Dstar(const TensorDual& t, const KMat& km, double alpha) {
    const double half_k_cubed = std::pow(0.5 * km.K, 3);
    auto ok = [&](const Field& v) {
        const double m = v.norm_inf();
        return -128.0 * m * m / half_k_cubed + 1.0 / alpha > 0.0;
    };
    return ok(t.v1) && ok(t.v2);
}

bool in_Uhat(const Grid& grid, const Field& u, const KMat& km) {
    return w1inf_norm(grid, u) < std::pow(km.K, 0.25);
}

double cstar_min_eig(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    check_sizes(grid, t);
    const PrimalFactor pf(params, grid, km);
    const NodeInverse m = nodewise_inverse(km, t);
    const Eigen::Index n = pf.R.rows();
    Eigen::MatrixXd Q(2 * n, 2 * n);
    Q << -pf.R, -pf.R, -pf.R, -pf.R;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        Q(i, i) -= m.m11[k];
        Q(i, n + i) -= m.m12[k];
        Q(n + i, i) -= m.m12[k];
        Q(n + i, n + i) -= m.m22[k];
    }
    return min_eig(SymOp::dense(Q));
}

bool in_Cstar(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    return in_Bstar_t(t, km) && cstar_min_eig(params, grid, km, t) > kCstarMargin;
}

Field reconstruct_u(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    check_sizes(grid, t);
    return solve_spd(tensor_primal_operator(params, grid, km), t.v1 + t.v2 + params.f, 1e-14);
}

double stationarity_residual_t(const ModelParams& params, const Grid& grid, const KMat& km,
                               const TensorDual& t) {
    const Field u = reconstruct_u(params, grid, km, t);
    return residual(params, km, t, to_eigen(u)).norm();
}

double grad_Jstar_t_norm(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    const Field u = reconstruct_u(params, grid, km, t);
    const NodeInverse m = nodewise_inverse(km, t);
    const double w = grid.quadrature_weight();
    const double a = params.alpha;
    const double b = params.beta;
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        // y = M^{-1} v; the F* part contributes -u to each v-component.
        const double y1 = m.m11[i] * t.v1[i] + m.m12[i] * t.v2[i];
        const double y2 = m.m12[i] * t.v1[i] + m.m22[i] * t.v2[i];
        const double g[5] = {
            -u[i] - y1,
            -u[i] - y2,
            y1 * y1 - (4.0 / a) * t.s11[i] - b,
            2.0 * y1 * y2 - (8.0 / a) * t.s12[i] - 2.0 * b,
            y2 * y2 - (4.0 / a) * t.s22[i] - b,
        };
        for (double gi : g) sum += (w * gi) * (w * gi);
    }
    return std::sqrt(sum);
}

TensorDual tensor_dual_from_primal(const ModelParams& params, const KMat& km, const Field& u0) {
    const std::size_t n = u0.size();
    TensorDual t = TensorDual::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = 0.25 * params.alpha * (u0[i] * u0[i] - params.beta);
        t.s11[i] = t.s12[i] = t.s22[i] = s;
        t.v1[i] = (km.K - 2.0 * s + km.K12 - 2.0 * s) * u0[i];
        t.v2[i] = t.v1[i];
    }
    return t;
}

SaddleResult saddle_solve(const ModelParams& params, const Grid& grid, const KMat& km,
                          const TensorDual& init, double tol, int maxit) {
    validate(params, grid);
    check_sizes(grid, init);
    nodewise_inverse(km, init);  // the start must be nodewise invertible

    const PrimalFactor pf(params, grid, km);
    TensorDual t = init;
    Eigen::VectorXd u = pf.u_of(t, params.f);
    double res = residual(params, km, t, u).norm();

    SaddleResult out;
    TensorDual best = t;
    double best_res = res;
    bool newton_stalled = false;

    for (int it = 0; it < maxit && res > tol; ++it) {
        out.iterations = it + 1;
        if (!newton_stalled) {
            const Eigen::VectorXd r = residual(params, km, t, u);
            const Eigen::MatrixXd Jm = jacobian(params, km, t, u, pf.R);
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Jm);
            const Eigen::VectorXd step = lu.solve(-r);
            const Eigen::VectorXd x = stack(t);
            double lambda = 1.0;
            bool accepted = false;
            for (int halving = 0; halving < 30 && step.allFinite(); ++halving, lambda *= 0.5) {
                const TensorDual trial = unstack(x + lambda * step);
                const Eigen::VectorXd ut = pf.u_of(trial, params.f);
                const double rt = residual(params, km, trial, ut).norm();
                if (rt < (1.0 - 1e-4 * lambda) * res) {
                    t = trial;
                    u = ut;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) newton_stalled = true;
        }
        if (newton_stalled) {
            out.used_fallback = true;
            t = alternating_sweep(params, km, t, u, 0.5);
            u = pf.u_of(t, params.f);
            res = residual(params, km, t, u).norm();
        }
        if (res < best_res) {
            best_res = res;
            best = t;
        }
    }

    if (!(best_res <= tol)) {
        const Eigen::VectorXd x = stack(best);
        throw NoConvergence("tensor saddle solve did not converge",
                            std::vector<double>(x.data(), x.data() + x.size()), best_res);
    }
    out.t = best;
    out.u0 = to_field(pf.u_of(best, params.f));
    out.residual = best_res;
    fill_membership(params, grid, km, out);
    return out;
}

Thm4Result verify_thm4(const ModelParams& params, const Grid& grid, const KMat& km,
                       const std::optional<Field>& u0_hint, const Thm4Options& opts) {
    validate(params, grid);
    Thm4Result r;
    r.k_dominant = km.dominant();

    const TensorDual init = u0_hint ? tensor_dual_from_primal(params, km, *u0_hint)
                                    : TensorDual::zeros(grid.node_count());
    r.saddle = saddle_solve(params, grid, km, init, opts.tol, opts.maxit);
    const Field& u0 = r.saddle.u0;

    r.J = energy_J(params, grid, u0);
    auto jstar = [&](const TensorDual& t) {
        return -eval_Fstar_t(params, grid, km, t) + gstar_t_value(params, grid, km, t);
    };
    r.Jstar = jstar(r.saddle.t);
    r.gap = r.J - r.Jstar;
    r.grad_norm = grad_Jstar_t_norm(params, grid, km, r.saddle.t);
    try {
        r.cstar_min_eig = cstar_min_eig(params, grid, km, r.saddle.t);
    } catch (const Error&) {
        r.cstar_min_eig = std::nan("");
    }
    for (std::size_t i = 0; i < u0.size(); ++i) {
        const double target = 0.25 * params.alpha * (u0[i] * u0[i] - params.beta);
        r.diag_equality_error = std::max({r.diag_equality_error, std::abs(r.saddle.t.s11[i] - target),
                                          std::abs(r.saddle.t.s22[i] - target)});
    }
    if (u0_hint) r.hint_distance = l2_norm(grid, u0 - *u0_hint);

    // Multistart primal minimisation restricted to local minima inside U-hat.
    Rng rng(opts.seed);
    r.best_in_uhat = std::numeric_limits<double>::infinity();
    std::vector<Field> starts{u0};
    for (int k = 0; k < opts.nstarts; ++k) {
        starts.push_back(random_smooth_field(grid, rng, 1.5 * std::sqrt(params.beta)));
    }
    for (const Field& s : starts) {
        try {
            const CriticalPoint cp = newton(params, grid, s, 1e-10, 200);
            if (cp.classification != Classification::LocalMin || !in_Uhat(grid, cp.u0, km)) continue;
            ++r.uhat_minima_found;
            r.best_in_uhat = std::min(r.best_in_uhat, energy_J(params, grid, cp.u0));
        } catch (const Error&) {
        }
    }

    // Second differences of J*_t along random unit directions.
    const std::size_t n = grid.node_count();
    std::normal_distribution<double> normal(0.0, 1.0);
    const double j0 = r.Jstar;
    r.min_vstar_curvature = std::numeric_limits<double>::infinity();
    r.max_v0_curvature = -std::numeric_limits<double>::infinity();
    const double hv = 1e-2 * (1.0 + std::max(r.saddle.t.v1.norm_inf(), r.saddle.t.v2.norm_inf()));
    const double hs = 1e-3 * (1.0 + r.saddle.t.s11.norm_inf());
    for (int k = 0; k < opts.ndirs; ++k) {
        Field d1(n), d2(n);
        for (std::size_t i = 0; i < n; ++i) {
            d1[i] = normal(rng);
            d2[i] = normal(rng);
        }
        double scale = std::sqrt(dot(d1, d1) + dot(d2, d2));
        d1 *= 1.0 / scale;
        d2 *= 1.0 / scale;
        TensorDual plus = r.saddle.t;
        TensorDual minus = r.saddle.t;
        plus.v1 += hv * d1;
        plus.v2 += hv * d2;
        minus.v1 -= hv * d1;
        minus.v2 -= hv * d2;
        const double cv = (jstar(plus) - 2.0 * j0 + jstar(minus)) / (hv * hv);
        r.min_vstar_curvature = std::min(r.min_vstar_curvature, cv);

        Field e1(n), e2(n), e3(n);
        for (std::size_t i = 0; i < n; ++i) {
            e1[i] = normal(rng);
            e2[i] = normal(rng);
            e3[i] = normal(rng);
        }
        scale = std::sqrt(dot(e1, e1) + dot(e2, e2) + dot(e3, e3));
        plus = r.saddle.t;
        minus = r.saddle.t;
        plus.s11 += (hs / scale) * e1;
        plus.s12 += (hs / scale) * e2;
        plus.s22 += (hs / scale) * e3;
        minus.s11 -= (hs / scale) * e1;
        minus.s12 -= (hs / scale) * e2;
        minus.s22 -= (hs / scale) * e3;
        const double cs = (jstar(plus) - 2.0 * j0 + jstar(minus)) / (hs * hs);
        r.max_v0_curvature = std::max(r.max_v0_curvature, cs);
    }
    return r;
}

}  // namespace gldual
