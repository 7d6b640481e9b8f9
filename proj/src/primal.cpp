#include "gldual/primal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gldual {

std::string_view to_string(Classification c) {
    switch (c) {
    case Classification::LocalMin: return "LocalMin";
    case Classification::LocalMax: return "LocalMax";
    case Classification::Saddle: return "Saddle";
    case Classification::Degenerate: return "Degenerate";
    }
    return "Unknown";
}

Classification classify_spectrum(double lo, double hi) {
    const double margin = kDegeneracyMargin * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (std::abs(lo) <= margin || std::abs(hi) <= margin) return Classification::Degenerate;
    if (lo > margin) return Classification::LocalMin;
    if (hi < -margin) return Classification::LocalMax;
    return Classification::Saddle;
}

Classification classify(const ModelParams& params, const Grid& grid, const Field& u) {
    const Extremes e = extremal_eigs(hess_J(params, grid, u));
    return classify_spectrum(e.min, e.max);
}

double convexity_K(const ModelParams& params, const Grid& grid, const Field& u) {
    return std::max(0.0, -min_eig(hess_J(params, grid, u)));
}

CriticalPoint describe_point(const ModelParams& params, const Grid& grid, Field u0, int iterations) {
    CriticalPoint cp;
    cp.residual_norm = grad_J(params, grid, u0).norm2();
    const Extremes e = extremal_eigs(hess_J(params, grid, u0));
    cp.min_eig_hess = e.min;
    cp.max_eig_hess = e.max;
    cp.classification = classify_spectrum(e.min, e.max);
    cp.iterations = iterations;
    cp.u0 = std::move(u0);
    return cp;
}

namespace {

constexpr int kMaxBacktracks = 30;

}  // namespace

CriticalPoint newton(const ModelParams& params, const Grid& grid, const Field& u_init, double tol,
                     int maxit) {
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    grid.check(u_init);

    Field u = u_init;
    Field g = grad_J(params, grid, u);
    double gnorm = g.norm2();
    Field best = u;
    double best_norm = gnorm;

    for (int it = 0; gnorm > tol; ++it) {
        if (it >= maxit) {
            throw NoConvergence("Newton reached " + std::to_string(maxit) + " iterations",
                                best.values(), best_norm);
        }
        const Eigen::MatrixXd h = hess_J(params, grid, u).to_dense();
        const Eigen::VectorXd gv = to_eigen(g);

        auto try_direction = [&](const Eigen::VectorXd& dir) {
            if (!dir.allFinite()) return false;
            double step = 1.0;
            for (int k = 0; k <= kMaxBacktracks; ++k, step *= 0.5) {
                Field trial = u + step * to_field(dir);
                Field gt = grad_J(params, grid, trial);
                const double tn = gt.norm2();
                if (std::isfinite(tn) && tn < (1.0 - 1e-4 * step) * gnorm) {
                    u = std::move(trial);
                    g = std::move(gt);
                    gnorm = tn;
                    return true;
                }
            }
            return false;
        };

        Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
        bool moved = false;
        if (lu.isInvertible()) moved = try_direction(lu.solve(-gv));
        if (!moved) {
            // Steepest descent on 1/2 ||grad||^2; its gradient is H g.
            const Eigen::VectorXd hg = h * gv;
            const double hgn = hg.squaredNorm();
            if (hgn > 0.0) moved = try_direction(-(gv.squaredNorm() / hgn) * hg);
        }
        if (gnorm < best_norm) {
            best = u;
            best_norm = gnorm;
        }
        if (!moved) {
            throw NoConvergence("Newton line search failed at residual " + std::to_string(gnorm),
                                best.values(), best_norm);
        }
        if (gnorm <= tol) return describe_point(params, grid, std::move(u), it + 1);
    }
    return describe_point(params, grid, std::move(u), 0);
}

Field prox_step(const ModelParams& params, const Grid& grid, const Field& p, double tol) {
    grid.check(p);
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    const int maxit = 200;

    auto objective = [&](const Field& u) { return energy_Jhat(params, grid, u, p); };
    auto gradient = [&](const Field& u) { return grad_J(params, grid, u) + params.K * (u - p); };

    Field u = p;
    double value = objective(u);
    Field g = gradient(u);
    bool saw_positive_curvature = false;

    for (int it = 0; it < maxit; ++it) {
        const double gnorm = g.norm2();
        if (gnorm <= tol) break;
        const Eigen::MatrixXd h = add_diag(hess_J(params, grid, u), params.K).to_dense();
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        Eigen::VectorXd dir;
        if (llt.info() == Eigen::Success) {
            saw_positive_curvature = true;
            dir = llt.solve(-to_eigen(g));
        } else {
            dir = -to_eigen(g);
        }
        const Field d = to_field(dir);
        const double slope = inner(grid, g, d);
        double step = 1.0;
        bool accepted = false;
        for (int k = 0; k <= kMaxBacktracks; ++k, step *= 0.5) {
            Field trial = u + step * d;
            const double tv = objective(trial);
            Field tg = gradient(trial);
            const bool armijo = tv <= value + 1e-4 * step * slope;
            // Near the minimiser round-off hides the decrease; accept a step that
            // shrinks the gradient without raising the objective beyond round-off.
            const bool flat = tv <= value + 1e-15 * std::max(1.0, std::abs(value)) &&
                              tg.norm2() < gnorm;
            if (armijo || flat) {
                u = std::move(trial);
                value = tv;
                g = std::move(tg);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }

    if (g.norm2() > tol) {
        if (!saw_positive_curvature) {
            throw Error(ErrorKind::NotConvex, "proximal subproblem has no positive curvature");
        }
        throw NoConvergence("prox_step residual " + std::to_string(g.norm2()), u.values(),
                            g.norm2());
    }
    if (!(min_eig(add_diag(hess_J(params, grid, u), params.K)) > 0.0)) {
        throw Error(ErrorKind::NotConvex, "hess_J + K is not positive definite at the prox point");
    }
    return u;
}

ProxResult prox_iterate(const ModelParams& params, const Grid& grid, const Field& p0, double tol,
                        int maxit) {
    grid.check(p0);
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    // The subproblem is solved well below the outer tolerance so that a small
    // step certifies a small gradient: ||grad J|| <= K * step + inner tol.
    const double scale = neg_laplacian(params, grid).spectral_bound() +
                         2.0 * params.alpha * params.beta + params.K;
    const double inner_tol = std::max(1e-2 * tol, 1e-14 * scale * std::sqrt(double(p0.size())));

    ProxResult result;
    Field p = p0;
    result.energy_trace.push_back(energy_J(params, grid, p));
    for (int it = 0; it < maxit; ++it) {
        Field u = prox_step(params, grid, p, inner_tol);
        result.energy_trace.push_back(energy_J(params, grid, u));
        const double step = (u - p).norm2();
        if (step <= tol) {
            result.point = describe_point(params, grid, std::move(u), it + 1);
            return result;
        }
        p = std::move(u);
    }
    throw NoConvergence("prox_iterate reached " + std::to_string(maxit) + " iterations",
                        p.values(), grad_J(params, grid, p).norm2());
}

}  // namespace gldual
