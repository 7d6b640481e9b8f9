#include "gldual/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace gldual {

namespace {

void require_size(const SymOp& a, std::size_t n) {
    if (a.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "operator of size " + std::to_string(a.size()) +
                                                      " applied to field of size " +
                                                      std::to_string(n));
    }
}

}  // namespace

SymOp::SymOp(std::size_t n) : n_(n), shift_(n, 0.0) {}

SymOp SymOp::diagonal(Field d) {
    SymOp op(d.size());
    op.shift_ = std::move(d);
    return op;
}

SymOp SymOp::scalar(std::size_t n, double c) { return diagonal(Field(n, c)); }

SymOp SymOp::dense(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "dense operator not square");
    SymOp op(static_cast<std::size_t>(m.rows()));
    op.dense_ = std::make_shared<const Eigen::MatrixXd>(0.5 * (m + m.transpose()));
    return op;
}

Eigen::VectorXd SymOp::apply(const Eigen::VectorXd& x) const {
    require_size(*this, static_cast<std::size_t>(x.size()));
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = shift_[static_cast<std::size_t>(i)] * x[i];
    if (dense_) y.noalias() += (*dense_) * x;
    if (stencil_grid_) {
        const Grid& g = *stencil_grid_;
        const auto n_axis = static_cast<std::size_t>(g.nodes_per_axis());
        const double c = stencil_coeff_;
        const double center = 2.0 * g.dimension() * c;
        for (std::size_t i = 0; i < n_; ++i) {
            double acc = center * x[static_cast<Eigen::Index>(i)];
            for (int axis = 0; axis < g.dimension(); ++axis) {
                const std::size_t s = g.stride(axis);
                const std::size_t pos = g.axis_position(i, axis);
                if (pos > 0) acc -= c * x[static_cast<Eigen::Index>(i - s)];
                if (pos + 1 < n_axis) acc -= c * x[static_cast<Eigen::Index>(i + s)];
            }
            y[static_cast<Eigen::Index>(i)] += acc;
        }
    }
    return y;
}

Field SymOp::apply(const Field& x) const { return to_field(apply(to_eigen(x))); }

Eigen::MatrixXd SymOp::to_dense() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd m = dense_ ? Eigen::MatrixXd(*dense_) : Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) += shift_[static_cast<std::size_t>(i)];
    if (stencil_grid_) {
        const Grid& g = *stencil_grid_;
        const auto n_axis = static_cast<std::size_t>(g.nodes_per_axis());
        for (std::size_t i = 0; i < n_; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            m(ii, ii) += 2.0 * g.dimension() * stencil_coeff_;
            for (int axis = 0; axis < g.dimension(); ++axis) {
                const std::size_t s = g.stride(axis);
                if (g.axis_position(i, axis) + 1 < n_axis) {
                    const auto jj = static_cast<Eigen::Index>(i + s);
                    m(ii, jj) -= stencil_coeff_;
                    m(jj, ii) -= stencil_coeff_;
                }
            }
        }
    }
    return m;
}

Field SymOp::diagonal_entries() const {
    Field d = shift_;
    if (dense_) {
        for (std::size_t i = 0; i < n_; ++i) d[i] += (*dense_)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    }
    if (stencil_grid_) {
        for (std::size_t i = 0; i < n_; ++i) d[i] += 2.0 * stencil_grid_->dimension() * stencil_coeff_;
    }
    return d;
}

double SymOp::spectral_bound() const {
    double bound = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double row = std::abs(shift_[i]);
        if (stencil_grid_) row += 4.0 * stencil_grid_->dimension() * std::abs(stencil_coeff_);
        if (dense_) row += dense_->row(static_cast<Eigen::Index>(i)).cwiseAbs().sum();
        bound = std::max(bound, row);
    }
    return bound;
}

SymOp SymOp::scaled(double s) const {
    SymOp out = *this;
    out.stencil_coeff_ *= s;
    out.shift_ *= s;
    if (dense_) out.dense_ = std::make_shared<const Eigen::MatrixXd>(s * (*dense_));
    return out;
}

SymOp SymOp::plus(const SymOp& other) const {
    require_size(*this, other.size());
    // Stencils on the same grid add coefficients; anything else goes dense.
    if (!other.dense_ && (!other.stencil_grid_ ||
                          (stencil_grid_ && *stencil_grid_ == *other.stencil_grid_))) {
        SymOp out = *this;
        out.shift_ += other.shift_;
        if (other.stencil_grid_) {
            out.stencil_grid_ = other.stencil_grid_;
            out.stencil_coeff_ += other.stencil_coeff_;
        }
        return out;
    }
    return SymOp::dense(to_dense() + other.to_dense());
}

SymOp assemble_neg_laplacian(const Grid& grid, double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
    SymOp op(grid.node_count());
    op.stencil_grid_ = grid;
    op.stencil_coeff_ = gamma / (grid.spacing() * grid.spacing());
    return op;
}

Field apply(const SymOp& a, const Field& x) { return a.apply(x); }

SymOp add_diag(const SymOp& a, const Field& w) {
    require_size(a, w.size());
    return a.plus(SymOp::diagonal(w));
}

SymOp add_diag(const SymOp& a, double w) { return a.plus(SymOp::scalar(a.size(), w)); }

Field conjugate_gradient(const SymOp& a, const Field& b, double tol, int max_iterations) {
    require_size(a, b.size());
    const Eigen::VectorXd rhs = to_eigen(b);
    const double bnorm = rhs.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    if (bnorm == 0.0) return to_field(x);
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd p = r;
    double rr = r.squaredNorm();
    for (int it = 0; it < max_iterations; ++it) {
        const Eigen::VectorXd ap = a.apply(p);
        const double curvature = p.dot(ap);
        if (!(curvature > 0.0)) {
            throw Error(ErrorKind::NotPositiveDefinite,
                        "non-positive curvature " + std::to_string(curvature) + " in CG");
        }
        const double step = rr / curvature;
        x += step * p;
        r -= step * ap;
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= tol * bnorm) return to_field(x);
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    throw NoConvergence("CG hit iteration cap", std::vector<double>(x.data(), x.data() + x.size()),
                        std::sqrt(rr) / bnorm);
}

Field solve_spd(const SymOp& a, const Field& b, double tol, const SolveOptions& opts) {
    require_size(a, b.size());
    if (a.size() <= opts.dense_threshold) {
        const Eigen::MatrixXd m = a.to_dense();
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() != Eigen::Success) {
            throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorisation failed");
        }
        const Eigen::VectorXd rhs = to_eigen(b);
        Eigen::VectorXd x = llt.solve(rhs);
        // One step of refinement keeps the relative residual near round-off.
        x += llt.solve(rhs - m * x);
        const double bnorm = rhs.norm();
        if (bnorm > 0.0 && (m * x - rhs).norm() > std::max(tol, 1e-12) * bnorm * 1e3) {
            throw NoConvergence("dense solve residual too large", std::vector<double>(x.data(), x.data() + x.size()),
                                (m * x - rhs).norm() / bnorm);
        }
        return to_field(x);
    }
    return conjugate_gradient(a, b, tol, opts.max_iterations);
}

double lanczos_extremal(const SymOp& a, bool largest, double tol, int max_steps) {
    const auto n = static_cast<Eigen::Index>(a.size());
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty operator");
    const double scale = std::max(a.spectral_bound(), 1e-300);
    const int m_max = static_cast<int>(std::min<Eigen::Index>(n, max_steps));

    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd basis(n, m_max + 1);
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q[i] = normal(rng);
    q.normalize();
    basis.col(0) = q;

    std::vector<double> alpha;
    std::vector<double> beta;
    double best = 0.0;
    for (int j = 0; j < m_max; ++j) {
        Eigen::VectorXd w = a.apply(Eigen::VectorXd(basis.col(j)));
        const double aj = basis.col(j).dot(w);
        alpha.push_back(aj);
        // Full reorthogonalisation, applied twice.
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k <= j; ++k) w -= basis.col(k).dot(w) * basis.col(k);
        }
        const double bj = w.norm();

        const int m = j + 1;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < m; ++k) {
            t(k, k) = alpha[static_cast<std::size_t>(k)];
            if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[static_cast<std::size_t>(k)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const Eigen::Index pick = largest ? m - 1 : 0;
        best = es.eigenvalues()[pick];
        const double ritz_residual = std::abs(bj * es.eigenvectors()(m - 1, pick));
        if (ritz_residual <= tol * scale || bj <= 1e-14 * scale || m == n) return best;
        beta.push_back(bj);
        basis.col(j + 1) = w / bj;
    }
    throw NoConvergence("Lanczos did not converge", {best}, 0.0);
}

Extremes extremal_eigs(const SymOp& a, double tol, const EigOptions& opts) {
    if (a.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty operator");
    if (a.size() <= opts.dense_threshold) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.to_dense(), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed", {}, 0.0);
        return {es.eigenvalues()[0], es.eigenvalues()[es.eigenvalues().size() - 1]};
    }
    return {lanczos_extremal(a, false, tol, opts.max_lanczos_steps),
            lanczos_extremal(a, true, tol, opts.max_lanczos_steps)};
}

double min_eig(const SymOp& a, double tol, const EigOptions& opts) {
    if (a.size() <= opts.dense_threshold) return extremal_eigs(a, tol, opts).min;
    return lanczos_extremal(a, false, tol, opts.max_lanczos_steps);
}

double max_eig(const SymOp& a, double tol, const EigOptions& opts) {
    if (a.size() <= opts.dense_threshold) return extremal_eigs(a, tol, opts).max;
    return lanczos_extremal(a, true, tol, opts.max_lanczos_steps);
}

bool matrix_gt(const SymOp& a, double c, double margin) { return min_eig(a) > c + margin; }

SymOp sqrt_spd(const SymOp& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.to_dense());
    if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed", {}, 0.0);
    Eigen::VectorXd lambda = es.eigenvalues();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    if (lambda.size() > 0 && lambda[0] < -1e-12 * scale) {
        throw Error(ErrorKind::NotPositiveSemidefinite,
                    "smallest eigenvalue " + std::to_string(lambda[0]));
    }
    lambda = lambda.cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd& v = es.eigenvectors();
    return SymOp::dense(v * lambda.asDiagonal() * v.transpose());
}

}  // namespace gldual
