#include "gldual/model.hpp"

#include <cmath>

namespace gldual {

void validate(const ModelParams& params, const Grid& grid) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
        }
    };
    positive(params.gamma, "gamma");
    positive(params.alpha, "alpha");
    positive(params.beta, "beta");
    positive(params.K, "K");
    positive(params.eps, "eps");
    positive(params.K12, "K12");
    grid.check(params.f);
    if (!params.f.all_finite()) throw Error(ErrorKind::InvalidArgument, "f must be finite");
}

SymOp neg_laplacian(const ModelParams& params, const Grid& grid) {
    return assemble_neg_laplacian(grid, params.gamma);
}

double energy_J(const ModelParams& params, const Grid& grid, const Field& u) {
    grid.check(u);
    grid.check(params.f);
    const Field lu = neg_laplacian(params, grid).apply(u);
    Field well(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] * u[i] - params.beta;
        well[i] = d * d;
    }
    return 0.5 * inner(grid, lu, u) + 0.5 * params.alpha * integrate(grid, well) -
           inner(grid, u, params.f);
}

double energy_Jhat(const ModelParams& params, const Grid& grid, const Field& u, const Field& p) {
    grid.check(p);
    const Field d = u - p;
    return energy_J(params, grid, u) + 0.5 * params.K * inner(grid, d, d);
}

Field grad_J(const ModelParams& params, const Grid& grid, const Field& u) {
    grid.check(u);
    grid.check(params.f);
    Field g = neg_laplacian(params, grid).apply(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        g[i] += 2.0 * params.alpha * (u[i] * u[i] - params.beta) * u[i] - params.f[i];
    }
    return g;
}

SymOp hess_J(const ModelParams& params, const Grid& grid, const Field& u) {
    grid.check(u);
    Field d(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        d[i] = 6.0 * params.alpha * u[i] * u[i] - 2.0 * params.alpha * params.beta;
    }
    return add_diag(neg_laplacian(params, grid), d);
}

}  // namespace gldual
