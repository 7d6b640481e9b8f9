#include "gldual/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gldual {

namespace {

void require_same_size(const Field& a, const Field& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "field sizes " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
}

}  // namespace

Field& Field::operator+=(const Field& other) {
    require_same_size(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_size(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

double Field::norm2() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

double Field::norm_inf() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator-(Field a) { return a *= -1.0; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }

Field hadamard(const Field& a, const Field& b) {
    require_same_size(a, b);
    Field out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

double dot(const Field& a, const Field& b) {
    require_same_size(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double Grid::coordinate(std::size_t index, int axis) const {
    return spacing_ * static_cast<double>(axis_position(index, axis) + 1);
}

std::size_t Grid::axis_position(std::size_t index, int axis) const {
    return (index / stride(axis)) % static_cast<std::size_t>(spec_.nodes_per_axis);
}

std::size_t Grid::stride(int axis) const {
    std::size_t s = 1;
    for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(spec_.nodes_per_axis);
    return s;
}

void Grid::check(const Field& f) const {
    if (f.size() != node_count_) {
        throw Error(ErrorKind::DimensionMismatch, "field has " + std::to_string(f.size()) +
                                                      " values, grid has " +
                                                      std::to_string(node_count_) + " nodes");
    }
}

bool Grid::operator==(const Grid& other) const {
    return spec_.dimension == other.spec_.dimension && spec_.extent == other.spec_.extent &&
           spec_.nodes_per_axis == other.spec_.nodes_per_axis;
}

Grid build_grid(const GridSpec& spec) {
    if (spec.dimension < 1 || spec.dimension > 3) {
        throw Error(ErrorKind::InvalidArgument,
                    "dimension must be 1, 2 or 3, got " + std::to_string(spec.dimension));
    }
    if (spec.nodes_per_axis < 1) {
        throw Error(ErrorKind::InvalidArgument, "nodes_per_axis must be >= 1");
    }
    if (!(spec.extent > 0.0) || !std::isfinite(spec.extent)) {
        throw Error(ErrorKind::InvalidArgument, "extent must be positive and finite");
    }
    Grid g;
    g.spec_ = spec;
    g.spacing_ = spec.extent / static_cast<double>(spec.nodes_per_axis + 1);
    g.node_count_ = 1;
    g.weight_ = 1.0;
    for (int a = 0; a < spec.dimension; ++a) {
        g.node_count_ *= static_cast<std::size_t>(spec.nodes_per_axis);
        g.weight_ *= g.spacing_;
    }
    return g;
}

double integrate(const Grid& grid, const Field& g) {
    grid.check(g);
    double s = 0.0;
    for (double v : g) s += v;
    return grid.quadrature_weight() * s;
}

double inner(const Grid& grid, const Field& a, const Field& b) {
    grid.check(a);
    grid.check(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return grid.quadrature_weight() * s;
}

double l2_norm(const Grid& grid, const Field& a) { return std::sqrt(inner(grid, a, a)); }

double w1inf_norm(const Grid& grid, const Field& u) {
    grid.check(u);
    const double h = grid.spacing();
    const auto n = static_cast<std::size_t>(grid.nodes_per_axis());
    double m = u.norm_inf();
    for (int axis = 0; axis < grid.dimension(); ++axis) {
        const std::size_t s = grid.stride(axis);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const std::size_t pos = grid.axis_position(i, axis);
            // Edge from the ghost node below the first interior node.
            if (pos == 0) m = std::max(m, std::abs(u[i]) / h);
            const double next = (pos + 1 < n) ? u[i + s] : 0.0;
            m = std::max(m, std::abs(next - u[i]) / h);
        }
    }
    return m;
}

}  // namespace gldual
