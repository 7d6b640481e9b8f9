#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "gldual/errors.hpp"

namespace gldual {

/// Nodal values on the interior nodes of a grid, in lexicographic order
/// (axis 0 varies fastest).
class Field {
public:
    Field() = default;
    explicit Field(std::size_t n, double value = 0.0) : values_(n, value) {}
    explicit Field(std::vector<double> values) : values_(std::move(values)) {}
    Field(std::initializer_list<double> values) : values_(values) {}

    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> span() noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);

    bool operator==(const Field&) const = default;

    /// Euclidean norm of the nodal vector (no quadrature weight).
    double norm2() const;
    double norm_inf() const;
    bool all_finite() const;

private:
    std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator-(Field a);
Field operator*(double s, Field a);
Field operator*(Field a, double s);
/// Pointwise product.
Field hadamard(const Field& a, const Field& b);
/// Euclidean dot product of nodal vectors (no quadrature weight).
double dot(const Field& a, const Field& b);

struct GridSpec {
    int dimension = 1;
    double extent = 1.0;
    int nodes_per_axis = 1;
};

/// Rectangular box [0, extent]^d with homogeneous Dirichlet boundary. Only
/// interior nodes carry unknowns; the boundary acts as ghost zeros.
class Grid {
public:
    const GridSpec& spec() const noexcept { return spec_; }
    int dimension() const noexcept { return spec_.dimension; }
    int nodes_per_axis() const noexcept { return spec_.nodes_per_axis; }
    double spacing() const noexcept { return spacing_; }
    std::size_t node_count() const noexcept { return node_count_; }
    double quadrature_weight() const noexcept { return weight_; }

    /// Coordinate of node `index` along `axis`.
    double coordinate(std::size_t index, int axis) const;
    /// Per-axis integer position of a lexicographic node index.
    std::size_t axis_position(std::size_t index, int axis) const;
    /// Lexicographic stride between neighbours along `axis`.
    std::size_t stride(int axis) const;

    Field zeros() const { return Field(node_count_, 0.0); }
    Field constant(double v) const { return Field(node_count_, v); }

    void check(const Field& f) const;

    bool operator==(const Grid& other) const;

private:
    friend Grid build_grid(const GridSpec& spec);

    GridSpec spec_{};
    double spacing_ = 0.0;
    std::size_t node_count_ = 0;
    double weight_ = 0.0;
};

Grid build_grid(const GridSpec& spec);

/// Rectangle rule over interior nodes: h^d * sum_i g_i, summed left to right.
double integrate(const Grid& grid, const Field& g);

/// L2 inner product under the grid quadrature.
double inner(const Grid& grid, const Field& a, const Field& b);

/// L2 norm under the grid quadrature.
double l2_norm(const Grid& grid, const Field& a);

/// max(|u|_inf, max |forward difference| / h) with ghost zeros at the boundary.
double w1inf_norm(const Grid& grid, const Field& u);

}  // namespace gldual
