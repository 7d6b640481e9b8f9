#include "gldual/sampling.hpp"

#include <cmath>
#include <numbers>

namespace gldual {

Field random_smooth_field(const Grid& grid, Rng& rng, double amplitude, int modes) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> freq(1, 4);
    Field out(grid.node_count(), amplitude * normal(rng));
    const double extent = grid.spec().extent;
    for (int m = 0; m < modes; ++m) {
        const double c = amplitude * normal(rng) / modes;
        int k[3] = {1, 1, 1};
        for (int a = 0; a < grid.dimension(); ++a) k[a] = freq(rng);
        for (std::size_t i = 0; i < out.size(); ++i) {
            double s = c;
            for (int a = 0; a < grid.dimension(); ++a) {
                s *= std::sin(k[a] * std::numbers::pi * grid.coordinate(i, a) / extent);
            }
            out[i] += s;
        }
    }
    return out;
}

Field random_normal_field(const Grid& grid, Rng& rng, double sigma) {
    std::normal_distribution<double> normal(0.0, sigma);
    Field out(grid.node_count());
    for (double& v : out) v = normal(rng);
    return out;
}

}  // namespace gldual
