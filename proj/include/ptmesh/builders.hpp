#pragma once

// Small hand-made networks for tests, examples and the acceptance suite.

#include "ptmesh/marching_cubes.hpp"
#include "ptmesh/network.hpp"

#include <cstdint>
#include <vector>

namespace ptmesh
{
    /// One dense level with n_min = n_max = resolution whose single feature
    /// holds `field` at every lattice corner, followed by W = [[1]], b = [0].
    /// The network output is the trilinear interpolant of the samples.
    TrilinearNetwork make_field_network(const ScalarField & field, int resolution, std::int64_t table_size = 8192);

    /// Signed distance to a sphere, sampled so the marks split [0,1] into `intervals` cells.
    TrilinearNetwork make_sphere_network(int intervals = 16, double radius = 0.3, const Vec3 & center = Vec3::Constant(0.5));

    /// Output equal to `value` everywhere.
    TrilinearNetwork make_constant_network(double value);

    struct RandomNetworkConfig
    {
        int levels = 2;
        int features_per_level = 2;
        int n_min = 2;
        int n_max = 32;
        std::int64_t table_size = std::int64_t(1) << 14;
        std::vector<int> hidden {16, 16};
        double fine_scale = 0.05;  // magnitude of the finest level's features relative to the coarsest
    };

    /// Gaussian features and weights; the output bias is shifted so the zero
    /// set passes through the middle of the unit cube.
    TrilinearNetwork make_random_network(std::uint64_t seed, const RandomNetworkConfig & config = {});
}
