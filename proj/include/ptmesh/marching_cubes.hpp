#pragma once

// Marching-cubes baseline over a regular sample grid of [0,1]^3.
//
// Each cube is polygonized face by face: crossings on every cube face are
// joined into segments (ambiguous faces resolved with the asymptotic
// decider), the segments are chained into loops and the loops are fanned
// into triangles. Neighbouring cubes resolve a shared face identically, so
// the result is watertight.

#include "ptmesh/mesh.hpp"

#include <array>
#include <cstdint>
#include <functional>

namespace ptmesh
{
    using ScalarField = std::function<double(const Vec3 &)>;

    /// Classic 256-entry edge table (corner order 0:(000) 1:(100) 2:(110) 3:(010)
    /// 4:(001) 5:(101) 6:(111) 7:(011); edges 0-3 bottom ring, 4-7 top ring, 8-11 verticals).
    const std::array<std::uint16_t, 256> & marching_cubes_edge_table();

    /// FNV-1a 32-bit hash of the little-endian table bytes.
    std::uint32_t edge_table_checksum(const std::array<std::uint16_t, 256> & table);

    /// Samples `field` on resolution^3 points spaced 1/(resolution-1) and
    /// extracts the iso-level triangle mesh. Normals point toward larger values.
    PolygonMesh marching_cubes(const ScalarField & field, int resolution, double iso = 0.0);
}
