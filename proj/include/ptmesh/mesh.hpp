#pragma once

#include "ptmesh/trilinear.hpp"

#include <vector>

namespace ptmesh
{
    struct PolygonMesh
    {
        std::vector<Vec3> vertices;
        std::vector<std::vector<int>> faces;  // 0-based, counter-clockwise about the normal
        std::vector<Vec3> normals;            // per face; may be empty

        bool empty() const { return faces.empty(); }
        std::size_t triangle_count() const;
    };

    /// Vertices, undirected edges and faces after fan triangulation.
    struct EulerCounts
    {
        long vertices = 0;
        long edges = 0;
        long faces = 0;
        long boundary_edges = 0;     // edges used by one face
        long nonmanifold_edges = 0;  // edges used by more than two faces

        long characteristic() const { return vertices - edges + faces; }
    };

    /// Counts over the triangulated mesh; only vertices referenced by a face are counted.
    EulerCounts euler_counts(const PolygonMesh & mesh);
}
