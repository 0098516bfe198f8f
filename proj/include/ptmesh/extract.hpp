#pragma once

// Mesh extraction: subdivide by every neuron, keep the zero set, build faces.

#include "ptmesh/complex.hpp"
#include "ptmesh/mesh.hpp"

#include <array>
#include <vector>

namespace ptmesh
{
    struct ExtractOptions
    {
        double epsilon = 1e-4;
        bool triangulate = false;
        bool prune = false;
        bool boundary_faces = true;  // close the solid where it meets the unit-cube walls
    };

    struct ExtractionStats
    {
        std::vector<PassStats> passes;
        int complex_vertices = 0;
        int complex_edges = 0;
        int skeleton_vertices = 0;
        int skeleton_edges = 0;
        int faces = 0;
        int boundary_faces = 0;
        int irregular_faces = 0;  // groups that did not decompose into simple cycles
        int dropped_groups = 0;   // groups with fewer than three vertices

        int splits() const;
        int solved_splits() const;  // curved + chord
        int fallbacks() const;
        double fallback_rate() const;
    };

    struct ExtractedMesh
    {
        std::vector<Vec3> vertices;
        std::vector<std::array<int, 2>> edges;
        std::vector<std::vector<int>> faces;  // counter-clockwise seen against the normal
        std::vector<Vec3> normals;            // one per face
        std::vector<SignVector> signs;        // one per skeleton vertex
        int skeleton_vertex_count = 0;        // vertices past this index only bound wall faces

        bool empty() const { return vertices.empty(); }
        PolygonMesh polygon_mesh() const { return {vertices, faces, normals}; }
    };

    /// Runs every neuron pass in phi order on the grid complex.
    ComplexState build_complex(const TrilinearNetwork & net, const ExtractOptions & options, ExtractionStats * stats = nullptr);

    struct Skeleton
    {
        std::vector<int> vertices;            // complex vertex ids
        std::vector<int> index_of;            // complex id -> skeleton index or -1
        std::vector<std::array<int, 2>> edges;  // complex vertex ids
    };

    /// Vertices with |output| <= eps and the edges between them.
    Skeleton skeletonize(const ComplexState & state, int output_phi, double eps);

    /// Sort key of each vertex around its centroid, relative to vertex 0.
    std::vector<double> polygon_angle_keys(const std::vector<Vec3> & points, const Vec3 & normal);
    /// Order that walks the polygon counter-clockwise seen against `normal`.
    std::vector<int> sort_polygon_vertices(const std::vector<Vec3> & points, const Vec3 & normal);

    /// Faces of the skeleton (and optionally the wall caps) in complex vertex ids.
    struct FaceSet
    {
        std::vector<std::vector<int>> faces;
        std::vector<Vec3> normals;
        std::vector<bool> boundary;
    };
    FaceSet assemble_faces(const ComplexState & state, const Skeleton & skeleton, const TrilinearNetwork & net, const ExtractOptions & options,
                           ExtractionStats * stats = nullptr);

    /// Fan triangulation preserving orientation.
    void triangulate(ExtractedMesh & mesh);

    ExtractedMesh extract(const TrilinearNetwork & net, const ExtractOptions & options = {}, ExtractionStats * stats = nullptr);
}
