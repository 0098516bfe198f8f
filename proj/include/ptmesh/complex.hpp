#pragma once

// Vertex/edge complex refined one surface at a time.
//
// The grid planes are laid down first by init_grid_complex; afterwards each
// neuron in phi order splits the edges it crosses and connects the new
// vertices that share a second surface and a region.

#include "ptmesh/network.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ptmesh
{
    struct ComplexOptions
    {
        double epsilon = 1e-4;
        double merge_tolerance = 1e-9;
        bool prune = false;
    };

    struct PassStats
    {
        int phi = -1;
        int splits = 0;
        int curved_splits = 0;    // splits solved on a diagonal plane
        int chord_splits = 0;     // splits solved along the straight edge
        int fallbacks = 0;        // diagonal planes all failed; chord estimate used
        int merged_vertices = 0;  // new vertices within merge tolerance of another
        int sign_conflicts = 0;   // endpoints disagreed on a processed neuron
        int new_edges = 0;
        int pruned_edges = 0;
        int crowded_groups = 0;   // polygon-edge groups with more than two vertices
    };

    struct ComplexState
    {
        int neurons = 0;     // sign/preactivation stride
        int mark_count = 0;
        int processed = -1;  // last phi applied

        std::vector<Vec3> positions;
        std::vector<std::array<int, 3>> grid;
        std::vector<std::int8_t> signs;  // vertex-major, stride `neurons`; valid up to `processed`
        std::vector<double> pre;         // vertex-major cached preactivations
        std::vector<std::array<int, 2>> edges;

        int vertex_count() const { return static_cast<int>(positions.size()); }
        int edge_count() const { return static_cast<int>(edges.size()); }
        std::int8_t sign(int v, int phi) const { return signs[static_cast<std::size_t>(v) * neurons + phi]; }
        double preactivation(int v, int phi) const { return pre[static_cast<std::size_t>(v) * neurons + phi]; }
        std::span<const double> preactivations(int v) const
        {
            return {pre.data() + static_cast<std::size_t>(v) * neurons, static_cast<std::size_t>(neurons)};
        }
        SignVector sign_vector(int v) const;

        /// Endpoints agree on every nonzero processed entry and share a grid cell.
        bool edge_is_consistent(int e) const;
    };

    /// Lattice of all mark triples joined along the axes. Sign data is left empty.
    ComplexState init_grid_complex(const std::vector<double> & marks);
    ComplexState init_grid_complex(const HashGridSpec & spec);
    /// Same lattice with cached preactivations for every vertex.
    ComplexState init_grid_complex(const TrilinearNetwork & net);

    /// Two grid codes can sit on one edge when no mark lies strictly between them.
    bool grid_codes_compatible(int a, int b);
    int merge_grid_code(int a, int b);

    /// Thales split point parameter |d0| / |d0 - d1|.
    double thales_weight(double d0, double d1);

    /// Split every edge whose endpoints take strictly opposite signs of
    /// neuron `phi`, placing vertices by Thales on the chord.
    PassStats subdivide_linear(ComplexState & state, const TrilinearNetwork & net, int phi, const ComplexOptions & options = {});

    /// Curved subdivision: edges lying on a processed neuron surface are cut
    /// where that surface meets `phi` on a diagonal plane of the edge box;
    /// the rest are cut where the trilinear field vanishes along the chord.
    PassStats subdivide_curved(ComplexState & state, const TrilinearNetwork & net, int phi, const ComplexOptions & options = {});

    /// Connect vertices on surface `phi` that share another surface and a region.
    /// Returns the number of edges added.
    int find_polygon_edges(ComplexState & state, std::span<const int> candidates, int phi, int * crowded_groups = nullptr);

    /// Remove edges whose endpoints agree, nonzero, on every neuron from `phi` on.
    /// Edges on the unit-cube walls are kept.
    int prune_edges(ComplexState & state, int phi, double eps);
}
