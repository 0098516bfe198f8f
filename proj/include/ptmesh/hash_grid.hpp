#pragma once

// Multi-resolution trilinear hash-grid encoding.
//
// Level l lays a lattice with step s_l = 1 / scale_l over the unit cube,
// scale_l = n_min * 2^(l*b) - 1, shifted by half a step: lattice point k sits
// at (k - 1/2) / scale_l. A point is encoded per level by trilinear
// interpolation of the eight lattice-corner feature vectors around it and
// the levels are concatenated in ascending order.

#include "ptmesh/trilinear.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ptmesh
{
    struct HashGridSpec
    {
        int levels = 1;
        int features_per_level = 1;
        int n_min = 2;
        int n_max = 2;
        std::vector<std::int64_t> table_sizes;  // one per level

        /// b = log2(n_max / n_min) / (levels - 1), or 0 for one level.
        double level_exponent() const;
        /// n_min * 2^(l b) - 1; the lattice step is its reciprocal.
        double level_scale(int level) const;
        double level_step(int level) const { return 1.0 / level_scale(level); }
        /// Index of the last lattice cell reached by x = 1.
        int last_cell(int level) const;
        /// Lattice corners per axis.
        int level_resolution(int level) const { return last_cell(level) + 2; }
        /// True when every lattice corner fits in the table without hashing.
        bool level_is_dense(int level) const;
        int output_dim() const { return levels * features_per_level; }

        void validate() const;

        /// Convenience: every level gets the same table size.
        static HashGridSpec uniform(int levels, int features_per_level, int n_min, int n_max, std::int64_t table_size);
    };

    /// Per-level feature tables, each table_size x features_per_level.
    using FeatureTables = std::vector<Eigen::MatrixXd>;

    /// Sorted grid-plane positions shared by all levels, always containing 0 and 1.
    std::vector<double> grid_marks(const HashGridSpec & spec);

    /// (ix * 1 ^ iy * 2654435761 ^ iz * 805459861) mod table_size, in 32-bit arithmetic.
    std::uint32_t corner_hash(const Eigen::Vector3i & corner, std::int64_t table_size);

    /// Clipped lattice cell of one level containing a point.
    struct LevelCell
    {
        Eigen::Vector3i index;  // lattice cell (its corner with the smallest coordinates)
        Vec3 lower;             // clipped cell bounds inside [0,1]
        Vec3 upper;
        Vec3 weight;            // (x - lower) / (upper - lower)
    };

    class HashGridEncoder
    {
    public:
        HashGridEncoder() = default;
        HashGridEncoder(HashGridSpec spec, FeatureTables tables);

        const HashGridSpec & spec() const { return spec_; }
        const FeatureTables & tables() const { return tables_; }
        int output_dim() const { return spec_.output_dim(); }

        /// Table row holding the features of a lattice corner.
        std::int64_t table_index(int level, const Eigen::Vector3i & corner) const;

        Eigen::VectorXd encode(const Vec3 & x) const;
        /// Encoding and its Jacobian d(encoding)/dx (output_dim x 3).
        Eigen::VectorXd encode(const Vec3 & x, Eigen::MatrixX3d & jacobian) const;

        std::vector<LevelCell> cell_of(const Vec3 & x) const;

    private:
        void lattice_position(int level, const Vec3 & x, Eigen::Vector3i & cell, Vec3 & weight) const;

        HashGridSpec spec_;
        FeatureTables tables_;
    };

    class CorruptWeightsError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}
