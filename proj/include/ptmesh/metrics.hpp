#pragma once

// Surface sampling and mesh-quality metrics.

#include "ptmesh/marching_cubes.hpp"
#include "ptmesh/mesh.hpp"
#include "ptmesh/network.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace ptmesh
{
    using PointSet = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

    struct SampledSurface
    {
        PointSet points;
        PointSet normals;  // empty or one unit normal per point
        long requested = 0;

        long size() const { return static_cast<long>(points.rows()); }
        bool has_normals() const { return normals.rows() == points.rows() && points.rows() > 0; }
    };

    /// Exact nearest-neighbour queries on a uniform bucket grid; small sets are scanned.
    class PointIndex
    {
    public:
        static constexpr long kBruteForceBelow = 2000;

        explicit PointIndex(const PointSet & points);

        /// Index and squared distance of the closest point.
        std::pair<long, double> nearest(const Vec3 & q) const;
        std::pair<long, double> nearest_brute_force(const Vec3 & q) const;

    private:
        PointSet points_;
        Vec3 lo_ = Vec3::Zero();
        double cell_ = 1.0;
        std::array<int, 3> dims_ {1, 1, 1};
        std::vector<long> start_;
        std::vector<long> order_;
        bool brute_ = true;
    };

    /// Half the sum of the mean squared nearest distances in both directions.
    double chamfer(const PointSet & a, const PointSet & b);
    double chamfer_brute_force(const PointSet & a, const PointSet & b);

    /// 100 / sqrt(nvertices * cd); +infinity when cd is zero.
    double chamfer_efficiency(double nvertices, double cd);

    /// Mean angle in degrees between paired unit normals.
    double angular_distance(const PointSet & n0, const PointSet & n1);
    /// Normals paired by nearest point, averaged over both directions.
    double angular_distance_nearest(const SampledSurface & a, const SampledSurface & b);

    /// Planarity defect of one box from its corner values v1..v6.
    double flatness_term(const Corners & v);
    /// Mean flatness term of the output over the boxes spanned by edges.
    double flatness_error(const TrilinearNetwork & net, const std::vector<std::array<Vec3, 2>> & edges, double eps = 1e-4);

    /// Mean squared network output over points.
    double surface_sdf_error(const TrilinearNetwork & net, const PointSet & points);

    /// Area-weighted uniform samples on the faces, with face normals.
    SampledSurface sample_mesh(const PolygonMesh & mesh, long n, std::uint64_t seed);

    /// Sphere tracing from `origin` along random directions; hits are refined by
    /// bisection to `tolerance`. Normals come from central differences.
    SampledSurface sample_field(const ScalarField & field, long n, std::uint64_t seed, const Vec3 & origin = Vec3::Constant(0.5),
                                double tolerance = 1e-6);
}
