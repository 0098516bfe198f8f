#include "ptmesh/metrics.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ptmesh
{
    std::size_t PolygonMesh::triangle_count() const
    {
        std::size_t n = 0;
        for (const auto & f : faces)
        {
            n += f.size() >= 3 ? f.size() - 2 : 0;
        }
        return n;
    }

    EulerCounts euler_counts(const PolygonMesh & mesh)
    {
        EulerCounts c;
        std::map<std::pair<int, int>, int> uses;
        std::vector<bool> used(mesh.vertices.size(), false);
        for (const auto & f : mesh.faces)
        {
            for (std::size_t i = 1; i + 1 < f.size(); ++i)
            {
                const std::array<int, 3> tri {f[0], f[i], f[i + 1]};
                ++c.faces;
                for (int k = 0; k < 3; ++k)
                {
                    const auto e = std::minmax(tri[static_cast<std::size_t>(k)], tri[static_cast<std::size_t>((k + 1) % 3)]);
                    ++uses[{e.first, e.second}];
                    used[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])] = true;
                }
            }
        }
        c.vertices = std::count(used.begin(), used.end(), true);
        c.edges = static_cast<long>(uses.size());
        for (const auto & [e, n] : uses)
        {
            c.boundary_edges += n == 1;
            c.nonmanifold_edges += n > 2;
        }
        return c;
    }

    PointIndex::PointIndex(const PointSet & points) : points_(points)
    {
        const long n = points_.rows();
        if (n == 0)
        {
            throw std::invalid_argument("point index needs at least one point");
        }
        brute_ = n < kBruteForceBelow;
        if (brute_)
        {
            return;
        }
        lo_ = points_.colwise().minCoeff().transpose();
        const Vec3 hi = points_.colwise().maxCoeff().transpose();
        const double extent = std::max((hi - lo_).maxCoeff(), 1e-12);
        const int per_axis = std::clamp(static_cast<int>(2.0 * std::cbrt(static_cast<double>(n))), 1, 256);
        cell_ = extent / per_axis;
        for (int j = 0; j < 3; ++j)
        {
            dims_[static_cast<std::size_t>(j)] = std::clamp(static_cast<int>((hi[j] - lo_[j]) / cell_) + 1, 1, per_axis + 1);
        }
        const long cells = static_cast<long>(dims_[0]) * dims_[1] * dims_[2];
        std::vector<long> cell_of(static_cast<std::size_t>(n));
        start_.assign(static_cast<std::size_t>(cells + 1), 0);
        for (long i = 0; i < n; ++i)
        {
            long id = 0;
            for (int j = 2; j >= 0; --j)
            {
                const int c = std::clamp(static_cast<int>((points_(i, j) - lo_[j]) / cell_), 0, dims_[static_cast<std::size_t>(j)] - 1);
                id = id * dims_[static_cast<std::size_t>(j)] + c;
            }
            cell_of[static_cast<std::size_t>(i)] = id;
            ++start_[static_cast<std::size_t>(id + 1)];
        }
        for (long c = 0; c < cells; ++c)
        {
            start_[static_cast<std::size_t>(c + 1)] += start_[static_cast<std::size_t>(c)];
        }
        order_.resize(static_cast<std::size_t>(n));
        std::vector<long> fill(start_.begin(), start_.end() - 1);
        for (long i = 0; i < n; ++i)
        {
            order_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(i)])]++)] = i;
        }
    }

    std::pair<long, double> PointIndex::nearest_brute_force(const Vec3 & q) const
    {
        long best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (long i = 0; i < points_.rows(); ++i)
        {
            const double d = (points_.row(i).transpose() - q).squaredNorm();
            if (d < best_d)
            {
                best_d = d;
                best = i;
            }
        }
        return {best, best_d};
    }

    std::pair<long, double> PointIndex::nearest(const Vec3 & q) const
    {
        if (brute_)
        {
            return nearest_brute_force(q);
        }
        std::array<int, 3> c {};
        for (int j = 0; j < 3; ++j)
        {
            c[static_cast<std::size_t>(j)] = std::clamp(static_cast<int>(std::floor((q[j] - lo_[j]) / cell_)), 0, dims_[static_cast<std::size_t>(j)] - 1);
        }
        const int max_r = std::max({dims_[0], dims_[1], dims_[2]});
        long best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int r = 0; r <= max_r; ++r)
        {
            for (int z = c[2] - r; z <= c[2] + r; ++z)
            {
                if (z < 0 || z >= dims_[2])
                {
                    continue;
                }
                for (int y = c[1] - r; y <= c[1] + r; ++y)
                {
                    if (y < 0 || y >= dims_[1])
                    {
                        continue;
                    }
                    const bool edge_yz = std::abs(z - c[2]) == r || std::abs(y - c[1]) == r;
                    for (int x = c[0] - r; x <= c[0] + r; x += (edge_yz || r == 0) ? 1 : 2 * r)
                    {
                        if (x < 0 || x >= dims_[0])
                        {
                            continue;
                        }
                        const long id = (static_cast<long>(z) * dims_[1] + y) * dims_[0] + x;
                        for (long k = start_[static_cast<std::size_t>(id)]; k < start_[static_cast<std::size_t>(id + 1)]; ++k)
                        {
                            const long i = order_[static_cast<std::size_t>(k)];
                            const double d = (points_.row(i).transpose() - q).squaredNorm();
                            if (d < best_d || (d == best_d && i < best))
                            {
                                best_d = d;
                                best = i;
                            }
                        }
                    }
                }
            }
            // distance from q to the outside of the searched block bounds every unvisited point
            double margin = std::numeric_limits<double>::infinity();
            for (int j = 0; j < 3; ++j)
            {
                const double lo = lo_[j] + (c[static_cast<std::size_t>(j)] - r) * cell_;
                const double hi = lo_[j] + (c[static_cast<std::size_t>(j)] + r + 1) * cell_;
                if (c[static_cast<std::size_t>(j)] - r > 0)
                {
                    margin = std::min(margin, q[j] - lo);
                }
                if (c[static_cast<std::size_t>(j)] + r + 1 < dims_[static_cast<std::size_t>(j)])
                {
                    margin = std::min(margin, hi - q[j]);
                }
            }
            if (best >= 0 && (margin == std::numeric_limits<double>::infinity() || (margin > 0.0 && best_d <= margin * margin)))
            {
                break;
            }
        }
        return {best, best_d};
    }

    namespace
    {
        double mean_nearest(const PointSet & from, const PointIndex & to)
        {
            double sum = 0.0;
            for (long i = 0; i < from.rows(); ++i)
            {
                sum += to.nearest(from.row(i).transpose()).second;
            }
            return sum / static_cast<double>(from.rows());
        }

        double mean_nearest_brute(const PointSet & from, const PointSet & to)
        {
            double sum = 0.0;
            for (long i = 0; i < from.rows(); ++i)
            {
                double best = std::numeric_limits<double>::infinity();
                for (long k = 0; k < to.rows(); ++k)
                {
                    best = std::min(best, (from.row(i) - to.row(k)).squaredNorm());
                }
                sum += best;
            }
            return sum / static_cast<double>(from.rows());
        }

        void require_nonempty(const PointSet & a, const PointSet & b)
        {
            if (a.rows() == 0 || b.rows() == 0)
            {
                throw std::invalid_argument("chamfer distance needs two nonempty point sets");
            }
        }
    }

    double chamfer(const PointSet & a, const PointSet & b)
    {
        require_nonempty(a, b);
        const PointIndex ia(a), ib(b);
        return 0.5 * (mean_nearest(a, ib) + mean_nearest(b, ia));
    }

    double chamfer_brute_force(const PointSet & a, const PointSet & b)
    {
        require_nonempty(a, b);
        return 0.5 * (mean_nearest_brute(a, b) + mean_nearest_brute(b, a));
    }

    double chamfer_efficiency(double nvertices, double cd)
    {
        if (nvertices <= 0.0 || cd < 0.0)
        {
            throw std::invalid_argument("chamfer efficiency needs positive vertex count and nonnegative distance");
        }
        if (cd == 0.0)
        {
            return std::numeric_limits<double>::infinity();
        }
        return 100.0 / std::sqrt(nvertices * cd);
    }

    double angular_distance(const PointSet & n0, const PointSet & n1)
    {
        if (n0.rows() != n1.rows() || n0.rows() == 0)
        {
            throw std::invalid_argument("angular distance needs equally many paired normals");
        }
        double sum = 0.0;
        for (long i = 0; i < n0.rows(); ++i)
        {
            const double c = std::clamp(n0.row(i).dot(n1.row(i)), -1.0, 1.0);
            sum += std::acos(c);
        }
        return sum / static_cast<double>(n0.rows()) * 180.0 / std::numbers::pi;
    }

    double angular_distance_nearest(const SampledSurface & a, const SampledSurface & b)
    {
        if (!a.has_normals() || !b.has_normals())
        {
            throw std::invalid_argument("angular distance needs normals on both samples");
        }
        auto paired = [](const SampledSurface & from, const SampledSurface & to) {
            const PointIndex index(to.points);
            PointSet matched(from.size(), 3);
            for (long i = 0; i < from.size(); ++i)
            {
                matched.row(i) = to.normals.row(index.nearest(from.points.row(i).transpose()).first);
            }
            return angular_distance(from.normals, matched);
        };
        return 0.5 * (paired(a, b) + paired(b, a));
    }

    double flatness_term(const Corners & v)
    {
        return 0.25 * (std::abs(v[1] + v[2] + v[4]) + std::abs(v[3] + v[5] + v[6]))
               + (std::abs(v[1] + v[6]) + std::abs(v[2] + v[5]) + std::abs(v[3] + v[4])) / 6.0;
    }

    double flatness_error(const TrilinearNetwork & net, const std::vector<std::array<Vec3, 2>> & edges, double eps)
    {
        if (edges.empty())
        {
            return 0.0;
        }
        double sum = 0.0;
        for (const auto & e : edges)
        {
            const auto mask = net.edge_mask(net.preactivations(e[0]).head(net.hidden_count()), net.preactivations(e[1]).head(net.hidden_count()), eps);
            const Corners v = net.masked_corner_preactivations(e[0], e[1], mask).col(net.output_phi());
            sum += flatness_term(v);
        }
        return sum / static_cast<double>(edges.size());
    }

    double surface_sdf_error(const TrilinearNetwork & net, const PointSet & points)
    {
        if (points.rows() == 0)
        {
            return 0.0;
        }
        double sum = 0.0;
        for (long i = 0; i < points.rows(); ++i)
        {
            const double f = net.forward(points.row(i).transpose());
            sum += f * f;
        }
        return sum / static_cast<double>(points.rows());
    }

    SampledSurface sample_mesh(const PolygonMesh & mesh, long n, std::uint64_t seed)
    {
        if (n < 1)
        {
            throw std::invalid_argument("sample count must be positive");
        }
        struct Tri
        {
            Vec3 a, b, c, normal;
        };
        std::vector<Tri> tris;
        std::vector<double> cumulative;
        double total = 0.0;
        for (std::size_t f = 0; f < mesh.faces.size(); ++f)
        {
            const auto & poly = mesh.faces[f];
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
            {
                Tri t {mesh.vertices[static_cast<std::size_t>(poly[0])], mesh.vertices[static_cast<std::size_t>(poly[i])],
                       mesh.vertices[static_cast<std::size_t>(poly[i + 1])], Vec3::Zero()};
                const Vec3 cross = (t.b - t.a).cross(t.c - t.a);
                const double area = 0.5 * cross.norm();
                if (!(area > 0.0))
                {
                    continue;
                }
                t.normal = f < mesh.normals.size() ? mesh.normals[f].normalized() : Vec3(cross.normalized());
                tris.push_back(t);
                total += area;
                cumulative.push_back(total);
            }
        }
        if (tris.empty())
        {
            throw std::invalid_argument("mesh has no area to sample");
        }
        SampledSurface s;
        s.requested = n;
        s.points.resize(n, 3);
        s.normals.resize(n, 3);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (long i = 0; i < n; ++i)
        {
            const double pick = uni(rng) * total;
            const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin()),
                                                        tris.size() - 1);
            const double r1 = std::sqrt(uni(rng)), r2 = uni(rng);
            const Tri & tri = tris[t];
            s.points.row(i) = ((1.0 - r1) * tri.a + r1 * (1.0 - r2) * tri.b + r1 * r2 * tri.c).transpose();
            s.normals.row(i) = tri.normal.transpose();
        }
        return s;
    }

    SampledSurface sample_field(const ScalarField & field, long n, std::uint64_t seed, const Vec3 & origin, double tolerance)
    {
        if (n < 1)
        {
            throw std::invalid_argument("sample count must be positive");
        }
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<Vec3> hits, normals;
        const double f0 = field(origin);
        const long max_rays = 10 * n;
        for (long ray = 0; ray < max_rays && static_cast<long>(hits.size()) < n; ++ray)
        {
            Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
            if (dir.norm() == 0.0)
            {
                continue;
            }
            dir.normalize();
            // ray length until it leaves the unit cube
            double t_exit = std::numeric_limits<double>::infinity();
            for (int j = 0; j < 3; ++j)
            {
                if (dir[j] > 0.0)
                {
                    t_exit = std::min(t_exit, (1.0 - origin[j]) / dir[j]);
                }
                else if (dir[j] < 0.0)
                {
                    t_exit = std::min(t_exit, -origin[j] / dir[j]);
                }
            }
            double t = 0.0, ft = f0;
            bool hit = false;
            for (int it = 0; it < 10000 && t < t_exit; ++it)
            {
                const double step = std::max(std::abs(ft), tolerance);
                const double tn = std::min(t + step, t_exit);
                const double fn = field(origin + tn * dir);
                if ((fn < 0.0) != (f0 < 0.0) || fn == 0.0)
                {
                    double lo = t, hi = tn;
                    while (hi - lo > tolerance * 1e-3)
                    {
                        const double mid = 0.5 * (lo + hi);
                        if ((field(origin + mid * dir) < 0.0) == (f0 < 0.0) && field(origin + mid * dir) != 0.0)
                        {
                            lo = mid;
                        }
                        else
                        {
                            hi = mid;
                        }
                    }
                    const Vec3 p = origin + 0.5 * (lo + hi) * dir;
                    hits.push_back(p);
                    hit = true;
                    break;
                }
                if (tn >= t_exit)
                {
                    break;
                }
                t = tn;
                ft = fn;
            }
            if (hit)
            {
                const Vec3 & p = hits.back();
                const double h = 1e-6;
                Vec3 g;
                for (int j = 0; j < 3; ++j)
                {
                    Vec3 a = p, b = p;
                    a[j] = std::clamp(a[j] + h, 0.0, 1.0);
                    b[j] = std::clamp(b[j] - h, 0.0, 1.0);
                    g[j] = (field(a) - field(b)) / (a[j] - b[j]);
                }
                normals.push_back(g.norm() > 0.0 ? Vec3(g.normalized()) : dir);
            }
        }
        SampledSurface s;
        s.requested = n;
        s.points.resize(static_cast<long>(hits.size()), 3);
        s.normals.resize(static_cast<long>(hits.size()), 3);
        for (std::size_t i = 0; i < hits.size(); ++i)
        {
            s.points.row(static_cast<long>(i)) = hits[i].transpose();
            s.normals.row(static_cast<long>(i)) = normals[i].transpose();
        }
        return s;
    }
}
