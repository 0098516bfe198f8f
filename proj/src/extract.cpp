#include "ptmesh/extract.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace ptmesh
{
    namespace
    {
        Vec3 newell_normal(const std::vector<Vec3> & pts)
        {
            Vec3 n = Vec3::Zero();
            for (std::size_t i = 0; i < pts.size(); ++i)
            {
                const Vec3 & a = pts[i];
                const Vec3 & b = pts[(i + 1) % pts.size()];
                n.x() += (a.y() - b.y()) * (a.z() + b.z());
                n.y() += (a.z() - b.z()) * (a.x() + b.x());
                n.z() += (a.x() - b.x()) * (a.y() + b.y());
            }
            return n;
        }

        // Splits an edge group into simple cycles; false when some vertex does not have degree two.
        bool decompose_cycles(const std::vector<std::array<int, 2>> & edges, std::vector<std::vector<int>> & cycles)
        {
            std::map<int, std::vector<int>> adj;
            std::set<std::pair<int, int>> seen;
            for (const auto & e : edges)
            {
                const auto key = std::minmax(e[0], e[1]);
                if (e[0] == e[1] || !seen.insert(key).second)
                {
                    continue;
                }
                adj[e[0]].push_back(e[1]);
                adj[e[1]].push_back(e[0]);
            }
            for (const auto & [v, nb] : adj)
            {
                if (nb.size() != 2)
                {
                    return false;
                }
            }
            std::set<int> visited;
            for (const auto & [start, nb] : adj)
            {
                if (visited.count(start))
                {
                    continue;
                }
                std::vector<int> cycle;
                int prev = -1, cur = start;
                do
                {
                    cycle.push_back(cur);
                    visited.insert(cur);
                    const auto & n = adj[cur];
                    const int next = n[0] != prev ? n[0] : n[1];
                    prev = cur;
                    cur = next;
                } while (cur != start);
                cycles.push_back(std::move(cycle));
            }
            return true;
        }

        bool follows_edges(const std::vector<int> & order, const std::set<std::pair<int, int>> & edge_set)
        {
            for (std::size_t i = 0; i < order.size(); ++i)
            {
                const auto key = std::minmax(order[i], order[(i + 1) % order.size()]);
                if (!edge_set.count({key.first, key.second}))
                {
                    return false;
                }
            }
            return true;
        }

        // Signature of an edge: merged grid codes then merged neuron signs below `limit`.
        std::vector<int> edge_signature(const ComplexState & state, int a, int b, int limit)
        {
            std::vector<int> sig(static_cast<std::size_t>(3 + limit));
            for (int j = 0; j < 3; ++j)
            {
                sig[static_cast<std::size_t>(j)] = merge_grid_code(state.grid[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)],
                                                                    state.grid[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
            }
            for (int k = 0; k < limit; ++k)
            {
                const int sa = state.sign(a, k), sb = state.sign(b, k);
                sig[static_cast<std::size_t>(3 + k)] = sa == 0 ? sb : sa;
            }
            return sig;
        }

        // Every region key adjacent to an edge: each zero entry (except `fixed_axis`) set to either side.
        void region_keys(const std::vector<int> & sig, int fixed_axis, int top, std::vector<std::vector<int>> & out)
        {
            std::vector<int> zeros;
            for (int j = 0; j < 3; ++j)
            {
                if (j != fixed_axis && sig[static_cast<std::size_t>(j)] % 2 == 0)
                {
                    zeros.push_back(j);
                }
            }
            for (std::size_t k = 3; k < sig.size(); ++k)
            {
                if (sig[k] == 0)
                {
                    zeros.push_back(static_cast<int>(k));
                }
            }
            if (zeros.size() > 3)
            {
                return;
            }
            for (int assign = 0; assign < (1 << zeros.size()); ++assign)
            {
                std::vector<int> key = sig;
                bool valid = true;
                for (std::size_t r = 0; r < zeros.size(); ++r)
                {
                    const int step = (assign >> r) & 1 ? 1 : -1;
                    const int z = zeros[r];
                    if (z < 3)
                    {
                        const int code = key[static_cast<std::size_t>(z)] + step;
                        if (code < 0 || code > top)
                        {
                            valid = false;
                            break;
                        }
                        key[static_cast<std::size_t>(z)] = code;
                    }
                    else
                    {
                        key[static_cast<std::size_t>(z)] = step;
                    }
                }
                if (valid)
                {
                    out.push_back(std::move(key));
                }
            }
        }

        void emit_group(const ComplexState & state, const std::vector<std::array<int, 2>> & edges, const Vec3 * fixed_normal, const TrilinearNetwork & net,
                        bool boundary, FaceSet & out, ExtractionStats * stats)
        {
            std::set<std::pair<int, int>> edge_set;
            std::set<int> verts;
            for (const auto & e : edges)
            {
                const auto key = std::minmax(e[0], e[1]);
                edge_set.insert({key.first, key.second});
                verts.insert(e[0]);
                verts.insert(e[1]);
            }
            if (verts.size() < 3)
            {
                if (stats)
                {
                    ++stats->dropped_groups;
                }
                return;
            }

            std::vector<std::vector<int>> cycles;
            const bool regular = decompose_cycles(edges, cycles);
            if (!regular)
            {
                cycles.assign(1, std::vector<int>(verts.begin(), verts.end()));
                if (stats)
                {
                    ++stats->irregular_faces;
                }
            }

            for (auto & cycle : cycles)
            {
                std::vector<Vec3> pts;
                Vec3 mean = Vec3::Zero();
                for (int v : cycle)
                {
                    pts.push_back(state.positions[static_cast<std::size_t>(v)]);
                    mean += pts.back();
                }
                mean /= static_cast<double>(pts.size());
                Vec3 n = fixed_normal ? *fixed_normal : net.gradient(mean);
                if (n.norm() == 0.0)
                {
                    n = newell_normal(pts);
                }
                if (n.norm() == 0.0)
                {
                    if (stats)
                    {
                        ++stats->dropped_groups;
                    }
                    continue;
                }
                n.normalize();

                // Angular order about the normal; keep the walk order if the sort breaks adjacency.
                const auto order = sort_polygon_vertices(pts, n);
                std::vector<int> sorted;
                for (int i : order)
                {
                    sorted.push_back(cycle[static_cast<std::size_t>(i)]);
                }
                std::vector<int> face;
                if (!regular || follows_edges(sorted, edge_set))
                {
                    face = std::move(sorted);
                }
                else
                {
                    face = cycle;
                    if (newell_normal(pts).dot(n) < 0.0)
                    {
                        std::reverse(face.begin(), face.end());
                    }
                }
                out.faces.push_back(std::move(face));
                out.normals.push_back(n);
                out.boundary.push_back(boundary);
            }
        }
    }

    int ExtractionStats::splits() const
    {
        int n = 0;
        for (const auto & p : passes)
        {
            n += p.splits;
        }
        return n;
    }

    int ExtractionStats::solved_splits() const
    {
        int n = 0;
        for (const auto & p : passes)
        {
            n += p.curved_splits + p.chord_splits;
        }
        return n;
    }

    int ExtractionStats::fallbacks() const
    {
        int n = 0;
        for (const auto & p : passes)
        {
            n += p.fallbacks;
        }
        return n;
    }

    double ExtractionStats::fallback_rate() const
    {
        const int s = solved_splits();
        return s == 0 ? 0.0 : static_cast<double>(fallbacks()) / s;
    }

    ComplexState build_complex(const TrilinearNetwork & net, const ExtractOptions & options, ExtractionStats * stats)
    {
        ComplexState state = init_grid_complex(net);
        ComplexOptions copts;
        copts.epsilon = options.epsilon;
        copts.prune = options.prune;
        for (int phi = 0; phi < net.neuron_count(); ++phi)
        {
            const PassStats p = subdivide_curved(state, net, phi, copts);
            if (stats)
            {
                stats->passes.push_back(p);
            }
        }
        if (stats)
        {
            stats->complex_vertices = state.vertex_count();
            stats->complex_edges = state.edge_count();
        }
        return state;
    }

    Skeleton skeletonize(const ComplexState & state, int output_phi, double eps)
    {
        Skeleton s;
        s.index_of.assign(static_cast<std::size_t>(state.vertex_count()), -1);
        for (int v = 0; v < state.vertex_count(); ++v)
        {
            if (std::abs(state.preactivation(v, output_phi)) <= eps)
            {
                s.index_of[static_cast<std::size_t>(v)] = static_cast<int>(s.vertices.size());
                s.vertices.push_back(v);
            }
        }
        for (const auto & e : state.edges)
        {
            if (s.index_of[static_cast<std::size_t>(e[0])] >= 0 && s.index_of[static_cast<std::size_t>(e[1])] >= 0)
            {
                s.edges.push_back(e);
            }
        }
        return s;
    }

    std::vector<double> polygon_angle_keys(const std::vector<Vec3> & points, const Vec3 & normal)
    {
        Vec3 mu = Vec3::Zero();
        for (const auto & p : points)
        {
            mu += p;
        }
        mu /= static_cast<double>(points.size());
        std::vector<Vec3> v;
        for (const auto & p : points)
        {
            const Vec3 d = p - mu;
            const double len = d.norm();
            v.push_back(len > 0.0 ? Vec3(d / len) : Vec3::Zero());
        }
        std::vector<double> theta;
        for (const auto & vi : v)
        {
            const double c = vi.dot(v[0]);
            const double d = vi.cross(v[0]).dot(normal);
            theta.push_back(c * (d >= 0.0 ? 1.0 : -1.0) + (d < 0.0 ? 2.0 : 0.0));
        }
        return theta;
    }

    std::vector<int> sort_polygon_vertices(const std::vector<Vec3> & points, const Vec3 & normal)
    {
        const auto theta = polygon_angle_keys(points, normal);
        std::vector<int> order(points.size());
        std::iota(order.begin(), order.end(), 0);
        // Ascending keys walk counter-clockwise about the normal, starting opposite vertex 0.
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return theta[static_cast<std::size_t>(a)] < theta[static_cast<std::size_t>(b)]; });
        return order;
    }

    FaceSet assemble_faces(const ComplexState & state, const Skeleton & skeleton, const TrilinearNetwork & net, const ExtractOptions & options,
                           ExtractionStats * stats)
    {
        FaceSet out;
        const int output = net.output_phi();
        const int top = 2 * (state.mark_count - 1);

        std::map<std::vector<int>, std::vector<std::array<int, 2>>> groups;
        std::vector<std::vector<int>> keys;
        for (const auto & e : skeleton.edges)
        {
            keys.clear();
            region_keys(edge_signature(state, e[0], e[1], output), -1, top, keys);
            if (keys.size() == 1 && keys[0] == edge_signature(state, e[0], e[1], output))
            {
                // no bounding surface besides the zero set itself
                continue;
            }
            for (auto & k : keys)
            {
                groups[std::move(k)].push_back(e);
            }
        }
        for (const auto & [key, edges] : groups)
        {
            emit_group(state, edges, nullptr, net, false, out, stats);
        }

        if (options.boundary_faces)
        {
            for (int axis = 0; axis < 3; ++axis)
            {
                for (int side = 0; side < 2; ++side)
                {
                    const int wall = side == 0 ? 0 : top;
                    Vec3 n = Vec3::Zero();
                    n[axis] = side == 0 ? -1.0 : 1.0;
                    std::map<std::vector<int>, std::vector<std::array<int, 2>>> caps;
                    for (const auto & e : state.edges)
                    {
                        if (state.grid[static_cast<std::size_t>(e[0])][static_cast<std::size_t>(axis)] != wall
                            || state.grid[static_cast<std::size_t>(e[1])][static_cast<std::size_t>(axis)] != wall)
                        {
                            continue;
                        }
                        if (state.sign(e[0], output) > 0 || state.sign(e[1], output) > 0)
                        {
                            continue;
                        }
                        keys.clear();
                        region_keys(edge_signature(state, e[0], e[1], output), axis, top, keys);
                        for (auto & k : keys)
                        {
                            caps[std::move(k)].push_back(e);
                        }
                    }
                    const std::size_t before = out.faces.size();
                    for (const auto & [key, edges] : caps)
                    {
                        emit_group(state, edges, &n, net, true, out, stats);
                    }
                    if (stats)
                    {
                        stats->boundary_faces += static_cast<int>(out.faces.size() - before);
                    }
                }
            }
        }
        return out;
    }

    void triangulate(ExtractedMesh & mesh)
    {
        std::vector<std::vector<int>> faces;
        std::vector<Vec3> normals;
        for (std::size_t f = 0; f < mesh.faces.size(); ++f)
        {
            const auto & poly = mesh.faces[f];
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
            {
                faces.push_back({poly[0], poly[i], poly[i + 1]});
                normals.push_back(mesh.normals[f]);
            }
        }
        mesh.faces = std::move(faces);
        mesh.normals = std::move(normals);
    }

    ExtractedMesh extract(const TrilinearNetwork & net, const ExtractOptions & options, ExtractionStats * stats)
    {
        ExtractionStats local;
        ExtractionStats & st = stats ? *stats : local;
        const ComplexState state = build_complex(net, options, &st);
        const Skeleton skeleton = skeletonize(state, net.output_phi(), options.epsilon);
        st.skeleton_vertices = static_cast<int>(skeleton.vertices.size());
        st.skeleton_edges = static_cast<int>(skeleton.edges.size());

        ExtractedMesh mesh;
        if (skeleton.vertices.empty())
        {
            return mesh;
        }
        const FaceSet faces = assemble_faces(state, skeleton, net, options, &st);

        std::vector<int> index_of = skeleton.index_of;
        for (int v : skeleton.vertices)
        {
            mesh.vertices.push_back(state.positions[static_cast<std::size_t>(v)]);
            mesh.signs.push_back(state.sign_vector(v));
        }
        mesh.skeleton_vertex_count = static_cast<int>(mesh.vertices.size());
        for (const auto & e : skeleton.edges)
        {
            mesh.edges.push_back({index_of[static_cast<std::size_t>(e[0])], index_of[static_cast<std::size_t>(e[1])]});
        }
        for (std::size_t f = 0; f < faces.faces.size(); ++f)
        {
            std::vector<int> poly;
            for (int v : faces.faces[f])
            {
                int & id = index_of[static_cast<std::size_t>(v)];
                if (id < 0)
                {
                    id = static_cast<int>(mesh.vertices.size());
                    mesh.vertices.push_back(state.positions[static_cast<std::size_t>(v)]);
                }
                poly.push_back(id);
            }
            mesh.faces.push_back(std::move(poly));
            mesh.normals.push_back(faces.normals[f]);
        }
        st.faces = static_cast<int>(mesh.faces.size());
        if (options.triangulate)
        {
            triangulate(mesh);
        }
        return mesh;
    }
}
