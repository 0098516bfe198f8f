#include "ptmesh/marching_cubes.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace ptmesh
{
    namespace
    {
        // classic corner order -> (x,y,z) bits
        constexpr std::array<std::array<int, 3>, 8> kClassicCorner {{
            {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
        }};
        constexpr std::array<std::array<int, 2>, 12> kClassicEdge {{
            {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
        }};

        std::array<std::uint16_t, 256> build_edge_table()
        {
            std::array<std::uint16_t, 256> t {};
            for (int c = 0; c < 256; ++c)
            {
                std::uint16_t mask = 0;
                for (int e = 0; e < 12; ++e)
                {
                    const bool a = (c >> kClassicEdge[static_cast<std::size_t>(e)][0]) & 1;
                    const bool b = (c >> kClassicEdge[static_cast<std::size_t>(e)][1]) & 1;
                    if (a != b)
                    {
                        mask = static_cast<std::uint16_t>(mask | (1u << e));
                    }
                }
                t[static_cast<std::size_t>(c)] = mask;
            }
            return t;
        }

        // bit-encoded corner (bit0 = x) of a classic corner
        int corner_bits(int classic)
        {
            const auto & c = kClassicCorner[static_cast<std::size_t>(classic)];
            return c[0] | (c[1] << 1) | (c[2] << 2);
        }

        struct Face
        {
            std::array<int, 4> corners;  // bit-encoded, counter-clockwise seen from outside the cube
        };

        std::array<Face, 6> cube_faces()
        {
            std::array<Face, 6> faces {};
            int f = 0;
            for (int a = 0; a < 3; ++a)
            {
                const int u = (a + 1) % 3, v = (a + 2) % 3;
                for (int side = 0; side < 2; ++side)
                {
                    const std::array<std::array<int, 2>, 4> square {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
                    Face face {};
                    for (int m = 0; m < 4; ++m)
                    {
                        const auto & uv = square[static_cast<std::size_t>(side == 1 ? m : 3 - m)];
                        face.corners[static_cast<std::size_t>(m)] = (side << a) | (uv[0] << u) | (uv[1] << v);
                    }
                    faces[static_cast<std::size_t>(f++)] = face;
                }
            }
            return faces;
        }
    }

    const std::array<std::uint16_t, 256> & marching_cubes_edge_table()
    {
        static const std::array<std::uint16_t, 256> table = build_edge_table();
        return table;
    }

    std::uint32_t edge_table_checksum(const std::array<std::uint16_t, 256> & table)
    {
        std::uint32_t h = 2166136261u;
        for (std::uint16_t v : table)
        {
            for (int b = 0; b < 2; ++b)
            {
                h ^= static_cast<std::uint8_t>(v >> (8 * b));
                h *= 16777619u;
            }
        }
        return h;
    }

    PolygonMesh marching_cubes(const ScalarField & field, int resolution, double iso)
    {
        if (resolution < 2)
        {
            throw std::invalid_argument("marching cubes needs at least two samples per axis");
        }
        const int r = resolution;
        const double h = 1.0 / (r - 1);
        const auto & table = marching_cubes_edge_table();
        static const std::array<Face, 6> faces = cube_faces();

        auto sample_slice = [&](int k, std::vector<double> & out) {
            out.resize(static_cast<std::size_t>(r) * r);
            for (int j = 0; j < r; ++j)
            {
                for (int i = 0; i < r; ++i)
                {
                    out[static_cast<std::size_t>(i + r * j)] = field(Vec3(i * h, j * h, k * h)) - iso;
                }
            }
        };

        PolygonMesh mesh;
        std::unordered_map<std::uint64_t, int> vertex_of_edge;
        std::vector<double> lower, upper;
        sample_slice(0, lower);

        std::array<double, 8> val {};
        for (int k = 0; k + 1 < r; ++k)
        {
            sample_slice(k + 1, upper);
            for (int j = 0; j + 1 < r; ++j)
            {
                for (int i = 0; i + 1 < r; ++i)
                {
                    int cls = 0;
                    for (int c = 0; c < 8; ++c)
                    {
                        const int bits = corner_bits(c);
                        const auto & slice = (bits & 4) ? upper : lower;
                        const double v = slice[static_cast<std::size_t>((i + (bits & 1)) + r * (j + ((bits >> 1) & 1)))];
                        val[static_cast<std::size_t>(bits)] = v;
                        if (v < 0.0)
                        {
                            cls |= 1 << c;
                        }
                    }
                    const std::uint16_t crossed = table[static_cast<std::size_t>(cls)];
                    if (crossed == 0)
                    {
                        continue;
                    }

                    // vertex id for the crossing between two adjacent bit-encoded corners
                    auto crossing = [&](int ca, int cb) {
                        if (ca > cb)
                        {
                            std::swap(ca, cb);
                        }
                        const int axis = (cb ^ ca) == 1 ? 0 : ((cb ^ ca) == 2 ? 1 : 2);
                        const std::uint64_t node = static_cast<std::uint64_t>(i + (ca & 1))
                                                   + static_cast<std::uint64_t>(r) * (static_cast<std::uint64_t>(j + ((ca >> 1) & 1))
                                                                                      + static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(k + ((ca >> 2) & 1)));
                        const std::uint64_t key = node * 3 + static_cast<std::uint64_t>(axis);
                        auto [it, inserted] = vertex_of_edge.try_emplace(key, static_cast<int>(mesh.vertices.size()));
                        if (inserted)
                        {
                            const double fa = val[static_cast<std::size_t>(ca)], fb = val[static_cast<std::size_t>(cb)];
                            const double t = std::clamp(fa / (fa - fb), 0.0, 1.0);
                            Vec3 p(i + (ca & 1), j + ((ca >> 1) & 1), k + ((ca >> 2) & 1));
                            p[axis] += t;
                            mesh.vertices.push_back(p * h);
                        }
                        return it->second;
                    };

                    // Segments on each cube face run from a leaving crossing to an entering one.
                    std::unordered_map<int, std::pair<int, int>> link;  // start -> (end, cube face)
                    for (int fi = 0; fi < 6; ++fi)
                    {
                        const Face & f = faces[static_cast<std::size_t>(fi)];
                        std::array<int, 4> pid {};
                        std::array<bool, 4> enter {};
                        int n = 0;
                        int first_enter = -1;
                        for (int m = 0; m < 4; ++m)
                        {
                            const int ca = f.corners[static_cast<std::size_t>(m)];
                            const int cb = f.corners[static_cast<std::size_t>((m + 1) % 4)];
                            const bool ia = val[static_cast<std::size_t>(ca)] < 0.0;
                            const bool ib = val[static_cast<std::size_t>(cb)] < 0.0;
                            if (ia == ib)
                            {
                                continue;
                            }
                            pid[static_cast<std::size_t>(n)] = crossing(ca, cb);
                            enter[static_cast<std::size_t>(n)] = ib;
                            if (ib && first_enter < 0)
                            {
                                first_enter = n;
                            }
                            ++n;
                        }
                        if (n == 2)
                        {
                            const int e = enter[0] ? 0 : 1;
                            link[pid[static_cast<std::size_t>(1 - e)]] = {pid[static_cast<std::size_t>(e)], fi};
                        }
                        else if (n == 4)
                        {
                            std::array<int, 4> p {};
                            for (int m = 0; m < 4; ++m)
                            {
                                p[static_cast<std::size_t>(m)] = pid[static_cast<std::size_t>((first_enter + m) % 4)];
                            }
                            // p = E1, L1, E2, L2
                            const double a = val[static_cast<std::size_t>(f.corners[0])], b = val[static_cast<std::size_t>(f.corners[1])];
                            const double c = val[static_cast<std::size_t>(f.corners[2])], d = val[static_cast<std::size_t>(f.corners[3])];
                            const double denom = a + c - b - d;
                            const bool inside_joined = denom != 0.0 && (a * c - b * d) / denom < 0.0;
                            if (inside_joined)
                            {
                                link[p[1]] = {p[2], fi};
                                link[p[3]] = {p[0], fi};
                            }
                            else
                            {
                                link[p[1]] = {p[0], fi};
                                link[p[3]] = {p[2], fi};
                            }
                        }
                    }

                    // Chain the segments into loops and fan them.
                    while (!link.empty())
                    {
                        int start = link.begin()->first;
                        for (const auto & entry : link)
                        {
                            start = std::min(start, entry.first);
                        }
                        std::vector<int> loop;
                        int face_mask = 0;
                        bool face_repeats = false;
                        int cur = start;
                        while (true)
                        {
                            auto it = link.find(cur);
                            if (it == link.end())
                            {
                                break;
                            }
                            loop.push_back(cur);
                            face_repeats = face_repeats || (face_mask >> it->second.second) & 1;
                            face_mask |= 1 << it->second.second;
                            cur = it->second.first;
                            link.erase(it);
                        }
                        if (loop.size() < 3)
                        {
                            continue;
                        }
                        // reverse so the fan normal points toward larger values
                        std::reverse(loop.begin(), loop.end());
                        if (!face_repeats)
                        {
                            for (std::size_t m = 1; m + 1 < loop.size(); ++m)
                            {
                                mesh.faces.push_back({loop[0], loop[m], loop[m + 1]});
                            }
                            continue;
                        }
                        // A loop crossing one cube face twice would put a fan diagonal on that
                        // face, where the neighbouring cube may add the same edge. Fan around
                        // the centroid instead.
                        Vec3 mid = Vec3::Zero();
                        for (int v : loop)
                        {
                            mid += mesh.vertices[static_cast<std::size_t>(v)];
                        }
                        const int centre = static_cast<int>(mesh.vertices.size());
                        mesh.vertices.push_back(mid / static_cast<double>(loop.size()));
                        for (std::size_t m = 0; m < loop.size(); ++m)
                        {
                            mesh.faces.push_back({centre, loop[m], loop[(m + 1) % loop.size()]});
                        }
                    }
                }
            }
            std::swap(lower, upper);
        }
        mesh.normals.reserve(mesh.faces.size());
        for (const auto & f : mesh.faces)
        {
            const Vec3 & a = mesh.vertices[static_cast<std::size_t>(f[0])];
            const Vec3 n = (mesh.vertices[static_cast<std::size_t>(f[1])] - a).cross(mesh.vertices[static_cast<std::size_t>(f[2])] - a);
            mesh.normals.push_back(n.stableNormalized());
        }
        return mesh;
    }
}
