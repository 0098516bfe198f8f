#include "ptmesh/complex.hpp"

#include "ptmesh/intersect.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace ptmesh
{
    namespace
    {
        std::uint64_t edge_key(int a, int b)
        {
            const auto lo = static_cast<std::uint32_t>(std::min(a, b));
            const auto hi = static_cast<std::uint32_t>(std::max(a, b));
            return (std::uint64_t(lo) << 32) | hi;
        }

        struct Split
        {
            int edge;
            Vec3 point;
        };

        bool on_wall(int code, int mark_count) { return code == 0 || code == 2 * (mark_count - 1); }

        // Pair vertices of an oversized group along their principal direction.
        void pair_along_principal_axis(const ComplexState & state, std::vector<int> group, std::vector<std::array<int, 2>> & out)
        {
            Vec3 mean = Vec3::Zero();
            for (int v : group)
            {
                mean += state.positions[static_cast<std::size_t>(v)];
            }
            mean /= static_cast<double>(group.size());
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (int v : group)
            {
                const Vec3 d = state.positions[static_cast<std::size_t>(v)] - mean;
                cov += d * d.transpose();
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
            const Vec3 axis = eig.eigenvectors().col(2);
            std::stable_sort(group.begin(), group.end(), [&](int a, int b) {
                return state.positions[static_cast<std::size_t>(a)].dot(axis) < state.positions[static_cast<std::size_t>(b)].dot(axis);
            });
            for (std::size_t i = 0; i + 1 < group.size(); i += 2)
            {
                out.push_back({group[i], group[i + 1]});
            }
        }

        PassStats run_pass(ComplexState & state, const TrilinearNetwork & net, int phi, const ComplexOptions & options, bool curved)
        {
            if (state.neurons != net.neuron_count())
            {
                throw std::invalid_argument("complex was not initialised for this network");
            }
            if (phi != state.processed + 1)
            {
                throw std::logic_error("neurons must be processed in phi order");
            }
            const int n = state.neurons;
            const double eps = options.epsilon;
            PassStats stats;
            stats.phi = phi;

            for (int v = 0; v < state.vertex_count(); ++v)
            {
                state.signs[static_cast<std::size_t>(v) * n + phi] = ternary(state.preactivation(v, phi), eps);
            }
            if (options.prune)
            {
                stats.pruned_edges = prune_edges(state, phi, eps);
            }

            // Locate every split point before touching the complex.
            std::vector<Split> splits;
            const int edge_count = state.edge_count();
            for (int e = 0; e < edge_count; ++e)
            {
                const auto [a, b] = state.edges[static_cast<std::size_t>(e)];
                const int sa = state.sign(a, phi), sb = state.sign(b, phi);
                if (sa * sb >= 0)
                {
                    continue;
                }
                const Vec3 & pa = state.positions[static_cast<std::size_t>(a)];
                const Vec3 & pb = state.positions[static_cast<std::size_t>(b)];
                const double w = thales_weight(state.preactivation(a, phi), state.preactivation(b, phi));
                const Vec3 delta = pb - pa;
                int spread_axes = 0;
                for (int j = 0; j < 3; ++j)
                {
                    spread_axes += std::abs(delta[j]) > 1e-12;
                }

                Split s {e, pa + w * delta};
                if (curved && spread_axes >= 2)
                {
                    int common = -1;
                    for (int k = phi - 1; k >= 0; --k)
                    {
                        if (state.sign(a, k) == 0 && state.sign(b, k) == 0)
                        {
                            common = k;
                            break;
                        }
                    }
                    const Eigen::Map<const Eigen::VectorXd> pre_a(state.preactivations(a).data(), n);
                    const Eigen::Map<const Eigen::VectorXd> pre_b(state.preactivations(b).data(), n);
                    const auto mask = net.edge_mask(pre_a.head(net.hidden_count()), pre_b.head(net.hidden_count()), eps);
                    const Eigen::MatrixXd corners = net.masked_corner_preactivations(pa, pb, mask);
                    const Corners Q = corners.col(phi);
                    if (common < 0)
                    {
                        ++stats.chord_splits;
                        if (auto t = solve_chord_cubic(Q, w))
                        {
                            s.point = pa + *t * delta;
                        }
                        else
                        {
                            ++stats.fallbacks;
                        }
                    }
                    else
                    {
                        ++stats.curved_splits;
                        EdgeCorners ec;
                        ec.P = corners.col(common);
                        ec.Q = Q;
                        ec.from = pa;
                        ec.to = pb;
                        const auto r = intersect_edge(ec, w);
                        s.point = r.point;
                        stats.fallbacks += r.fallback;
                    }
                }
                splits.push_back(s);
            }
            stats.splits = static_cast<int>(splits.size());

            // Merge coincident split points (sort-and-sweep on x).
            std::vector<int> order(splits.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return splits[static_cast<std::size_t>(i)].point.x() < splits[static_cast<std::size_t>(j)].point.x(); });
            std::vector<int> rep(splits.size(), -1);
            for (std::size_t oi = 0; oi < order.size(); ++oi)
            {
                const int i = order[oi];
                if (rep[static_cast<std::size_t>(i)] >= 0)
                {
                    continue;
                }
                rep[static_cast<std::size_t>(i)] = i;
                const Vec3 & pi = splits[static_cast<std::size_t>(i)].point;
                for (std::size_t oj = oi + 1; oj < order.size(); ++oj)
                {
                    const int j = order[oj];
                    const Vec3 & pj = splits[static_cast<std::size_t>(j)].point;
                    if (pj.x() - pi.x() > options.merge_tolerance)
                    {
                        break;
                    }
                    if (rep[static_cast<std::size_t>(j)] < 0 && (pj - pi).norm() <= options.merge_tolerance)
                    {
                        rep[static_cast<std::size_t>(j)] = i;
                        ++stats.merged_vertices;
                    }
                }
            }

            // Append the new vertices in split order.
            std::vector<int> vertex_of(splits.size(), -1);
            std::vector<int> created;
            for (std::size_t i = 0; i < splits.size(); ++i)
            {
                const int r = rep[i];
                if (vertex_of[static_cast<std::size_t>(r)] < 0)
                {
                    const auto [a, b] = state.edges[static_cast<std::size_t>(splits[static_cast<std::size_t>(r)].edge)];
                    const int id = state.vertex_count();
                    const Vec3 p = splits[static_cast<std::size_t>(r)].point;
                    state.positions.push_back(p);
                    std::array<int, 3> g;
                    for (int j = 0; j < 3; ++j)
                    {
                        g[static_cast<std::size_t>(j)] = merge_grid_code(state.grid[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)],
                                                                          state.grid[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
                    }
                    state.grid.push_back(g);
                    state.signs.resize(state.signs.size() + static_cast<std::size_t>(n), 0);
                    for (int k = 0; k < phi; ++k)
                    {
                        const int sa = state.sign(a, k), sb = state.sign(b, k);
                        std::int8_t m = static_cast<std::int8_t>(sa == 0 ? sb : sa);
                        if (sa != 0 && sb != 0 && sa != sb)
                        {
                            ++stats.sign_conflicts;
                            m = 0;
                        }
                        state.signs[static_cast<std::size_t>(id) * n + k] = m;
                    }
                    const Eigen::VectorXd pre = net.preactivations(p);
                    state.pre.insert(state.pre.end(), pre.data(), pre.data() + n);
                    vertex_of[static_cast<std::size_t>(r)] = id;
                    created.push_back(id);
                }
                vertex_of[i] = vertex_of[static_cast<std::size_t>(r)];
            }
            for (std::size_t i = 0; i < splits.size(); ++i)
            {
                auto & edge = state.edges[static_cast<std::size_t>(splits[i].edge)];
                const int b = edge[1];
                edge[1] = vertex_of[i];
                state.edges.push_back({vertex_of[i], b});
            }
            state.processed = phi;

            std::vector<int> candidates = created;
            for (int v = 0; v < state.vertex_count() - static_cast<int>(created.size()); ++v)
            {
                if (state.sign(v, phi) == 0)
                {
                    candidates.push_back(v);
                }
            }
            std::sort(candidates.begin(), candidates.end());
            stats.new_edges = find_polygon_edges(state, candidates, phi, &stats.crowded_groups);
            return stats;
        }
    }

    SignVector ComplexState::sign_vector(int v) const
    {
        SignVector s;
        s.grid = grid[static_cast<std::size_t>(v)];
        const auto begin = signs.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(v) * neurons);
        s.neurons.assign(begin, begin + (processed + 1));
        return s;
    }

    bool ComplexState::edge_is_consistent(int e) const
    {
        const auto [a, b] = edges[static_cast<std::size_t>(e)];
        for (int j = 0; j < 3; ++j)
        {
            if (!grid_codes_compatible(grid[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)], grid[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]))
            {
                return false;
            }
        }
        for (int k = 0; k <= processed; ++k)
        {
            const int sa = sign(a, k), sb = sign(b, k);
            if (sa != 0 && sb != 0 && sa != sb)
            {
                return false;
            }
        }
        return true;
    }

    bool grid_codes_compatible(int a, int b)
    {
        const int lo = std::min(a, b), hi = std::max(a, b);
        for (int c = lo + 1; c < hi; ++c)
        {
            if (c % 2 == 0)
            {
                return false;
            }
        }
        return true;
    }

    int merge_grid_code(int a, int b)
    {
        if (a == b)
        {
            return a;
        }
        if (a % 2 != 0)
        {
            return a;
        }
        if (b % 2 != 0)
        {
            return b;
        }
        return (a + b) / 2;
    }

    double thales_weight(double d0, double d1)
    {
        const double denom = std::abs(d0 - d1);
        if (denom == 0.0)
        {
            return 0.5;
        }
        return std::clamp(std::abs(d0) / denom, 0.0, 1.0);
    }

    ComplexState init_grid_complex(const std::vector<double> & marks)
    {
        if (marks.size() < 2)
        {
            throw std::invalid_argument("at least two marks are required");
        }
        const int m = static_cast<int>(marks.size());
        ComplexState s;
        s.mark_count = m;
        s.positions.reserve(static_cast<std::size_t>(m) * m * m);
        for (int k = 0; k < m; ++k)
        {
            for (int j = 0; j < m; ++j)
            {
                for (int i = 0; i < m; ++i)
                {
                    s.positions.emplace_back(marks[static_cast<std::size_t>(i)], marks[static_cast<std::size_t>(j)], marks[static_cast<std::size_t>(k)]);
                    s.grid.push_back({2 * i, 2 * j, 2 * k});
                }
            }
        }
        auto id = [m](int i, int j, int k) { return i + m * (j + m * k); };
        for (int k = 0; k < m; ++k)
        {
            for (int j = 0; j < m; ++j)
            {
                for (int i = 0; i < m; ++i)
                {
                    if (i + 1 < m)
                    {
                        s.edges.push_back({id(i, j, k), id(i + 1, j, k)});
                    }
                    if (j + 1 < m)
                    {
                        s.edges.push_back({id(i, j, k), id(i, j + 1, k)});
                    }
                    if (k + 1 < m)
                    {
                        s.edges.push_back({id(i, j, k), id(i, j, k + 1)});
                    }
                }
            }
        }
        return s;
    }

    ComplexState init_grid_complex(const HashGridSpec & spec) { return init_grid_complex(grid_marks(spec)); }

    ComplexState init_grid_complex(const TrilinearNetwork & net)
    {
        ComplexState s = init_grid_complex(net.marks());
        s.neurons = net.neuron_count();
        s.signs.assign(static_cast<std::size_t>(s.vertex_count()) * s.neurons, 0);
        s.pre.resize(static_cast<std::size_t>(s.vertex_count()) * s.neurons);
        for (int v = 0; v < s.vertex_count(); ++v)
        {
            const Eigen::VectorXd p = net.preactivations(s.positions[static_cast<std::size_t>(v)]);
            std::copy(p.data(), p.data() + s.neurons, s.pre.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(v) * s.neurons));
        }
        return s;
    }

    PassStats subdivide_linear(ComplexState & state, const TrilinearNetwork & net, int phi, const ComplexOptions & options)
    {
        return run_pass(state, net, phi, options, false);
    }

    PassStats subdivide_curved(ComplexState & state, const TrilinearNetwork & net, int phi, const ComplexOptions & options)
    {
        return run_pass(state, net, phi, options, true);
    }

    int find_polygon_edges(ComplexState & state, std::span<const int> candidates, int phi, int * crowded_groups)
    {
        const int top = 2 * (state.mark_count - 1);
        std::vector<std::uint8_t> is_candidate(static_cast<std::size_t>(state.vertex_count()), 0);
        for (int v : candidates)
        {
            is_candidate[static_cast<std::size_t>(v)] = 1;
        }

        // Key layout: [bounding surface id, grid codes x3, neuron signs 0..phi-1].
        // Surface ids 0..2 are grid axes, 3 + k is neuron k.
        std::map<std::vector<int>, std::vector<int>> groups;
        std::vector<int> zeros;
        std::vector<int> base(static_cast<std::size_t>(4 + phi));
        for (int v : candidates)
        {
            zeros.clear();
            const auto & g = state.grid[static_cast<std::size_t>(v)];
            for (int j = 0; j < 3; ++j)
            {
                base[static_cast<std::size_t>(1 + j)] = g[static_cast<std::size_t>(j)];
                if (g[static_cast<std::size_t>(j)] % 2 == 0)
                {
                    zeros.push_back(j);
                }
            }
            for (int k = 0; k < phi; ++k)
            {
                const int s = state.sign(v, k);
                base[static_cast<std::size_t>(4 + k)] = s;
                if (s == 0)
                {
                    zeros.push_back(3 + k);
                }
            }
            for (int b : zeros)
            {
                std::vector<int> rest;
                for (int z : zeros)
                {
                    if (z != b)
                    {
                        rest.push_back(z);
                    }
                }
                if (rest.size() > 3)
                {
                    continue;
                }
                for (int assign = 0; assign < (1 << rest.size()); ++assign)
                {
                    std::vector<int> key = base;
                    key[0] = b;
                    bool valid = true;
                    for (std::size_t r = 0; r < rest.size(); ++r)
                    {
                        const int step = (assign >> r) & 1 ? 1 : -1;
                        const int z = rest[r];
                        if (z < 3)
                        {
                            const int code = key[static_cast<std::size_t>(1 + z)] + step;
                            if (code < 0 || code > top)
                            {
                                valid = false;
                                break;
                            }
                            key[static_cast<std::size_t>(1 + z)] = code;
                        }
                        else
                        {
                            key[static_cast<std::size_t>(4 + z - 3)] = step;
                        }
                    }
                    if (valid)
                    {
                        groups[std::move(key)].push_back(v);
                    }
                }
            }
        }

        std::unordered_set<std::uint64_t> existing;
        for (const auto & e : state.edges)
        {
            if (is_candidate[static_cast<std::size_t>(e[0])] && is_candidate[static_cast<std::size_t>(e[1])])
            {
                existing.insert(edge_key(e[0], e[1]));
            }
        }

        std::vector<std::array<int, 2>> pairs;
        for (auto & [key, members] : groups)
        {
            if (members.size() == 2)
            {
                pairs.push_back({members[0], members[1]});
            }
            else if (members.size() > 2)
            {
                if (crowded_groups)
                {
                    ++*crowded_groups;
                }
                pair_along_principal_axis(state, members, pairs);
            }
        }
        int added = 0;
        for (const auto & p : pairs)
        {
            if (p[0] == p[1] || !existing.insert(edge_key(p[0], p[1])).second)
            {
                continue;
            }
            state.edges.push_back({std::min(p[0], p[1]), std::max(p[0], p[1])});
            ++added;
        }
        return added;
    }

    int prune_edges(ComplexState & state, int phi, double eps)
    {
        const int before = state.edge_count();
        std::erase_if(state.edges, [&](const std::array<int, 2> & e) {
            const auto & ga = state.grid[static_cast<std::size_t>(e[0])];
            const auto & gb = state.grid[static_cast<std::size_t>(e[1])];
            for (int j = 0; j < 3; ++j)
            {
                if (ga[static_cast<std::size_t>(j)] == gb[static_cast<std::size_t>(j)] && on_wall(ga[static_cast<std::size_t>(j)], state.mark_count))
                {
                    return false;
                }
            }
            for (int k = phi; k < state.neurons; ++k)
            {
                const int sa = ternary(state.preactivation(e[0], k), eps);
                const int sb = ternary(state.preactivation(e[1], k), eps);
                if (sa == 0 || sa != sb)
                {
                    return false;
                }
            }
            return true;
        });
        return before - state.edge_count();
    }
}
