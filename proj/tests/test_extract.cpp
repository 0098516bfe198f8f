#include "ptmesh/builders.hpp"
#include "ptmesh/extract.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace ptmesh;
using test::Rng;

namespace
{
    Vec3 polygon_area_vector(const ExtractedMesh & m, const std::vector<int> & face)
    {
        Vec3 a = Vec3::Zero();
        for (std::size_t i = 0; i < face.size(); ++i)
        {
            a += m.vertices[static_cast<std::size_t>(face[i])].cross(m.vertices[static_cast<std::size_t>(face[(i + 1) % face.size()])]);
        }
        return 0.5 * a;
    }

    Vec3 centroid(const ExtractedMesh & m, const std::vector<int> & face)
    {
        Vec3 c = Vec3::Zero();
        for (int v : face)
        {
            c += m.vertices[static_cast<std::size_t>(v)];
        }
        return c / static_cast<double>(face.size());
    }
}

TEST_CASE("constant networks give an empty mesh")
{
    for (double v : {0.75, -0.75})
    {
        ExtractionStats st;
        const ExtractedMesh m = extract(make_constant_network(v), {}, &st);
        CHECK(m.empty());
        CHECK(m.faces.empty());
        CHECK(st.splits() == 0);
        CHECK(st.skeleton_vertices == 0);
    }
}

TEST_CASE("polygon vertex ordering")
{
    // square corners given out of order
    const std::vector<Vec3> sq {Vec3(1, 1, 0), Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(-1, 1, 0)};
    const auto order = sort_polygon_vertices(sq, Vec3::UnitZ());
    REQUIRE(order.size() == 4);
    Vec3 area = Vec3::Zero();
    for (std::size_t i = 0; i < 4; ++i)
    {
        area += sq[static_cast<std::size_t>(order[i])].cross(sq[static_cast<std::size_t>(order[(i + 1) % 4])]);
    }
    CHECK((0.5 * area - Vec3(0, 0, 4)).norm() <= 1e-14);

    // the walk is a rotation of (-1,-1) (1,-1) (1,1) (-1,1)
    const std::vector<int> ccw {1, 2, 0, 3};
    const auto start = std::find(ccw.begin(), ccw.end(), order[0]) - ccw.begin();
    for (std::size_t i = 0; i < 4; ++i)
    {
        CHECK(order[i] == ccw[(static_cast<std::size_t>(start) + i) % 4]);
    }

    const auto flipped = sort_polygon_vertices(sq, -Vec3::UnitZ());
    area.setZero();
    for (std::size_t i = 0; i < 4; ++i)
    {
        area += sq[static_cast<std::size_t>(flipped[i])].cross(sq[static_cast<std::size_t>(flipped[(i + 1) % 4])]);
    }
    CHECK(area.z() < 0.0);

    // keys are a monotone pseudo-angle: random convex polygons come out convex
    Rng rng(51);
    for (int n = 0; n < 100; ++n)
    {
        const int k = rng.integer(3, 9);
        std::vector<double> angles;
        for (int i = 0; i < k; ++i)
        {
            angles.push_back(rng.uniform(0.0, 2.0 * M_PI));
        }
        std::vector<Vec3> pts;
        for (double a : angles)
        {
            pts.emplace_back(std::cos(a), std::sin(a), 0.0);
        }
        Vec3 mu = Vec3::Zero();
        for (const auto & p : pts)
        {
            mu += p;
        }
        mu /= static_cast<double>(k);
        const auto o = sort_polygon_vertices(pts, Vec3::UnitZ());
        for (std::size_t i = 0; i < o.size(); ++i)
        {
            const Vec3 a = pts[static_cast<std::size_t>(o[i])] - mu;
            const Vec3 b = pts[static_cast<std::size_t>(o[(i + 1) % o.size()])] - mu;
            CHECK(a.cross(b).z() >= -1e-12);
        }
    }
}

TEST_CASE("sphere")
{
    const TrilinearNetwork net = make_sphere_network(16, 0.3);
    ExtractionStats st;
    const ExtractedMesh m = extract(net, {}, &st);
    REQUIRE_FALSE(m.empty());
    CHECK(st.fallbacks() == 0);
    CHECK(st.irregular_faces == 0);
    CHECK(st.boundary_faces == 0);
    CHECK(m.skeleton_vertex_count == static_cast<int>(m.vertices.size()));
    CHECK(m.normals.size() == m.faces.size());

    const Vec3 c = Vec3::Constant(0.5);
    for (int v = 0; v < m.skeleton_vertex_count; ++v)
    {
        CHECK(std::abs((m.vertices[static_cast<std::size_t>(v)] - c).norm() - 0.3) <= 5e-3);
        CHECK(std::abs(net.forward(m.vertices[static_cast<std::size_t>(v)])) <= 1e-4);
        // on the zero set and on at least two more surfaces
        CHECK(m.signs[static_cast<std::size_t>(v)].zero_count() >= 3);
    }
    for (const auto & e : m.edges)
    {
        CHECK(e[0] != e[1]);
        CHECK(e[0] < m.skeleton_vertex_count);
        CHECK(e[1] < m.skeleton_vertex_count);
    }
    for (std::size_t f = 0; f < m.faces.size(); ++f)
    {
        CHECK(m.faces[f].size() >= 3);
        const Vec3 area = polygon_area_vector(m, m.faces[f]);
        // counter-clockwise about the stored normal, which points away from the centre
        CHECK(area.dot(m.normals[f]) > 0.0);
        CHECK(m.normals[f].dot(centroid(m, m.faces[f]) - c) > 0.0);
        CHECK(std::abs(m.normals[f].norm() - 1.0) <= 1e-12);
    }

    const EulerCounts e = euler_counts(m.polygon_mesh());
    CHECK(e.characteristic() == 2);
    CHECK(e.boundary_edges == 0);
    CHECK(e.nonmanifold_edges == 0);
}

TEST_CASE("extraction is deterministic")
{
    const TrilinearNetwork net = make_random_network(11);
    const ExtractedMesh a = extract(net);
    const ExtractedMesh b = extract(net);
    CHECK(a.vertices == b.vertices);
    CHECK(a.faces == b.faces);
    CHECK(a.normals == b.normals);
}

TEST_CASE("half space closed by wall caps")
{
    const TrilinearNetwork net = make_field_network([](const Vec3 & p) { return p.z() - 0.4; }, 2);
    ExtractionStats st;
    const ExtractedMesh m = extract(net, {}, &st);
    // faces stay inside grid cells: 4 cut quarters, 4 bottom quarters, 2 per side wall
    CHECK(st.faces == 16);
    CHECK(st.boundary_faces == 12);
    const EulerCounts e = euler_counts(m.polygon_mesh());
    CHECK(e.characteristic() == 2);
    CHECK(e.boundary_edges == 0);
    CHECK(e.nonmanifold_edges == 0);
    for (std::size_t f = 0; f < m.faces.size(); ++f)
    {
        CHECK(polygon_area_vector(m, m.faces[f]).dot(m.normals[f]) > 0.0);
        CHECK(m.normals[f].dot(centroid(m, m.faces[f]) - Vec3(0.5, 0.5, 0.2)) > 0.0);
    }

    ExtractOptions open;
    open.boundary_faces = false;
    const ExtractedMesh o = extract(net, open);
    REQUIRE(o.faces.size() == 4);  // the four quarter squares of the cut plane
    CHECK(euler_counts(o.polygon_mesh()).boundary_edges == 8);
    for (const auto & n : o.normals)
    {
        CHECK((n - Vec3::UnitZ()).norm() <= 1e-12);
    }
}

TEST_CASE("triangulation keeps winding and counts")
{
    const TrilinearNetwork net = make_sphere_network(8, 0.3);
    const ExtractedMesh poly = extract(net);
    ExtractOptions opt;
    opt.triangulate = true;
    const ExtractedMesh tri = extract(net, opt);
    std::size_t expected = 0;
    for (const auto & f : poly.faces)
    {
        expected += f.size() - 2;
    }
    REQUIRE(tri.faces.size() == expected);
    for (std::size_t f = 0; f < tri.faces.size(); ++f)
    {
        CHECK(tri.faces[f].size() == 3);
        CHECK(polygon_area_vector(tri, tri.faces[f]).dot(tri.normals[f]) > 0.0);
    }
    CHECK(euler_counts(tri.polygon_mesh()).characteristic() == 2);
}

TEST_CASE("skeleton keeps exactly the near-zero vertices")
{
    const TrilinearNetwork net = make_sphere_network(8, 0.3);
    ExtractOptions opt;
    const ComplexState s = build_complex(net, opt);
    const Skeleton k = skeletonize(s, net.output_phi(), 1e-4);
    for (int v = 0; v < s.vertex_count(); ++v)
    {
        const bool near = std::abs(s.preactivation(v, 0)) <= 1e-4;
        CHECK(near == (k.index_of[static_cast<std::size_t>(v)] >= 0));
    }
    for (const auto & e : k.edges)
    {
        CHECK(k.index_of[static_cast<std::size_t>(e[0])] >= 0);
        CHECK(k.index_of[static_cast<std::size_t>(e[1])] >= 0);
    }
}
