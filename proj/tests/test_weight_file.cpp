#include "ptmesh/builders.hpp"
#include "ptmesh/weight_file.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <limits>
#include <set>

using namespace ptmesh;
using test::Rng;

namespace
{
    struct Sample
    {
        HashGridSpec spec;
        FeatureTables tables;
        NetworkWeights weights;
    };

    // values already representable in float32
    double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

    Sample random_sample(std::uint64_t seed)
    {
        Rng rng(seed);
        Sample s;
        s.spec = HashGridSpec::uniform(2, 2, 2, 16, 512);
        for (int l = 0; l < 2; ++l)
        {
            Eigen::MatrixXd t(512, 2);
            for (Eigen::Index i = 0; i < t.size(); ++i)
            {
                t.data()[i] = f32(rng.normal());
            }
            s.tables.push_back(t);
        }
        const std::vector<int> dims {4, 8, 8, 1};
        for (std::size_t i = 0; i + 1 < dims.size(); ++i)
        {
            DenseLayer layer {Eigen::MatrixXd(dims[i + 1], dims[i]), Eigen::VectorXd(dims[i + 1])};
            for (Eigen::Index k = 0; k < layer.W.size(); ++k)
            {
                layer.W.data()[k] = f32(rng.normal());
            }
            for (Eigen::Index k = 0; k < layer.b.size(); ++k)
            {
                layer.b[k] = f32(rng.normal());
            }
            s.weights.layers.push_back(layer);
        }
        return s;
    }

    std::vector<std::uint8_t> with_header(const std::vector<std::uint8_t> & bytes, const std::string & header)
    {
        std::uint32_t len = 0;
        std::memcpy(&len, bytes.data() + 8, 4);
        std::vector<std::uint8_t> out(bytes.begin(), bytes.begin() + 8);
        const auto n = static_cast<std::uint32_t>(header.size());
        for (int b = 0; b < 4; ++b)
        {
            out.push_back(static_cast<std::uint8_t>(n >> (8 * b)));
        }
        out.insert(out.end(), header.begin(), header.end());
        out.insert(out.end(), bytes.begin() + 12 + len, bytes.end());
        return out;
    }

    std::string header_of(const std::vector<std::uint8_t> & bytes)
    {
        std::uint32_t len = 0;
        std::memcpy(&len, bytes.data() + 8, 4);
        return std::string(bytes.begin() + 12, bytes.begin() + 12 + len);
    }

    WeightFileErrc code_of(const std::vector<std::uint8_t> & bytes)
    {
        try
        {
            parse_weights(bytes);
        }
        catch (const WeightFileError & e)
        {
            return e.code();
        }
        FAIL("parse succeeded");
        return WeightFileErrc::io;
    }
}

TEST_CASE("round trip is bit identical")
{
    const Sample s = random_sample(81);
    const auto bytes = serialize_weights(s.spec, s.tables, s.weights);
    CHECK(std::memcmp(bytes.data(), "PTNW", 4) == 0);
    const WeightFileContents back = parse_weights(bytes);
    CHECK(back.spec.table_sizes == s.spec.table_sizes);
    CHECK(back.spec.n_max == 16);
    REQUIRE(back.tables.size() == 2);
    for (int l = 0; l < 2; ++l)
    {
        CHECK(back.tables[static_cast<std::size_t>(l)] == s.tables[static_cast<std::size_t>(l)]);
    }
    REQUIRE(back.weights.layers.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
    {
        CHECK(back.weights.layers[i].W == s.weights.layers[i].W);
        CHECK(back.weights.layers[i].b == s.weights.layers[i].b);
    }
    CHECK(serialize_weights(back.spec, back.tables, back.weights) == bytes);

    // payload length: 2 * 512 * 2 table floats, then 8*4+8 + 8*8+8 + 1*8+1
    CHECK(bytes.size() == 12 + header_of(bytes).size() + 4 * (2048 + 40 + 72 + 9));

    const auto path = std::filesystem::temp_directory_path() / "ptmesh_weight_roundtrip.ptnw";
    save_weights(path, s.spec, s.tables, s.weights);
    const TrilinearNetwork net = load_network(path);
    const TrilinearNetwork direct(HashGridEncoder(s.spec, s.tables), s.weights);
    Rng rng(82);
    for (int n = 0; n < 64; ++n)
    {
        const Vec3 x = rng.point();
        CHECK(net.forward(x) == direct.forward(x));
    }
    std::filesystem::remove(path);
}

TEST_CASE("header records the lattice layout")
{
    const Sample s = random_sample(83);
    const std::string h = header_of(serialize_weights(s.spec, s.tables, s.weights));
    CHECK(h.find("\"dense\":[true,false]") != std::string::npos);
    CHECK(h.find("\"dims\":[4,8,8,1]") != std::string::npos);
}

TEST_CASE("malformed files are rejected with distinct codes")
{
    const Sample s = random_sample(84);
    const auto good = serialize_weights(s.spec, s.tables, s.weights);

    auto truncated = good;
    truncated.resize(truncated.size() - 4);
    CHECK(code_of(truncated) == WeightFileErrc::size_mismatch);
    auto padded = good;
    padded.push_back(0);
    CHECK(code_of(padded) == WeightFileErrc::size_mismatch);
    CHECK(code_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)) == WeightFileErrc::size_mismatch);

    auto magic = good;
    magic[0] = 'X';
    CHECK(code_of(magic) == WeightFileErrc::bad_magic);
    CHECK(code_of({}) == WeightFileErrc::bad_magic);

    auto version = good;
    version[4] = 2;
    CHECK(code_of(version) == WeightFileErrc::bad_version);

    std::string h = header_of(good);
    std::string flipped = h;
    flipped.replace(flipped.find("[true,false]"), 12, "[true, true]");
    CHECK(code_of(with_header(good, flipped)) == WeightFileErrc::bad_header);
    CHECK(code_of(with_header(good, "{not json")) == WeightFileErrc::bad_header);
    std::string dims = h;
    dims.replace(dims.find("[4,8,8,1]"), 9, "[4,8,8,2]");
    CHECK(code_of(with_header(good, dims)) == WeightFileErrc::bad_header);

    // first float of layer 0's W: after the tables
    auto nan = good;
    const std::size_t at = 12 + h.size() + 4 * 2048;
    const float bad = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(nan.data() + at, &bad, 4);
    try
    {
        parse_weights(nan);
        FAIL("NaN accepted");
    }
    catch (const WeightFileError & e)
    {
        CHECK(e.code() == WeightFileErrc::non_finite);
        CHECK(std::string(e.what()).find("layer 0 W[0,0]") != std::string::npos);
    }

    CHECK_THROWS_AS(load_weights("/nonexistent/dir/w.ptnw"), WeightFileError);
    try
    {
        load_weights("/nonexistent/dir/w.ptnw");
    }
    catch (const WeightFileError & e)
    {
        CHECK(e.code() == WeightFileErrc::io);
    }

    std::set<std::string> names;
    for (auto c : {WeightFileErrc::io, WeightFileErrc::bad_magic, WeightFileErrc::bad_version, WeightFileErrc::bad_header, WeightFileErrc::size_mismatch,
                   WeightFileErrc::non_finite})
    {
        names.insert(to_string(c));
    }
    CHECK(names.size() == 6);
}

TEST_CASE("built networks survive the file")
{
    const TrilinearNetwork sphere = make_sphere_network();
    const auto path = std::filesystem::temp_directory_path() / "ptmesh_weight_sphere.ptnw";
    save_weights(path, sphere);
    const TrilinearNetwork back = load_network(path);
    Rng rng(85);
    for (int n = 0; n < 64; ++n)
    {
        const Vec3 x = rng.point();
        // tables are stored as float32
        CHECK(std::abs(back.forward(x) - sphere.forward(x)) <= 1e-6);
    }
    CHECK(back.marks() == sphere.marks());
    std::filesystem::remove(path);
}
