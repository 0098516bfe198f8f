#include "ptmesh/weight_file.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace ptmesh
{
    namespace
    {
        using nlohmann::json;

        void put_u32(std::vector<std::uint8_t> & out, std::uint32_t v)
        {
            for (int b = 0; b < 4; ++b)
            {
                out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
            }
        }

        std::uint32_t get_u32(const std::uint8_t * p)
        {
            return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
        }

        void put_f32(std::vector<std::uint8_t> & out, double v)
        {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        }

        double get_f32(const std::uint8_t * p) { return static_cast<double>(std::bit_cast<float>(get_u32(p))); }

        [[noreturn]] void fail(WeightFileErrc code, const std::string & what) { throw WeightFileError(code, what); }

        class Reader
        {
        public:
            Reader(const std::uint8_t * data, std::size_t count) : data_(data), count_(count) {}

            double next(const std::string & where)
            {
                const double v = get_f32(data_ + 4 * pos_);
                ++pos_;
                if (!std::isfinite(v))
                {
                    fail(WeightFileErrc::non_finite, "non-finite value at " + where);
                }
                return v;
            }

            std::size_t count() const { return count_; }

        private:
            const std::uint8_t * data_;
            std::size_t count_;
            std::size_t pos_ = 0;
        };
    }

    const char * to_string(WeightFileErrc code)
    {
        switch (code)
        {
            case WeightFileErrc::io: return "io";
            case WeightFileErrc::bad_magic: return "bad_magic";
            case WeightFileErrc::bad_version: return "bad_version";
            case WeightFileErrc::bad_header: return "bad_header";
            case WeightFileErrc::size_mismatch: return "size_mismatch";
            case WeightFileErrc::non_finite: return "non_finite";
        }
        return "unknown";
    }

    WeightFileError::WeightFileError(WeightFileErrc code, const std::string & what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    TrilinearNetwork WeightFileContents::network() const { return TrilinearNetwork(HashGridEncoder(spec, tables), weights); }

    std::vector<std::uint8_t> serialize_weights(const HashGridSpec & spec, const FeatureTables & tables, const NetworkWeights & weights)
    {
        spec.validate();
        weights.validate(spec.output_dim());
        if (static_cast<int>(tables.size()) != spec.levels)
        {
            throw std::invalid_argument("feature table count does not match level count");
        }

        json header;
        header["D"] = 3;
        json enc;
        enc["levels"] = spec.levels;
        enc["features_per_level"] = spec.features_per_level;
        enc["n_min"] = spec.n_min;
        enc["n_max"] = spec.n_max;
        enc["table_sizes"] = spec.table_sizes;
        std::vector<bool> dense;
        for (int l = 0; l < spec.levels; ++l)
        {
            dense.push_back(spec.level_is_dense(l));
        }
        enc["dense"] = dense;
        header["encoder"] = enc;
        header["mlp"] = {{"dims", weights.dims()}};
        const std::string text = header.dump();

        std::vector<std::uint8_t> out {'P', 'T', 'N', 'W'};
        put_u32(out, kWeightFileVersion);
        put_u32(out, static_cast<std::uint32_t>(text.size()));
        out.insert(out.end(), text.begin(), text.end());
        for (int l = 0; l < spec.levels; ++l)
        {
            const auto & t = tables[static_cast<std::size_t>(l)];
            if (t.rows() != spec.table_sizes[static_cast<std::size_t>(l)] || t.cols() != spec.features_per_level)
            {
                throw std::invalid_argument("feature table " + std::to_string(l) + " has the wrong shape");
            }
            for (Eigen::Index r = 0; r < t.rows(); ++r)
            {
                for (Eigen::Index c = 0; c < t.cols(); ++c)
                {
                    put_f32(out, t(r, c));
                }
            }
        }
        for (const auto & layer : weights.layers)
        {
            for (Eigen::Index r = 0; r < layer.W.rows(); ++r)
            {
                for (Eigen::Index c = 0; c < layer.W.cols(); ++c)
                {
                    put_f32(out, layer.W(r, c));
                }
            }
            for (Eigen::Index r = 0; r < layer.b.size(); ++r)
            {
                put_f32(out, layer.b[r]);
            }
        }
        return out;
    }

    WeightFileContents parse_weights(std::span<const std::uint8_t> bytes)
    {
        if (bytes.size() < 4 || std::memcmp(bytes.data(), "PTNW", 4) != 0)
        {
            fail(WeightFileErrc::bad_magic, "missing PTNW magic");
        }
        if (bytes.size() < 12)
        {
            fail(WeightFileErrc::size_mismatch, "file ends inside the preamble");
        }
        const std::uint32_t version = get_u32(bytes.data() + 4);
        if (version != kWeightFileVersion)
        {
            fail(WeightFileErrc::bad_version, "unsupported version " + std::to_string(version));
        }
        const std::uint32_t header_len = get_u32(bytes.data() + 8);
        if (bytes.size() < 12 + std::size_t(header_len))
        {
            fail(WeightFileErrc::size_mismatch, "file ends inside the header");
        }

        WeightFileContents w;
        std::vector<int> dims;
        try
        {
            const json header = json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
            if (header.at("D").get<int>() != 3)
            {
                fail(WeightFileErrc::bad_header, "only D = 3 is supported");
            }
            const json & enc = header.at("encoder");
            w.spec.levels = enc.at("levels").get<int>();
            w.spec.features_per_level = enc.at("features_per_level").get<int>();
            w.spec.n_min = enc.at("n_min").get<int>();
            w.spec.n_max = enc.at("n_max").get<int>();
            w.spec.table_sizes = enc.at("table_sizes").get<std::vector<std::int64_t>>();
            const auto dense = enc.at("dense").get<std::vector<bool>>();
            dims = header.at("mlp").at("dims").get<std::vector<int>>();
            w.spec.validate();
            if (static_cast<int>(dense.size()) != w.spec.levels)
            {
                fail(WeightFileErrc::bad_header, "one dense flag per level is required");
            }
            for (int l = 0; l < w.spec.levels; ++l)
            {
                if (dense[static_cast<std::size_t>(l)] != w.spec.level_is_dense(l))
                {
                    fail(WeightFileErrc::bad_header, "dense flag of level " + std::to_string(l) + " contradicts its table size");
                }
            }
        }
        catch (const WeightFileError &)
        {
            throw;
        }
        catch (const std::exception & e)
        {
            fail(WeightFileErrc::bad_header, e.what());
        }
        if (dims.size() < 2 || dims.front() != w.spec.output_dim() || dims.back() != 1)
        {
            fail(WeightFileErrc::bad_header, "mlp dims must run from the encoder width to 1");
        }
        for (int d : dims)
        {
            if (d < 1)
            {
                fail(WeightFileErrc::bad_header, "mlp dims must be positive");
            }
        }

        std::size_t expected = 0;
        for (auto t : w.spec.table_sizes)
        {
            expected += static_cast<std::size_t>(t) * static_cast<std::size_t>(w.spec.features_per_level);
        }
        for (std::size_t i = 0; i + 1 < dims.size(); ++i)
        {
            expected += static_cast<std::size_t>(dims[i + 1]) * (static_cast<std::size_t>(dims[i]) + 1);
        }
        const std::size_t payload = bytes.size() - 12 - header_len;
        if (payload != 4 * expected)
        {
            fail(WeightFileErrc::size_mismatch, "payload has " + std::to_string(payload) + " bytes, header implies " + std::to_string(4 * expected));
        }

        Reader reader(bytes.data() + 12 + header_len, expected);
        for (int l = 0; l < w.spec.levels; ++l)
        {
            Eigen::MatrixXd t(w.spec.table_sizes[static_cast<std::size_t>(l)], w.spec.features_per_level);
            for (Eigen::Index r = 0; r < t.rows(); ++r)
            {
                for (Eigen::Index c = 0; c < t.cols(); ++c)
                {
                    t(r, c) = reader.next("encoder level " + std::to_string(l) + " row " + std::to_string(r) + " feature " + std::to_string(c));
                }
            }
            w.tables.push_back(std::move(t));
        }
        for (std::size_t i = 0; i + 1 < dims.size(); ++i)
        {
            DenseLayer layer;
            layer.W.resize(dims[i + 1], dims[i]);
            layer.b.resize(dims[i + 1]);
            for (Eigen::Index r = 0; r < layer.W.rows(); ++r)
            {
                for (Eigen::Index c = 0; c < layer.W.cols(); ++c)
                {
                    layer.W(r, c) = reader.next("layer " + std::to_string(i) + " W[" + std::to_string(r) + "," + std::to_string(c) + "]");
                }
            }
            for (Eigen::Index r = 0; r < layer.b.size(); ++r)
            {
                layer.b[r] = reader.next("layer " + std::to_string(i) + " b[" + std::to_string(r) + "]");
            }
            w.weights.layers.push_back(std::move(layer));
        }
        return w;
    }

    void save_weights(const std::filesystem::path & path, const HashGridSpec & spec, const FeatureTables & tables, const NetworkWeights & weights)
    {
        const auto bytes = serialize_weights(spec, tables, weights);
        std::ofstream out(path, std::ios::binary);
        if (!out)
        {
            fail(WeightFileErrc::io, "cannot open " + path.string() + " for writing");
        }
        out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out)
        {
            fail(WeightFileErrc::io, "write failed for " + path.string());
        }
    }

    void save_weights(const std::filesystem::path & path, const TrilinearNetwork & net)
    {
        save_weights(path, net.encoder().spec(), net.encoder().tables(), net.weights());
    }

    WeightFileContents load_weights(const std::filesystem::path & path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            fail(WeightFileErrc::io, "cannot open " + path.string());
        }
        const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse_weights(bytes);
    }

    TrilinearNetwork load_network(const std::filesystem::path & path) { return load_weights(path).network(); }
}
