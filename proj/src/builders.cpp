#include "ptmesh/builders.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ptmesh
{
    TrilinearNetwork make_field_network(const ScalarField & field, int resolution, std::int64_t table_size)
    {
        HashGridSpec spec = HashGridSpec::uniform(1, 1, resolution, resolution, table_size);
        spec.validate();
        if (!spec.level_is_dense(0))
        {
            throw std::invalid_argument("field network needs a dense level");
        }
        const double scale = spec.level_scale(0);
        const int r = spec.level_resolution(0);
        Eigen::MatrixXd table = Eigen::MatrixXd::Zero(table_size, 1);
        for (int k = 0; k < r; ++k)
        {
            for (int j = 0; j < r; ++j)
            {
                for (int i = 0; i < r; ++i)
                {
                    const Vec3 p((i - 0.5) / scale, (j - 0.5) / scale, (k - 0.5) / scale);
                    table(i + r * (j + r * k), 0) = field(p);
                }
            }
        }
        NetworkWeights w;
        w.layers.push_back({Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1)});
        return TrilinearNetwork(HashGridEncoder(spec, {table}), w);
    }

    TrilinearNetwork make_sphere_network(int intervals, double radius, const Vec3 & center)
    {
        return make_field_network([&](const Vec3 & p) { return (p - center).norm() - radius; }, intervals);
    }

    TrilinearNetwork make_constant_network(double value)
    {
        HashGridSpec spec = HashGridSpec::uniform(1, 1, 2, 2, 64);
        NetworkWeights w;
        w.layers.push_back({Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, value)});
        return TrilinearNetwork(HashGridEncoder(spec, {Eigen::MatrixXd::Zero(64, 1)}), w);
    }

    TrilinearNetwork make_random_network(std::uint64_t seed, const RandomNetworkConfig & config)
    {
        HashGridSpec spec = HashGridSpec::uniform(config.levels, config.features_per_level, config.n_min, config.n_max, config.table_size);
        spec.validate();
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);

        FeatureTables tables;
        for (int l = 0; l < spec.levels; ++l)
        {
            // geometric decay from 1 at the coarsest level to fine_scale at the finest
            const double amp = spec.levels == 1 ? 1.0 : std::pow(config.fine_scale, static_cast<double>(l) / (spec.levels - 1));
            Eigen::MatrixXd t(spec.table_sizes[static_cast<std::size_t>(l)], spec.features_per_level);
            for (Eigen::Index r = 0; r < t.rows(); ++r)
            {
                for (Eigen::Index c = 0; c < t.cols(); ++c)
                {
                    t(r, c) = amp * gauss(rng);
                }
            }
            tables.push_back(std::move(t));
        }

        NetworkWeights w;
        int in = spec.output_dim();
        std::vector<int> dims = config.hidden;
        dims.push_back(1);
        for (int out : dims)
        {
            DenseLayer layer;
            layer.W.resize(out, in);
            layer.b.resize(out);
            const double std_w = std::sqrt(2.0 / in);
            for (Eigen::Index r = 0; r < out; ++r)
            {
                for (Eigen::Index c = 0; c < in; ++c)
                {
                    layer.W(r, c) = std_w * gauss(rng);
                }
                layer.b[r] = 0.1 * gauss(rng);
            }
            w.layers.push_back(std::move(layer));
            in = out;
        }

        HashGridEncoder encoder(spec, tables);
        TrilinearNetwork probe(encoder, w);
        std::vector<double> values;
        const int n = 9;
        for (int k = 0; k < n; ++k)
        {
            for (int j = 0; j < n; ++j)
            {
                for (int i = 0; i < n; ++i)
                {
                    values.push_back(probe.forward(Vec3(i, j, k) / (n - 1)));
                }
            }
        }
        std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
        w.layers.back().b[0] -= values[values.size() / 2];
        return TrilinearNetwork(std::move(encoder), std::move(w));
    }
}
