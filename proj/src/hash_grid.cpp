#include "ptmesh/hash_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ptmesh
{
    double HashGridSpec::level_exponent() const
    {
        if (levels <= 1)
        {
            return 0.0;
        }
        return std::log2(static_cast<double>(n_max) / static_cast<double>(n_min)) / (levels - 1);
    }

    double HashGridSpec::level_scale(int level) const
    {
        return static_cast<double>(n_min) * std::exp2(level * level_exponent()) - 1.0;
    }

    int HashGridSpec::last_cell(int level) const
    {
        return static_cast<int>(std::floor(level_scale(level) + 0.5));
    }

    bool HashGridSpec::level_is_dense(int level) const
    {
        const std::int64_t r = level_resolution(level);
        return r * r * r <= table_sizes.at(static_cast<std::size_t>(level));
    }

    void HashGridSpec::validate() const
    {
        if (levels < 1)
        {
            throw std::invalid_argument("hash grid needs at least one level");
        }
        if (features_per_level < 1)
        {
            throw std::invalid_argument("features_per_level must be positive");
        }
        if (n_min < 2 || n_max < n_min)
        {
            throw std::invalid_argument("resolutions must satisfy 2 <= n_min <= n_max");
        }
        if (static_cast<int>(table_sizes.size()) != levels)
        {
            throw std::invalid_argument("one table size per level is required");
        }
        for (auto t : table_sizes)
        {
            if (t < 8 || t > (std::int64_t(1) << 32))
            {
                throw std::invalid_argument("table size out of range: " + std::to_string(t));
            }
        }
    }

    HashGridSpec HashGridSpec::uniform(int levels, int features_per_level, int n_min, int n_max, std::int64_t table_size)
    {
        HashGridSpec s;
        s.levels = levels;
        s.features_per_level = features_per_level;
        s.n_min = n_min;
        s.n_max = n_max;
        s.table_sizes.assign(static_cast<std::size_t>(levels), table_size);
        return s;
    }

    std::vector<double> grid_marks(const HashGridSpec & spec)
    {
        spec.validate();
        std::vector<double> marks {0.0, 1.0};
        for (int l = 0; l < spec.levels; ++l)
        {
            const double scale = spec.level_scale(l);
            for (int k = 0;; ++k)
            {
                const double v = (k - 0.5) / scale;
                if (v >= 1.0)
                {
                    break;
                }
                marks.push_back(std::max(v, 0.0));
            }
        }
        std::sort(marks.begin(), marks.end());
        std::vector<double> unique;
        for (double m : marks)
        {
            if (unique.empty() || m - unique.back() > 1e-12)
            {
                unique.push_back(m);
            }
        }
        unique.back() = 1.0;
        return unique;
    }

    std::uint32_t corner_hash(const Eigen::Vector3i & corner, std::int64_t table_size)
    {
        const std::uint32_t h = static_cast<std::uint32_t>(corner[0]) * 1u
                                ^ static_cast<std::uint32_t>(corner[1]) * 2654435761u
                                ^ static_cast<std::uint32_t>(corner[2]) * 805459861u;
        return static_cast<std::uint32_t>(h % static_cast<std::uint64_t>(table_size));
    }

    HashGridEncoder::HashGridEncoder(HashGridSpec spec, FeatureTables tables) : spec_(std::move(spec)), tables_(std::move(tables))
    {
        spec_.validate();
        if (static_cast<int>(tables_.size()) != spec_.levels)
        {
            throw std::invalid_argument("feature table count does not match level count");
        }
        for (int l = 0; l < spec_.levels; ++l)
        {
            const auto & t = tables_[static_cast<std::size_t>(l)];
            if (t.rows() != spec_.table_sizes[static_cast<std::size_t>(l)] || t.cols() != spec_.features_per_level)
            {
                throw std::invalid_argument("feature table " + std::to_string(l) + " has the wrong shape");
            }
            if (!t.allFinite())
            {
                throw CorruptWeightsError("non-finite feature in table " + std::to_string(l));
            }
        }
    }

    std::int64_t HashGridEncoder::table_index(int level, const Eigen::Vector3i & corner) const
    {
        const std::int64_t t = spec_.table_sizes[static_cast<std::size_t>(level)];
        if (spec_.level_is_dense(level))
        {
            const std::int64_t r = spec_.level_resolution(level);
            return corner[0] + r * (corner[1] + r * corner[2]);
        }
        return corner_hash(corner, t);
    }

    void HashGridEncoder::lattice_position(int level, const Vec3 & x, Eigen::Vector3i & cell, Vec3 & weight) const
    {
        const double scale = spec_.level_scale(level);
        const int last = spec_.last_cell(level);
        for (int j = 0; j < 3; ++j)
        {
            const double pos = std::clamp(x[j], 0.0, 1.0) * scale + 0.5;
            const int k = std::clamp(static_cast<int>(std::floor(pos)), 0, last);
            cell[j] = k;
            weight[j] = std::clamp(pos - k, 0.0, 1.0);
        }
    }

    Eigen::VectorXd HashGridEncoder::encode(const Vec3 & x) const
    {
        const int f = spec_.features_per_level;
        Eigen::VectorXd out(spec_.output_dim());
        Eigen::Vector3i cell;
        Vec3 w;
        Eigen::Matrix<double, 8, Eigen::Dynamic> corners(8, f);
        for (int l = 0; l < spec_.levels; ++l)
        {
            lattice_position(l, x, cell, w);
            const auto & table = tables_[static_cast<std::size_t>(l)];
            for (int i = 0; i < 8; ++i)
            {
                const Eigen::Vector3i c = cell + Eigen::Vector3i(corner_bit(i, 0), corner_bit(i, 1), corner_bit(i, 2));
                corners.row(i) = table.row(table_index(l, c));
            }
            out.segment(l * f, f) = trilinear(w, corners).transpose();
        }
        if (!out.allFinite())
        {
            throw CorruptWeightsError("encoding produced a non-finite feature");
        }
        return out;
    }

    Eigen::VectorXd HashGridEncoder::encode(const Vec3 & x, Eigen::MatrixX3d & jacobian) const
    {
        const int f = spec_.features_per_level;
        Eigen::VectorXd out(spec_.output_dim());
        jacobian.resize(spec_.output_dim(), 3);
        Eigen::Vector3i cell;
        Vec3 w;
        Eigen::Matrix<double, 8, Eigen::Dynamic> corners(8, f);
        for (int l = 0; l < spec_.levels; ++l)
        {
            lattice_position(l, x, cell, w);
            const auto & table = tables_[static_cast<std::size_t>(l)];
            for (int i = 0; i < 8; ++i)
            {
                const Eigen::Vector3i c = cell + Eigen::Vector3i(corner_bit(i, 0), corner_bit(i, 1), corner_bit(i, 2));
                corners.row(i) = table.row(table_index(l, c));
            }
            out.segment(l * f, f) = trilinear(w, corners).transpose();
            Eigen::Matrix<double, 3, Eigen::Dynamic> grad = trilinear_gradient(w, corners);
            // On an interior lattice plane the derivative across it is the
            // mean of the one-sided derivatives of the two adjacent cells.
            for (int j = 0; j < 3; ++j)
            {
                if (w[j] != 0.0 || cell[j] == 0 || x[j] <= 0.0)
                {
                    continue;
                }
                Eigen::Vector3i below = cell;
                below[j] -= 1;
                Vec3 wb = w;
                wb[j] = 1.0;
                for (int i = 0; i < 8; ++i)
                {
                    const Eigen::Vector3i c = below + Eigen::Vector3i(corner_bit(i, 0), corner_bit(i, 1), corner_bit(i, 2));
                    corners.row(i) = table.row(table_index(l, c));
                }
                grad.row(j) = 0.5 * (grad.row(j) + trilinear_gradient(wb, corners).row(j));
            }
            jacobian.middleRows(l * f, f) = spec_.level_scale(l) * grad.transpose();
        }
        return out;
    }

    std::vector<LevelCell> HashGridEncoder::cell_of(const Vec3 & x) const
    {
        for (int j = 0; j < 3; ++j)
        {
            if (!(x[j] >= 0.0 && x[j] <= 1.0))
            {
                throw std::domain_error("point outside the unit cube");
            }
        }
        std::vector<LevelCell> cells;
        cells.reserve(static_cast<std::size_t>(spec_.levels));
        for (int l = 0; l < spec_.levels; ++l)
        {
            const double scale = spec_.level_scale(l);
            const int last = spec_.last_cell(l);
            LevelCell c;
            for (int j = 0; j < 3; ++j)
            {
                int k = std::clamp(static_cast<int>(std::floor(x[j] * scale + 0.5)), 0, last);
                // agree exactly with the boundary values used by grid_marks
                if (k < last && (k + 0.5) / scale <= x[j])
                {
                    ++k;
                }
                if (k > 0 && (k - 0.5) / scale > x[j])
                {
                    --k;
                }
                c.index[j] = k;
                c.lower[j] = std::max((k - 0.5) / scale, 0.0);
                c.upper[j] = std::min((k + 0.5) / scale, 1.0);
                c.weight[j] = std::clamp((x[j] - c.lower[j]) / (c.upper[j] - c.lower[j]), 0.0, 1.0);
            }
            cells.push_back(c);
        }
        return cells;
    }
}
