#include "ptmesh/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ptmesh
{
    std::vector<int> NetworkWeights::dims() const
    {
        std::vector<int> d;
        if (layers.empty())
        {
            return d;
        }
        d.push_back(static_cast<int>(layers.front().W.cols()));
        for (const auto & l : layers)
        {
            d.push_back(static_cast<int>(l.W.rows()));
        }
        return d;
    }

    void NetworkWeights::validate(int input_dim) const
    {
        if (layers.empty())
        {
            throw std::invalid_argument("network has no layers");
        }
        int in = input_dim;
        for (std::size_t i = 0; i < layers.size(); ++i)
        {
            const auto & l = layers[i];
            if (l.W.cols() != in || l.b.size() != l.W.rows() || l.W.rows() < 1)
            {
                throw std::invalid_argument("layer " + std::to_string(i) + " has inconsistent dimensions");
            }
            if (!l.W.allFinite() || !l.b.allFinite())
            {
                throw CorruptWeightsError("non-finite parameter in layer " + std::to_string(i));
            }
            in = static_cast<int>(l.W.rows());
        }
        if (in != 1)
        {
            throw std::invalid_argument("last layer must have one output");
        }
    }

    int SignVector::zero_count() const
    {
        int n = 0;
        for (int g : grid)
        {
            n += (g % 2 == 0);
        }
        for (auto s : neurons)
        {
            n += (s == 0);
        }
        return n;
    }

    TrilinearNetwork::TrilinearNetwork(HashGridEncoder encoder, NetworkWeights weights)
        : encoder_(std::move(encoder)), weights_(std::move(weights))
    {
        weights_.validate(encoder_.output_dim());
        marks_ = grid_marks(encoder_.spec());
        int offset = 0;
        for (std::size_t i = 0; i + 1 < weights_.layers.size(); ++i)
        {
            layer_offset_.push_back(offset);
            offset += static_cast<int>(weights_.layers[i].W.rows());
        }
        layer_offset_.push_back(offset);
        hidden_count_ = offset;
    }

    int TrilinearNetwork::phi(int layer, int neuron) const
    {
        if (layer < 0 || layer >= layer_count() || neuron < 0 || neuron >= weights_.layers[static_cast<std::size_t>(layer)].W.rows())
        {
            throw std::out_of_range("neuron (" + std::to_string(layer) + "," + std::to_string(neuron) + ") does not exist");
        }
        return layer_offset_[static_cast<std::size_t>(layer)] + neuron;
    }

    NeuronIndex TrilinearNetwork::neuron(int phi) const
    {
        if (phi < 0 || phi >= neuron_count())
        {
            throw std::out_of_range("phi index out of range");
        }
        const auto it = std::upper_bound(layer_offset_.begin(), layer_offset_.end(), phi);
        const int layer = static_cast<int>(it - layer_offset_.begin()) - 1;
        return {layer, phi - layer_offset_[static_cast<std::size_t>(layer)]};
    }

    Eigen::VectorXd TrilinearNetwork::preactivations(const Vec3 & x) const
    {
        Eigen::VectorXd out(neuron_count());
        Eigen::VectorXd h = encoder_.encode(x);
        for (std::size_t i = 0; i < weights_.layers.size(); ++i)
        {
            const auto & l = weights_.layers[i];
            const Eigen::VectorXd z = l.W * h + l.b;
            out.segment(layer_offset_[i], z.size()) = z;
            h = z.cwiseMax(0.0);
        }
        return out;
    }

    Eigen::VectorXd TrilinearNetwork::masked_preactivations(const Vec3 & x, const std::vector<std::uint8_t> & mask) const
    {
        if (static_cast<int>(mask.size()) != hidden_count_)
        {
            throw std::invalid_argument("mask needs one entry per hidden neuron");
        }
        Eigen::VectorXd out(neuron_count());
        Eigen::VectorXd h = encoder_.encode(x);
        for (std::size_t i = 0; i < weights_.layers.size(); ++i)
        {
            const auto & l = weights_.layers[i];
            Eigen::VectorXd z = l.W * h + l.b;
            const int off = layer_offset_[i];
            out.segment(off, z.size()) = z;
            if (i + 1 < weights_.layers.size())
            {
                for (Eigen::Index k = 0; k < z.size(); ++k)
                {
                    z[k] = mask[static_cast<std::size_t>(off + k)] ? z[k] : 0.0;
                }
            }
            h = std::move(z);
        }
        return out;
    }

    double TrilinearNetwork::forward(const Vec3 & x) const { return preactivations(x)[output_phi()]; }

    double TrilinearNetwork::preactivation(const Vec3 & x, int layer, int neuron) const
    {
        return preactivations(x)[phi(layer, neuron)];
    }

    std::vector<std::uint8_t> TrilinearNetwork::edge_mask(const Eigen::Ref<const Eigen::VectorXd> & pre0, const Eigen::Ref<const Eigen::VectorXd> & pre7, double eps) const
    {
        std::vector<std::uint8_t> m(static_cast<std::size_t>(hidden_count_));
        for (int k = 0; k < hidden_count_; ++k)
        {
            m[static_cast<std::size_t>(k)] = (pre0[k] > eps || pre7[k] > eps) ? 1 : 0;
        }
        return m;
    }

    Eigen::MatrixXd TrilinearNetwork::masked_corner_preactivations(const Vec3 & x0, const Vec3 & x7, const std::vector<std::uint8_t> & mask) const
    {
        Eigen::MatrixXd out(8, neuron_count());
        for (int i = 0; i < 8; ++i)
        {
            out.row(i) = masked_preactivations(box_corner(x0, x7, i), mask).transpose();
        }
        return out;
    }

    bool TrilinearNetwork::same_cell(const Vec3 & a, const Vec3 & b, double tol) const
    {
        for (int j = 0; j < 3; ++j)
        {
            const double lo = std::min(a[j], b[j]) + tol;
            const double hi = std::max(a[j], b[j]) - tol;
            const auto it = std::upper_bound(marks_.begin(), marks_.end(), lo);
            if (it != marks_.end() && *it < hi)
            {
                return false;
            }
        }
        return true;
    }

    Corners TrilinearNetwork::masked_corner_values(const Vec3 & x0, const Vec3 & x7, int phi_index, double eps) const
    {
        if (phi_index < 0 || phi_index >= neuron_count())
        {
            throw std::out_of_range("phi index out of range");
        }
        if (!same_cell(x0, x7, 1e-9))
        {
            throw RegionError("edge endpoints lie in different grid cells");
        }
        const auto mask = edge_mask(preactivations(x0), preactivations(x7), eps);
        return masked_corner_preactivations(x0, x7, mask).col(phi_index);
    }

    int TrilinearNetwork::grid_code(double value, double eps) const
    {
        const auto it = std::lower_bound(marks_.begin(), marks_.end(), value);
        const int upper = static_cast<int>(it - marks_.begin());
        if (upper < static_cast<int>(marks_.size()) && marks_[static_cast<std::size_t>(upper)] - value <= eps)
        {
            return 2 * upper;
        }
        if (upper > 0 && value - marks_[static_cast<std::size_t>(upper - 1)] <= eps)
        {
            return 2 * (upper - 1);
        }
        return 2 * upper - 1;
    }

    SignVector TrilinearNetwork::sign_vector(const Vec3 & x, int upto, double eps) const
    {
        SignVector s;
        for (int j = 0; j < 3; ++j)
        {
            s.grid[static_cast<std::size_t>(j)] = grid_code(x[j], eps);
        }
        const int n = std::min(upto + 1, neuron_count());
        if (n > 0)
        {
            const Eigen::VectorXd pre = preactivations(x);
            s.neurons.resize(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k)
            {
                s.neurons[static_cast<std::size_t>(k)] = ternary(pre[k], eps);
            }
        }
        return s;
    }

    Vec3 TrilinearNetwork::gradient(const Vec3 & x) const
    {
        Eigen::MatrixX3d jac;
        Eigen::VectorXd h = encoder_.encode(x, jac);
        Eigen::MatrixXd d = jac;  // d h / d x
        for (std::size_t i = 0; i < weights_.layers.size(); ++i)
        {
            const auto & l = weights_.layers[i];
            Eigen::VectorXd z = l.W * h + l.b;
            Eigen::MatrixXd dz = l.W * d;
            if (i + 1 < weights_.layers.size())
            {
                for (Eigen::Index k = 0; k < z.size(); ++k)
                {
                    if (z[k] < 0.0)
                    {
                        z[k] = 0.0;
                        dz.row(k).setZero();
                    }
                }
            }
            h = std::move(z);
            d = std::move(dz);
        }
        return d.row(0).transpose();
    }
}
