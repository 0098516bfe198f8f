#pragma once

// Piecewise trilinear network: a ReLU MLP applied to the hash-grid encoding.
//
// Neurons are numbered by phi: hidden neurons layer by layer, neuron index
// ascending, then the single output neuron last.

#include "ptmesh/hash_grid.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ptmesh
{
    struct DenseLayer
    {
        Eigen::MatrixXd W;  // out x in
        Eigen::VectorXd b;
    };

    struct NetworkWeights
    {
        std::vector<DenseLayer> layers;

        /// [in, h1, ..., 1]
        std::vector<int> dims() const;
        /// Checks the dimension chain against the encoder output and finiteness.
        void validate(int input_dim) const;
    };

    struct NeuronIndex
    {
        int layer;   // 0-based affine layer
        int neuron;
    };

    class RegionError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Ternary record of a point: grid part per axis and one entry per
    /// processed neuron. Grid code 2i means "on mark i", 2i+1 means "strictly
    /// between marks i and i+1".
    struct SignVector
    {
        std::array<int, 3> grid {};
        std::vector<std::int8_t> neurons;

        int zero_count() const;
    };

    class TrilinearNetwork
    {
    public:
        TrilinearNetwork() = default;
        TrilinearNetwork(HashGridEncoder encoder, NetworkWeights weights);

        const HashGridEncoder & encoder() const { return encoder_; }
        const NetworkWeights & weights() const { return weights_; }
        const std::vector<double> & marks() const { return marks_; }

        int layer_count() const { return static_cast<int>(weights_.layers.size()); }
        int hidden_count() const { return hidden_count_; }
        /// Hidden neurons plus the output.
        int neuron_count() const { return hidden_count_ + 1; }
        int output_phi() const { return hidden_count_; }
        int phi(int layer, int neuron) const;
        NeuronIndex neuron(int phi) const;

        double forward(const Vec3 & x) const;
        double preactivation(const Vec3 & x, int layer, int neuron) const;
        /// Every preactivation indexed by phi (standard ReLU forward).
        Eigen::VectorXd preactivations(const Vec3 & x) const;
        /// Preactivations with ReLUs replaced by the fixed 0/1 mask (one entry per hidden neuron).
        Eigen::VectorXd masked_preactivations(const Vec3 & x, const std::vector<std::uint8_t> & mask) const;

        /// m_k = pre_k(x0) > eps or pre_k(x7) > eps, from the phi-indexed preactivations of both points.
        std::vector<std::uint8_t> edge_mask(const Eigen::Ref<const Eigen::VectorXd> & pre0, const Eigen::Ref<const Eigen::VectorXd> & pre7, double eps) const;

        /// Masked preactivations at the eight corners of the box spanned by x0 and x7 (8 x neuron_count).
        Eigen::MatrixXd masked_corner_preactivations(const Vec3 & x0, const Vec3 & x7, const std::vector<std::uint8_t> & mask) const;
        /// Masked values of neuron phi at the box corners; the box must lie in one composite cell.
        Corners masked_corner_values(const Vec3 & x0, const Vec3 & x7, int phi, double eps = 1e-4) const;

        /// True when no grid mark lies strictly inside the box spanned by two points.
        bool same_cell(const Vec3 & a, const Vec3 & b, double tol = 1e-12) const;

        SignVector sign_vector(const Vec3 & x, int upto, double eps = 1e-4) const;
        /// Grid code of one coordinate (see SignVector).
        int grid_code(double value, double eps) const;

        /// Gradient of the output; ReLU ties count as active.
        Vec3 gradient(const Vec3 & x) const;

    private:
        HashGridEncoder encoder_;
        NetworkWeights weights_;
        std::vector<double> marks_;
        std::vector<int> layer_offset_;  // phi of neuron 0 in each layer
        int hidden_count_ = 0;
    };

    /// +1 above eps, -1 below -eps, 0 otherwise.
    inline std::int8_t ternary(double v, double eps)
    {
        return v > eps ? std::int8_t(1) : (v < -eps ? std::int8_t(-1) : std::int8_t(0));
    }
}
