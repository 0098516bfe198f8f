#pragma once

// Weight file: "PTNW", u32 version, u32 header length, UTF-8 JSON header,
// then little-endian float32 payload (feature tables level by level, then
// W row-major followed by b for each layer).

#include "ptmesh/network.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptmesh
{
    inline constexpr std::uint32_t kWeightFileVersion = 1;

    enum class WeightFileErrc
    {
        io = 1,
        bad_magic,
        bad_version,
        bad_header,
        size_mismatch,
        non_finite,
    };

    const char * to_string(WeightFileErrc code);

    class WeightFileError : public std::runtime_error
    {
    public:
        WeightFileError(WeightFileErrc code, const std::string & what);
        WeightFileErrc code() const { return code_; }

    private:
        WeightFileErrc code_;
    };

    struct WeightFileContents
    {
        HashGridSpec spec;
        FeatureTables tables;
        NetworkWeights weights;

        TrilinearNetwork network() const;
    };

    std::vector<std::uint8_t> serialize_weights(const HashGridSpec & spec, const FeatureTables & tables, const NetworkWeights & weights);
    WeightFileContents parse_weights(std::span<const std::uint8_t> bytes);

    void save_weights(const std::filesystem::path & path, const HashGridSpec & spec, const FeatureTables & tables, const NetworkWeights & weights);
    void save_weights(const std::filesystem::path & path, const TrilinearNetwork & net);
    WeightFileContents load_weights(const std::filesystem::path & path);
    TrilinearNetwork load_network(const std::filesystem::path & path);
}
