#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "lmoa/core_types.hpp"

namespace lmoa {

// Binary inclusion map over an image's (row, col, channel) positions plus the
// dense row-major index of the included ones. The index order is the order of
// the decision variables everywhere else in the library.
class AttentionMask {
public:
    AttentionMask(ImageShape shape, std::vector<std::uint8_t> include);

    const ImageShape& shape() const noexcept { return shape_; }
    std::span<const std::uint8_t> include() const noexcept { return include_; }
    // Linear image offsets of the included positions, strictly increasing.
    std::span<const std::size_t> index() const noexcept { return index_; }
    std::size_t size() const noexcept { return index_.size(); }

    std::array<std::size_t, 3> position(std::size_t i) const;

private:
    ImageShape shape_;
    std::vector<std::uint8_t> include_;
    std::vector<std::size_t> index_;
};

// include_i = map_i > threshold. Throws MaskError when nothing is included.
AttentionMask binarize_map(std::span<const double> map, const ImageShape& shape, double threshold);

// Every position included; the whole-image attack.
AttentionMask full_mask(const ImageShape& shape);

// Loads a single-channel PGM whose height/width equal `target`, binarizes it
// at `threshold_fraction * max(map)` and replicates it across the target's
// channels. A fraction of 0 keeps exactly the nonzero pixels.
AttentionMask load_mask(const std::filesystem::path& path, const ImageShape& target, double threshold_fraction = 0.2);

std::vector<double> scatter(std::span<const double> x, const AttentionMask& mask);
std::vector<double> gather(std::span<const double> full, const AttentionMask& mask);

} // namespace lmoa
