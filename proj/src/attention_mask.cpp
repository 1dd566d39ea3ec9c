#include "lmoa/attention_mask.hpp"

#include <algorithm>
#include <cmath>

#include "lmoa/error.hpp"
#include "lmoa/image_io.hpp"

namespace lmoa {

AttentionMask::AttentionMask(ImageShape shape, std::vector<std::uint8_t> include)
    : shape_(shape), include_(std::move(include))
{
    if (include_.size() != shape_.size())
        throw StructuralError("mask of shape " + to_string(shape_) + " needs " + std::to_string(shape_.size()) +
                              " entries, got " + std::to_string(include_.size()));
    for (std::size_t i = 0; i < include_.size(); ++i) {
        if (include_[i] > 1) throw StructuralError("mask entries must be 0 or 1");
        if (include_[i]) index_.push_back(i);
    }
    if (index_.empty()) throw MaskError("attention mask includes no position");
}

std::array<std::size_t, 3> AttentionMask::position(std::size_t i) const
{
    const auto off = index_.at(i);
    const auto ch = off % shape_.channels;
    const auto pix = off / shape_.channels;
    return {pix / shape_.width, pix % shape_.width, ch};
}

AttentionMask binarize_map(std::span<const double> map, const ImageShape& shape, double threshold)
{
    if (!(threshold >= 0.0)) throw ParamError("binarization threshold must be nonnegative");
    if (map.size() != shape.size())
        throw StructuralError("attention map has " + std::to_string(map.size()) + " entries, shape " +
                              to_string(shape) + " needs " + std::to_string(shape.size()));
    std::vector<std::uint8_t> include(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (!(map[i] >= 0.0)) throw ParamError("attention map values must be nonnegative");
        include[i] = map[i] > threshold ? 1 : 0;
    }
    return AttentionMask(shape, std::move(include));
}

AttentionMask full_mask(const ImageShape& shape)
{
    return AttentionMask(shape, std::vector<std::uint8_t>(shape.size(), 1));
}

AttentionMask load_mask(const std::filesystem::path& path, const ImageShape& target, double threshold_fraction)
{
    if (!(threshold_fraction >= 0.0 && threshold_fraction <= 1.0))
        throw ParamError("mask threshold fraction must lie in [0, 1]");
    const auto gray = read_pgm(path);
    if (gray.height() != target.height || gray.width() != target.width)
        throw MaskError("mask " + path.string() + " is " + std::to_string(gray.height()) + "x" +
                        std::to_string(gray.width()) + ", image is " + std::to_string(target.height) + "x" +
                        std::to_string(target.width));

    const auto px = gray.pixels();
    const double peak = *std::max_element(px.begin(), px.end());
    const double threshold = threshold_fraction * peak;

    std::vector<double> map(target.size());
    for (std::size_t p = 0; p < px.size(); ++p)
        for (std::size_t ch = 0; ch < target.channels; ++ch)
            map[p * target.channels + ch] = px[p];
    return binarize_map(map, target, threshold);
}

std::vector<double> scatter(std::span<const double> x, const AttentionMask& mask)
{
    if (x.size() != mask.size())
        throw StructuralError("scatter: vector has " + std::to_string(x.size()) + " entries, mask selects " +
                              std::to_string(mask.size()));
    std::vector<double> full(mask.shape().size(), 0.0);
    const auto idx = mask.index();
    for (std::size_t i = 0; i < x.size(); ++i)
        full[idx[i]] = x[i];
    return full;
}

std::vector<double> gather(std::span<const double> full, const AttentionMask& mask)
{
    if (full.size() != mask.shape().size())
        throw StructuralError("gather: array has " + std::to_string(full.size()) + " entries, mask shape needs " +
                              std::to_string(mask.shape().size()));
    std::vector<double> x(mask.size());
    const auto idx = mask.index();
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = full[idx[i]];
    return x;
}

} // namespace lmoa
