#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lmoa {

struct ImageShape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;

    std::size_t size() const noexcept { return height * width * channels; }
    bool operator==(const ImageShape&) const = default;
};

std::string to_string(const ImageShape& shape);

// Row-major, channel-minor 8-bit image: pixel (r, c, ch) lives at
// (r * width + c) * channels + ch.
class ImageTensor {
public:
    ImageTensor() = default;
    ImageTensor(ImageShape shape, std::vector<std::uint8_t> pixels);
    explicit ImageTensor(ImageShape shape, std::uint8_t fill = 0);

    const ImageShape& shape() const noexcept { return shape_; }
    std::size_t height() const noexcept { return shape_.height; }
    std::size_t width() const noexcept { return shape_.width; }
    std::size_t channels() const noexcept { return shape_.channels; }
    std::size_t size() const noexcept { return pixels_.size(); }

    std::size_t offset(std::size_t row, std::size_t col, std::size_t ch) const noexcept
    {
        return (row * shape_.width + col) * shape_.channels + ch;
    }

    std::uint8_t at(std::size_t row, std::size_t col, std::size_t ch) const { return pixels_[offset(row, col, ch)]; }
    std::uint8_t& at(std::size_t row, std::size_t col, std::size_t ch) { return pixels_[offset(row, col, ch)]; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    bool operator==(const ImageTensor&) const = default;

private:
    ImageShape shape_;
    std::vector<std::uint8_t> pixels_;
};

// Hybrid encoding of a perturbation over the d masked-in positions: xb selects
// which positions are perturbed, xr holds the amount.
struct SparseSolution {
    std::vector<std::uint8_t> xb;
    std::vector<double> xr;

    SparseSolution() = default;
    explicit SparseSolution(std::size_t d) : xb(d, 0), xr(d, 0.0) {}
    SparseSolution(std::vector<std::uint8_t> b, std::vector<double> r);

    std::size_t size() const noexcept { return xb.size(); }
    bool operator==(const SparseSolution&) const = default;
};

// x_i = xb_i * xr_i
std::vector<double> effective_perturbation(const SparseSolution& s);

// Both objectives are minimized: f1 is the classifier's true-class
// probability, f2 the l2 norm of the perturbation.
struct ObjectiveVector {
    double f1 = 0.0;
    double f2 = 0.0;

    bool operator==(const ObjectiveVector&) const = default;
};

enum class Provenance : std::uint8_t { initial, genetic, model_based };

const char* to_string(Provenance p);

struct Individual {
    SparseSolution solution;
    std::optional<ObjectiveVector> objectives;
    Provenance provenance = Provenance::initial;
    // Probability vector returned by the evaluation query; kept so that
    // reporting never re-queries the oracle.
    std::vector<double> probs;

    bool evaluated() const noexcept { return objectives.has_value(); }
};

} // namespace lmoa
