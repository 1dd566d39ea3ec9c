#include "lmoa/toy.hpp"

#include <algorithm>
#include <cmath>

#include "lmoa/error.hpp"
#include "lmoa/rng.hpp"

namespace lmoa {

namespace {

ImageTensor random_image(const ImageShape& shape, Rng& rng)
{
    std::vector<std::uint8_t> px(shape.size());
    for (auto& v : px)
        v = static_cast<std::uint8_t>(rng.below(256));
    return ImageTensor(shape, std::move(px));
}

// Shifts logits (through the biases) so class 0 leads the runner-up by margin.
void set_margin(std::vector<double>& bias, const std::vector<double>& logits, double margin)
{
    double best_other = -INFINITY;
    for (std::size_t k = 1; k < logits.size(); ++k)
        best_other = std::max(best_other, logits[k]);
    bias[0] += best_other - logits[0] + margin;
}

} // namespace

LinearToy make_linear_toy(const ImageShape& shape, std::size_t classes, double margin, std::uint64_t seed)
{
    if (classes < 2) throw ParamError("a toy classifier needs at least 2 classes");
    Rng rng(seed);
    LinearToy toy;
    toy.image = random_image(shape, rng);
    toy.spec.classes = classes;
    toy.spec.inputs = shape.size();
    toy.spec.weights.resize(classes * shape.size());
    for (auto& w : toy.spec.weights)
        w = rng.uniform(-1.0, 1.0);
    toy.spec.bias.assign(classes, 0.0);

    std::vector<double> logits(classes, 0.0);
    const auto px = toy.image.pixels();
    for (std::size_t k = 0; k < classes; ++k)
        for (std::size_t j = 0; j < shape.size(); ++j)
            logits[k] += toy.spec.weights[k * shape.size() + j] * (px[j] / 255.0);
    set_margin(toy.spec.bias, logits, margin);
    toy.label = 0;
    return toy;
}

ConvToy make_conv_toy(const ImageShape& shape, std::size_t classes, std::size_t filters, double margin,
                      double outside_weight, std::uint64_t seed)
{
    if (classes < 2 || filters < 1) throw ParamError("a toy conv classifier needs >= 2 classes and >= 1 filter");
    Rng rng(seed);
    ConvToy toy;
    toy.image = random_image(shape, rng);

    auto& s = toy.spec;
    s.classes = classes;
    s.filters = filters;
    s.shape = shape;
    s.kernels.resize(filters * shape.channels * 9);
    for (auto& w : s.kernels)
        w = rng.uniform(-1.0, 1.0);
    s.filter_bias.assign(filters, 0.0);

    // Centered square with half the side length: a quarter of the pixels.
    const auto side_r = shape.height / 2;
    const auto side_c = shape.width / 2;
    const auto r0 = (shape.height - side_r) / 2;
    const auto c0 = (shape.width - side_c) / 2;
    toy.region = ImageTensor({shape.height, shape.width, 1}, std::uint8_t{0});
    s.pool.assign(shape.height * shape.width, outside_weight);
    for (std::size_t r = r0; r < r0 + side_r; ++r)
        for (std::size_t c = c0; c < c0 + side_c; ++c) {
            s.pool[r * shape.width + c] = 1.0;
            toy.region.at(r, c, 0) = 255;
        }

    // Scale the head so that pooled features (which average over the whole
    // image) move the logits by O(1) under visible perturbations.
    const double head_scale = static_cast<double>(shape.height * shape.width) /
                              static_cast<double>(side_r * side_c) * 8.0;
    s.head.resize(classes * filters);
    for (auto& w : s.head)
        w = head_scale * rng.uniform(-1.0, 1.0);
    s.head_bias.assign(classes, 0.0);

    ToyConvOracle probe(s);
    const auto p = probe.classify(toy.image);
    std::vector<double> logits(classes);
    for (std::size_t k = 0; k < classes; ++k)
        logits[k] = std::log(p[k]);
    set_margin(s.head_bias, logits, margin);
    toy.label = 0;
    return toy;
}

} // namespace lmoa
