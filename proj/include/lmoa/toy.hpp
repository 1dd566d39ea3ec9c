#pragma once

#include <cstdint>

#include "lmoa/attention_mask.hpp"
#include "lmoa/core_types.hpp"
#include "lmoa/oracle.hpp"

namespace lmoa {

// Synthetic attack targets. Weights and the image are drawn from `seed`; the
// class biases are then set so that `label` wins on the clean image by
// exactly `margin` logits.

struct LinearToy {
    ImageTensor image;
    ToyLinearSpec spec;
    std::size_t label = 0;
};

LinearToy make_linear_toy(const ImageShape& shape, std::size_t classes, double margin, std::uint64_t seed);

struct ConvToy {
    ImageTensor image;
    ToyConvSpec spec;
    std::size_t label = 0;
    // The square block the pooling concentrates on (pool weight 1 inside,
    // `outside_weight` elsewhere), as a single-channel 0/255 graymap.
    ImageTensor region;
};

// The sensitive region is a centered square covering a quarter of the pixels.
ConvToy make_conv_toy(const ImageShape& shape, std::size_t classes, std::size_t filters, double margin,
                      double outside_weight, std::uint64_t seed);

} // namespace lmoa
