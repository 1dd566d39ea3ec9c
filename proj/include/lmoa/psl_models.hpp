#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lmoa/core_types.hpp"
#include "lmoa/kernels.hpp"
#include "lmoa/rng.hpp"

namespace lmoa {

struct PslHyper {
    std::size_t epochs = 10;
    double rbm_learning_rate = 0.1;
    double dae_learning_rate = 0.05;
    double noise_rate = 0.1;
    std::size_t k_max = 50;
    // Fill RealSubspaceModel::loss_history (two extra forward passes per epoch).
    bool record_loss = false;
};

struct PslParams {
    double rho = 0.5;
    std::size_t k = 1;
};

// Restricted Boltzmann machine over the binary part xb.
struct BinarySubspaceModel {
    Matrix weights; // d x K
    std::vector<float> visible_bias;
    std::vector<float> hidden_bias;

    std::size_t visible() const noexcept { return weights.rows; }
    std::size_t hidden() const noexcept { return weights.cols; }

    std::vector<double> hidden_probabilities(std::span<const std::uint8_t> xb) const;
    std::vector<double> visible_probabilities(std::span<const std::uint8_t> hb) const;
};

// Single-hidden-layer denoising autoencoder over the real part xr, trained on
// values min-max normalized by the variables' feasible bounds.
struct RealSubspaceModel {
    Matrix encode_weights; // d x K
    Matrix decode_weights; // K x d
    std::vector<float> encode_bias;
    std::vector<float> decode_bias;
    std::vector<double> lower;
    std::vector<double> upper;
    // Clean mean squared reconstruction error (normalized units): entry 0 is
    // before training, entry e after epoch e. Empty unless record_loss is set.
    std::vector<double> loss_history;

    std::size_t visible() const noexcept { return encode_weights.rows; }
    std::size_t hidden() const noexcept { return encode_weights.cols; }

    std::vector<double> encode(std::span<const double> xr) const;
    std::vector<double> decode(std::span<const double> hr) const;
};

struct SubspaceModels {
    BinarySubspaceModel binary;
    RealSubspaceModel real;
};

// Trains both models from scratch on the given (nondominated) solutions:
// the RBM by one-step contrastive divergence, the DAE by full-batch gradient
// descent on squared error with masking noise. Throws ParamError when K is 0,
// K > d, or the set is empty.
SubspaceModels train_models(std::span<const SparseSolution> solutions, std::size_t k, std::span<const double> lower,
                            std::span<const double> upper, const PslHyper& hyper, Rng& rng);

struct ReducedSolution {
    std::vector<std::uint8_t> hb;
    std::vector<double> hr;
};

// Deterministic: hidden activations above 0.5 become 1, exactly 0.5 becomes 0.
ReducedSolution reduce(const SparseSolution& s, const SubspaceModels& models);
// Unrepaired; callers repair before evaluation.
SparseSolution recover(const ReducedSolution& r, const SubspaceModels& models);

struct SurvivorStats {
    std::size_t genetic_made = 0;
    std::size_t genetic_survived = 0;
    std::size_t model_made = 0;
    std::size_t model_survived = 0;
};

// rho' = (sm + eps) / (sm + sg + 2 eps) with sm, sg the survival rates of
// model-based and genetic offspring, clamped to [0.1, 0.9];
// K' = clamp(round(mean |xb| / ceil(d / k_max)), 1, min(k_max, d)).
PslParams adapt_params(const SurvivorStats& stats, std::span<const SparseSolution> nondominated,
                       const PslParams& current, std::size_t k_max);

// K from the nondominated set alone (the K half of adapt_params).
std::size_t adapt_hidden_size(std::span<const SparseSolution> nondominated, std::size_t k_max);

} // namespace lmoa
