#include "lmoa/psl_models.hpp"

#include <algorithm>
#include <cmath>

#include "lmoa/error.hpp"

namespace lmoa {

namespace {

float sigmoid(float z) { return 1.0f / (1.0f + std::exp(-z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void add_bias_sigmoid(Matrix& m, std::span<const float> bias)
{
    for (std::size_t i = 0; i < m.rows; ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols; ++j)
            r[j] = sigmoid(r[j] + bias[j]);
    }
}

void init_uniform(Matrix& m, double scale, Rng& rng)
{
    for (auto& v : m.data)
        v = static_cast<float>(rng.uniform(-scale, scale));
}

double normalize(double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }

// Mean squared reconstruction error of the autoencoder on clean inputs.
double reconstruction_error(const RealSubspaceModel& dae, const Matrix& x)
{
    Matrix h = matmul(x, dae.encode_weights);
    add_bias_sigmoid(h, dae.encode_bias);
    Matrix y = matmul(h, dae.decode_weights);
    add_bias_sigmoid(y, dae.decode_bias);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const double e = static_cast<double>(y.data[i]) - static_cast<double>(x.data[i]);
        acc += e * e;
    }
    return acc / static_cast<double>(y.data.size());
}

BinarySubspaceModel train_rbm(const Matrix& v0, std::size_t k, const PslHyper& hyper, Rng& rng)
{
    const auto n = v0.rows;
    const auto d = v0.cols;
    BinarySubspaceModel rbm;
    rbm.weights = Matrix(d, k);
    init_uniform(rbm.weights, 0.05, rng);
    rbm.visible_bias.assign(d, 0.0f);
    rbm.hidden_bias.assign(k, 0.0f);

    const auto rate = static_cast<float>(hyper.rbm_learning_rate / static_cast<double>(n));
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        Matrix h0 = matmul(v0, rbm.weights);
        add_bias_sigmoid(h0, rbm.hidden_bias);
        Matrix h0_sample(n, k);
        for (std::size_t i = 0; i < h0.data.size(); ++i)
            h0_sample.data[i] = rng.bernoulli(h0.data[i]) ? 1.0f : 0.0f;

        Matrix v1 = matmul_bt(h0_sample, rbm.weights);
        add_bias_sigmoid(v1, rbm.visible_bias);
        Matrix h1 = matmul(v1, rbm.weights);
        add_bias_sigmoid(h1, rbm.hidden_bias);

        const Matrix positive = matmul_at(v0, h0);
        const Matrix negative = matmul_at(v1, h1);
        for (std::size_t i = 0; i < rbm.weights.data.size(); ++i)
            rbm.weights.data[i] += rate * (positive.data[i] - negative.data[i]);
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t j = 0; j < d; ++j)
                rbm.visible_bias[j] += rate * (v0(s, j) - v1(s, j));
            for (std::size_t j = 0; j < k; ++j)
                rbm.hidden_bias[j] += rate * (h0(s, j) - h1(s, j));
        }
    }
    return rbm;
}

RealSubspaceModel train_dae(const Matrix& x, std::size_t k, std::span<const double> lower,
                            std::span<const double> upper, const PslHyper& hyper, Rng& rng)
{
    const auto n = x.rows;
    const auto d = x.cols;
    RealSubspaceModel dae;
    dae.encode_weights = Matrix(d, k);
    dae.decode_weights = Matrix(k, d);
    const double scale = std::sqrt(6.0 / static_cast<double>(d + k));
    init_uniform(dae.encode_weights, scale, rng);
    init_uniform(dae.decode_weights, scale, rng);
    dae.encode_bias.assign(k, 0.0f);
    dae.decode_bias.assign(d, 0.0f);
    dae.lower.assign(lower.begin(), lower.end());
    dae.upper.assign(upper.begin(), upper.end());
    if (hyper.record_loss) dae.loss_history.push_back(reconstruction_error(dae, x));

    const auto rate = static_cast<float>(hyper.dae_learning_rate / static_cast<double>(n));
    Matrix noisy(n, d);
    Matrix dy(n, d);
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (std::size_t i = 0; i < x.data.size(); ++i)
            noisy.data[i] = rng.bernoulli(hyper.noise_rate) ? 0.0f : x.data[i];

        Matrix h = matmul(noisy, dae.encode_weights);
        add_bias_sigmoid(h, dae.encode_bias);
        Matrix y = matmul(h, dae.decode_weights);
        add_bias_sigmoid(y, dae.decode_bias);

        // Loss per sample: 0.5 * sum_j (y_j - x_j)^2.
        for (std::size_t i = 0; i < dy.data.size(); ++i)
            dy.data[i] = (y.data[i] - x.data[i]) * y.data[i] * (1.0f - y.data[i]);
        const Matrix grad_decode = matmul_at(h, dy);
        Matrix dh = matmul_bt(dy, dae.decode_weights);
        for (std::size_t i = 0; i < dh.data.size(); ++i)
            dh.data[i] *= h.data[i] * (1.0f - h.data[i]);
        const Matrix grad_encode = matmul_at(noisy, dh);

        for (std::size_t i = 0; i < dae.decode_weights.data.size(); ++i)
            dae.decode_weights.data[i] -= rate * grad_decode.data[i];
        for (std::size_t i = 0; i < dae.encode_weights.data.size(); ++i)
            dae.encode_weights.data[i] -= rate * grad_encode.data[i];
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t j = 0; j < d; ++j)
                dae.decode_bias[j] -= rate * dy(s, j);
            for (std::size_t j = 0; j < k; ++j)
                dae.encode_bias[j] -= rate * dh(s, j);
        }
        if (hyper.record_loss) dae.loss_history.push_back(reconstruction_error(dae, x));
    }
    return dae;
}

} // namespace

std::vector<double> BinarySubspaceModel::hidden_probabilities(std::span<const std::uint8_t> xb) const
{
    if (xb.size() != visible()) throw StructuralError("RBM input length does not match its visible layer");
    std::vector<double> z(hidden_bias.begin(), hidden_bias.end());
    for (std::size_t i = 0; i < xb.size(); ++i) {
        if (!xb[i]) continue;
        const auto w = weights.row(i);
        for (std::size_t j = 0; j < z.size(); ++j)
            z[j] += w[j];
    }
    for (auto& v : z)
        v = sigmoid(v);
    return z;
}

std::vector<double> BinarySubspaceModel::visible_probabilities(std::span<const std::uint8_t> hb) const
{
    if (hb.size() != hidden()) throw StructuralError("RBM code length does not match its hidden layer");
    std::vector<double> z(visible_bias.begin(), visible_bias.end());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto w = weights.row(i);
        for (std::size_t j = 0; j < hb.size(); ++j)
            if (hb[j]) z[i] += w[j];
        z[i] = sigmoid(z[i]);
    }
    return z;
}

std::vector<double> RealSubspaceModel::encode(std::span<const double> xr) const
{
    if (xr.size() != visible()) throw StructuralError("DAE input length does not match its visible layer");
    std::vector<double> z(encode_bias.begin(), encode_bias.end());
    for (std::size_t i = 0; i < xr.size(); ++i) {
        const double v = normalize(xr[i], lower[i], upper[i]);
        const auto w = encode_weights.row(i);
        for (std::size_t j = 0; j < z.size(); ++j)
            z[j] += v * w[j];
    }
    for (auto& v : z)
        v = sigmoid(v);
    return z;
}

std::vector<double> RealSubspaceModel::decode(std::span<const double> hr) const
{
    if (hr.size() != hidden()) throw StructuralError("DAE code length does not match its hidden layer");
    std::vector<double> z(decode_bias.begin(), decode_bias.end());
    for (std::size_t j = 0; j < hr.size(); ++j) {
        const auto w = decode_weights.row(j);
        for (std::size_t i = 0; i < z.size(); ++i)
            z[i] += hr[j] * w[i];
    }
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = lower[i] + (upper[i] - lower[i]) * sigmoid(z[i]);
    return z;
}

SubspaceModels train_models(std::span<const SparseSolution> solutions, std::size_t k, std::span<const double> lower,
                            std::span<const double> upper, const PslHyper& hyper, Rng& rng)
{
    if (solutions.empty()) throw ParamError("subspace models need at least one training solution");
    const auto d = solutions.front().size();
    if (k == 0 || k > d)
        throw ParamError("hidden size K = " + std::to_string(k) + " must lie in [1, " + std::to_string(d) + "]");
    if (lower.size() != d || upper.size() != d) throw StructuralError("bounds do not match the solution length");

    const auto n = solutions.size();
    Matrix bits(n, d);
    Matrix reals(n, d);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& sol = solutions[s];
        if (sol.size() != d) throw StructuralError("training solutions differ in length");
        for (std::size_t i = 0; i < d; ++i) {
            bits(s, i) = sol.xb[i];
            reals(s, i) = static_cast<float>(normalize(sol.xr[i], lower[i], upper[i]));
        }
    }
    SubspaceModels models;
    models.binary = train_rbm(bits, k, hyper, rng);
    models.real = train_dae(reals, k, lower, upper, hyper, rng);
    return models;
}

ReducedSolution reduce(const SparseSolution& s, const SubspaceModels& models)
{
    ReducedSolution r;
    const auto p = models.binary.hidden_probabilities(s.xb);
    r.hb.resize(p.size());
    for (std::size_t j = 0; j < p.size(); ++j)
        r.hb[j] = p[j] > 0.5 ? 1 : 0;
    r.hr = models.real.encode(s.xr);
    return r;
}

SparseSolution recover(const ReducedSolution& r, const SubspaceModels& models)
{
    const auto p = models.binary.visible_probabilities(r.hb);
    SparseSolution s(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        s.xb[i] = p[i] > 0.5 ? 1 : 0;
    s.xr = models.real.decode(r.hr);
    return s;
}

std::size_t adapt_hidden_size(std::span<const SparseSolution> nondominated, std::size_t k_max)
{
    if (nondominated.empty()) throw ParamError("parameter adaptation needs a nonempty nondominated set");
    if (k_max == 0) throw ParamError("K_max must be positive");
    const auto d = nondominated.front().size();
    double ones = 0.0;
    for (const auto& s : nondominated)
        ones += static_cast<double>(std::count(s.xb.begin(), s.xb.end(), std::uint8_t{1}));
    const double mean = ones / static_cast<double>(nondominated.size());
    const auto block = (d + k_max - 1) / k_max;
    const auto k = static_cast<std::size_t>(std::llround(mean / static_cast<double>(block)));
    return std::clamp<std::size_t>(k, 1, std::min(k_max, d));
}

PslParams adapt_params(const SurvivorStats& stats, std::span<const SparseSolution> nondominated,
                       [[maybe_unused]] const PslParams& current, std::size_t k_max)
{
    constexpr double eps = 1e-6;
    const double model_rate =
        static_cast<double>(stats.model_survived) / static_cast<double>(std::max<std::size_t>(stats.model_made, 1));
    const double genetic_rate = static_cast<double>(stats.genetic_survived) /
                                static_cast<double>(std::max<std::size_t>(stats.genetic_made, 1));
    PslParams next;
    next.rho = std::clamp((model_rate + eps) / (model_rate + genetic_rate + 2.0 * eps), 0.1, 0.9);
    next.k = adapt_hidden_size(nondominated, k_max);
    return next;
}

} // namespace lmoa
