#include "lmoa/oracle.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "lmoa/error.hpp"

namespace lmoa {

Oracle::Oracle(std::size_t classes, ImageShape shape) : classes_(classes), shape_(shape) {}

std::vector<double> Oracle::classify(const ImageTensor& image)
{
    if (image.shape() != shape_)
        throw StructuralError("oracle expects " + to_string(shape_) + " images, got " + to_string(image.shape()));
    const auto number = total_.fetch_add(1) + 1;
    since_reset_.fetch_add(1);

    auto probs = do_classify(image, number);
    const auto id = static_cast<std::int64_t>(number);
    if (probs.size() != classes_)
        throw OracleError("oracle returned " + std::to_string(probs.size()) + " probabilities, expected " +
                              std::to_string(classes_),
                          id);
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) throw OracleError("oracle returned an invalid probability", id);
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw OracleError("oracle probabilities sum to " + std::to_string(sum) + ", not 1", id);
    return probs;
}

std::vector<double> softmax(const std::vector<double>& logits)
{
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = std::exp(logits[k] - peak);
        sum += out[k];
    }
    for (auto& v : out)
        v /= sum;
    return out;
}

std::size_t argmax(const std::vector<double>& v)
{
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------

namespace {

std::ifstream open_text(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return in;
}

template<typename T>
T read_value(std::istream& in, const std::filesystem::path& path, const char* what)
{
    T v{};
    if (!(in >> v)) throw ParseError(path.string() + ": expected " + what);
    return v;
}

void read_reals(std::istream& in, const std::filesystem::path& path, std::vector<double>& out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(read_value<double>(in, path, "a real number"));
}

void expect_end(std::istream& in, const std::filesystem::path& path)
{
    std::string extra;
    if (in >> extra) throw ParseError(path.string() + ": trailing data '" + extra + "'");
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

} // namespace

ToyLinearSpec read_toy_linear(const std::filesystem::path& path)
{
    auto in = open_text(path);
    ToyLinearSpec spec;
    spec.classes = read_value<std::size_t>(in, path, "class count");
    spec.inputs = read_value<std::size_t>(in, path, "input count");
    if (spec.classes < 2 || spec.inputs == 0) throw ParseError(path.string() + ": need m >= 2 and d >= 1");
    spec.weights.reserve(spec.classes * spec.inputs);
    for (std::size_t k = 0; k < spec.classes; ++k) {
        read_reals(in, path, spec.weights, spec.inputs);
        read_reals(in, path, spec.bias, 1);
    }
    expect_end(in, path);
    return spec;
}

void write_toy_linear(const std::filesystem::path& path, const ToyLinearSpec& spec)
{
    auto out = open_out(path);
    out << spec.classes << ' ' << spec.inputs << '\n';
    for (std::size_t k = 0; k < spec.classes; ++k) {
        for (std::size_t j = 0; j < spec.inputs; ++j)
            out << spec.weights[k * spec.inputs + j] << ' ';
        out << spec.bias[k] << '\n';
    }
}

ToyLinearOracle::ToyLinearOracle(ToyLinearSpec spec, ImageShape shape) : Oracle(spec.classes, shape), spec_(std::move(spec))
{
    if (spec_.inputs != shape.size())
        throw StructuralError("toy linear weights cover " + std::to_string(spec_.inputs) + " inputs, image " +
                              to_string(shape) + " has " + std::to_string(shape.size()));
    if (spec_.weights.size() != spec_.classes * spec_.inputs || spec_.bias.size() != spec_.classes)
        throw StructuralError("toy linear spec has inconsistent sizes");
}

std::vector<double> ToyLinearOracle::do_classify(const ImageTensor& image, std::uint64_t)
{
    const auto px = image.pixels();
    std::vector<double> logits(spec_.classes);
    for (std::size_t k = 0; k < spec_.classes; ++k) {
        const double* w = spec_.weights.data() + k * spec_.inputs;
        double acc = 0.0;
        for (std::size_t j = 0; j < spec_.inputs; ++j)
            acc += w[j] * (px[j] / 255.0);
        logits[k] = acc + spec_.bias[k];
    }
    return softmax(logits);
}

// ---------------------------------------------------------------------------

ToyConvSpec read_toy_conv(const std::filesystem::path& path)
{
    auto in = open_text(path);
    if (read_value<std::string>(in, path, "'toyconv' header") != "toyconv")
        throw ParseError(path.string() + ": missing 'toyconv' header");
    ToyConvSpec spec;
    spec.classes = read_value<std::size_t>(in, path, "class count");
    spec.filters = read_value<std::size_t>(in, path, "filter count");
    spec.shape.height = read_value<std::size_t>(in, path, "height");
    spec.shape.width = read_value<std::size_t>(in, path, "width");
    spec.shape.channels = read_value<std::size_t>(in, path, "channels");
    if (spec.classes < 2 || spec.filters == 0 || spec.shape.size() == 0)
        throw ParseError(path.string() + ": degenerate toyconv dimensions");
    for (std::size_t f = 0; f < spec.filters; ++f) {
        read_reals(in, path, spec.kernels, spec.shape.channels * 9);
        read_reals(in, path, spec.filter_bias, 1);
    }
    read_reals(in, path, spec.pool, spec.shape.height * spec.shape.width);
    for (std::size_t k = 0; k < spec.classes; ++k) {
        read_reals(in, path, spec.head, spec.filters);
        read_reals(in, path, spec.head_bias, 1);
    }
    expect_end(in, path);
    return spec;
}

void write_toy_conv(const std::filesystem::path& path, const ToyConvSpec& spec)
{
    auto out = open_out(path);
    out << "toyconv " << spec.classes << ' ' << spec.filters << ' ' << spec.shape.height << ' ' << spec.shape.width
        << ' ' << spec.shape.channels << '\n';
    const auto ksize = spec.shape.channels * 9;
    for (std::size_t f = 0; f < spec.filters; ++f) {
        for (std::size_t j = 0; j < ksize; ++j)
            out << spec.kernels[f * ksize + j] << ' ';
        out << spec.filter_bias[f] << '\n';
    }
    for (std::size_t r = 0; r < spec.shape.height; ++r) {
        for (std::size_t c = 0; c < spec.shape.width; ++c)
            out << (c ? " " : "") << spec.pool[r * spec.shape.width + c];
        out << '\n';
    }
    for (std::size_t k = 0; k < spec.classes; ++k) {
        for (std::size_t f = 0; f < spec.filters; ++f)
            out << spec.head[k * spec.filters + f] << ' ';
        out << spec.head_bias[k] << '\n';
    }
}

ToyConvOracle::ToyConvOracle(ToyConvSpec spec) : Oracle(spec.classes, spec.shape), spec_(std::move(spec))
{
    const auto& s = spec_;
    if (s.kernels.size() != s.filters * s.shape.channels * 9 || s.filter_bias.size() != s.filters ||
        s.pool.size() != s.shape.height * s.shape.width || s.head.size() != s.classes * s.filters ||
        s.head_bias.size() != s.classes)
        throw StructuralError("toy conv spec has inconsistent sizes");
}

std::vector<double> ToyConvOracle::do_classify(const ImageTensor& image, std::uint64_t)
{
    const auto& s = spec_;
    const auto h = static_cast<std::ptrdiff_t>(s.shape.height);
    const auto w = static_cast<std::ptrdiff_t>(s.shape.width);
    const auto channels = s.shape.channels;
    const double area = static_cast<double>(s.shape.height * s.shape.width);

    std::vector<double> pooled(s.filters, 0.0);
    for (std::size_t f = 0; f < s.filters; ++f) {
        const double* kernel = s.kernels.data() + f * channels * 9;
        double acc = 0.0;
        for (std::ptrdiff_t r = 0; r < h; ++r) {
            for (std::ptrdiff_t c = 0; c < w; ++c) {
                double v = s.filter_bias[f];
                for (std::size_t ch = 0; ch < channels; ++ch) {
                    for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
                        const auto rr = r + ky - 1;
                        if (rr < 0 || rr >= h) continue;
                        for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
                            const auto cc = c + kx - 1;
                            if (cc < 0 || cc >= w) continue;
                            const double px = image.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc), ch);
                            v += kernel[ch * 9 + static_cast<std::size_t>(ky * 3 + kx)] * (px / 255.0);
                        }
                    }
                }
                acc += s.pool[static_cast<std::size_t>(r * w + c)] * v;
            }
        }
        pooled[f] = acc / area;
    }

    std::vector<double> logits(s.classes);
    for (std::size_t k = 0; k < s.classes; ++k) {
        double acc = s.head_bias[k];
        for (std::size_t f = 0; f < s.filters; ++f)
            acc += s.head[k * s.filters + f] * pooled[f];
        logits[k] = acc;
    }
    return softmax(logits);
}

// ---------------------------------------------------------------------------

std::string image_hash(const ImageTensor& image)
{
    const auto header = to_string(image.shape()) + ":";
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw Error("EVP_MD_CTX_new failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, image.pixels().data(), image.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw Error("sha256 failed");

    std::ostringstream hex;
    hex << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i)
        hex << std::setw(2) << static_cast<int>(digest[i]);
    return hex.str();
}

RecordingOracle::RecordingOracle(Oracle& inner, std::optional<std::filesystem::path> path)
    : Oracle(inner.class_count(), inner.shape()), inner_(inner), path_(std::move(path))
{
    if (path_) {
        std::ofstream truncate(*path_);
        if (!truncate) throw Error("cannot write " + path_->string());
    }
}

std::vector<double> RecordingOracle::do_classify(const ImageTensor& image, std::uint64_t)
{
    auto probs = inner_.classify(image);
    auto hash = image_hash(image);
    if (path_) {
        std::ofstream out(*path_, std::ios::app);
        out << nlohmann::json{{"hash", hash}, {"probs", probs}}.dump() << '\n';
        if (!out) throw Error("cannot append to " + path_->string());
    }
    hashes_.push_back(std::move(hash));
    return probs;
}

ReplayOracle::ReplayOracle(const std::filesystem::path& path, std::size_t class_count, ImageShape shape)
    : Oracle(class_count, shape)
{
    auto in = open_text(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            cache_[j.at("hash").get<std::string>()] = j.at("probs").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::vector<double> ReplayOracle::do_classify(const ImageTensor& image, std::uint64_t query_number)
{
    const auto it = cache_.find(image_hash(image));
    if (it == cache_.end())
        throw OracleError("replay cache has no entry for this image", static_cast<std::int64_t>(query_number));
    return it->second;
}

} // namespace lmoa
