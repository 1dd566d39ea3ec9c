#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmoa/core_types.hpp"

namespace lmoa {

struct QueryStats {
    std::uint64_t total = 0;
    std::uint64_t since_reset = 0;

    bool operator==(const QueryStats&) const = default;
};

// Black-box classifier returning class probabilities.
//
// classify() is the only entry point that reaches a backend. It rejects
// shape mismatches without counting, counts every dispatched query exactly
// once (including ones that later fail), and checks the returned vector:
// class_count entries, finite, nonnegative, summing to 1 within 1e-6.
class Oracle {
public:
    virtual ~Oracle() = default;
    Oracle(const Oracle&) = delete;
    Oracle& operator=(const Oracle&) = delete;

    std::vector<double> classify(const ImageTensor& image);

    std::size_t class_count() const noexcept { return classes_; }
    const ImageShape& shape() const noexcept { return shape_; }

    QueryStats query_stats() const noexcept { return {total_.load(), since_reset_.load()}; }
    void reset_stats() noexcept { since_reset_.store(0); }

    // True when classify() may be called from several threads at once.
    virtual bool concurrency_safe() const noexcept = 0;
    virtual std::string backend_name() const = 0;

protected:
    Oracle(std::size_t classes, ImageShape shape);

    // `query_number` is the 1-based ordinal of this query on this handle.
    virtual std::vector<double> do_classify(const ImageTensor& image, std::uint64_t query_number) = 0;

    void set_class_count(std::size_t classes) noexcept { classes_ = classes; }

private:
    std::size_t classes_;
    ImageShape shape_;
    std::atomic<std::uint64_t> total_{0};
    std::atomic<std::uint64_t> since_reset_{0};
};

// Numerically stable softmax with a fixed summation order.
std::vector<double> softmax(const std::vector<double>& logits);

std::size_t argmax(const std::vector<double>& v);

// ---------------------------------------------------------------------------
// Toy linear classifier: logits = W * (pixels / 255) + b.
//
// File format (text): first line "m d", then m rows of d + 1 reals, the d
// weights of the class followed by its bias.
struct ToyLinearSpec {
    std::size_t classes = 0;
    std::size_t inputs = 0;
    std::vector<double> weights; // classes x inputs, row-major
    std::vector<double> bias;    // classes
};

ToyLinearSpec read_toy_linear(const std::filesystem::path& path);
void write_toy_linear(const std::filesystem::path& path, const ToyLinearSpec& spec);

class ToyLinearOracle final : public Oracle {
public:
    ToyLinearOracle(ToyLinearSpec spec, ImageShape shape);

    bool concurrency_safe() const noexcept override { return true; }
    std::string backend_name() const override { return "toy_linear"; }
    const ToyLinearSpec& spec() const noexcept { return spec_; }

protected:
    std::vector<double> do_classify(const ImageTensor& image, std::uint64_t) override;

private:
    ToyLinearSpec spec_;
};

// ---------------------------------------------------------------------------
// Toy convolutional classifier: a bank of 3x3 same-padded convolutions over
// all input channels, a spatially weighted global average pool per filter
// and a linear softmax head. The pooling weights let a test place the
// classifier's sensitivity in a chosen image region.
//
// File format (text):
//   line 1:            "toyconv m F H W C"
//   F lines:           C*9 kernel weights (channel, ky, kx order) then the filter bias
//   H lines:           W pooling weights
//   m lines:           F head weights then the class bias
struct ToyConvSpec {
    std::size_t classes = 0;
    std::size_t filters = 0;
    ImageShape shape;
    std::vector<double> kernels;     // filters x channels x 3 x 3
    std::vector<double> filter_bias; // filters
    std::vector<double> pool;        // height x width
    std::vector<double> head;        // classes x filters
    std::vector<double> head_bias;   // classes
};

ToyConvSpec read_toy_conv(const std::filesystem::path& path);
void write_toy_conv(const std::filesystem::path& path, const ToyConvSpec& spec);

class ToyConvOracle final : public Oracle {
public:
    explicit ToyConvOracle(ToyConvSpec spec);

    bool concurrency_safe() const noexcept override { return true; }
    std::string backend_name() const override { return "toy_conv"; }
    const ToyConvSpec& spec() const noexcept { return spec_; }

protected:
    std::vector<double> do_classify(const ImageTensor& image, std::uint64_t) override;

private:
    ToyConvSpec spec_;
};

// ---------------------------------------------------------------------------
// External model behind a child process speaking the JSON-lines protocol in
// lmoa/wire.hpp over its stdin/stdout. One request in flight at a time.
class SubprocessOracle final : public Oracle {
public:
    // `command` runs under /bin/sh -c. A class_count of 0 accepts whatever the
    // child announces; otherwise the announced count must match.
    SubprocessOracle(const std::string& command, std::size_t class_count, ImageShape shape,
                     std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ~SubprocessOracle() override;

    bool concurrency_safe() const noexcept override { return false; }
    std::string backend_name() const override { return "subprocess"; }
    int pid() const noexcept { return pid_; }

protected:
    std::vector<double> do_classify(const ImageTensor& image, std::uint64_t query_number) override;

private:
    void send_line(const std::string& line, std::int64_t query_id);
    std::string read_line(std::int64_t query_id);
    void shutdown() noexcept;

    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::chrono::milliseconds timeout_;
    std::mutex mutex_;
};

std::unique_ptr<SubprocessOracle> spawn_subprocess_oracle(const std::string& command, std::size_t class_count,
                                                          ImageShape shape);

// ---------------------------------------------------------------------------
// Record/replay. Cache files are JSON lines {"hash": "...", "probs": [...]},
// keyed by image_hash().
std::string image_hash(const ImageTensor& image);

// Forwards to `inner`, appends every answered query to `path` (when given) and
// keeps the ordered list of queried image hashes in memory.
class RecordingOracle final : public Oracle {
public:
    explicit RecordingOracle(Oracle& inner, std::optional<std::filesystem::path> path = std::nullopt);

    bool concurrency_safe() const noexcept override { return false; }
    std::string backend_name() const override { return "record:" + inner_.backend_name(); }
    const std::vector<std::string>& hashes() const noexcept { return hashes_; }

protected:
    std::vector<double> do_classify(const ImageTensor& image, std::uint64_t) override;

private:
    Oracle& inner_;
    std::optional<std::filesystem::path> path_;
    std::vector<std::string> hashes_;
};

// Answers only from a cache file; an unknown image is an OracleError.
class ReplayOracle final : public Oracle {
public:
    ReplayOracle(const std::filesystem::path& path, std::size_t class_count, ImageShape shape);

    bool concurrency_safe() const noexcept override { return true; }
    std::string backend_name() const override { return "replay"; }
    std::size_t entries() const noexcept { return cache_.size(); }

protected:
    std::vector<double> do_classify(const ImageTensor& image, std::uint64_t query_number) override;

private:
    std::unordered_map<std::string, std::vector<double>> cache_;
};

} // namespace lmoa
