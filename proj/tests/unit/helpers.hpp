#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "lmoa/oracle.hpp"

namespace testing {

// Fresh directory under the build tree's temp area, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("lmoa_test_" + name + "_" + std::to_string(::getpid())))
    {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline std::string fake_oracle(const std::string& args = "")
{
    return std::string(LMOA_FAKE_ORACLE) + (args.empty() ? "" : " " + args);
}

// Two-class linear toy whose logits are (b0, b1) plus w * mean brightness.
inline lmoa::ToyLinearSpec two_class_spec(std::size_t inputs, double w0, double w1, double b0, double b1)
{
    lmoa::ToyLinearSpec s;
    s.classes = 2;
    s.inputs = inputs;
    s.weights.assign(2 * inputs, 0.0);
    for (std::size_t i = 0; i < inputs; ++i) {
        s.weights[i] = w0;
        s.weights[inputs + i] = w1;
    }
    s.bias = {b0, b1};
    return s;
}

} // namespace testing
