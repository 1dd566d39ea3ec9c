#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lmoa {

// Dense row-major single-precision matrix (the subspace models' storage).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), data(r * c, fill) {}

    float& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    float operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

// The three products the subspace models need. The OpenMP versions split the
// output rows across threads; every output element is accumulated in the same
// order as the serial reference, so results are bit-identical. Zero entries
// of A are skipped; with finite inputs that never changes a result bit.

// C = A * B        (n x k) = (n x d)(d x k)
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T      (n x d) = (n x k)(d x k)^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);
// C = A^T * B      (d x k) = (n x d)^T (n x k)
Matrix matmul_at(const Matrix& a, const Matrix& b);

namespace reference {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_bt(const Matrix& a, const Matrix& b);
Matrix matmul_at(const Matrix& a, const Matrix& b);

} // namespace reference

} // namespace lmoa
