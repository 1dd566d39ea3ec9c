#include "lmoa/kernels.hpp"

#include <algorithm>

#include "lmoa/error.hpp"

namespace lmoa {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw StructuralError(what);
}

#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
#define LMOA_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define LMOA_CLONES
#endif

// Output rows are produced in register-sized blocks; each element still sums
// its products in ascending inner-index order starting from zero.
constexpr std::size_t block = 64;

// out[t] = sum_p a[p * as] * b[p * bs + t] for t < W, skipping zero a entries.
template<std::size_t W>
[[gnu::always_inline]] inline void accumulate(const float* a, std::size_t as, std::size_t count, const float* b,
                                              std::size_t bs, float* out)
{
    float acc[W] = {};
    for (std::size_t p = 0; p < count; ++p) {
        const float av = a[p * as];
        if (av == 0.0f) continue;
        const float* br = b + p * bs;
        for (std::size_t t = 0; t < W; ++t)
            acc[t] += av * br[t];
    }
    std::copy_n(acc, W, out);
}

[[gnu::always_inline]] inline void accumulate_any(const float* a, std::size_t as, std::size_t count, const float* b,
                                                  std::size_t bs, std::size_t w, float* out)
{
    switch (w) {
    case 8: return accumulate<8>(a, as, count, b, bs, out);
    case 16: return accumulate<16>(a, as, count, b, bs, out);
    case 24: return accumulate<24>(a, as, count, b, bs, out);
    case 32: return accumulate<32>(a, as, count, b, bs, out);
    case 40: return accumulate<40>(a, as, count, b, bs, out);
    case 48: return accumulate<48>(a, as, count, b, bs, out);
    case 56: return accumulate<56>(a, as, count, b, bs, out);
    case 64: return accumulate<64>(a, as, count, b, bs, out);
    default: break;
    }
    float acc[block] = {};
    for (std::size_t p = 0; p < count; ++p) {
        const float av = a[p * as];
        if (av == 0.0f) continue;
        const float* br = b + p * bs;
        for (std::size_t t = 0; t < w; ++t)
            acc[t] += av * br[t];
    }
    std::copy_n(acc, w, out);
}

LMOA_CLONES void matmul_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i)
{
    const float* ar = a.data.data() + i * a.cols;
    float* out = c.data.data() + i * c.cols;
    for (std::size_t j0 = 0; j0 < b.cols; j0 += block)
        accumulate_any(ar, 1, a.cols, b.data.data() + j0, b.cols, std::min(block, b.cols - j0), out + j0);
}

// Row i of A^T B: sum over samples s of A(s, i) * B.row(s).
LMOA_CLONES void matmul_at_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i)
{
    float* out = c.data.data() + i * c.cols;
    for (std::size_t j0 = 0; j0 < b.cols; j0 += block)
        accumulate_any(a.data.data() + i, a.cols, a.rows, b.data.data() + j0, b.cols, std::min(block, b.cols - j0),
                       out + j0);
}

Matrix transpose(const Matrix& m)
{
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            t(j, i) = m(i, j);
    return t;
}

template<typename RowFn>
Matrix drive(std::size_t rows, std::size_t cols, RowFn fn)
{
    Matrix c(rows, cols);
    const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        fn(c, static_cast<std::size_t>(i));
    return c;
}

} // namespace

Matrix matmul(const Matrix& a, const Matrix& b)
{
    require(a.cols == b.rows, "matmul: inner dimensions differ");
    return drive(a.rows, b.cols, [&](Matrix& c, std::size_t i) { matmul_row(a, b, c, i); });
}

Matrix matmul_bt(const Matrix& a, const Matrix& b)
{
    require(a.cols == b.cols, "matmul_bt: inner dimensions differ");
    const Matrix bt = transpose(b);
    return drive(a.rows, bt.cols, [&](Matrix& c, std::size_t i) { matmul_row(a, bt, c, i); });
}

Matrix matmul_at(const Matrix& a, const Matrix& b)
{
    require(a.rows == b.rows, "matmul_at: sample counts differ");
    return drive(a.cols, b.cols, [&](Matrix& c, std::size_t i) { matmul_at_row(a, b, c, i); });
}

namespace reference {

// Plain triple loops; summation over the inner index runs in ascending order
// from 0.0, matching the row kernels above.

Matrix matmul(const Matrix& a, const Matrix& b)
{
    require(a.cols == b.rows, "matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            float acc = 0.0f;
            for (std::size_t p = 0; p < a.cols; ++p)
                acc += a(i, p) * b(p, j);
            c(i, j) = acc;
        }
    return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b)
{
    require(a.cols == b.cols, "matmul_bt: inner dimensions differ");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) {
            float acc = 0.0f;
            for (std::size_t p = 0; p < a.cols; ++p)
                acc += a(i, p) * b(j, p);
            c(i, j) = acc;
        }
    return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b)
{
    require(a.rows == b.rows, "matmul_at: sample counts differ");
    Matrix c(a.cols, b.cols);
    for (std::size_t i = 0; i < a.cols; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            float acc = 0.0f;
            for (std::size_t s = 0; s < a.rows; ++s)
                acc += a(s, i) * b(s, j);
            c(i, j) = acc;
        }
    return c;
}

} // namespace reference

} // namespace lmoa
