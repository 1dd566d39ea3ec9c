#include <doctest.h>

#include "lmoa/error.hpp"
#include "lmoa/kernels.hpp"
#include "lmoa/rng.hpp"

using namespace lmoa;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double zero_rate)
{
    Matrix m(r, c);
    for (auto& v : m.data)
        v = rng.bernoulli(zero_rate) ? 0.0f : static_cast<float>(rng.uniform(-2.0, 2.0));
    return m;
}

} // namespace

TEST_CASE("parallel products are bit-identical to the serial triple loops")
{
    Rng rng(4);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        const std::size_t d = 1 + rng.below(300);
        const std::size_t k = 1 + rng.below(70);
        const double zeros = trial % 3 == 0 ? 0.5 : 0.0;
        const auto a = random_matrix(rng, n, d, zeros);
        const auto b = random_matrix(rng, d, k, zeros);
        const auto h = random_matrix(rng, n, k, zeros);
        CHECK(matmul(a, b) == reference::matmul(a, b));
        CHECK(matmul_bt(h, b) == reference::matmul_bt(h, b));
        CHECK(matmul_at(a, h) == reference::matmul_at(a, h));
    }
}

TEST_CASE("small product by hand")
{
    Matrix a(2, 3);
    a.data = {1, 2, 3, 4, 5, 6};
    Matrix b(3, 2);
    b.data = {7, 8, 9, 10, 11, 12};
    CHECK(matmul(a, b).data == std::vector<float>{58, 64, 139, 154});
    CHECK(matmul_at(a, a).data == std::vector<float>{17, 22, 27, 22, 29, 36, 27, 36, 45});
    CHECK(matmul_bt(a, a).data == std::vector<float>{14, 32, 32, 77});
}

TEST_CASE("mismatched shapes are structural errors")
{
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), StructuralError);
    CHECK_THROWS_AS(matmul_bt(Matrix(2, 3), Matrix(2, 2)), StructuralError);
    CHECK_THROWS_AS(matmul_at(Matrix(2, 3), Matrix(3, 3)), StructuralError);
}
