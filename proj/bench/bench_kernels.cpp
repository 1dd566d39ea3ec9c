#include <benchmark/benchmark.h>

#include "lmoa/attack_problem.hpp"
#include "lmoa/evo_ops.hpp"
#include "lmoa/kernels.hpp"
#include "lmoa/optimizer.hpp"
#include "lmoa/psl_models.hpp"
#include "lmoa/rng.hpp"
#include "lmoa/toy.hpp"

namespace {

lmoa::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed)
{
    lmoa::Rng rng(seed);
    lmoa::Matrix m(r, c);
    for (auto& v : m.data)
        v = rng.uniform(-1.0, 1.0);
    return m;
}

lmoa::ObjectivePoints random_points(std::size_t n, std::uint64_t seed)
{
    lmoa::Rng rng(seed);
    lmoa::ObjectivePoints pts(n, std::vector<double>(2));
    for (auto& p : pts) {
        p[0] = rng.uniform();
        p[1] = rng.uniform();
    }
    return pts;
}

template <lmoa::Matrix (*F)(const lmoa::Matrix&, const lmoa::Matrix&)>
void BM_matmul(benchmark::State& state)
{
    const auto d = static_cast<std::size_t>(state.range(0));
    const auto a = random_matrix(100, d, 1);
    const auto b = random_matrix(d, 50, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(F(a, b));
}

template <lmoa::FrontPartition (*F)(const lmoa::ObjectivePoints&)>
void BM_sort(benchmark::State& state)
{
    const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(F(pts));
}

void BM_evaluate(benchmark::State& state)
{
    const bool parallel = state.range(0) != 0;
    auto toy = lmoa::make_conv_toy({32, 32, 3}, 10, 4, 4.0, 0.05, 11);
    lmoa::ToyConvOracle oracle(toy.spec);
    const lmoa::AttackInstance inst(toy.image, lmoa::full_mask(toy.image.shape()), toy.label, oracle);
    lmoa::Rng rng(5);
    auto pop = lmoa::initialize_population(100, inst.lower(), inst.upper(), 0.2, 0.5, rng);
    for (auto _ : state)
        lmoa::evaluate_population(inst, pop, parallel);
}

void BM_train_models(benchmark::State& state)
{
    const std::size_t d = 768;
    lmoa::Rng rng(9);
    std::vector<double> lower(d, -100.0), upper(d, 100.0);
    auto pop = lmoa::initialize_population(50, lower, upper, 0.2, 0.5, rng);
    std::vector<lmoa::SparseSolution> sols;
    for (const auto& ind : pop)
        sols.push_back(ind.solution);
    for (auto _ : state) {
        lmoa::Rng model_rng(3);
        benchmark::DoNotOptimize(lmoa::train_models(sols, static_cast<std::size_t>(state.range(0)), lower, upper, {}, model_rng));
    }
}

} // namespace

BENCHMARK(BM_train_models)->Name("train_models/n50_d768")->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matmul<lmoa::matmul>)->Name("matmul/omp")->Arg(768)->Arg(3072);
BENCHMARK(BM_matmul<lmoa::reference::matmul>)->Name("matmul/serial")->Arg(768)->Arg(3072);
BENCHMARK(BM_sort<lmoa::nondominated_sort>)->Name("nondominated_sort/omp")->Arg(100)->Arg(1000);
BENCHMARK(BM_sort<lmoa::reference::nondominated_sort>)->Name("nondominated_sort/serial")->Arg(100)->Arg(1000);
BENCHMARK(BM_evaluate)->Name("evaluate_population")->Arg(0)->Arg(1);

BENCHMARK_MAIN();
