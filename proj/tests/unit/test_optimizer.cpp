#include <doctest.h>

#include <algorithm>

#include "lmoa/error.hpp"
#include "lmoa/optimizer.hpp"
#include "lmoa/toy.hpp"

using namespace lmoa;

namespace {

struct Toy {
    LinearToy toy;
    ToyLinearOracle oracle;
    Toy(double margin, std::uint64_t seed)
        : toy(make_linear_toy({4, 4, 3}, 3, margin, seed)), oracle(toy.spec, toy.image.shape())
    {
    }
};

RunConfig small(OptimizerKind kind, std::uint64_t seed)
{
    RunConfig c;
    c.population_size = 8;
    c.generations = 6;
    c.optimizer = kind;
    c.seed = seed;
    return c;
}

std::vector<ObjectiveVector> objectives(const RunResult& r)
{
    std::vector<ObjectiveVector> out;
    for (const auto& ind : r.population)
        out.push_back(ind.objectives.value());
    return out;
}

} // namespace

TEST_CASE("one generation of four costs four offspring queries and eight in total")
{
    for (auto kind : {OptimizerKind::nsga2, OptimizerKind::moea_psl}) {
        Toy t(3.0, 1);
        const AttackInstance inst(t.toy.image, full_mask(t.toy.image.shape()), t.toy.label, t.oracle);
        RunConfig c = small(kind, 1);
        c.population_size = 4;
        c.generations = 1;
        const auto r = run_attack(inst, c);
        CHECK(r.offspring_queries == 4);
        CHECK(r.total_queries == 8);
        CHECK(t.oracle.query_stats().total == 8);
        CHECK(r.generations_run == 1);
        CHECK(r.history.size() == 2);
        CHECK(r.history.back().queries == 8);
    }
}

TEST_CASE("run configuration validation")
{
    auto bad = [](auto edit) {
        RunConfig c;
        edit(c);
        CHECK_THROWS_AS(c.validate(), ParamError);
    };
    bad([](RunConfig& c) { c.population_size = 7; });
    bad([](RunConfig& c) { c.population_size = 2; });
    bad([](RunConfig& c) { c.generations = 0; });
    bad([](RunConfig& c) { c.alpha = 1.5; });
    bad([](RunConfig& c) { c.alpha = -0.1; });
    bad([](RunConfig& c) { c.pm = 2.0; });
    bad([](RunConfig& c) { c.fixed_rho = -1.0; });
    bad([](RunConfig& c) { c.psl.k_max = 0; });
    CHECK_NOTHROW(RunConfig{}.validate());
    CHECK(parse_optimizer("nsga2") == OptimizerKind::nsga2);
    CHECK(parse_optimizer("psl") == OptimizerKind::moea_psl);
    CHECK_THROWS_AS(parse_optimizer("sms"), ParamError);
}

TEST_CASE("alpha = 0 starts from the clean image")
{
    Rng rng(3);
    const std::vector<double> lo(50, -100.0);
    const std::vector<double> hi(50, 100.0);
    for (const auto& ind : initialize_population(10, lo, hi, 0.0, 0.5, rng))
        CHECK(l2_norm(effective_perturbation(ind.solution)) == 0.0);

    Toy t(3.0, 2);
    const AttackInstance inst(t.toy.image, full_mask(t.toy.image.shape()), t.toy.label, t.oracle);
    RunConfig c = small(OptimizerKind::nsga2, 2);
    c.alpha = 0.0;
    c.generations = 1;
    std::vector<double> gen0_f2;
    RunHooks hooks;
    hooks.on_evaluated = [&](const Individual& ind, const ImageTensor&) {
        if (ind.provenance == Provenance::initial) gen0_f2.push_back(ind.objectives->f2);
    };
    run_attack(inst, c, hooks);
    CHECK(gen0_f2 == std::vector<double>(8, 0.0));
}

TEST_CASE("initial solutions scale with alpha and respect the bounds")
{
    const std::vector<double> lo(200, -10.0);
    const std::vector<double> hi(200, 30.0);
    for (double alpha : {0.2, 0.6, 1.0}) {
        Rng rng(4);
        for (const auto& ind : initialize_population(6, lo, hi, alpha, 0.5, rng)) {
            for (std::size_t i = 0; i < 200; ++i) {
                CHECK(ind.solution.xr[i] >= alpha * lo[i]);
                CHECK(ind.solution.xr[i] <= alpha * hi[i]);
            }
        }
    }
}

TEST_CASE("PSL with rho pinned at 0 reproduces NSGA-II exactly")
{
    for (std::uint64_t seed : {1, 2, 3}) {
        Toy a(3.0, seed);
        Toy b(3.0, seed);
        RecordingOracle ra(a.oracle);
        RecordingOracle rb(b.oracle);
        const AttackInstance ia(a.toy.image, full_mask(a.toy.image.shape()), a.toy.label, ra);
        const AttackInstance ib(b.toy.image, full_mask(b.toy.image.shape()), b.toy.label, rb);
        const auto plain = run_nsga2(ia, small(OptimizerKind::nsga2, seed));
        RunConfig c = small(OptimizerKind::moea_psl, seed);
        c.fixed_rho = 0.0;
        const auto psl = run_moea_psl(ib, c);
        CHECK(ra.hashes() == rb.hashes());
        CHECK(objectives(plain) == objectives(psl));
        CHECK(plain.front == psl.front);
        for (const auto& ind : psl.population)
            CHECK(ind.provenance != Provenance::model_based);
    }
}

TEST_CASE("PSL with rho pinned at 1 only makes model-based offspring")
{
    Toy t(3.0, 5);
    const AttackInstance inst(t.toy.image, full_mask(t.toy.image.shape()), t.toy.label, t.oracle);
    RunConfig c = small(OptimizerKind::moea_psl, 5);
    c.fixed_rho = 1.0;
    std::size_t model_based = 0, genetic = 0;
    RunHooks hooks;
    hooks.on_evaluated = [&](const Individual& ind, const ImageTensor&) {
        model_based += ind.provenance == Provenance::model_based;
        genetic += ind.provenance == Provenance::genetic;
    };
    const auto r = run_attack(inst, c, hooks);
    CHECK(model_based == r.offspring_queries);
    CHECK(genetic == 0);
    for (const auto& h : r.history)
        CHECK(h.rho == 1.0);
}

TEST_CASE("runs are deterministic for a seed and differ across seeds")
{
    for (auto kind : {OptimizerKind::nsga2, OptimizerKind::moea_psl}) {
        Toy a(3.0, 9), b(3.0, 9), c(3.0, 9);
        const AttackInstance ia(a.toy.image, full_mask(a.toy.image.shape()), a.toy.label, a.oracle);
        const AttackInstance ib(b.toy.image, full_mask(b.toy.image.shape()), b.toy.label, b.oracle);
        const AttackInstance ic(c.toy.image, full_mask(c.toy.image.shape()), c.toy.label, c.oracle);
        const auto r1 = run_attack(ia, small(kind, 11));
        const auto r2 = run_attack(ib, small(kind, 11));
        const auto r3 = run_attack(ic, small(kind, 12));
        CHECK(objectives(r1) == objectives(r2));
        CHECK(r1.population.size() == r2.population.size());
        for (std::size_t i = 0; i < r1.population.size(); ++i)
            CHECK(r1.population[i].solution == r2.population[i].solution);
        CHECK(objectives(r1) != objectives(r3));
    }
}

TEST_CASE("hooks see every query and every generation in order")
{
    Toy t(3.0, 6);
    const AttackInstance inst(t.toy.image, full_mask(t.toy.image.shape()), t.toy.label, t.oracle);
    const RunConfig c = small(OptimizerKind::moea_psl, 6);
    std::size_t evaluated = 0;
    std::vector<GenerationRecord> seen;
    RunHooks hooks;
    hooks.on_evaluated = [&](const Individual&, const ImageTensor&) { ++evaluated; };
    hooks.on_generation = [&](const GenerationRecord& g) { seen.push_back(g); };
    const auto r = run_attack(inst, c, hooks);
    CHECK(evaluated == r.total_queries);
    REQUIRE(seen.size() == c.generations + 1);
    for (std::size_t g = 0; g < seen.size(); ++g) {
        CHECK(seen[g].generation == g);
        CHECK(seen[g].queries == (g + 1) * c.population_size);
        CHECK(seen[g].min_f1 == r.history[g].min_f1);
        CHECK(seen[g].k >= 1);
        CHECK(seen[g].rho >= 0.1);
        CHECK(seen[g].rho <= 0.9);
    }
    // Elitism: the best true-class probability never gets worse.
    for (std::size_t g = 1; g < seen.size(); ++g)
        CHECK(seen[g].min_f1 <= seen[g - 1].min_f1);
}

TEST_CASE("the final adversarial example comes from the front and misclassifies")
{
    Toy t(0.5, 7);
    const AttackInstance inst(t.toy.image, full_mask(t.toy.image.shape()), t.toy.label, t.oracle);
    RunConfig c = small(OptimizerKind::moea_psl, 7);
    c.generations = 20;
    const auto r = run_attack(inst, c);
    REQUIRE(r.final_ae);
    CHECK(std::find(r.front.begin(), r.front.end(), *r.final_ae) != r.front.end());
    CHECK(r.metrics[*r.final_ae].misclassified);
    REQUIRE(r.first_success_query);
    CHECK(*r.first_success_query <= r.total_queries);
    for (auto i : r.front)
        if (r.metrics[i].misclassified) CHECK(r.metrics[*r.final_ae].l1 <= r.metrics[i].l1);
}

TEST_CASE("stop at first success ends after the generation that found it")
{
    Toy t(0.5, 8);
    const AttackInstance inst(t.toy.image, full_mask(t.toy.image.shape()), t.toy.label, t.oracle);
    RunConfig c = small(OptimizerKind::nsga2, 8);
    c.generations = 50;
    c.stop_at_first_success = true;
    const auto r = run_attack(inst, c);
    REQUIRE(r.first_success_query);
    const auto n = c.population_size;
    CHECK(r.total_queries == (r.generations_run + 1) * n);
    CHECK(*r.first_success_query > r.total_queries - n);
    CHECK(r.generations_run < 50);
}

TEST_CASE("evaluation outside the mask never touches the image")
{
    Toy t(3.0, 10);
    const auto& img = t.toy.image;
    std::vector<std::uint8_t> bits(img.shape().size(), 0);
    for (std::size_t i = 0; i < bits.size(); i += 3)
        bits[i] = 1;
    const AttentionMask mask(img.shape(), bits);
    const AttackInstance inst(img, mask, t.toy.label, t.oracle);
    RunConfig c = small(OptimizerKind::moea_psl, 10);
    c.alpha = 1.0;
    std::size_t checked = 0;
    RunHooks hooks;
    hooks.on_evaluated = [&](const Individual&, const ImageTensor& p) {
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (!bits[i]) CHECK(p.pixels()[i] == img.pixels()[i]);
        ++checked;
    };
    const auto r = run_attack(inst, c, hooks);
    CHECK(checked == r.total_queries);
}
