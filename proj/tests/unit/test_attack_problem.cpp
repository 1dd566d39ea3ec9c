#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lmoa/attack_problem.hpp"
#include "lmoa/error.hpp"
#include "lmoa/rng.hpp"

using namespace lmoa;

namespace {

struct Fixture {
    ImageTensor image{ImageShape{2, 2, 1}, std::vector<std::uint8_t>{0, 100, 255, 30}};
    ToyLinearOracle oracle{testing::two_class_spec(4, 0.0, 1.0, 2.0, 0.0), {2, 2, 1}};
};

} // namespace

TEST_CASE("bounds are -u and 255 - u per masked variable")
{
    Fixture f;
    const AttentionMask mask({2, 2, 1}, {0, 1, 1, 0});
    const AttackInstance inst(f.image, mask, 0, f.oracle);
    CHECK(inst.dimension() == 2);
    CHECK(std::vector<double>(inst.lower().begin(), inst.lower().end()) == std::vector<double>{-100, -255});
    CHECK(std::vector<double>(inst.upper().begin(), inst.upper().end()) == std::vector<double>{155, 0});
}

TEST_CASE("instance construction validates label and shapes")
{
    Fixture f;
    CHECK_THROWS_AS(AttackInstance(f.image, full_mask(f.image.shape()), 2, f.oracle), ParamError);
    CHECK_THROWS_AS(AttackInstance(f.image, full_mask({2, 2, 3}), 0, f.oracle), StructuralError);
}

TEST_CASE("repair clamps only the selected variables")
{
    SparseSolution s({1, 0, 1}, {500.0, 500.0, -500.0});
    const std::vector<double> lo{-10, -10, -10};
    const std::vector<double> hi{10, 10, 10};
    repair_in_place(s, lo, hi);
    CHECK(s.xr == std::vector<double>{10.0, 500.0, -10.0});
    CHECK(s.xb == std::vector<std::uint8_t>{1, 0, 1});
}

TEST_CASE("perturbation rounds, clamps and leaves unmasked pixels alone")
{
    Fixture f;
    const AttentionMask mask({2, 2, 1}, {1, 1, 1, 0});
    const AttackInstance inst(f.image, mask, 0, f.oracle);

    CHECK(apply_perturbation(inst, SparseSolution(3)) == f.image);

    SparseSolution s({1, 1, 1}, {0.4, 2.5, 0.4});
    const auto img = apply_perturbation(inst, s);
    CHECK(img.pixels()[0] == 0);
    CHECK(img.pixels()[1] == 103); // round half away from zero
    CHECK(img.pixels()[2] == 255); // 255 + 0.4 stays 255
    CHECK(img.pixels()[3] == 30);
    CHECK_NOTHROW(check_feasible(inst, repair(s, inst), img));

    SparseSolution outside({1, 1, 1}, {300.0, 0.0, 0.0});
    CHECK_THROWS_AS(check_feasible(inst, outside, apply_perturbation(inst, repair(outside, inst))), InvariantError);
    ImageTensor tampered = img;
    tampered.at(1, 1, 0) = 31;
    CHECK_THROWS_AS(check_feasible(inst, repair(s, inst), tampered), InvariantError);
}

TEST_CASE("evaluate issues one query; zero perturbation gives f2 = 0 and the clean probability")
{
    Fixture f;
    const AttackInstance inst(f.image, full_mask(f.image.shape()), 0, f.oracle);
    const auto clean = f.oracle.classify(f.image);
    const auto before = f.oracle.query_stats().total;
    const auto ev = evaluate(inst, SparseSolution(4));
    CHECK(f.oracle.query_stats().total == before + 1);
    CHECK(ev.objectives.f2 == 0.0);
    CHECK(ev.objectives.f1 == clean[0]);

    SparseSolution s({1, 1, 0, 0}, {3.0, -4.0, 0.0, 0.0});
    CHECK(evaluate(inst, s).objectives.f2 == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("metrics of a worked example")
{
    SparseSolution s({1, 0, 1}, {2.0, 7.0, -2.0});
    const auto m = metrics(s, std::vector<double>{0.3, 0.7}, 0);
    CHECK(m.l0 == 2);
    CHECK(m.l1 == 4.0);
    CHECK(m.l2 == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(m.misclassified);
    CHECK(m.predicted_label == 1);
    CHECK(m.predicted_confidence == 0.7);

    const auto zero = metrics(SparseSolution(3), std::vector<double>{0.9, 0.1}, 0);
    CHECK(zero.l0 == 0);
    CHECK(zero.l1 == 0.0);
    CHECK(zero.l2 == 0.0);
    CHECK_FALSE(zero.misclassified);
}

TEST_CASE("norm inequalities l2 <= l1 <= sqrt(l0) l2 <= sqrt(d) l2 on random vectors")
{
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + rng.below(64);
        SparseSolution s(d);
        for (std::size_t i = 0; i < d; ++i) {
            s.xb[i] = rng.bernoulli(0.5);
            s.xr[i] = rng.uniform(-255.0, 255.0);
        }
        const auto m = metrics(s, std::vector<double>{1.0}, 0);
        const double slack = 1e-9 * (1.0 + m.l1);
        CHECK(m.l2 <= m.l1 + slack);
        CHECK(m.l1 <= std::sqrt(static_cast<double>(m.l0)) * m.l2 + slack);
        CHECK(m.l1 <= std::sqrt(static_cast<double>(d)) * m.l2 + slack);
    }
}

TEST_CASE("final adversarial example: minimum l1, ties by l2 then index")
{
    auto rep = [](bool mis, double l1, double l2) {
        MetricReport r;
        r.misclassified = mis;
        r.l1 = l1;
        r.l2 = l2;
        return r;
    };
    std::vector<MetricReport> front{rep(false, 1, 1), rep(true, 5, 4), rep(true, 3, 3), rep(true, 3, 2),
                                    rep(true, 3, 2), rep(true, 4, 1)};
    CHECK(select_final_ae(front) == 3u);
    CHECK(select_final_ae(front, SelectNorm::l2) == 5u);
    CHECK_FALSE(select_final_ae(std::vector<MetricReport>{rep(false, 0, 0)}).has_value());
}

TEST_CASE("metrics on an individual reuse its stored probabilities")
{
    Fixture f;
    const AttackInstance inst(f.image, full_mask(f.image.shape()), 0, f.oracle);
    Individual ind;
    ind.solution = SparseSolution(4);
    CHECK_THROWS(metrics(ind, inst));
    auto ev = evaluate(inst, ind.solution);
    ind.objectives = ev.objectives;
    ind.probs = ev.probs;
    const auto before = f.oracle.query_stats().total;
    const auto m = metrics(ind, inst);
    CHECK(f.oracle.query_stats().total == before);
    CHECK(m.predicted_confidence == *std::max_element(ev.probs.begin(), ev.probs.end()));
}
