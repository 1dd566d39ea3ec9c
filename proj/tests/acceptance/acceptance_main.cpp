// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lmoa/attention_mask.hpp"
#include "lmoa/cli.hpp"
#include "lmoa/error.hpp"
#include "lmoa/evo_ops.hpp"
#include "lmoa/image_io.hpp"
#include "lmoa/optimizer.hpp"
#include "lmoa/oracle.hpp"
#include "lmoa/psl_models.hpp"
#include "lmoa/toy.hpp"

using namespace lmoa;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const ImageShape toy_shape{16, 16, 3};
constexpr std::size_t toy_classes = 10;
constexpr double toy_margin = 3.0;

// Attention ablation instance.
const ImageShape conv_shape{32, 32, 3};
constexpr std::size_t conv_filters = 4;
constexpr double conv_margin = 2.0;
constexpr double conv_outside = 0.05;

RunConfig paper_config(OptimizerKind kind, std::uint64_t seed)
{
    RunConfig c;
    c.population_size = 50;
    c.generations = 200;
    c.optimizer = kind;
    c.seed = seed;
    return c;
}

// The region graymap replicated across the image channels, binarized at 0.
AttentionMask region_mask(const ImageTensor& region, const ImageShape& shape)
{
    std::vector<double> map(shape.size());
    for (std::size_t i = 0; i < map.size(); ++i)
        map[i] = region.pixels()[i / shape.channels];
    return binarize_map(map, shape, 0.0);
}

// Brute-force ranks: peel off the points no remaining point dominates.
std::vector<std::size_t> brute_force_ranks(const ObjectivePoints& pts)
{
    const auto n = pts.size();
    std::vector<std::size_t> rank(n, 0);
    std::vector<bool> done(n, false);
    std::size_t left = n;
    for (std::size_t r = 0; left > 0; ++r) {
        std::vector<std::size_t> layer;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            bool dominated = false;
            for (std::size_t j = 0; j < n && !dominated; ++j) {
                if (done[j] || j == i) continue;
                bool no_worse = true, better = false;
                for (std::size_t k = 0; k < pts[i].size(); ++k) {
                    no_worse = no_worse && pts[j][k] <= pts[i][k];
                    better = better || pts[j][k] < pts[i][k];
                }
                dominated = no_worse && better;
            }
            if (!dominated) layer.push_back(i);
        }
        for (auto i : layer) {
            rank[i] = r;
            done[i] = true;
        }
        left -= layer.size();
    }
    return rank;
}

Verdict query_accounting()
{
    const auto toy = make_linear_toy(toy_shape, toy_classes, 8.0, 1);
    ToyLinearOracle oracle(toy.spec, toy.image.shape());
    const AttackInstance inst(toy.image, full_mask(toy.image.shape()), toy.label, oracle);
    const auto r = run_attack(inst, paper_config(OptimizerKind::moea_psl, 1));
    const auto answered = oracle.query_stats().total;
    return {r.offspring_queries == 10000 && r.total_queries == 10050 && answered == 10050,
            fmt("offspring=%llu total=%llu oracle=%llu", static_cast<unsigned long long>(r.offspring_queries),
                static_cast<unsigned long long>(r.total_queries), static_cast<unsigned long long>(answered))};
}

Verdict sorting_oracle()
{
    Rng rng(2024);
    std::size_t agree = 0;
    for (int t = 0; t < 100; ++t) {
        const auto n = 1 + rng.below(200);
        const auto m = 2 + rng.below(2);
        // Coarse integer grids on half the cases to force ties and duplicates.
        const bool coarse = t % 2 == 0;
        ObjectivePoints pts(n, std::vector<double>(m));
        for (auto& p : pts)
            for (auto& v : p)
                v = coarse ? static_cast<double>(rng.below(6)) : rng.uniform();
        const auto fast = nondominated_sort(pts);
        const auto expect = brute_force_ranks(pts);
        bool ok = fast.rank == expect;
        for (std::size_t f = 0; f < fast.fronts.size() && ok; ++f)
            for (auto i : fast.fronts[f])
                ok = ok && expect[i] == f;
        agree += ok;
    }
    return {agree == 100, fmt("%zu/100 populations agree", agree)};
}

// Best l2 among misclassifying solutions at generation 1, or at the first
// later generation that has one.
std::optional<double> early_reference_l2(const RunResult& r)
{
    for (std::size_t g = 1; g < r.history.size(); ++g)
        if (r.history[g].min_f2_misclassified) return r.history[g].min_f2_misclassified;
    return std::nullopt;
}

// Front 0 sorted by f1 with duplicate objective vectors removed has strictly
// decreasing f2.
bool front_is_staircase(const RunResult& r)
{
    std::vector<ObjectiveVector> front;
    for (auto i : r.front)
        front.push_back(*r.population[i].objectives);
    std::sort(front.begin(), front.end(),
              [](const auto& a, const auto& b) { return a.f1 != b.f1 ? a.f1 < b.f1 : a.f2 < b.f2; });
    front.erase(std::unique(front.begin(), front.end(),
                            [](const auto& a, const auto& b) { return a.f1 == b.f1 && a.f2 == b.f2; }),
                front.end());
    for (std::size_t i = 1; i < front.size(); ++i)
        if (!(front[i].f2 < front[i - 1].f2)) return false;
    return true;
}

std::vector<RunResult> toy_runs;

Verdict toy_attack()
{
    std::size_t successes = 0, below = 0;
    std::string misses;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto toy = make_linear_toy(toy_shape, toy_classes, toy_margin, seed);
        ToyLinearOracle oracle(toy.spec, toy.image.shape());
        const AttackInstance inst(toy.image, full_mask(toy.image.shape()), toy.label, oracle);
        auto r = run_attack(inst, paper_config(OptimizerKind::moea_psl, seed));
        if (r.final_ae) {
            ++successes;
            const auto reference = early_reference_l2(r);
            if (reference && r.metrics[*r.final_ae].l2 < *reference)
                ++below;
            else
                misses += " seed" + std::to_string(seed);
        }
        toy_runs.push_back(std::move(r));
    }
    return {successes >= 19 && below == successes,
            fmt("%zu/20 succeeded, final l2 below the generation-1 best in %zu/%zu%s", successes, below, successes,
                misses.c_str())};
}

Verdict attention_ablation()
{
    std::size_t wins = 0;
    std::string cells;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto toy = make_conv_toy(conv_shape, toy_classes, conv_filters, conv_margin, conv_outside, 100 + seed);
        ToyConvOracle oracle(toy.spec);
        const auto mask = region_mask(toy.region, toy.image.shape());
        auto config = paper_config(OptimizerKind::moea_psl, seed);
        config.stop_at_first_success = true;
        const AttackInstance masked(toy.image, mask, toy.label, oracle);
        const AttackInstance unmasked(toy.image, full_mask(toy.image.shape()), toy.label, oracle);
        const auto a = run_attack(masked, config).first_success_query;
        const auto b = run_attack(unmasked, config).first_success_query;
        const bool win = a && (!b || *a < *b);
        wins += win;
        cells += fmt(" %s/%s", a ? std::to_string(*a).c_str() : "-", b ? std::to_string(*b).c_str() : "-");
    }
    const auto d =
        region_mask(make_conv_toy(conv_shape, toy_classes, conv_filters, conv_margin, conv_outside, 101).region,
                    conv_shape)
            .size();
    return {wins >= 15, fmt("masked first in %zu/20 paired seeds (d=%zu vs %zu; masked/unmasked first-success query:%s)",
                            wins, d, conv_shape.size(), cells.c_str())};
}

Verdict feasibility()
{
    std::size_t checked = 0, violations = 0;
    for (auto kind : {OptimizerKind::nsga2, OptimizerKind::moea_psl}) {
        const auto toy = make_linear_toy(toy_shape, toy_classes, toy_margin, 77);
        ToyLinearOracle oracle(toy.spec, toy.image.shape());
        Rng rng(78);
        std::vector<std::uint8_t> bits(toy.image.size());
        for (auto& b : bits)
            b = rng.bernoulli(0.3);
        const AttentionMask mask(toy.image.shape(), bits);
        const AttackInstance inst(toy.image, mask, toy.label, oracle);
        auto config = paper_config(kind, 79);
        config.alpha = 1.0;
        config.check_invariants = true;
        RunHooks hooks;
        hooks.on_evaluated = [&](const Individual& ind, const ImageTensor& perturbed) {
            ++checked;
            const auto x = effective_perturbation(ind.solution);
            const auto full = scatter(x, mask);
            const auto u = toy.image.pixels();
            bool ok = true;
            for (std::size_t i = 0; i < full.size(); ++i) {
                if (!bits[i]) ok = ok && full[i] == 0.0 && perturbed.pixels()[i] == u[i];
                ok = ok && u[i] + full[i] >= 0.0 && u[i] + full[i] <= 255.0;
            }
            violations += !ok;
        };
        try {
            run_attack(inst, config, hooks);
        } catch (const InvariantError& e) {
            return {false, std::string("invariant check threw: ") + e.what()};
        }
    }
    return {violations == 0 && checked == 2 * 10050,
            fmt("%zu evaluated solutions checked, %zu violations", checked, violations)};
}

Verdict front_shape()
{
    // Reuses the toy attack runs, making them when that criterion was skipped.
    if (toy_runs.empty()) toy_attack();
    std::size_t ok = 0;
    for (const auto& r : toy_runs)
        ok += front_is_staircase(r);
    return {!toy_runs.empty() && ok == toy_runs.size(),
            fmt("%zu/%zu completed runs have a strictly decreasing front", ok, toy_runs.size())};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "lmoa");
    std::vector<char*> argv;
    for (auto& a : args)
        argv.push_back(a.data());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict determinism()
{
    const auto dir = fs::temp_directory_path() / ("lmoa_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    const auto toy = (dir / "toy").string();
    if (run_cli({"make-toy", "--kind", "linear", "--out", toy, "--margin", "3", "--seed", "5"}) != 0)
        return {false, "make-toy failed"};
    int codes[2];
    for (int i = 0; i < 2; ++i)
        codes[i] = run_cli({"attack", "--image", toy + "/image.png", "--label", "0", "--oracle", "toy:" + toy + "/linear.txt",
                            "--out", (dir / ("run" + std::to_string(i))).string(), "--seed", "9"});
    const auto a = slurp(dir / "run0/pareto_front.csv");
    const auto b = slurp(dir / "run1/pareto_front.csv");
    fs::remove_all(dir);
    return {codes[0] == codes[1] && codes[0] <= 1 && !a.empty() && a == b,
            fmt("pareto_front.csv %zu bytes, identical: %s", a.size(), a == b ? "yes" : "no")};
}

Verdict alpha_initialization()
{
    const std::vector<double> alphas{0.0, 0.2, 0.6, 1.0};
    std::vector<double> mean(alphas.size(), 0.0);
    bool zero = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto toy = make_linear_toy(toy_shape, toy_classes, toy_margin, seed);
        ToyLinearOracle oracle(toy.spec, toy.image.shape());
        const AttackInstance inst(toy.image, full_mask(toy.image.shape()), toy.label, oracle);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            auto config = paper_config(OptimizerKind::nsga2, seed);
            config.alpha = alphas[a];
            config.generations = 1;
            RunHooks hooks;
            hooks.on_evaluated = [&](const Individual& ind, const ImageTensor&) {
                if (ind.provenance != Provenance::initial) return;
                mean[a] += ind.objectives->f2 / (20.0 * 50.0);
                if (alphas[a] == 0.0) zero = zero && ind.objectives->f2 == 0.0;
            };
            run_attack(inst, config, hooks);
        }
    }
    const bool monotone = mean[1] <= mean[2] && mean[2] <= mean[3];
    return {zero && monotone, fmt("alpha=0 f2 all zero: %s; mean initial f2 %.3f / %.3f / %.3f at 0.2 / 0.6 / 1.0",
                                  zero ? "yes" : "no", mean[1], mean[2], mean[3])};
}

Verdict operator_statistics()
{
    constexpr int trials = 100000;
    Rng rng(31);
    const std::vector<double> lo{0.0}, hi{1.0};
    // An interior pair, and one close to the lower bound where clipping happens.
    const std::vector<std::pair<double, double>> pairs{{0.3, 0.7}, {0.01, 0.4}};
    double worst = 0.0;
    std::size_t sbx_inside = 0;
    std::string means;
    for (const auto& [a, b] : pairs) {
        const std::vector<double> p1{a}, p2{b};
        double sum = 0.0;
        for (int t = 0; t < trials; ++t) {
            const auto [c1, c2] = sbx(p1, p2, lo, hi, {20.0, 1.0}, rng);
            sum += 0.5 * (c1[0] + c2[0]);
            sbx_inside += c1[0] >= lo[0] && c1[0] <= hi[0] && c2[0] >= lo[0] && c2[0] <= hi[0];
        }
        const double parent_mean = 0.5 * (a + b);
        const double child_mean = sum / trials;
        worst = std::max(worst, std::abs(child_mean - parent_mean) / parent_mean);
        means += fmt(" %.5f vs %.5f;", child_mean, parent_mean);
    }

    std::size_t inside = 0;
    const std::vector<double> plo{-40.0}, phi{215.0};
    for (int t = 0; t < trials; ++t) {
        // Start at either bound or anywhere between.
        const double start = t % 3 == 0 ? plo[0] : t % 3 == 1 ? phi[0] : rng.uniform(plo[0], phi[0]);
        const auto y = poly_mutation(std::vector<double>{start}, plo, phi, 20.0, 1.0, rng);
        inside += y[0] >= plo[0] && y[0] <= phi[0];
    }
    const std::size_t sbx_trials = pairs.size() * trials;
    return {worst <= 0.01 && sbx_inside == sbx_trials && inside == trials,
            fmt("SBX mean of (c1+c2)/2 vs (p1+p2)/2:%s worst %.4f%%; SBX children in bounds %zu/%zu; PM in bounds "
                "%zu/%d",
                means.c_str(), 100.0 * worst, sbx_inside, sbx_trials, inside, trials)};
}

Verdict psl_contract()
{
    const auto toy = make_linear_toy(toy_shape, toy_classes, toy_margin, 4);
    ToyLinearOracle oa(toy.spec, toy.image.shape());
    ToyLinearOracle ob(toy.spec, toy.image.shape());
    RecordingOracle ra(oa), rb(ob);
    const AttackInstance ia(toy.image, full_mask(toy.image.shape()), toy.label, ra);
    const AttackInstance ib(toy.image, full_mask(toy.image.shape()), toy.label, rb);
    const auto plain = run_attack(ia, paper_config(OptimizerKind::nsga2, 4));
    auto config = paper_config(OptimizerKind::moea_psl, 4);
    config.fixed_rho = 0.0;
    const auto psl = run_attack(ib, config);

    bool same_front = plain.front == psl.front;
    for (std::size_t i = 0; i < plain.population.size() && same_front; ++i)
        same_front = plain.population[i].objectives == psl.population[i].objectives &&
                     plain.population[i].solution == psl.population[i].solution;
    const bool same_queries = ra.hashes() == rb.hashes();

    // Loss on a fixed set: the final population of that run.
    std::vector<SparseSolution> set;
    for (const auto& ind : psl.population)
        set.push_back(ind.solution);
    bool monotone = true;
    std::string losses;
    for (std::size_t epochs : {10u, 50u}) {
        PslHyper hyper;
        hyper.epochs = epochs;
        hyper.record_loss = true;
        Rng rng(5);
        const auto models = train_models(set, 24, ia.lower(), ia.upper(), hyper, rng);
        const auto& loss = models.real.loss_history;
        for (std::size_t e = 1; e < loss.size(); ++e)
            monotone = monotone && loss[e] <= 1.05 * loss[e - 1];
        losses += fmt(" %zu epochs %.5f->%.5f;", epochs, loss.front(), loss.back());
    }
    return {same_queries && same_front && monotone,
            fmt("query sequences identical: %s (%zu queries); fronts identical: %s; DAE loss nonincreasing within "
                "5%%: %s (%s )",
                same_queries ? "yes" : "no", ra.hashes().size(), same_front ? "yes" : "no", monotone ? "yes" : "no",
                losses.c_str())};
}

} // namespace

int main(int argc, char** argv)
{
    struct Criterion {
        const char* name;
        double limit_seconds;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {"query accounting", 60, query_accounting},
        {"sorting oracle", 10, sorting_oracle},
        {"toy attack success", 300, toy_attack},
        {"attention ablation", 600, attention_ablation},
        {"feasibility and mask invariance", 120, feasibility},
        {"pareto front shape", 300, front_shape},
        {"determinism", 60, determinism},
        {"alpha initialization", 60, alpha_initialization},
        {"operator statistics", 10, operator_statistics},
        {"psl contract", 60, psl_contract},
    };

    // Optional arguments select criteria by substring of their name.
    auto selected = [&](const std::string& name) {
        if (argc < 2) return true;
        for (int i = 1; i < argc; ++i)
            if (name.find(argv[i]) != std::string::npos) return true;
        return false;
    };

    int failed = 0;
    std::size_t ran = 0;
    for (const auto& c : criteria) {
        if (!selected(c.name)) continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_seconds;
        const bool pass = v.pass && in_time;
        failed += !pass;
        std::printf("%s %s: %s [%.1f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs,
                    c.limit_seconds, in_time ? "" : ", too slow");
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", ran, failed);
    return failed == 0 ? 0 : 1;
}
