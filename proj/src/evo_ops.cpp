#include "lmoa/evo_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lmoa/error.hpp"

namespace lmoa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_points(const ObjectivePoints& pop)
{
    if (pop.empty()) return;
    const auto m = pop.front().size();
    for (const auto& p : pop)
        if (p.size() != m) throw StructuralError("objective vectors differ in length");
}

void check_bounds(std::size_t n, std::span<const double> lower, std::span<const double> upper)
{
    if (lower.size() != n || upper.size() != n)
        throw StructuralError("bounds cover " + std::to_string(lower.size()) + "/" + std::to_string(upper.size()) +
                              " variables, vector has " + std::to_string(n));
}

// Peels fronts off precomputed dominance data. `dominated` lists, in
// ascending order, the points each point dominates; `count` is how many
// points dominate it.
FrontPartition peel_fronts(std::vector<std::vector<std::size_t>>& dominated, std::vector<std::size_t>& count)
{
    const auto n = count.size();
    FrontPartition out;
    out.rank.assign(n, 0);
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (count[i] == 0) current.push_back(i);

    std::size_t rank = 0;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto i : current) {
            out.rank[i] = rank;
            for (auto j : dominated[i])
                if (--count[j] == 0) next.push_back(j);
        }
        std::sort(next.begin(), next.end());
        out.fronts.push_back(std::move(current));
        current = std::move(next);
        ++rank;
    }
    return out;
}

} // namespace

ObjectivePoints to_points(std::span<const Individual> pop)
{
    ObjectivePoints pts;
    pts.reserve(pop.size());
    for (const auto& ind : pop) {
        if (!ind.evaluated()) throw StructuralError("unevaluated individual in selection");
        pts.push_back({ind.objectives->f1, ind.objectives->f2});
    }
    return pts;
}

bool dominates(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw StructuralError("objective vectors differ in length");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b)
{
    const double lhs[2] = {a.f1, a.f2};
    const double rhs[2] = {b.f1, b.f2};
    return dominates(lhs, rhs);
}

FrontPartition nondominated_sort(const ObjectivePoints& pop)
{
    check_points(pop);
    const auto n = static_cast<std::ptrdiff_t>(pop.size());
    std::vector<std::vector<std::size_t>> dominated(pop.size());
    std::vector<std::size_t> count(pop.size(), 0);

    // Each row is owned by one thread; the pair (i, j) is examined from both
    // sides so no two threads write the same row.
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        for (std::size_t j = 0; j < pop.size(); ++j) {
            if (j == ui) continue;
            if (dominates(pop[ui], pop[j]))
                dominated[ui].push_back(j);
            else if (dominates(pop[j], pop[ui]))
                ++count[ui];
        }
    }
    return peel_fronts(dominated, count);
}

namespace reference {

FrontPartition nondominated_sort(const ObjectivePoints& pop)
{
    check_points(pop);
    std::vector<std::vector<std::size_t>> dominated(pop.size());
    std::vector<std::size_t> count(pop.size(), 0);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        for (std::size_t j = i + 1; j < pop.size(); ++j) {
            if (dominates(pop[i], pop[j])) {
                dominated[i].push_back(j);
                ++count[j];
            } else if (dominates(pop[j], pop[i])) {
                dominated[j].push_back(i);
                ++count[i];
            }
        }
    }
    for (auto& d : dominated)
        std::sort(d.begin(), d.end());
    return peel_fronts(dominated, count);
}

} // namespace reference

std::vector<double> crowding_distance(const ObjectivePoints& front)
{
    check_points(front);
    const auto n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), kInf);
        return dist;
    }
    const auto m = front.front().size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[a][k] < front[b][k]; });
        const double lo = front[order.front()][k];
        const double hi = front[order.back()][k];
        dist[order.front()] = kInf;
        dist[order.back()] = kInf;
        if (hi == lo) continue;
        for (std::size_t r = 1; r + 1 < n; ++r)
            dist[order[r]] += (front[order[r + 1]][k] - front[order[r - 1]][k]) / (hi - lo);
    }
    return dist;
}

std::vector<double> crowding_by_front(const ObjectivePoints& pop, const FrontPartition& partition)
{
    std::vector<double> dist(pop.size(), 0.0);
    for (const auto& front : partition.fronts) {
        ObjectivePoints pts;
        pts.reserve(front.size());
        for (auto i : front)
            pts.push_back(pop[i]);
        const auto d = crowding_distance(pts);
        for (std::size_t r = 0; r < front.size(); ++r)
            dist[front[r]] = d[r];
    }
    return dist;
}

std::vector<std::size_t> binary_tournament(const FrontPartition& partition, std::span<const double> distances,
                                           Rng& rng, std::size_t count)
{
    const auto n = partition.rank.size();
    if (n == 0) throw StructuralError("tournament over an empty population");
    if (distances.size() != n) throw StructuralError("crowding distances do not cover the population");
    std::vector<std::size_t> winners;
    winners.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        const auto a = static_cast<std::size_t>(rng.below(n));
        const auto b = static_cast<std::size_t>(rng.below(n));
        std::size_t w = a;
        if (partition.rank[b] < partition.rank[a])
            w = b;
        else if (partition.rank[b] == partition.rank[a] && distances[b] > distances[a])
            w = b;
        winners.push_back(w);
    }
    return winners;
}

std::vector<std::size_t> environmental_selection(const ObjectivePoints& pop, std::size_t n)
{
    if (pop.size() < n) throw StructuralError("cannot select more survivors than candidates");
    const auto partition = nondominated_sort(pop);
    std::vector<std::size_t> survivors;
    survivors.reserve(n);
    for (const auto& front : partition.fronts) {
        if (survivors.size() == n) break;
        if (survivors.size() + front.size() <= n) {
            survivors.insert(survivors.end(), front.begin(), front.end());
            continue;
        }
        ObjectivePoints pts;
        for (auto i : front)
            pts.push_back(pop[i]);
        const auto d = crowding_distance(pts);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
        for (std::size_t r = 0; survivors.size() < n; ++r)
            survivors.push_back(front[order[r]]);
    }
    std::sort(survivors.begin(), survivors.end());
    return survivors;
}

double sbx_spread_factor(double u, double eta)
{
    const double e = 1.0 / (eta + 1.0);
    if (u <= 0.5) return std::pow(2.0 * u, e);
    return std::pow(1.0 / (2.0 * (1.0 - u)), e);
}

std::pair<double, double> sbx_children(double p1, double p2, double beta)
{
    return {0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2), 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)};
}

std::pair<std::vector<double>, std::vector<double>> sbx(std::span<const double> p1, std::span<const double> p2,
                                                        std::span<const double> lower, std::span<const double> upper,
                                                        const SbxParams& params, Rng& rng)
{
    if (p1.size() != p2.size()) throw StructuralError("SBX parents differ in length");
    check_bounds(p1.size(), lower, upper);
    std::vector<double> c1(p1.begin(), p1.end());
    std::vector<double> c2(p2.begin(), p2.end());
    if (rng.bernoulli(params.pc)) {
        for (std::size_t i = 0; i < c1.size(); ++i) {
            const double u = rng.uniform();
            const bool recombine = rng.bernoulli(0.5);
            const bool exchange = rng.bernoulli(0.5);
            if (!recombine) continue;
            auto [a, b] = sbx_children(p1[i], p2[i], sbx_spread_factor(u, params.eta));
            if (exchange) std::swap(a, b);
            c1[i] = a;
            c2[i] = b;
        }
    }
    for (std::size_t i = 0; i < c1.size(); ++i) {
        c1[i] = std::clamp(c1[i], lower[i], upper[i]);
        c2[i] = std::clamp(c2[i], lower[i], upper[i]);
    }
    return {std::move(c1), std::move(c2)};
}

std::vector<double> poly_mutation(std::span<const double> x, std::span<const double> lower,
                                  std::span<const double> upper, double eta, double pm, Rng& rng)
{
    check_bounds(x.size(), lower, upper);
    std::vector<double> y(x.begin(), x.end());
    const double power = 1.0 / (eta + 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!rng.bernoulli(pm)) {
            y[i] = std::clamp(y[i], lower[i], upper[i]);
            continue;
        }
        const double u = rng.uniform();
        const double lo = lower[i];
        const double hi = upper[i];
        if (hi <= lo) {
            y[i] = lo;
            continue;
        }
        const double v = std::clamp(y[i], lo, hi);
        const double span = hi - lo;
        double delta;
        if (u <= 0.5) {
            const double xy = 1.0 - (v - lo) / span;
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta + 1.0);
            delta = std::pow(val, power) - 1.0;
        } else {
            const double xy = 1.0 - (hi - v) / span;
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta + 1.0);
            delta = 1.0 - std::pow(val, power);
        }
        y[i] = std::clamp(v + delta * span, lo, hi);
    }
    return y;
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>
uniform_crossover_bits(std::span<const std::uint8_t> b1, std::span<const std::uint8_t> b2, Rng& rng)
{
    if (b1.size() != b2.size()) throw StructuralError("crossover parents differ in length");
    std::vector<std::uint8_t> c1(b1.begin(), b1.end());
    std::vector<std::uint8_t> c2(b2.begin(), b2.end());
    for (std::size_t i = 0; i < c1.size(); ++i)
        if (rng.bernoulli(0.5)) std::swap(c1[i], c2[i]);
    return {std::move(c1), std::move(c2)};
}

std::vector<std::uint8_t> bitflip(std::span<const std::uint8_t> b, double pm, Rng& rng)
{
    std::vector<std::uint8_t> out(b.begin(), b.end());
    for (auto& bit : out)
        if (rng.bernoulli(pm)) bit ^= 1;
    return out;
}

} // namespace lmoa
