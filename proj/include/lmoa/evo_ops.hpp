#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lmoa/core_types.hpp"
#include "lmoa/rng.hpp"

namespace lmoa {

// Objective vectors of a population, all of the same length, all minimized.
using ObjectivePoints = std::vector<std::vector<double>>;

ObjectivePoints to_points(std::span<const Individual> pop);

bool dominates(std::span<const double> a, std::span<const double> b);
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

struct FrontPartition {
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> rank;
};

// Fast nondominated sorting. The pairwise dominance pass runs under OpenMP;
// the result is identical to reference::nondominated_sort.
FrontPartition nondominated_sort(const ObjectivePoints& pop);

// Crowding distance of the members of one front. Boundary members of each
// objective get +inf, as does every member of a front of size <= 2.
std::vector<double> crowding_distance(const ObjectivePoints& front);

// Crowding distance of every individual, computed front by front.
std::vector<double> crowding_by_front(const ObjectivePoints& pop, const FrontPartition& partition);

// `count` binary tournaments with replacement: lower rank wins, then larger
// crowding distance, then the first-drawn index.
std::vector<std::size_t> binary_tournament(const FrontPartition& partition, std::span<const double> distances,
                                           Rng& rng, std::size_t count);

// Indices (ascending) of the `n` survivors of `pop`: whole fronts in rank
// order, the splitting front truncated by descending crowding distance with
// ties going to the lower index.
std::vector<std::size_t> environmental_selection(const ObjectivePoints& pop, std::size_t n);

struct SbxParams {
    double eta = 20.0;
    double pc = 1.0;
};

// Spread factor for a uniform draw u in [0, 1).
double sbx_spread_factor(double u, double eta);

// Children 0.5[(1 +- beta) p1 + (1 -+ beta) p2].
std::pair<double, double> sbx_children(double p1, double p2, double beta);

// Simulated binary crossover. With probability pc the pair is crossed; each
// variable is then recombined with probability 0.5 and the two child values
// are exchanged with probability 0.5. Children are clipped to the bounds.
std::pair<std::vector<double>, std::vector<double>> sbx(std::span<const double> p1, std::span<const double> p2,
                                                        std::span<const double> lower, std::span<const double> upper,
                                                        const SbxParams& params, Rng& rng);

// Bounded polynomial mutation; each variable mutates with probability pm.
std::vector<double> poly_mutation(std::span<const double> x, std::span<const double> lower,
                                  std::span<const double> upper, double eta, double pm, Rng& rng);

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>
uniform_crossover_bits(std::span<const std::uint8_t> b1, std::span<const std::uint8_t> b2, Rng& rng);

std::vector<std::uint8_t> bitflip(std::span<const std::uint8_t> b, double pm, Rng& rng);

namespace reference {

// Serial O(m N^2) sorter, peeling fronts off a full dominance graph.
FrontPartition nondominated_sort(const ObjectivePoints& pop);

} // namespace reference

} // namespace lmoa
