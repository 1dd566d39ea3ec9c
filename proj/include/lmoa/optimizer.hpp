#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmoa/attack_problem.hpp"
#include "lmoa/evo_ops.hpp"
#include "lmoa/psl_models.hpp"
#include "lmoa/rng.hpp"

namespace lmoa {

enum class OptimizerKind { nsga2, moea_psl };

const char* to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& name);

struct RunConfig {
    std::size_t population_size = 50;
    std::size_t generations = 200;
    double alpha = 0.2;
    double eta_sbx = 20.0;
    double eta_pm = 20.0;
    double pc = 1.0;
    // Mutation probability for xr and xb; 1/d when unset.
    std::optional<double> pm;
    // Probability that an initial xb entry is 1.
    double xb_density = 0.5;
    OptimizerKind optimizer = OptimizerKind::moea_psl;
    std::uint64_t seed = 1;
    PslHyper psl;
    double initial_rho = 0.5;
    // Pins rho for the whole run (adaptation then only updates K).
    std::optional<double> fixed_rho;
    SelectNorm select_norm = SelectNorm::l1;
    // Verify feasibility and mask invariance of every evaluated solution.
    bool check_invariants = true;
    // End the run right after the generation in which the first
    // misclassifying solution was evaluated.
    bool stop_at_first_success = false;

    // Throws ParamError.
    void validate() const;
};

struct GenerationRecord {
    std::size_t generation = 0;
    double min_f1 = 0.0;
    std::optional<double> min_f2_misclassified;
    std::uint64_t queries = 0;
    double rho = 0.0;
    std::size_t k = 0;
};

struct RunResult {
    std::vector<Individual> population;
    std::vector<MetricReport> metrics;
    // Indices into `population` of its first nondominated front.
    std::vector<std::size_t> front;
    // Index into `population` of the selected adversarial example.
    std::optional<std::size_t> final_ae;
    std::uint64_t offspring_queries = 0;
    std::uint64_t total_queries = 0;
    // 1-based ordinal, within this run, of the first query whose answer was
    // not the true label.
    std::optional<std::uint64_t> first_success_query;
    std::size_t generations_run = 0;
    std::vector<GenerationRecord> history;
};

struct RunHooks {
    // Called once per evaluated solution, in population order.
    std::function<void(const Individual&, const ImageTensor& perturbed)> on_evaluated;
    // Called after the initial evaluation (generation 0) and after every
    // generation, so callers keep a partial history if a later query fails.
    std::function<void(const GenerationRecord&)> on_generation;
};

// N solutions with xr_i uniform in [lower_i, upper_i] scaled by alpha and
// xb_i = 1 with probability xb_density, repaired against the bounds.
std::vector<Individual> initialize_population(std::size_t n, std::span<const double> lower,
                                              std::span<const double> upper, double alpha, double xb_density,
                                              Rng& rng);

struct VariationSettings {
    SbxParams sbx;
    double eta_pm = 20.0;
    double pm = 0.0;
};

// Pairs consecutive parents. A pair is varied through the subspace models
// when `rho` is set, models are given and rho >= r for a fresh r from
// `choice_rng`; otherwise by SBX + PM on xr and uniform crossover + bit flip
// on xb. Offspring are repaired against the bounds.
std::vector<Individual> variation(std::span<const Individual> parents, std::optional<double> rho,
                                  const SubspaceModels* models, const VariationSettings& settings,
                                  std::span<const double> lower, std::span<const double> upper, Rng& choice_rng,
                                  Rng& op_rng);

// Evaluates every individual in order; fans out under OpenMP when the
// instance's oracle is concurrency-safe and `parallel` is set.
void evaluate_population(const AttackInstance& inst, std::span<Individual> pop, bool parallel = true,
                         const std::function<void(const Individual&, const ImageTensor&)>& on_evaluated = {},
                         bool check_invariants = false);

RunResult run_nsga2(const AttackInstance& inst, RunConfig config, const RunHooks& hooks = {});
RunResult run_moea_psl(const AttackInstance& inst, RunConfig config, const RunHooks& hooks = {});
// Dispatches on config.optimizer.
RunResult run_attack(const AttackInstance& inst, const RunConfig& config, const RunHooks& hooks = {});

} // namespace lmoa
