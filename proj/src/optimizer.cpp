#include "lmoa/optimizer.hpp"

#include <algorithm>
#include <exception>
#include <limits>

#include "lmoa/error.hpp"

namespace lmoa {

namespace {

// Stream ids under the run's root seed.
enum Stream : std::uint64_t { init_stream = 1, mating_stream, operator_stream, choice_stream, model_stream };

std::vector<SparseSolution> solutions_of(std::span<const Individual> pop, std::span<const std::size_t> which)
{
    std::vector<SparseSolution> out;
    out.reserve(which.size());
    for (auto i : which)
        out.push_back(pop[i].solution);
    return out;
}

GenerationRecord record_generation(std::size_t generation, std::span<const Individual> pop, std::size_t true_label,
                                   std::uint64_t queries, const PslParams& params)
{
    GenerationRecord rec;
    rec.generation = generation;
    rec.min_f1 = std::numeric_limits<double>::infinity();
    rec.queries = queries;
    rec.rho = params.rho;
    rec.k = params.k;
    for (const auto& ind : pop) {
        rec.min_f1 = std::min(rec.min_f1, ind.objectives->f1);
        if (argmax(ind.probs) != true_label)
            rec.min_f2_misclassified = std::min(rec.min_f2_misclassified.value_or(ind.objectives->f2),
                                                ind.objectives->f2);
    }
    return rec;
}

// Reduced-space bounds: the parents' [min, max] per code entry, widened by
// 10% of its width on each side.
void reduced_bounds(std::span<const double> a, std::span<const double> b, std::vector<double>& lo,
                    std::vector<double>& hi)
{
    lo.resize(a.size());
    hi.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double l = std::min(a[j], b[j]);
        const double h = std::max(a[j], b[j]);
        const double pad = 0.1 * (h - l);
        lo[j] = l - pad;
        hi[j] = h + pad;
    }
}

RunResult run_generational(const AttackInstance& inst, const RunConfig& config, const RunHooks& hooks, bool psl)
{
    config.validate();
    const auto d = inst.dimension();
    const auto n = config.population_size;
    const auto lower = inst.lower();
    const auto upper = inst.upper();

    VariationSettings settings;
    settings.sbx = {config.eta_sbx, config.pc};
    settings.eta_pm = config.eta_pm;
    settings.pm = config.pm.value_or(1.0 / static_cast<double>(d));

    const Rng root(config.seed);
    Rng init_rng = root.stream(init_stream);
    Rng mating_rng = root.stream(mating_stream);
    Rng op_rng = root.stream(operator_stream);
    Rng choice_rng = root.stream(choice_stream);
    Rng model_rng = root.stream(model_stream);

    RunResult result;
    std::uint64_t queries = 0;
    auto track = [&](std::span<const Individual> evaluated) {
        for (const auto& ind : evaluated) {
            ++queries;
            if (!result.first_success_query && argmax(ind.probs) != inst.true_label())
                result.first_success_query = queries;
        }
    };

    auto pop = initialize_population(n, lower, upper, config.alpha, config.xb_density, init_rng);
    evaluate_population(inst, pop, true, hooks.on_evaluated, config.check_invariants);
    track(pop);

    PslParams params{config.fixed_rho.value_or(config.initial_rho), 0};
    if (psl) {
        const auto partition = nondominated_sort(to_points(pop));
        params.k = adapt_hidden_size(solutions_of(pop, partition.fronts.front()), config.psl.k_max);
    }
    result.history.push_back(record_generation(0, pop, inst.true_label(), queries, params));
    if (hooks.on_generation) hooks.on_generation(result.history.back());

    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        if (config.stop_at_first_success && result.first_success_query) break;

        const auto points = to_points(pop);
        const auto partition = nondominated_sort(points);
        const auto distances = crowding_by_front(points, partition);

        std::optional<SubspaceModels> models;
        if (psl)
            models = train_models(solutions_of(pop, partition.fronts.front()), params.k, lower, upper, config.psl,
                                  model_rng);

        const auto chosen = binary_tournament(partition, distances, mating_rng, n);
        std::vector<Individual> parents;
        parents.reserve(n);
        for (auto i : chosen)
            parents.push_back(pop[i]);

        auto offspring = variation(parents, psl ? std::optional(params.rho) : std::nullopt,
                                   models ? &*models : nullptr, settings, lower, upper, choice_rng, op_rng);
        evaluate_population(inst, offspring, true, hooks.on_evaluated, config.check_invariants);
        track(offspring);
        result.offspring_queries += offspring.size();

        SurvivorStats stats;
        for (const auto& child : offspring)
            ++(child.provenance == Provenance::model_based ? stats.model_made : stats.genetic_made);

        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                      std::make_move_iterator(offspring.end()));
        const auto survivors = environmental_selection(to_points(merged), n);
        pop.clear();
        pop.reserve(n);
        for (auto i : survivors) {
            if (i >= n)
                ++(merged[i].provenance == Provenance::model_based ? stats.model_survived : stats.genetic_survived);
            pop.push_back(std::move(merged[i]));
        }

        if (psl) {
            const auto front = nondominated_sort(to_points(pop)).fronts.front();
            const auto next = adapt_params(stats, solutions_of(pop, front), params, config.psl.k_max);
            params.k = next.k;
            if (!config.fixed_rho) params.rho = next.rho;
        }
        result.generations_run = gen;
        result.history.push_back(record_generation(gen, pop, inst.true_label(), queries, params));
        if (hooks.on_generation) hooks.on_generation(result.history.back());
    }

    result.total_queries = queries;
    result.metrics.reserve(pop.size());
    for (const auto& ind : pop)
        result.metrics.push_back(metrics(ind, inst));
    result.front = nondominated_sort(to_points(pop)).fronts.front();
    std::vector<MetricReport> front_metrics;
    for (auto i : result.front)
        front_metrics.push_back(result.metrics[i]);
    if (const auto pick = select_final_ae(front_metrics, config.select_norm)) result.final_ae = result.front[*pick];
    result.population = std::move(pop);
    return result;
}

} // namespace

const char* to_string(OptimizerKind k)
{
    return k == OptimizerKind::nsga2 ? "nsga2" : "psl";
}

OptimizerKind parse_optimizer(const std::string& name)
{
    if (name == "nsga2") return OptimizerKind::nsga2;
    if (name == "psl" || name == "moea_psl" || name == "moea-psl") return OptimizerKind::moea_psl;
    throw ParamError("unknown optimizer '" + name + "' (expected nsga2 or psl)");
}

void RunConfig::validate() const
{
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (population_size < 4 || population_size % 2 != 0)
        throw ParamError("population size must be even and at least 4");
    if (generations < 1) throw ParamError("at least one generation is required");
    if (!unit(alpha)) throw ParamError("alpha must lie in [0, 1]");
    if (!unit(xb_density)) throw ParamError("xb density must lie in [0, 1]");
    if (!unit(pc)) throw ParamError("crossover probability must lie in [0, 1]");
    if (pm && !unit(*pm)) throw ParamError("mutation probability must lie in [0, 1]");
    if (!(eta_sbx >= 0.0) || !(eta_pm >= 0.0)) throw ParamError("distribution indexes must be nonnegative");
    if (!unit(initial_rho)) throw ParamError("initial rho must lie in [0, 1]");
    if (fixed_rho && !unit(*fixed_rho)) throw ParamError("fixed rho must lie in [0, 1]");
    if (psl.k_max < 1) throw ParamError("K_max must be positive");
    if (psl.epochs < 1) throw ParamError("model training needs at least one epoch");
    if (!unit(psl.noise_rate)) throw ParamError("masking noise rate must lie in [0, 1]");
}

std::vector<Individual> initialize_population(std::size_t n, std::span<const double> lower,
                                              std::span<const double> upper, double alpha, double xb_density,
                                              Rng& rng)
{
    if (lower.empty() || lower.size() != upper.size()) throw StructuralError("initialization needs d >= 1 bounds");
    const auto d = lower.size();
    std::vector<Individual> pop(n);
    for (auto& ind : pop) {
        ind.solution = SparseSolution(d);
        for (std::size_t i = 0; i < d; ++i) {
            ind.solution.xr[i] = alpha * rng.uniform(lower[i], upper[i]);
            ind.solution.xb[i] = rng.bernoulli(xb_density) ? 1 : 0;
        }
        repair_in_place(ind.solution, lower, upper);
        ind.provenance = Provenance::initial;
    }
    return pop;
}

std::vector<Individual> variation(std::span<const Individual> parents, std::optional<double> rho,
                                  const SubspaceModels* models, const VariationSettings& settings,
                                  std::span<const double> lower, std::span<const double> upper, Rng& choice_rng,
                                  Rng& op_rng)
{
    if (parents.size() % 2 != 0) throw StructuralError("variation needs an even number of parents");
    std::vector<Individual> children;
    children.reserve(parents.size());
    std::vector<double> code_lo;
    std::vector<double> code_hi;

    for (std::size_t p = 0; p < parents.size(); p += 2) {
        const auto& a = parents[p].solution;
        const auto& b = parents[p + 1].solution;
        bool model_based = false;
        if (rho && models) model_based = !(*rho < choice_rng.uniform());

        std::array<SparseSolution, 2> kids;
        if (!model_based) {
            auto [r1, r2] = sbx(a.xr, b.xr, lower, upper, settings.sbx, op_rng);
            auto [b1, b2] = uniform_crossover_bits(a.xb, b.xb, op_rng);
            kids[0].xr = poly_mutation(r1, lower, upper, settings.eta_pm, settings.pm, op_rng);
            kids[1].xr = poly_mutation(r2, lower, upper, settings.eta_pm, settings.pm, op_rng);
            kids[0].xb = bitflip(b1, settings.pm, op_rng);
            kids[1].xb = bitflip(b2, settings.pm, op_rng);
        } else {
            const auto ra = reduce(a, *models);
            const auto rb = reduce(b, *models);
            const double code_pm = 1.0 / static_cast<double>(ra.hr.size());
            reduced_bounds(ra.hr, rb.hr, code_lo, code_hi);
            auto [h1, h2] = sbx(ra.hr, rb.hr, code_lo, code_hi, settings.sbx, op_rng);
            auto [c1, c2] = uniform_crossover_bits(ra.hb, rb.hb, op_rng);
            ReducedSolution k1{bitflip(c1, code_pm, op_rng), poly_mutation(h1, code_lo, code_hi, settings.eta_pm, code_pm, op_rng)};
            ReducedSolution k2{bitflip(c2, code_pm, op_rng), poly_mutation(h2, code_lo, code_hi, settings.eta_pm, code_pm, op_rng)};
            kids[0] = recover(k1, *models);
            kids[1] = recover(k2, *models);
        }
        for (auto& kid : kids) {
            repair_in_place(kid, lower, upper);
            Individual ind;
            ind.solution = std::move(kid);
            ind.provenance = model_based ? Provenance::model_based : Provenance::genetic;
            children.push_back(std::move(ind));
        }
    }
    return children;
}

void evaluate_population(const AttackInstance& inst, std::span<Individual> pop, bool parallel,
                         const std::function<void(const Individual&, const ImageTensor&)>& on_evaluated,
                         bool check_invariants)
{
    std::vector<ImageTensor> images(on_evaluated ? pop.size() : 0);
    auto evaluate_one = [&](std::size_t i) {
        auto ev = evaluate(inst, pop[i].solution);
        if (check_invariants) check_feasible(inst, pop[i].solution, ev.perturbed);
        pop[i].objectives = ev.objectives;
        pop[i].probs = std::move(ev.probs);
        if (on_evaluated) images[i] = std::move(ev.perturbed);
    };

    if (parallel && inst.oracle().concurrency_safe()) {
        std::vector<std::exception_ptr> errors(pop.size());
        const auto n = static_cast<std::ptrdiff_t>(pop.size());
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                evaluate_one(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    } else {
        for (std::size_t i = 0; i < pop.size(); ++i)
            evaluate_one(i);
    }

    if (on_evaluated)
        for (std::size_t i = 0; i < pop.size(); ++i)
            on_evaluated(pop[i], images[i]);
}

RunResult run_nsga2(const AttackInstance& inst, RunConfig config, const RunHooks& hooks)
{
    config.optimizer = OptimizerKind::nsga2;
    return run_generational(inst, config, hooks, false);
}

RunResult run_moea_psl(const AttackInstance& inst, RunConfig config, const RunHooks& hooks)
{
    config.optimizer = OptimizerKind::moea_psl;
    return run_generational(inst, config, hooks, true);
}

RunResult run_attack(const AttackInstance& inst, const RunConfig& config, const RunHooks& hooks)
{
    return config.optimizer == OptimizerKind::nsga2 ? run_nsga2(inst, config, hooks) : run_moea_psl(inst, config, hooks);
}

} // namespace lmoa
