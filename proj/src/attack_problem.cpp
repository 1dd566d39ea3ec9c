#include "lmoa/attack_problem.hpp"

#include <algorithm>
#include <cmath>

#include "lmoa/error.hpp"

namespace lmoa {

AttackInstance::AttackInstance(ImageTensor image, AttentionMask mask, std::size_t true_label, Oracle& oracle)
    : image_(std::move(image)), mask_(std::move(mask)), true_label_(true_label), oracle_(&oracle)
{
    if (mask_.shape() != image_.shape())
        throw StructuralError("mask shape " + to_string(mask_.shape()) + " differs from image shape " +
                              to_string(image_.shape()));
    if (oracle.shape() != image_.shape())
        throw StructuralError("oracle expects " + to_string(oracle.shape()) + " images, attack image is " +
                              to_string(image_.shape()));
    if (true_label_ >= oracle.class_count())
        throw ParamError("label " + std::to_string(true_label_) + " out of range for " +
                         std::to_string(oracle.class_count()) + " classes");

    const auto px = image_.pixels();
    lower_.reserve(mask_.size());
    upper_.reserve(mask_.size());
    for (auto off : mask_.index()) {
        lower_.push_back(-static_cast<double>(px[off]));
        upper_.push_back(255.0 - px[off]);
    }
}

void repair_in_place(SparseSolution& s, std::span<const double> lower, std::span<const double> upper)
{
    if (s.xb.size() != s.xr.size() || s.xr.size() != lower.size() || lower.size() != upper.size())
        throw StructuralError("repair: solution length " + std::to_string(s.xr.size()) + " does not match " +
                              std::to_string(lower.size()) + " bounds");
    for (std::size_t i = 0; i < s.xr.size(); ++i)
        if (s.xb[i]) s.xr[i] = std::clamp(s.xr[i], lower[i], upper[i]);
}

SparseSolution repair(SparseSolution s, const AttackInstance& inst)
{
    repair_in_place(s, inst.lower(), inst.upper());
    return s;
}

ImageTensor apply_perturbation(const AttackInstance& inst, const SparseSolution& s)
{
    if (s.size() != inst.dimension())
        throw StructuralError("solution length " + std::to_string(s.size()) + " does not match mask size " +
                              std::to_string(inst.dimension()));
    ImageTensor out = inst.image();
    auto px = out.pixels();
    const auto idx = inst.mask().index();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.xb[i]) continue;
        const double v = std::round(px[idx[i]] + s.xr[i]);
        px[idx[i]] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    return out;
}

void check_feasible(const AttackInstance& inst, const SparseSolution& s, const ImageTensor& perturbed)
{
    if (perturbed.shape() != inst.image().shape()) throw InvariantError("perturbed image changed shape");
    const auto orig = inst.image().pixels();
    const auto pert = perturbed.pixels();
    const auto include = inst.mask().include();
    for (std::size_t j = 0; j < orig.size(); ++j)
        if (!include[j] && orig[j] != pert[j])
            throw InvariantError("pixel " + std::to_string(j) + " outside the mask was perturbed");

    const auto idx = inst.mask().index();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.xb[i]) continue;
        const double v = orig[idx[i]] + s.xr[i];
        if (!(v >= 0.0 && v <= 255.0))
            throw InvariantError("perturbed pixel " + std::to_string(idx[i]) + " = " + std::to_string(v) +
                                 " leaves [0, 255]");
    }
}

double l2_norm(std::span<const double> x)
{
    double acc = 0.0;
    for (double v : x)
        acc += v * v;
    return std::sqrt(acc);
}

Evaluation evaluate(const AttackInstance& inst, const SparseSolution& s)
{
    Evaluation ev;
    ev.perturbed = apply_perturbation(inst, s);
    ev.probs = inst.oracle().classify(ev.perturbed);
    ev.objectives.f1 = ev.probs[inst.true_label()];
    ev.objectives.f2 = l2_norm(effective_perturbation(s));
    return ev;
}

MetricReport metrics(const SparseSolution& s, std::span<const double> probs, std::size_t true_label)
{
    MetricReport r;
    const auto x = effective_perturbation(s);
    double sq = 0.0;
    for (double v : x) {
        if (v != 0.0) ++r.l0;
        r.l1 += std::abs(v);
        sq += v * v;
    }
    r.l2 = std::sqrt(sq);
    if (probs.empty()) throw StructuralError("metrics need the evaluation's probability vector");
    r.predicted_label = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    r.predicted_confidence = probs[r.predicted_label];
    r.misclassified = r.predicted_label != true_label;
    return r;
}

MetricReport metrics(const Individual& ind, const AttackInstance& inst)
{
    if (!ind.evaluated()) throw StructuralError("metrics requested for an unevaluated individual");
    return metrics(ind.solution, ind.probs, inst.true_label());
}

std::optional<std::size_t> select_final_ae(std::span<const MetricReport> reports, SelectNorm norm)
{
    std::optional<std::size_t> best;
    auto key = [norm](const MetricReport& r) {
        return norm == SelectNorm::l1 ? std::pair{r.l1, r.l2} : std::pair{r.l2, r.l1};
    };
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (!reports[i].misclassified) continue;
        if (!best || key(reports[i]) < key(reports[*best])) best = i;
    }
    return best;
}

} // namespace lmoa
