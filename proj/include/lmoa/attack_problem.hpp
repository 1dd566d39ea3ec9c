#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lmoa/attention_mask.hpp"
#include "lmoa/core_types.hpp"
#include "lmoa/oracle.hpp"

namespace lmoa {

// One untargeted attack: perturb `image` inside `mask` until `oracle` stops
// predicting `true_label`. The oracle is not owned and must outlive the
// instance.
class AttackInstance {
public:
    AttackInstance(ImageTensor image, AttentionMask mask, std::size_t true_label, Oracle& oracle);

    const ImageTensor& image() const noexcept { return image_; }
    const AttentionMask& mask() const noexcept { return mask_; }
    std::size_t true_label() const noexcept { return true_label_; }
    Oracle& oracle() const noexcept { return *oracle_; }
    std::size_t dimension() const noexcept { return mask_.size(); }

    // Per-variable feasible range of xr: [-u_i, 255 - u_i].
    std::span<const double> lower() const noexcept { return lower_; }
    std::span<const double> upper() const noexcept { return upper_; }

private:
    ImageTensor image_;
    AttentionMask mask_;
    std::size_t true_label_;
    Oracle* oracle_;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

// Clamps xr into the given bounds wherever xb is set; xb is left alone.
void repair_in_place(SparseSolution& s, std::span<const double> lower, std::span<const double> upper);
SparseSolution repair(SparseSolution s, const AttackInstance& inst);

// round(u_i + x_i) clamped to [0, 255] at masked positions, original elsewhere.
ImageTensor apply_perturbation(const AttackInstance& inst, const SparseSolution& s);

// Throws InvariantError unless every perturbed pixel u_i + x_i lies in
// [0, 255] and `perturbed` equals the original outside the mask.
void check_feasible(const AttackInstance& inst, const SparseSolution& s, const ImageTensor& perturbed);

double l2_norm(std::span<const double> x);

struct Evaluation {
    ObjectiveVector objectives;
    std::vector<double> probs;
    ImageTensor perturbed;
};

// Exactly one oracle query. f1 = probability of the true label on the
// perturbed image, f2 = l2 norm of the (unquantized) effective perturbation.
Evaluation evaluate(const AttackInstance& inst, const SparseSolution& s);

struct MetricReport {
    std::size_t l0 = 0;
    double l1 = 0.0;
    double l2 = 0.0;
    bool misclassified = false;
    std::size_t predicted_label = 0;
    double predicted_confidence = 0.0;
};

MetricReport metrics(const SparseSolution& s, std::span<const double> probs, std::size_t true_label);
// Reuses the probabilities stored by the individual's evaluation.
MetricReport metrics(const Individual& ind, const AttackInstance& inst);

enum class SelectNorm { l1, l2 };

// Index of the misclassifying entry with minimum l1 (ties: lower l2, then
// lower index), or minimum l2 first when `norm` is l2. nullopt when nothing
// misclassifies.
std::optional<std::size_t> select_final_ae(std::span<const MetricReport> reports, SelectNorm norm = SelectNorm::l1);

} // namespace lmoa
