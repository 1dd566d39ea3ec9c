#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmoa/oracle.hpp"
#include "lmoa/optimizer.hpp"

namespace lmoa::cli {

enum ExitCode : int { ok = 0, no_adversarial = 1, usage = 2, oracle_failure = 3 };

// Oracle chosen by a --oracle string:
//   toy:<file>       toy linear weights
//   toyconv:<file>   toy conv weights
//   cmd:<command>    subprocess speaking the JSON-lines protocol
//   replay:<file>    recorded cache only
// `record` wraps the result in a RecordingOracle writing to that file.
class OracleStack {
public:
    OracleStack(const std::string& spec, const ImageShape& shape, std::size_t classes,
                const std::optional<std::filesystem::path>& record = std::nullopt);

    Oracle& top() const { return *layers_.back(); }

private:
    std::vector<std::unique_ptr<Oracle>> layers_;
};

struct AttackJob {
    std::filesystem::path image;
    std::optional<std::filesystem::path> mask; // nullopt: whole image
    double threshold = 0.2;
    std::size_t label = 0;
    std::filesystem::path out;
    RunConfig config;
};

struct AttackOutcome {
    std::string image_id;
    std::size_t dimension = 0;
    std::size_t clean_label = 0;
    double clean_confidence = 0.0;
    bool success = false;
    std::size_t final_label = 0;
    double final_confidence = 0.0;
    MetricReport final_metrics;
    std::uint64_t offspring_queries = 0;
    std::uint64_t run_queries = 0;
    std::optional<std::uint64_t> first_success_query;
    double wall_seconds = 0.0;
    std::vector<std::vector<std::string>> front_rows; // pareto_front.csv body
};

// Runs one attack and writes pareto_front.csv, history.csv, report.json and,
// when an adversarial example is found, adversarial.png, perturbation.png and
// perturbation.csv into job.out. Input problems throw lmoa::Error subclasses;
// oracle failures throw OracleError after writing report.json with the
// partial history.
AttackOutcome execute_attack(const AttackJob& job, Oracle& oracle);

// Mid-gray rendering of a perturbation: 128 + clamp(round(x * 127 / max|x|), -127, 127).
ImageTensor render_perturbation(const ImageShape& shape, std::span<const double> full_perturbation);

std::string format_real(double v);

// Entry point of the `lmoa` executable.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace lmoa::cli
