#include "lmoa/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmoa/attention_mask.hpp"
#include "lmoa/error.hpp"
#include "lmoa/image_io.hpp"
#include "lmoa/toy.hpp"

namespace lmoa::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

OracleStack::OracleStack(const std::string& spec, const ImageShape& shape, std::size_t classes,
                         const std::optional<fs::path>& record)
{
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ParamError("oracle must look like toy:<file>, toyconv:<file>, cmd:<command> or replay:<file>");
    const auto kind = spec.substr(0, colon);
    const auto arg = spec.substr(colon + 1);
    if (kind == "toy") {
        layers_.push_back(std::make_unique<ToyLinearOracle>(read_toy_linear(arg), shape));
    } else if (kind == "toyconv") {
        auto conv = read_toy_conv(arg);
        if (conv.shape != shape)
            throw StructuralError("toy conv weights are for " + to_string(conv.shape) + " images, image is " +
                                  to_string(shape));
        layers_.push_back(std::make_unique<ToyConvOracle>(std::move(conv)));
    } else if (kind == "cmd") {
        layers_.push_back(spawn_subprocess_oracle(arg, classes, shape));
    } else if (kind == "replay") {
        if (classes == 0) throw ParamError("replay oracles need --classes");
        layers_.push_back(std::make_unique<ReplayOracle>(arg, classes, shape));
    } else {
        throw ParamError("unknown oracle kind '" + kind + "'");
    }
    if (classes != 0 && layers_.back()->class_count() != classes)
        throw ParamError("oracle has " + std::to_string(layers_.back()->class_count()) + " classes, --classes says " +
                         std::to_string(classes));
    if (record) layers_.push_back(std::make_unique<RecordingOracle>(*layers_.back(), *record));
}

ImageTensor render_perturbation(const ImageShape& shape, std::span<const double> full_perturbation)
{
    if (full_perturbation.size() != shape.size()) throw StructuralError("perturbation does not match image shape");
    double peak = 0.0;
    for (double v : full_perturbation)
        peak = std::max(peak, std::abs(v));
    ImageTensor out(shape, std::uint8_t{128});
    if (peak == 0.0) return out;
    const double scale = 127.0 / peak;
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<std::uint8_t>(128.0 + std::clamp(std::round(full_perturbation[i] * scale), -127.0, 127.0));
    return out;
}

namespace {

std::ofstream open_write(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

json config_json(const RunConfig& c, std::size_t d)
{
    json j{{"population_size", c.population_size},
           {"generations", c.generations},
           {"alpha", c.alpha},
           {"eta_sbx", c.eta_sbx},
           {"eta_pm", c.eta_pm},
           {"pc", c.pc},
           {"pm", c.pm.value_or(1.0 / static_cast<double>(d))},
           {"xb_density", c.xb_density},
           {"optimizer", to_string(c.optimizer)},
           {"seed", c.seed},
           {"initial_rho", c.initial_rho},
           {"select_norm", c.select_norm == SelectNorm::l1 ? "l1" : "l2"},
           {"psl",
            {{"epochs", c.psl.epochs},
             {"rbm_learning_rate", c.psl.rbm_learning_rate},
             {"dae_learning_rate", c.psl.dae_learning_rate},
             {"noise_rate", c.psl.noise_rate},
             {"k_max", c.psl.k_max}}}};
    j["fixed_rho"] = c.fixed_rho ? json(*c.fixed_rho) : json(nullptr);
    return j;
}

std::string history_row(const GenerationRecord& r)
{
    return std::to_string(r.generation) + "," + format_real(r.min_f1) + "," +
           (r.min_f2_misclassified ? format_real(*r.min_f2_misclassified) : std::string()) + "," +
           std::to_string(r.queries) + "," + format_real(r.rho) + "," + std::to_string(r.k);
}

} // namespace

AttackOutcome execute_attack(const AttackJob& job, Oracle& oracle)
{
    const auto started = std::chrono::steady_clock::now();
    fs::create_directories(job.out);

    auto image = read_png(job.image);
    auto mask = job.mask ? load_mask(*job.mask, image.shape(), job.threshold) : full_mask(image.shape());
    const AttackInstance inst(std::move(image), std::move(mask), job.label, oracle);

    AttackOutcome outcome;
    outcome.image_id = job.image.stem().string();
    outcome.dimension = inst.dimension();

    json report{{"image", job.image.string()},
                {"image_id", outcome.image_id},
                {"true_label", job.label},
                {"mask", job.mask ? job.mask->string() : std::string("none")},
                {"threshold", job.threshold},
                {"dimension", inst.dimension()},
                {"oracle", oracle.backend_name()},
                {"config", config_json(job.config, inst.dimension())}};
    auto write_report = [&] {
        report["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        auto out = open_write(job.out / "report.json");
        out << report.dump(2) << '\n';
    };

    auto history = open_write(job.out / "history.csv");
    history << "generation,min_f1,min_f2_misclassified,queries,rho,k\n";
    RunHooks hooks;
    hooks.on_generation = [&](const GenerationRecord& r) { history << history_row(r) << '\n' << std::flush; };

    RunResult result;
    try {
        const auto clean = oracle.classify(inst.image());
        outcome.clean_label = argmax(clean);
        outcome.clean_confidence = clean[outcome.clean_label];
        report["clean"] = {{"label", outcome.clean_label}, {"confidence", outcome.clean_confidence}};
        result = run_attack(inst, job.config, hooks);
    } catch (const OracleError& e) {
        report["success"] = false;
        report["error"] = e.what();
        report["failed_query_id"] = e.query_id();
        write_report();
        throw;
    }
    history.close();

    outcome.offspring_queries = result.offspring_queries;
    outcome.run_queries = result.total_queries;
    outcome.first_success_query = result.first_success_query;

    std::vector<std::size_t> order(result.front);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& oa = *result.population[a].objectives;
        const auto& ob = *result.population[b].objectives;
        if (oa.f1 != ob.f1) return oa.f1 < ob.f1;
        if (oa.f2 != ob.f2) return oa.f2 < ob.f2;
        return a < b;
    });
    {
        auto csv = open_write(job.out / "pareto_front.csv");
        csv << "f1,f2,l0,l1,misclassified\n";
        for (auto i : order) {
            const auto& o = *result.population[i].objectives;
            const auto& m = result.metrics[i];
            std::vector<std::string> row{format_real(o.f1), format_real(o.f2), std::to_string(m.l0),
                                         format_real(m.l1), m.misclassified ? "1" : "0"};
            csv << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << ',' << row[4] << '\n';
            outcome.front_rows.push_back(std::move(row));
        }
    }

    outcome.success = result.final_ae.has_value();
    outcome.final_label = outcome.clean_label;
    outcome.final_confidence = outcome.clean_confidence;
    if (result.final_ae) {
        const auto& ae = result.population[*result.final_ae];
        const auto& m = result.metrics[*result.final_ae];
        outcome.final_metrics = m;
        outcome.final_label = m.predicted_label;
        outcome.final_confidence = m.predicted_confidence;

        write_png(job.out / "adversarial.png", apply_perturbation(inst, ae.solution));
        const auto x = effective_perturbation(ae.solution);
        const auto full = scatter(x, inst.mask());
        write_png(job.out / "perturbation.png", render_perturbation(inst.image().shape(), full));
        auto csv = open_write(job.out / "perturbation.csv");
        csv << "index,row,col,channel,value\n";
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0) continue;
            const auto pos = inst.mask().position(i);
            csv << i << ',' << pos[0] << ',' << pos[1] << ',' << pos[2] << ',' << format_real(x[i]) << '\n';
        }
        report["adversarial"] = {{"label", m.predicted_label},     {"confidence", m.predicted_confidence},
                                 {"true_label_confidence", ae.objectives->f1},
                                 {"l0", m.l0},                     {"l1", m.l1},
                                 {"l2", m.l2}};
    } else {
        report["adversarial"] = nullptr;
    }
    report["success"] = outcome.success;
    report["queries"] = {{"offspring", result.offspring_queries},
                         {"run_total", result.total_queries},
                         {"clean", 1},
                         {"oracle_total", oracle.query_stats().total}};
    report["first_success_query"] =
        result.first_success_query ? json(*result.first_success_query) : json(nullptr);
    report["generations_run"] = result.generations_run;
    report["front_size"] = result.front.size();

    outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_report();
    return outcome;
}

// ---------------------------------------------------------------------------

namespace {

struct Options {
    std::string image;
    std::string mask = "none";
    std::string oracle;
    std::string out;
    std::string record;
    std::string optimizer = "psl";
    std::string select_norm = "l1";
    std::size_t label = 0;
    std::size_t classes = 0;
    std::size_t pop = 50;
    std::size_t gens = 200;
    double alpha = 0.2;
    double threshold = 0.2;
    std::uint64_t seed = 1;
};

void add_run_options(CLI::App* app, Options& o)
{
    app->add_option("--oracle", o.oracle, "toy:<file> | toyconv:<file> | cmd:<command> | replay:<file>")->required();
    app->add_option("--out", o.out, "Output directory")->required();
    app->add_option("--classes", o.classes, "Expected class count (0: take the oracle's)");
    app->add_option("--record", o.record, "Append every query/response pair to this JSON-lines cache");
    app->add_option("--pop", o.pop, "Population size")->capture_default_str();
    app->add_option("--gens", o.gens, "Generations")->capture_default_str();
    app->add_option("--alpha", o.alpha, "Initial perturbation scale")->capture_default_str();
    app->add_option("--seed", o.seed, "Root random seed")->capture_default_str();
    app->add_option("--optimizer", o.optimizer, "nsga2 | psl")
        ->check(CLI::IsMember({"nsga2", "psl"}))
        ->capture_default_str();
    app->add_option("--threshold", o.threshold, "Mask threshold as a fraction of the map maximum")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--select-norm", o.select_norm, "Norm used to pick the final adversarial example")
        ->check(CLI::IsMember({"l1", "l2"}))
        ->capture_default_str();
}

void add_image_options(CLI::App* app, Options& o)
{
    app->add_option("--image", o.image, "Input PNG")->required();
    app->add_option("--mask", o.mask, "PGM attention mask, or 'none'")->capture_default_str();
    app->add_option("--label", o.label, "True class index")->required();
}

RunConfig to_config(const Options& o)
{
    RunConfig c;
    c.population_size = o.pop;
    c.generations = o.gens;
    c.alpha = o.alpha;
    c.seed = o.seed;
    c.optimizer = parse_optimizer(o.optimizer);
    c.select_norm = o.select_norm == "l2" ? SelectNorm::l2 : SelectNorm::l1;
    c.validate();
    return c;
}

std::optional<fs::path> mask_path(const std::string& m)
{
    if (m.empty() || m == "none") return std::nullopt;
    return fs::path(m);
}

AttackJob to_job(const Options& o)
{
    AttackJob job;
    job.image = o.image;
    job.mask = mask_path(o.mask);
    job.threshold = o.threshold;
    job.label = o.label;
    job.out = o.out;
    job.config = to_config(o);
    return job;
}

std::optional<fs::path> record_path(const Options& o)
{
    return o.record.empty() ? std::nullopt : std::optional<fs::path>(o.record);
}

ImageShape peek_shape(const fs::path& image) { return read_png(image).shape(); }

int cmd_attack(const Options& o, std::ostream& out)
{
    const auto job = to_job(o);
    OracleStack oracle(o.oracle, peek_shape(job.image), o.classes, record_path(o));
    const auto r = execute_attack(job, oracle.top());
    out << "image " << r.image_id << ": d=" << r.dimension << " clean=" << r.clean_label << " ("
        << format_real(r.clean_confidence) << ")";
    if (r.success)
        out << " -> adversarial label " << r.final_label << " (" << format_real(r.final_confidence)
            << ") l0=" << r.final_metrics.l0 << " l1=" << format_real(r.final_metrics.l1)
            << " l2=" << format_real(r.final_metrics.l2);
    else
        out << " -> no adversarial example";
    out << " queries=" << r.offspring_queries << "/" << r.run_queries << '\n';
    return r.success ? ok : no_adversarial;
}

// ---------------------------------------------------------------------------

struct AblationCell {
    std::string name;
    AttackJob job;
};

std::string ablation_row(const std::string& sweep, const AblationCell& cell, const AttackOutcome& r)
{
    std::ostringstream row;
    row << sweep << ',' << cell.name << ',' << cell.job.config.seed << ',' << to_string(cell.job.config.optimizer)
        << ',' << format_real(cell.job.config.alpha) << ',' << (cell.job.mask ? 1 : 0) << ',' << r.dimension << ','
        << (r.success ? 1 : 0) << ',' << (r.first_success_query ? std::to_string(*r.first_success_query) : "")
        << ',';
    if (r.success)
        row << r.final_metrics.l0 << ',' << format_real(r.final_metrics.l1) << ',' << format_real(r.final_metrics.l2);
    else
        row << ",,";
    row << ',' << r.offspring_queries << ',' << r.run_queries;
    return row.str();
}

int cmd_ablate(const Options& o, const std::string& sweep, std::size_t repeats, std::ostream& out)
{
    const auto base = to_job(o);
    if (repeats < 1) throw ParamError("--repeats must be at least 1");
    std::vector<AblationCell> cells;
    if (sweep == "attention") {
        if (!base.mask) throw ParamError("the attention sweep needs --mask");
        auto masked = base;
        auto unmasked = base;
        unmasked.mask.reset();
        cells = {{"masked", masked}, {"unmasked", unmasked}};
    } else if (sweep == "alpha") {
        for (double a : {0.2, 0.6, 1.0}) {
            auto job = base;
            job.config.alpha = a;
            cells.push_back({"alpha" + format_real(a), job});
        }
    } else {
        for (auto kind : {OptimizerKind::nsga2, OptimizerKind::moea_psl}) {
            auto job = base;
            job.config.optimizer = kind;
            cells.push_back({to_string(kind), job});
        }
    }

    fs::create_directories(base.out);
    OracleStack oracle(o.oracle, peek_shape(base.image), o.classes, record_path(o));
    auto summary = open_write(base.out / "ablation.csv");
    summary << "sweep,cell,seed,optimizer,alpha,masked,d,success,first_success_query,l0,l1,l2,offspring_queries,"
               "total_queries\n";
    auto fronts = open_write(base.out / "fronts.csv");
    fronts << "cell,seed,f1,f2,l0,l1,misclassified\n";

    for (std::size_t rep = 0; rep < repeats; ++rep) {
        for (auto cell : cells) {
            cell.job.config.seed = base.config.seed + rep;
            cell.job.out = base.out / cell.name / ("seed" + std::to_string(cell.job.config.seed));
            const auto r = execute_attack(cell.job, oracle.top());
            summary << ablation_row(sweep, cell, r) << '\n';
            for (const auto& row : r.front_rows)
                fronts << cell.name << ',' << cell.job.config.seed << ',' << row[0] << ',' << row[1] << ','
                       << row[2] << ',' << row[3] << ',' << row[4] << '\n';
            out << sweep << ' ' << cell.name << " seed " << cell.job.config.seed << ": "
                << (r.success ? "success" : "no adversarial") << " d=" << r.dimension << " first_success_query="
                << (r.first_success_query ? std::to_string(*r.first_success_query) : "-") << '\n';
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------

std::string trim(std::string s)
{
    const auto ws = " \t\r\n";
    s.erase(0, s.find_first_not_of(ws));
    s.erase(s.find_last_not_of(ws) + 1);
    return s;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

int cmd_batch(const Options& o, const std::string& manifest, std::ostream& out, std::ostream& err)
{
    std::ifstream in(manifest);
    if (!in) throw ParseError("cannot open manifest " + manifest);
    const auto base_dir = fs::path(manifest).parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };

    std::string line;
    if (!std::getline(in, line)) line.clear();
    if (!trim(line).empty() && split_csv(trim(line)) != std::vector<std::string>{"image", "label", "mask"})
        throw ParseError("manifest header must be 'image,label,mask'");

    const auto config = to_config(o);
    fs::create_directories(o.out);
    auto report = open_write(fs::path(o.out) / "batch_report.csv");
    report << "row,image,label,clean_label,clean_confidence,adv_label,adv_confidence,l0,l1,l2,offspring_queries,"
              "total_queries,success,wall_seconds,error\n";

    std::size_t rows = 0;
    std::size_t processed = 0;
    std::size_t still_correct = 0;
    std::size_t successes = 0;
    double l2_sum = 0.0;
    double query_sum = 0.0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto row = rows++;
        const auto cells = split_csv(trim(line));
        std::string image = cells.empty() ? "" : cells[0];
        std::string label = cells.size() > 1 ? cells[1] : "";
        try {
            if (cells.size() != 3) throw ParseError("manifest row needs 3 fields");
            AttackJob job;
            job.image = resolve(cells[0]);
            job.label = std::stoul(cells[1]);
            job.mask = cells[2].empty() || cells[2] == "none" ? std::nullopt : std::optional(resolve(cells[2]));
            job.threshold = o.threshold;
            job.config = config;
            job.out = fs::path(o.out) / ("row" + std::to_string(row) + "_" + job.image.stem().string());

            OracleStack oracle(o.oracle, peek_shape(job.image), o.classes);
            const auto r = execute_attack(job, oracle.top());
            ++processed;
            if (r.success) {
                ++successes;
                l2_sum += r.final_metrics.l2;
            }
            if (r.final_label == job.label) ++still_correct;
            query_sum += static_cast<double>(r.run_queries);
            report << row << ',' << image << ',' << label << ',' << r.clean_label << ','
                   << format_real(r.clean_confidence) << ',' << r.final_label << ','
                   << format_real(r.final_confidence) << ',';
            if (r.success)
                report << r.final_metrics.l0 << ',' << format_real(r.final_metrics.l1) << ','
                       << format_real(r.final_metrics.l2);
            else
                report << ",,";
            report << ',' << r.offspring_queries << ',' << r.run_queries << ',' << (r.success ? 1 : 0) << ','
                   << format_real(r.wall_seconds) << ",\n";
        } catch (const std::exception& e) {
            std::string msg = e.what();
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            report << row << ',' << image << ',' << label << ",,,,,,,,,,0,," << msg << '\n';
            err << "row " << row << " (" << image << "): " << e.what() << '\n';
        }
    }

    json summary{{"rows", rows}, {"processed", processed}, {"successes", successes}};
    out << "rows=" << rows << " processed=" << processed << " successes=" << successes;
    if (processed > 0) {
        const double accuracy = static_cast<double>(still_correct) / static_cast<double>(processed);
        const double mean_queries = query_sum / static_cast<double>(processed);
        summary["accuracy"] = accuracy;
        summary["mean_queries"] = mean_queries;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", accuracy);
        out << " accuracy=" << buf << " mean_queries=" << format_real(mean_queries);
    }
    if (successes > 0) {
        summary["mean_l2"] = l2_sum / static_cast<double>(successes);
        out << " mean_l2=" << format_real(l2_sum / static_cast<double>(successes));
    }
    out << '\n';
    auto js = open_write(fs::path(o.out) / "batch_summary.json");
    js << summary.dump(2) << '\n';
    return ok;
}

// ---------------------------------------------------------------------------

struct ToyOptions {
    std::string kind = "linear";
    std::string out;
    std::uint64_t seed = 7;
    std::size_t height = 16;
    std::size_t width = 16;
    std::size_t channels = 3;
    std::size_t classes = 10;
    std::size_t filters = 4;
    double margin = 4.0;
};

int cmd_make_toy(const ToyOptions& t, std::ostream& out)
{
    const fs::path dir(t.out);
    fs::create_directories(dir);
    const ImageShape shape{t.height, t.width, t.channels};
    std::string oracle;
    std::size_t label = 0;
    if (t.kind == "linear") {
        const auto toy = make_linear_toy(shape, t.classes, t.margin, t.seed);
        write_png(dir / "image.png", toy.image);
        write_toy_linear(dir / "linear.txt", toy.spec);
        write_pgm(dir / "mask.pgm", ImageTensor({t.height, t.width, 1}, std::uint8_t{255}));
        oracle = "toy:" + (dir / "linear.txt").string();
        label = toy.label;
    } else {
        const auto toy = make_conv_toy(shape, t.classes, t.filters, t.margin, 0.05, t.seed);
        write_png(dir / "image.png", toy.image);
        write_toy_conv(dir / "conv.txt", toy.spec);
        write_pgm(dir / "mask.pgm", toy.region);
        oracle = "toyconv:" + (dir / "conv.txt").string();
        label = toy.label;
    }
    auto manifest = open_write(dir / "manifest.csv");
    manifest << "image,label,mask\nimage.png," << label << ",mask.pgm\n";
    out << "wrote " << t.kind << " toy to " << dir.string() << "\n"
        << "  lmoa attack --image " << (dir / "image.png").string() << " --mask " << (dir / "mask.pgm").string()
        << " --label " << label << " --oracle " << oracle << " --out <dir>\n";
    return ok;
}

} // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Attention-guided black-box adversarial attacks with sparse multiobjective evolution"};
    app.require_subcommand(1);

    Options attack_opts;
    auto* attack = app.add_subcommand("attack", "Attack one image");
    add_image_options(attack, attack_opts);
    add_run_options(attack, attack_opts);

    Options ablate_opts;
    std::string sweep;
    std::size_t repeats = 1;
    auto* ablate = app.add_subcommand("ablate", "Run an ablation matrix over common seeds");
    add_image_options(ablate, ablate_opts);
    add_run_options(ablate, ablate_opts);
    ablate->add_option("--sweep", sweep, "attention | alpha | optimizer")
        ->required()
        ->check(CLI::IsMember({"attention", "alpha", "optimizer"}));
    ablate->add_option("--repeats", repeats, "Seeds per cell (seed, seed+1, ...)")->capture_default_str();

    Options batch_opts;
    std::string manifest;
    auto* batch = app.add_subcommand("batch", "Attack every row of a manifest (image,label,mask)");
    batch->add_option("--manifest", manifest, "Manifest CSV")->required();
    add_run_options(batch, batch_opts);

    ToyOptions toy_opts;
    auto* toy = app.add_subcommand("make-toy", "Write a synthetic image, toy classifier and mask");
    toy->add_option("--kind", toy_opts.kind, "linear | conv")->check(CLI::IsMember({"linear", "conv"}));
    toy->add_option("--out", toy_opts.out, "Output directory")->required();
    toy->add_option("--seed", toy_opts.seed)->capture_default_str();
    toy->add_option("--height", toy_opts.height)->capture_default_str();
    toy->add_option("--width", toy_opts.width)->capture_default_str();
    toy->add_option("--channels", toy_opts.channels)->check(CLI::IsMember({1, 3}))->capture_default_str();
    toy->add_option("--classes", toy_opts.classes)->capture_default_str();
    toy->add_option("--filters", toy_opts.filters)->capture_default_str();
    toy->add_option("--margin", toy_opts.margin, "Clean logit margin of the true class")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }

    try {
        if (*attack) return cmd_attack(attack_opts, out);
        if (*ablate) return cmd_ablate(ablate_opts, sweep, repeats, out);
        if (*batch) return cmd_batch(batch_opts, manifest, out, err);
        return cmd_make_toy(toy_opts, out);
    } catch (const OracleError& e) {
        err << "oracle failure: " << e.what();
        if (e.query_id() >= 0) err << " (query " << e.query_id() << ")";
        err << '\n';
        return oracle_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
}

} // namespace lmoa::cli
