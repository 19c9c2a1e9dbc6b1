// Command-line front end: dataset generation, training, evaluation, runtime
// benchmark and gradient checking.

#include "hetnet/channel.hpp"
#include "hetnet/dataset.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/evaluation.hpp"
#include "hetnet/nn/allocator.hpp"
#include "hetnet/nn/serialization.hpp"
#include "hetnet/nn/training.hpp"
#include "hetnet/solvers.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;
using namespace hetnet;

namespace {

/// Relative output paths land in $HETNET_OUT_DIR when it is set.
fs::path output_path(const fs::path& p) {
    if (p.is_absolute()) return p;
    if (const char* dir = std::getenv("HETNET_OUT_DIR"); dir && *dir) return fs::path(dir) / p;
    return p;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
    return p.parent_path() / (p.stem().string() + suffix);
}

struct DatagenArgs {
    std::size_t count = 0;
    std::uint64_t seed = 0;
    fs::path out;
    int grid_levels = 10;
    double epsilon = 0.0;
    std::string rate_formula = "shannon";
    unsigned threads = 1;
};

int run_datagen(const DatagenArgs& a) {
    NetworkConfig cfg;
    cfg.se_target_bps_per_hz = a.epsilon;
    cfg.rate_formula = rate_formula_from_string(a.rate_formula);
    cfg.validate();

    const auto out = output_path(a.out);
    ensure_parent(out);
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t last_report = 0;
    const auto ds = generate_dataset(cfg, a.count, a.seed, OracleParams{a.grid_levels, a.threads}, [&](std::size_t done) {
        if (done - last_report >= 1000 || done == a.count) {
            last_report = done;
            std::cerr << "datagen: " << done << "/" << a.count << '\n';
        }
    });
    save_dataset(ds, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "wrote " << ds.samples.size() << " samples (" << ds.metadata.skipped_infeasible << " skipped) to " << out.string()
              << " in " << secs << " s\n";
    return 0;
}

struct TrainArgs {
    std::string arch;
    fs::path data;
    int epochs = 50;
    std::uint64_t seed = 1;
    fs::path out;
    fs::path history;
    int batch_size = 128;
    double learning_rate = 1e-3;
    double validation_fraction = 0.1;
    int kernel = 3;
};

int run_train(const TrainArgs& a) {
    const auto ds = load_dataset(a.data);
    const auto& cfg = ds.metadata.config;
    const auto arch = nn::architecture_from_string(a.arch);
    if (arch == nn::Architecture::custom) throw ContractError("train supports --arch cnn or dnn");
    auto model = arch == nn::Architecture::cnn ? nn::build_cnn(cfg, a.kernel) : nn::build_dnn(cfg);
    model.init_params(a.seed);

    nn::TrainingConfig tc;
    tc.epochs = a.epochs;
    tc.seed = a.seed;
    tc.batch_size = a.batch_size;
    tc.learning_rate = a.learning_rate;
    tc.validation_fraction = a.validation_fraction;

    const auto out = output_path(a.out);
    const auto history_path = a.history.empty() ? with_suffix(out, ".history.csv") : output_path(a.history);
    ensure_parent(out);
    ensure_parent(history_path);

    std::cout << nn::to_string(arch) << ": " << nn::count_params(model) << " parameters, " << ds.samples.size()
              << " samples\n";
    const auto history = nn::train(model, ds, tc, [](const nn::EpochStats& s) {
        std::cerr << "epoch " << s.epoch << " train " << s.train_loss << " val " << s.validation_loss << '\n';
    });
    nn::save_model(model, out);

    std::ofstream h(history_path, std::ios::trunc);
    if (!h) throw std::runtime_error("cannot write '" + history_path.string() + "'");
    h.precision(17);
    h << "epoch,train_loss,validation_loss\n";
    for (const auto& s : history) h << s.epoch << ',' << s.train_loss << ',' << s.validation_loss << '\n';
    std::cout << "wrote " << out.string() << " and " << history_path.string() << '\n';
    return 0;
}

struct LoadedModel {
    std::string name;
    nn::Model model;
};

std::vector<LoadedModel> load_models(const std::vector<fs::path>& paths, const NetworkConfig& cfg) {
    std::vector<LoadedModel> out;
    for (const auto& p : paths) {
        auto model = nn::load_model(p);
        if (!model.scenario || !(*model.scenario == cfg))
            throw VersionError("model '" + p.string() + "' was not built for the dataset's scenario");
        std::string name(nn::to_string(model.spec().arch));
        for (int i = 2; std::any_of(out.begin(), out.end(), [&](const LoadedModel& m) { return m.name == name; }); ++i)
            name = std::string(nn::to_string(model.spec().arch)) + std::to_string(i);
        out.push_back({name, std::move(model)});
    }
    return out;
}

std::vector<eval::Method> model_methods(const std::vector<LoadedModel>& models, const NetworkConfig& cfg,
                                        const std::shared_ptr<solvers::AssignmentCatalog>& catalog) {
    std::vector<eval::Method> methods;
    for (const auto& m : models)
        methods.push_back({m.name, [&model = m.model, cfg, catalog](const LabeledSample& s) {
                               return nn::infer_allocation(model, s.channel, cfg, *catalog);
                           }});
    return methods;
}

std::vector<eval::Method> baseline_methods(const NetworkConfig& cfg, std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    return {
        {"random", [cfg, rng](const LabeledSample& s) { return solvers::random_power(s.channel, cfg, *rng); }},
        {"maxpower", [cfg](const LabeledSample& s) { return solvers::max_power(s.channel, cfg); }},
    };
}

struct EvalArgs {
    std::vector<fs::path> models;
    fs::path data;
    fs::path out_report;
    std::uint64_t seed = 1;
};

int run_eval(const EvalArgs& a) {
    const auto ds = load_dataset(a.data);
    const auto& cfg = ds.metadata.config;
    const auto models = load_models(a.models, cfg);
    const auto catalog = std::make_shared<solvers::AssignmentCatalog>(cfg);
    auto methods = model_methods(models, cfg, catalog);
    for (auto& m : baseline_methods(cfg, a.seed)) methods.push_back(std::move(m));

    const auto report = eval::evaluate(ds, methods);
    const auto out = output_path(a.out_report);
    ensure_parent(out);
    eval::write_report_csv(report, out);
    eval::write_report_metadata(report, with_suffix(out, ".json"));
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
        eval::write_cdf_csv(eval::cdf(report.ee_values(m)), with_suffix(out, ".cdf_ee_" + report.methods[m] + ".csv"));
        eval::write_cdf_csv(eval::cdf(report.xi_values(m)), with_suffix(out, ".cdf_xi_" + report.methods[m] + ".csv"));
    }

    std::cout << "method,mean_ee,frac_xi_le_0.08,frac_xi_le_0.10\n";
    for (std::size_t m = 0; m < report.methods.size(); ++m)
        std::cout << report.methods[m] << ',' << report.mean_ee(m) << ',' << report.fraction_xi_at_most(m, 0.08) << ','
                  << report.fraction_xi_at_most(m, 0.10) << '\n';
    if (!report.all_dominated()) {
        std::cerr << "warning: some method beat the stored oracle label; see the oracle_dominates column\n";
        return 3;
    }
    return 0;
}

struct BenchArgs {
    std::vector<fs::path> models;
    fs::path data;
    fs::path out;
    std::size_t limit = 0;
    std::uint64_t seed = 1;
};

int run_bench(const BenchArgs& a) {
    auto ds = load_dataset(a.data);
    if (a.limit > 0 && ds.samples.size() > a.limit) ds.samples.resize(a.limit);
    const auto& cfg = ds.metadata.config;
    const int levels = ds.metadata.grid_levels;
    const auto models = load_models(a.models, cfg);
    const auto catalog = std::make_shared<solvers::AssignmentCatalog>(cfg);

    std::vector<eval::Method> methods{
        {"oracle", [cfg, levels](const LabeledSample& s) { return solvers::exhaustive_solve(s.channel, cfg, levels).allocation; }}};
    for (auto& m : model_methods(models, cfg, catalog)) methods.push_back(std::move(m));
    for (auto& m : baseline_methods(cfg, a.seed)) methods.push_back(std::move(m));

    const auto rows = eval::bench_runtime(methods, ds);
    std::cout << "method,total_s,mean_s,ratio_to_oracle\n";
    for (const auto& r : rows) std::cout << r.method << ',' << r.total_s << ',' << r.mean_s << ',' << r.ratio_to_reference << '\n';
    if (!a.out.empty()) {
        const auto out = output_path(a.out);
        ensure_parent(out);
        eval::write_runtime_csv(rows, out);
    }
    return 0;
}

struct GradcheckArgs {
    int models = 20;
    std::uint64_t seed = 1;
    double tolerance = 1e-4;
    double step = 1e-5;
    int batch = 3;
};

int run_gradcheck(const GradcheckArgs& a) {
    Rng rng(a.seed);
    double worst = 0.0;
    for (int i = 0; i < a.models; ++i) {
        const auto model = nn::random_small_model(rng);
        std::vector<double> x(static_cast<std::size_t>(a.batch) * model.spec().input.size());
        for (double& v : x) v = standard_normal(rng);
        std::vector<nn::Target> t(static_cast<std::size_t>(a.batch));
        for (auto& tg : t) {
            tg.class_index = uniform_index(rng, static_cast<std::uint64_t>(model.spec().class_outputs));
            tg.power_norm.resize(static_cast<std::size_t>(model.spec().power_outputs));
            for (double& v : tg.power_norm) v = uniform01(rng);
        }
        const auto r = nn::gradient_check(model, x, t, a.step);
        std::cout << "model " << i << ": " << r.checked << " params, max rel err " << r.max_relative_error << '\n';
        worst = std::max(worst, r.max_relative_error);
    }
    std::cout << "worst " << worst << (worst < a.tolerance ? " (ok)\n" : " (FAIL)\n");
    return worst < a.tolerance ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HetNet energy-efficient subchannel and power allocation toolkit"};
    app.require_subcommand(1);

    DatagenArgs dg;
    auto* datagen = app.add_subcommand("datagen", "Generate channel realizations labeled by the exhaustive oracle");
    datagen->add_option("--count", dg.count, "Number of realizations")->required();
    datagen->add_option("--seed", dg.seed, "Master seed")->required();
    datagen->add_option("--out", dg.out, "Output dataset file")->required();
    datagen->add_option("--grid-levels", dg.grid_levels, "Power grid levels L of the oracle")->check(CLI::Range(1, 200));
    datagen->add_option("--epsilon", dg.epsilon, "Spectral efficiency target (bps/Hz)")->check(CLI::NonNegativeNumber);
    datagen->add_option("--rate-formula", dg.rate_formula, "shannon or paper_literal")
        ->check(CLI::IsMember({"shannon", "paper_literal"}));
    datagen->add_option("--threads", dg.threads, "Worker threads (0 = all cores)");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train a CNN or DNN allocator on a dataset");
    train->add_option("--arch", tr.arch, "cnn or dnn")->required()->check(CLI::IsMember({"cnn", "dnn"}));
    train->add_option("--data", tr.data, "Training dataset")->required()->check(CLI::ExistingFile);
    train->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::PositiveNumber);
    train->add_option("--seed", tr.seed, "Initialization and shuffling seed");
    train->add_option("--out", tr.out, "Output model file")->required();
    train->add_option("--history", tr.history, "Loss history CSV (default: <out stem>.history.csv)");
    train->add_option("--batch-size", tr.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    train->add_option("--lr", tr.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
    train->add_option("--validation-fraction", tr.validation_fraction, "Held-out share")->check(CLI::Range(0.0, 0.99));
    train->add_option("--kernel", tr.kernel, "CNN kernel size (odd)")->check(CLI::Range(1, 7));

    EvalArgs ev;
    auto* evaluate = app.add_subcommand("eval", "Score models and baselines against the stored oracle labels");
    evaluate->add_option("--model", ev.models, "Model file (repeatable)")->check(CLI::ExistingFile);
    evaluate->add_option("--data", ev.data, "Test dataset")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out-report", ev.out_report, "Report CSV; sidecar JSON and CDF CSVs go next to it")->required();
    evaluate->add_option("--seed", ev.seed, "Seed of the random baseline");

    BenchArgs bn;
    auto* bench = app.add_subcommand("bench", "Single-threaded runtime of the oracle, models and baselines");
    bench->add_option("--model", bn.models, "Model file (repeatable)")->check(CLI::ExistingFile);
    bench->add_option("--data", bn.data, "Dataset whose channels are timed")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", bn.out, "Runtime CSV");
    bench->add_option("--limit", bn.limit, "Use only the first N samples");
    bench->add_option("--seed", bn.seed, "Seed of the random baseline");

    GradcheckArgs gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare backprop with central differences on random small models");
    gradcheck->add_option("--models", gc.models, "Number of random models")->check(CLI::PositiveNumber);
    gradcheck->add_option("--seed", gc.seed, "Seed");
    gradcheck->add_option("--tolerance", gc.tolerance, "Maximum relative error")->check(CLI::PositiveNumber);
    gradcheck->add_option("--step", gc.step, "Finite-difference step")->check(CLI::PositiveNumber);
    gradcheck->add_option("--batch", gc.batch, "Inputs per model")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*datagen) return run_datagen(dg);
        if (*train) return run_train(tr);
        if (*evaluate) return run_eval(ev);
        if (*bench) return run_bench(bn);
        if (*gradcheck) return run_gradcheck(gc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
