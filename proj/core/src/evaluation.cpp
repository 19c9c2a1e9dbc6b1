#include "hetnet/evaluation.hpp"

#include "hetnet/errors.hpp"
#include "hetnet/solvers.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace hetnet::eval {

double error_rate(double ee_method, double ee_oracle) {
    if (!(ee_oracle > 0.0)) throw UndefinedRatioError("error rate undefined for a non-positive oracle EE");
    return std::abs(ee_method - ee_oracle) / ee_oracle;
}

std::vector<CdfPoint> cdf(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint> out(values.size());
    const auto n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = {values[i], static_cast<double>(i + 1) / n};
    if (!out.empty()) out.back().fraction = 1.0;
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ContractError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ContractError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::size_t EvalReport::method_index(const std::string& name) const {
    const auto it = std::find(methods.begin(), methods.end(), name);
    if (it == methods.end()) throw ContractError("method '" + name + "' not in report");
    return static_cast<std::size_t>(it - methods.begin());
}

std::vector<double> EvalReport::ee_values(std::size_t method) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.ee.at(method));
    return out;
}

std::vector<double> EvalReport::xi_values(std::size_t method) const {
    std::vector<double> out;
    for (const auto& r : rows)
        if (!std::isnan(r.xi.at(method))) out.push_back(r.xi[method]);
    return out;
}

double EvalReport::mean_ee(std::size_t method) const {
    if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (const auto& r : rows) sum += r.ee.at(method);
    return sum / static_cast<double>(rows.size());
}

double EvalReport::fraction_xi_at_most(std::size_t method, double threshold) const {
    const auto xs = xi_values(method);
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto hits = std::count_if(xs.begin(), xs.end(), [&](double x) { return x <= threshold; });
    return static_cast<double>(hits) / static_cast<double>(xs.size());
}

bool EvalReport::all_dominated() const {
    return std::all_of(rows.begin(), rows.end(), [](const EvalRow& r) { return r.oracle_dominates; });
}

Allocation oracle_allocation(const LabeledSample& sample, const NetworkConfig& cfg) {
    auto alloc = solvers::AssignmentCatalog(cfg).allocation(sample.assignment_class);
    alloc.power_w = sample.power_w;
    return alloc;
}

EvalReport evaluate(const Dataset& test, std::span<const Method> methods) {
    const auto& cfg = test.metadata.config;
    const solvers::AssignmentCatalog catalog(cfg);
    EvalReport report;
    report.methods.push_back("oracle");
    for (const auto& m : methods) report.methods.push_back(m.name);
    const std::size_t M = report.methods.size();
    std::vector<double> elapsed(M, 0.0);

    for (std::size_t i = 0; i < test.samples.size(); ++i) {
        const auto& s = test.samples[i];
        EvalRow row;
        row.sample_id = i;

        auto oracle = catalog.allocation(s.assignment_class);
        oracle.power_w = s.power_w;
        const double ee_o = energy_efficiency(s.channel, oracle, cfg);
        row.ee.push_back(ee_o);
        row.feasible.push_back(check_feasible(oracle, cfg, s.channel).ok());

        for (std::size_t m = 0; m < methods.size(); ++m) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto alloc = methods[m].allocate(s);
            elapsed[m + 1] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const bool ok = check_feasible(alloc, cfg, s.channel).ok();
            row.feasible.push_back(ok);
            row.ee.push_back(check_assignment(alloc, cfg) ? energy_efficiency(s.channel, alloc, cfg)
                                                          : std::numeric_limits<double>::quiet_NaN());
        }
        for (std::size_t m = 0; m < M; ++m) {
            double xi = std::numeric_limits<double>::quiet_NaN();
            try {
                xi = error_rate(row.ee[m], ee_o);
            } catch (const UndefinedRatioError&) {
            }
            row.xi.push_back(xi);
            if (m > 0 && !(ee_o >= row.ee[m])) row.oracle_dominates = false;
        }
        report.rows.push_back(std::move(row));
    }

    report.mean_runtime_s.assign(M, std::numeric_limits<double>::quiet_NaN());
    if (!test.samples.empty())
        for (std::size_t m = 1; m < M; ++m) report.mean_runtime_s[m] = elapsed[m] / static_cast<double>(test.samples.size());
    return report;
}

std::vector<RuntimeRow> bench_runtime(std::span<const Method> methods, const Dataset& dataset) {
    std::vector<RuntimeRow> rows;
    if (dataset.samples.empty()) return rows;
    for (const auto& m : methods) {
        std::size_t sink = 0;
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& s : dataset.samples) sink += m.allocate(s).indicator.size();
        const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (sink == 0) throw ContractError("method produced empty allocations");
        rows.push_back({m.name, total, total / static_cast<double>(dataset.samples.size()), 0.0});
    }
    for (auto& r : rows) r.ratio_to_reference = r.total_s / rows.front().total_s;
    return rows;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.precision(17);
    return out;
}

} // namespace

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "sample_id";
    for (const auto& m : report.methods) out << ",ee_" << m;
    for (const auto& m : report.methods) out << ",xi_" << m;
    for (const auto& m : report.methods) out << ",feasible_" << m;
    out << ",oracle_dominates\n";
    for (const auto& r : report.rows) {
        out << r.sample_id;
        for (double v : r.ee) out << ',' << v;
        for (double v : r.xi) out << ',' << v;
        for (bool f : r.feasible) out << ',' << (f ? 1 : 0);
        out << ',' << (r.oracle_dominates ? 1 : 0) << '\n';
    }
}

void write_report_metadata(const EvalReport& report, const std::filesystem::path& path) {
    nlohmann::json methods = nlohmann::json::array();
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
        const auto xs = report.xi_values(m);
        nlohmann::json entry = {
            {"name", report.methods[m]},
            {"mean_ee", report.mean_ee(m)},
            {"defined_xi", xs.size()},
            {"fraction_xi_le_0.08", report.fraction_xi_at_most(m, 0.08)},
            {"fraction_xi_le_0.10", report.fraction_xi_at_most(m, 0.10)},
            {"mean_runtime_s", report.mean_runtime_s.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                               : report.mean_runtime_s[m]},
        };
        if (!xs.empty()) {
            entry["xi_p10"] = quantile(xs, 0.1);
            entry["xi_median"] = quantile(xs, 0.5);
            entry["xi_p90"] = quantile(xs, 0.9);
        }
        methods.push_back(entry);
    }
    const nlohmann::json meta = {
        {"rows", report.rows.size()},
        {"oracle_dominates_all", report.all_dominated()},
        {"methods", methods},
    };
    auto out = open_out(path);
    out << meta.dump(2) << '\n';
}

void write_cdf_csv(std::span<const CdfPoint> points, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "value,fraction\n";
    for (const auto& p : points) out << p.value << ',' << p.fraction << '\n';
}

void write_runtime_csv(std::span<const RuntimeRow> rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "method,total_s,mean_s,ratio_to_reference\n";
    for (const auto& r : rows) out << r.method << ',' << r.total_s << ',' << r.mean_s << ',' << r.ratio_to_reference << '\n';
}

} // namespace hetnet::eval
