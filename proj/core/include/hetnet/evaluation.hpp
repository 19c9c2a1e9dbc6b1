#pragma once

#include "hetnet/dataset.hpp"
#include "hetnet/system_model.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hetnet::eval {

/// |ee_method - ee_oracle| / ee_oracle. Throws UndefinedRatioError unless ee_oracle > 0.
double error_rate(double ee_method, double ee_oracle);

struct CdfPoint {
    double value = 0.0;
    double fraction = 0.0;
};

/// Empirical CDF: values ascending, the i-th (1-based) point at fraction i/n.
/// Duplicates keep one step each.
std::vector<CdfPoint> cdf(std::vector<double> values);

/// Linear-interpolated quantile (q in [0, 1]) of a nonempty sample.
double quantile(std::vector<double> values, double q);

/// A named allocation strategy evaluated per test sample.
struct Method {
    std::string name;
    std::function<Allocation(const LabeledSample&)> allocate;
};

struct EvalRow {
    std::size_t sample_id = 0;
    std::vector<double> ee;            ///< per method, oracle first
    std::vector<double> xi;            ///< NaN where the ratio is undefined
    std::vector<bool> feasible;
    bool oracle_dominates = true;      ///< oracle EE >= every other method's
};

struct EvalReport {
    std::vector<std::string> methods;  ///< "oracle" followed by the evaluated methods
    std::vector<EvalRow> rows;
    std::vector<double> mean_runtime_s;  ///< per method; NaN for the stored oracle labels

    std::size_t method_index(const std::string& name) const;
    std::vector<double> ee_values(std::size_t method) const;
    /// Defined error rates of a method (flagged rows excluded).
    std::vector<double> xi_values(std::size_t method) const;
    double mean_ee(std::size_t method) const;
    double fraction_xi_at_most(std::size_t method, double threshold) const;
    bool all_dominated() const;
};

/// Scores every method on every test sample against the stored oracle
/// decision. The oracle's EE is recomputed from its stored allocation.
EvalReport evaluate(const Dataset& test, std::span<const Method> methods);

/// Stored oracle allocation of a sample.
Allocation oracle_allocation(const LabeledSample& sample, const NetworkConfig& cfg);

struct RuntimeRow {
    std::string method;
    double total_s = 0.0;
    double mean_s = 0.0;
    double ratio_to_reference = 0.0;  ///< total / total of the first method
};

/// Wall-clock time of each method over the whole dataset, run sequentially
/// on the calling thread. The first method is the reference for ratios.
std::vector<RuntimeRow> bench_runtime(std::span<const Method> methods, const Dataset& dataset);

void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
/// Aggregates (means, quantiles, error-rate fractions, runtimes) as JSON.
void write_report_metadata(const EvalReport& report, const std::filesystem::path& path);
void write_cdf_csv(std::span<const CdfPoint> points, const std::filesystem::path& path);
void write_runtime_csv(std::span<const RuntimeRow> rows, const std::filesystem::path& path);

} // namespace hetnet::eval
