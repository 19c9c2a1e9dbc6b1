#include "hetnet/dataset.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/evaluation.hpp"
#include "hetnet/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hetnet;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "hetnet_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    for (std::string s; std::getline(in, s);) lines.push_back(s);
    return lines;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p, std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
}

const Dataset& small_dataset() {
    static const Dataset ds = generate_dataset(NetworkConfig{}, 12, 7, OracleParams{4, 1});
    return ds;
}

} // namespace

TEST(GenerateDataset, EmptyCount) {
    const auto ds = generate_dataset(NetworkConfig{}, 0, 1, OracleParams{2, 1});
    EXPECT_TRUE(ds.samples.empty());
    EXPECT_EQ(ds.metadata.sample_count, 0u);
    EXPECT_EQ(ds.metadata.requested, 0u);
    EXPECT_EQ(ds.metadata.skipped_infeasible, 0u);
    EXPECT_EQ(ds.metadata.grid_levels, 2);
}

TEST(GenerateDataset, RejectsBadGrid) {
    EXPECT_THROW(generate_dataset(NetworkConfig{}, 1, 1, OracleParams{0, 1}), ContractError);
}

TEST(GenerateDataset, DeterministicAndThreadIndependent) {
    const auto& a = small_dataset();
    const auto b = generate_dataset(NetworkConfig{}, 12, 7, OracleParams{4, 1});
    const auto c = generate_dataset(NetworkConfig{}, 12, 7, OracleParams{4, 3});
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    const auto d = generate_dataset(NetworkConfig{}, 12, 8, OracleParams{4, 1});
    EXPECT_NE(a.samples.front().channel, d.samples.front().channel);
}

TEST(GenerateDataset, SamplesAreConsistent) {
    const auto& ds = small_dataset();
    const auto& cfg = ds.metadata.config;
    ASSERT_EQ(ds.samples.size(), 12u);
    EXPECT_EQ(ds.metadata.skipped_infeasible, 0u);
    const solvers::AssignmentCatalog catalog(cfg);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        EXPECT_EQ(s.seed, sample_seed(7, i));
        ASSERT_LT(s.assignment_class, catalog.size());
        const auto alloc = eval::oracle_allocation(s, cfg);
        EXPECT_TRUE(check_feasible(alloc, cfg, s.channel).ok());
        const double ee = energy_efficiency(s.channel, alloc, cfg);
        EXPECT_NEAR(s.ee_opt, ee, 1e-9 * ee);
        // Oracle dominance over the fixed-power baseline.
        EXPECT_GE(s.ee_opt, energy_efficiency(s.channel, solvers::max_power(s.channel, cfg), cfg));
    }
}

TEST(GenerateDataset, NormalizationMatchesRecomputation) {
    const auto& ds = small_dataset();
    double sum = 0.0, count = 0.0;
    for (const auto& s : ds.samples)
        for (double g : s.channel.gains()) sum += std::log10(g), count += 1.0;
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& s : ds.samples)
        for (double g : s.channel.gains()) sq += (std::log10(g) - mean) * (std::log10(g) - mean);
    const double sd = std::sqrt(sq / count);
    EXPECT_NEAR(ds.metadata.normalization.mean, mean, 1e-9 * std::abs(mean));
    EXPECT_NEAR(ds.metadata.normalization.std, sd, 1e-9 * sd);
}

TEST(GenerateDataset, InfeasibleSamplesAreSkipped) {
    NetworkConfig cfg;
    cfg.se_target_bps_per_hz = 1e6;  // unreachable
    const auto ds = generate_dataset(cfg, 3, 1, OracleParams{1, 1});
    EXPECT_TRUE(ds.samples.empty());
    EXPECT_EQ(ds.metadata.skipped_infeasible, 3u);
    EXPECT_EQ(ds.metadata.requested, 3u);
}

TEST(DatasetFile, RoundTripIsBitExact) {
    const auto path = temp_path("roundtrip.ds");
    save_dataset(small_dataset(), path);
    const auto back = load_dataset(path);
    EXPECT_EQ(back, small_dataset());
    EXPECT_EQ(load_dataset(path, NetworkConfig{}), small_dataset());
}

TEST(DatasetFile, EmptyDatasetRoundTrip) {
    const auto path = temp_path("empty.ds");
    const auto ds = generate_dataset(NetworkConfig{}, 0, 3, OracleParams{2, 1});
    save_dataset(ds, path);
    EXPECT_EQ(load_dataset(path), ds);
}

TEST(DatasetFile, TruncatedFile) {
    const auto path = temp_path("truncated.ds");
    save_dataset(small_dataset(), path);
    auto lines = read_lines(path);
    lines.pop_back();
    write_lines(path, lines);
    EXPECT_THROW(load_dataset(path), ParseError);

    // Cut in the middle of a record.
    lines.back().resize(lines.back().size() / 2);
    write_lines(path, lines);
    try {
        load_dataset(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), lines.size());
        EXPECT_GT(e.offset(), 0u);
    }
}

TEST(DatasetFile, MalformedRecordNamesLine) {
    const auto path = temp_path("malformed.ds");
    save_dataset(small_dataset(), path);
    auto lines = read_lines(path);
    lines[3] = R"({"seed": 1, "gains": "oops"})";
    write_lines(path, lines);
    try {
        load_dataset(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(DatasetFile, ForeignVersion) {
    const auto path = temp_path("version.ds");
    save_dataset(small_dataset(), path);
    auto lines = read_lines(path);
    const auto pos = lines[0].find("\"version\":1");
    ASSERT_NE(pos, std::string::npos);
    lines[0].replace(pos, 11, "\"version\":99");
    write_lines(path, lines);
    EXPECT_THROW(load_dataset(path), VersionError);
}

TEST(DatasetFile, ConfigMismatch) {
    const auto path = temp_path("mismatch.ds");
    save_dataset(small_dataset(), path);
    NetworkConfig other;
    other.p_max_macro_w = 20.0;
    EXPECT_THROW(load_dataset(path, other), VersionError);
}

TEST(DatasetFile, NotADataset) {
    const auto path = temp_path("garbage.ds");
    write_lines(path, {"this is not json"});
    EXPECT_THROW(load_dataset(path), ParseError);
    write_lines(path, {});
    EXPECT_THROW(load_dataset(path), ParseError);
}

TEST(ConfigJson, RoundTrip) {
    NetworkConfig cfg;
    cfg.rate_formula = RateFormula::paper_literal;
    cfg.se_target_bps_per_hz = 0.5;
    cfg.users_per_bs = {3, 1, 2};
    EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);
}
