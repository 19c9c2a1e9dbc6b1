#include "hetnet/errors.hpp"
#include "hetnet/nn/serialization.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace hetnet;
using namespace hetnet::nn;

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

Model trained_looking_cnn() {
    auto model = build_cnn(NetworkConfig{});
    model.init_params(17);
    // Include values whose shortest decimal form is long or extreme.
    model.params()[0] = 0.1 + 0.2;
    model.params()[1] = 5e-324;
    model.params()[2] = -1.7976931348623157e308;
    model.normalization = {-11.25, 1.375};
    model.grid_levels = 10;
    return model;
}

} // namespace

TEST(ModelFile, RoundTripIsBitExact) {
    const auto path = temp_path("cnn.model");
    const auto model = trained_looking_cnn();
    save_model(model, path);
    const auto back = load_model(path);
    EXPECT_EQ(back, model);
    EXPECT_EQ(back.spec().arch, Architecture::cnn);
    EXPECT_EQ(count_params(back), count_params(model));
}

TEST(ModelFile, ForwardUnchangedAfterReload) {
    const auto path = temp_path("dnn.model");
    auto model = build_dnn(NetworkConfig{});
    model.init_params(3);
    model.normalization = {-10.0, 2.0};
    save_model(model, path);
    const auto back = load_model(path);
    std::vector<double> x(36);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.1 * static_cast<double>(i) - 1.7;
    const auto a = forward(model, x);
    const auto b = forward(back, x);
    EXPECT_EQ(a.class_probs, b.class_probs);
    EXPECT_EQ(a.power_norm, b.power_norm);
}

TEST(ModelFile, CustomModelWithoutScenario) {
    const auto path = temp_path("custom.model");
    ModelSpec spec;
    spec.input = {2, 3, 4};
    spec.trunk = {Conv2dSpec{3, 1, false}, DenseSpec{5, true}};
    spec.class_outputs = 3;
    spec.power_outputs = 2;
    Model model(spec);
    model.init_params(8);
    save_model(model, path);
    const auto back = load_model(path);
    EXPECT_EQ(back, model);
    EXPECT_FALSE(back.scenario.has_value());
}

TEST(ModelFile, CorruptedValue) {
    const auto path = temp_path("corrupt.model");
    save_model(trained_looking_cnn(), path);
    auto lines = read_lines(path);
    const auto pos = lines[3].find(' ', 6);
    lines[3].insert(pos + 1, "x");
    write_lines(path, lines);
    try {
        load_model(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(ModelFile, MissingValue) {
    const auto path = temp_path("short.model");
    save_model(trained_looking_cnn(), path);
    auto lines = read_lines(path);
    lines[2].erase(lines[2].rfind(' '));
    write_lines(path, lines);
    EXPECT_THROW(load_model(path), ParseError);
}

TEST(ModelFile, Truncated) {
    const auto path = temp_path("truncated.model");
    save_model(trained_looking_cnn(), path);
    auto lines = read_lines(path);
    lines.resize(lines.size() - 2);
    write_lines(path, lines);
    EXPECT_THROW(load_model(path), ParseError);
}

TEST(ModelFile, ParameterCountMismatch) {
    const auto path = temp_path("count.model");
    save_model(trained_looking_cnn(), path);
    auto lines = read_lines(path);
    const auto pos = lines[0].find("\"param_count\":412030");
    ASSERT_NE(pos, std::string::npos);
    lines[0].replace(pos, 20, "\"param_count\":412031");
    write_lines(path, lines);
    EXPECT_THROW(load_model(path), ParseError);
}

TEST(ModelFile, ForeignVersion) {
    const auto path = temp_path("version.model");
    save_model(trained_looking_cnn(), path);
    auto lines = read_lines(path);
    const auto pos = lines[0].find("\"version\":1");
    ASSERT_NE(pos, std::string::npos);
    lines[0].replace(pos, 11, "\"version\":2");
    write_lines(path, lines);
    EXPECT_THROW(load_model(path), VersionError);
}

TEST(ModelFile, Garbage) {
    const auto path = temp_path("garbage.model");
    write_lines(path, {"{not json"});
    EXPECT_THROW(load_model(path), ParseError);
    EXPECT_THROW(load_model(temp_path("does_not_exist.model")), std::runtime_error);
}
