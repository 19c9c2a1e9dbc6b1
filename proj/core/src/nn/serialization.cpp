#include "hetnet/nn/serialization.hpp"

#include "../json_io.hpp"
#include "hetnet/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hetnet::nn {

namespace {

nlohmann::json layer_to_json(const LayerSpec& layer) {
    if (const auto* conv = std::get_if<Conv2dSpec>(&layer))
        return {{"kind", "conv2d"}, {"out", conv->out_channels}, {"kernel", conv->kernel}, {"relu", conv->relu}};
    const auto& dense = std::get<DenseSpec>(layer);
    return {{"kind", "dense"}, {"out", dense.out_features}, {"relu", dense.relu}};
}

LayerSpec layer_from_json(const nlohmann::json& j) {
    const auto kind = io::field<std::string>(j, "kind", 1);
    if (kind == "conv2d")
        return Conv2dSpec{io::field<int>(j, "out", 1), io::field<int>(j, "kernel", 1), io::field<bool>(j, "relu", 1)};
    if (kind == "dense") return DenseSpec{io::field<int>(j, "out", 1), io::field<bool>(j, "relu", 1)};
    throw ParseError("unknown layer kind '" + kind + "'", 1);
}

void write_tensor(std::ostream& out, char tag, std::size_t layer, std::span<const double> values) {
    out << tag << ' ' << layer << ' ' << values.size();
    char buf[64];
    for (double v : values) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
}

void read_tensor(const std::string& text, std::size_t line, char tag, std::size_t layer, std::span<double> dest) {
    const char* p = text.data();
    const char* end = text.data() + text.size();
    auto skip = [&] {
        while (p < end && *p == ' ') ++p;
    };
    auto read_uint = [&](const char* what) {
        skip();
        std::size_t v = 0;
        const auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc()) throw ParseError(std::string("expected ") + what, line, static_cast<std::size_t>(p - text.data()));
        p = res.ptr;
        return v;
    };
    skip();
    if (p == end || *p != tag) throw ParseError(std::string("expected tensor tag '") + tag + "'", line, static_cast<std::size_t>(p - text.data()));
    ++p;
    if (read_uint("layer index") != layer) throw ParseError("tensor belongs to an unexpected layer", line);
    if (read_uint("value count") != dest.size()) throw ParseError("tensor value count does not match architecture", line);
    for (double& v : dest) {
        skip();
        const auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc()) throw ParseError("bad parameter value", line, static_cast<std::size_t>(p - text.data()));
        p = res.ptr;
    }
    skip();
    if (p != end) throw ParseError("trailing characters after tensor values", line, static_cast<std::size_t>(p - text.data()));
}

} // namespace

void save_model(const Model& model, const std::filesystem::path& path) {
    const auto& spec = model.spec();
    nlohmann::json trunk = nlohmann::json::array();
    for (const auto& layer : spec.trunk) trunk.push_back(layer_to_json(layer));
    nlohmann::json header = {
        {"format", "hetnet-model"},
        {"version", kModelFormatVersion},
        {"arch", std::string(to_string(spec.arch))},
        {"input", {spec.input.channels, spec.input.height, spec.input.width}},
        {"trunk", trunk},
        {"class_outputs", spec.class_outputs},
        {"power_outputs", spec.power_outputs},
        {"param_count", count_params(model)},
        {"normalization", {{"mean", model.normalization.mean}, {"std", model.normalization.std}}},
        {"grid_levels", model.grid_levels},
        {"scenario", model.scenario ? io::config_to_json_value(*model.scenario) : nlohmann::json(nullptr)},
    };

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << header.dump() << '\n';
    const auto params = model.params();
    for (std::size_t i = 0; i < model.layers().size(); ++i) {
        const auto& g = model.layers()[i];
        write_tensor(out, 'w', i, params.subspan(g.weight_offset, g.weight_count));
        write_tensor(out, 'b', i, params.subspan(g.bias_offset, g.bias_count));
    }
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model '" + path.string() + "'");

    std::string text;
    if (!std::getline(in, text)) throw ParseError("empty file, model header expected", 1);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), 1, e.byte);
    }
    if (!header.is_object()) throw ParseError("model header must be an object", 1);
    if (io::field<std::string>(header, "format", 1) != "hetnet-model") throw VersionError("not a hetnet model file");
    const int version = io::field<int>(header, "version", 1);
    if (version != kModelFormatVersion)
        throw VersionError("model format version " + std::to_string(version) + " is not supported");

    ModelSpec spec;
    try {
        spec.arch = architecture_from_string(io::field<std::string>(header, "arch", 1));
    } catch (const ContractError& e) {
        throw ParseError(e.what(), 1);
    }
    const auto input = io::field<std::vector<int>>(header, "input", 1);
    if (input.size() != 3) throw ParseError("input shape must have three entries", 1);
    spec.input = {input[0], input[1], input[2]};
    for (const auto& layer : io::field<nlohmann::json>(header, "trunk", 1)) spec.trunk.push_back(layer_from_json(layer));
    spec.class_outputs = io::field<int>(header, "class_outputs", 1);
    spec.power_outputs = io::field<int>(header, "power_outputs", 1);

    std::optional<Model> built;
    try {
        built.emplace(std::move(spec));
    } catch (const ContractError& e) {
        throw ParseError(std::string("invalid architecture: ") + e.what(), 1);
    }
    Model& model = *built;
    if (io::field<std::size_t>(header, "param_count", 1) != count_params(model))
        throw ParseError("parameter count does not match architecture", 1);
    const auto norm = io::field<nlohmann::json>(header, "normalization", 1);
    model.normalization = {io::field<double>(norm, "mean", 1), io::field<double>(norm, "std", 1)};
    model.grid_levels = io::field<int>(header, "grid_levels", 1);
    if (const auto it = header.find("scenario"); it != header.end() && !it->is_null()) {
        model.scenario = io::config_from_json_value(*it);
    }

    std::size_t line = 1;
    auto params = model.params();
    for (std::size_t i = 0; i < model.layers().size(); ++i) {
        const auto& g = model.layers()[i];
        for (const char tag : {'w', 'b'}) {
            ++line;
            if (!std::getline(in, text)) throw ParseError("truncated model file", line);
            if (tag == 'w')
                read_tensor(text, line, tag, i, params.subspan(g.weight_offset, g.weight_count));
            else
                read_tensor(text, line, tag, i, params.subspan(g.bias_offset, g.bias_count));
        }
    }
    return std::move(model);
}

} // namespace hetnet::nn
