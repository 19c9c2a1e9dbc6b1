#pragma once

// JSON helpers shared by the dataset and model file formats. Private to the
// core library; public headers do not expose nlohmann types.

#include "hetnet/dataset.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/system_model.hpp"

#include <json.hpp>

namespace hetnet::io {

nlohmann::json config_to_json_value(const NetworkConfig& cfg);
NetworkConfig config_from_json_value(const nlohmann::json& j);

/// Reads `key` from `j`, turning a missing or mistyped field into ParseError at `line`.
template <typename T>
T field(const nlohmann::json& j, const char* key, std::size_t line) {
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'", line);
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad field '") + key + "': " + e.what(), line);
    }
}

} // namespace hetnet::io
