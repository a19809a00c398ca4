#pragma once

#include <string>

#include "json.hpp"
#include "rlt/params.hpp"

namespace rlt {

// name -> {shape, values}. nlohmann emits shortest round-trip doubles,
// so 64-bit values survive a save/load cycle bit-exactly.
inline nlohmann::json params_to_json(const ParameterSet& ps) {
    nlohmann::json j;
    j["architecture"] = ps.architecture;
    nlohmann::json tensors = nlohmann::json::object();
    for (const auto& [name, t] : ps.params()) {
        tensors[name] = {{"shape", t.shape}, {"values", t.data}};
    }
    j["tensors"] = std::move(tensors);
    return j;
}

inline void params_from_json(const nlohmann::json& j, ParameterSet& ps) {
    if (j.contains("architecture")) ps.architecture = j.at("architecture").get<std::string>();
    for (const auto& [name, entry] : j.at("tensors").items()) {
        Tensor t(entry.at("shape").get<std::vector<std::size_t>>(),
                 entry.at("values").get<std::vector<double>>());
        ps.param(name) = std::move(t);
    }
}

}  // namespace rlt
