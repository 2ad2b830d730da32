#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace aircast {

enum class Source { NOAA, EPA };
enum class Role { input_feature, target_pollutant };

struct VariableSchema {
    std::string name;
    Source source;
    std::string units;
    Role role;
};

// The ten daily variables: six meteorological inputs and four pollutant
// targets. Column order here is the canonical order used by every frame,
// CSV dump and window in the project.
inline const std::vector<VariableSchema>& canonical_schema() {
    static const std::vector<VariableSchema> schema = {
        {"temperature_c", Source::NOAA, "C", Role::input_feature},
        {"wind_speed_ms", Source::NOAA, "m/s", Role::input_feature},
        {"wind_direction_deg", Source::NOAA, "degrees", Role::input_feature},
        {"relative_humidity_pct", Source::NOAA, "%", Role::input_feature},
        {"precipitable_water_cm", Source::NOAA, "cm", Role::input_feature},
        {"pressure_mbar", Source::NOAA, "mbar", Role::input_feature},
        {"o3_ppm", Source::EPA, "ppm", Role::target_pollutant},
        {"co_ppm", Source::EPA, "ppm", Role::target_pollutant},
        {"so2_ppb", Source::EPA, "ppb", Role::target_pollutant},
        {"no2_ppb", Source::EPA, "ppb", Role::target_pollutant},
    };
    return schema;
}

inline std::vector<std::string> schema_names(const std::vector<VariableSchema>& schema) {
    std::vector<std::string> names;
    names.reserve(schema.size());
    for (const auto& v : schema) names.push_back(v.name);
    return names;
}

inline std::vector<std::string> input_feature_names() {
    std::vector<std::string> names;
    for (const auto& v : canonical_schema())
        if (v.role == Role::input_feature) names.push_back(v.name);
    return names;
}

inline std::vector<std::string> target_pollutant_names() {
    std::vector<std::string> names;
    for (const auto& v : canonical_schema())
        if (v.role == Role::target_pollutant) names.push_back(v.name);
    return names;
}

inline const VariableSchema* find_variable(const std::vector<VariableSchema>& schema,
                                           std::string_view name) {
    for (const auto& v : schema)
        if (v.name == name) return &v;
    return nullptr;
}

}  // namespace aircast
