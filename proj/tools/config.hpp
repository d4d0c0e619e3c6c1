#pragma once

#include "thinlayer/errors.hpp"
#include "thinlayer/gamma_harness.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/surface_solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thinlayer::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// A value inside the config document together with its key path
/// ("sweep.eps[2]"), so every error can name the offending key.
class ConfigNode {
public:
    ConfigNode(const Json& value, std::string path) : value_(&value), path_(std::move(path)) {}

    const Json& json() const noexcept { return *value_; }
    const std::string& path() const noexcept { return path_; }

    bool has(std::string_view key) const;
    /// Required member.
    ConfigNode at(std::string_view key) const;
    std::optional<ConfigNode> find(std::string_view key) const;
    /// Rejects members not named in `allowed`; also requires an object.
    void allow_only(std::initializer_list<std::string_view> allowed) const;

    /// Numbers, or strings of the form "pi", "2*pi", "pi/3", "-3*pi/4".
    double number() const;
    double positive_number() const;
    long long integer() const;
    bool boolean() const;
    std::string string() const;
    std::vector<ConfigNode> items() const;

    double number_or(std::string_view key, double fallback) const;
    long long integer_or(std::string_view key, long long fallback) const;
    bool boolean_or(std::string_view key, bool fallback) const;

    [[noreturn]] void fail(const std::string& message) const;

private:
    std::string child_path(std::string_view key) const;

    const Json* value_;
    std::string path_;
};

/// Parses the file; unreadable or malformed files raise ConfigError.
Json load_config(const std::filesystem::path& path);

/// Checks schema_version and that the top level has only `sections`
/// (plus schema_version and description).
void check_top_level(const ConfigNode& root, std::initializer_list<std::string_view> sections);

struct ChartSpec {
    Chart chart;
    /// Curvature oracle of the catalog surface: (h0, gauss) at a point.
    std::function<std::array<double, 2>(const Vec3&)> curvature;
};

ChartSpec parse_chart(const ConfigNode& node);
SpatialFunction parse_spatial(const ConfigNode& node);
TransverseProfile parse_profile(const ConfigNode& node);
SourceFamily parse_source(const ConfigNode& node);
FluxFamily parse_flux(const ConfigNode& node);
std::uint8_t parse_edges(const ConfigNode& node);
/// Nonempty, positive and strictly decreasing.
std::vector<double> parse_eps_list(const ConfigNode& node);

}  // namespace thinlayer::cli
