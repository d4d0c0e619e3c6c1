#include "config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace thinlayer::cli {

namespace {

const char* type_name(const Json& j) { return j.type_name(); }

double parse_pi_expression(const std::string& text, const ConfigNode& node) {
    static const std::regex pattern(R"(^\s*(?:([+-]?(?:\d+\.?\d*|\.\d+))\s*\*\s*|(-)\s*)?pi\s*(?:/\s*(\d+\.?\d*|\.\d+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) node.fail("expected a number or a multiple of pi, got \"" + text + "\"");
    double v = M_PI;
    if (m[1].matched) v *= std::stod(m[1].str());
    if (m[2].matched) v = -v;
    if (m[3].matched) {
        const double d = std::stod(m[3].str());
        if (d == 0.0) node.fail("division by zero in \"" + text + "\"");
        v /= d;
    }
    return v;
}

ChartDomain parse_domain(const ConfigNode& params, ChartDomain fallback) {
    const auto node = params.find("domain");
    if (!node) return fallback;
    node->allow_only({"u1", "u2"});
    ChartDomain d = fallback;
    for (int a = 0; a < 2; ++a) {
        const auto range = node->find(a == 0 ? "u1" : "u2");
        if (!range) continue;
        const auto ends = range->items();
        if (ends.size() != 2) range->fail("expected [lower, upper]");
        d.lower[a] = ends[0].number();
        d.upper[a] = ends[1].number();
        if (!(d.lower[a] < d.upper[a])) range->fail("lower end must be below the upper end");
    }
    return d;
}

std::array<int, 2> parse_grid(const ConfigNode& node) {
    const auto items = node.items();
    if (items.size() != 2) node.fail("expected [n1, n2]");
    std::array<int, 2> g{};
    for (int a = 0; a < 2; ++a) {
        const long long n = items[a].integer();
        if (n < 2 || n > 4096) items[a].fail("grid intervals must lie in [2, 4096]");
        g[a] = static_cast<int>(n);
    }
    return g;
}

}  // namespace

std::string ConfigNode::child_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

bool ConfigNode::has(std::string_view key) const {
    return value_->is_object() && value_->contains(std::string(key));
}

ConfigNode ConfigNode::at(std::string_view key) const {
    if (!value_->is_object()) fail(std::string("expected an object, got ") + type_name(*value_));
    const auto it = value_->find(std::string(key));
    if (it == value_->end()) throw ConfigError(child_path(key), "required key is missing");
    return ConfigNode(*it, child_path(key));
}

std::optional<ConfigNode> ConfigNode::find(std::string_view key) const {
    if (!value_->is_object()) fail(std::string("expected an object, got ") + type_name(*value_));
    const auto it = value_->find(std::string(key));
    if (it == value_->end()) return std::nullopt;
    return ConfigNode(*it, child_path(key));
}

void ConfigNode::allow_only(std::initializer_list<std::string_view> allowed) const {
    if (!value_->is_object()) fail(std::string("expected an object, got ") + type_name(*value_));
    for (const auto& item : value_->items()) {
        bool known = false;
        for (auto a : allowed) known = known || item.key() == a;
        if (!known) throw ConfigError(child_path(item.key()), "unknown key");
    }
}

double ConfigNode::number() const {
    if (value_->is_number()) return value_->get<double>();
    if (value_->is_string()) return parse_pi_expression(value_->get<std::string>(), *this);
    fail(std::string("expected a number, got ") + type_name(*value_));
}

double ConfigNode::positive_number() const {
    const double v = number();
    if (!(v > 0.0)) fail("expected a positive number");
    return v;
}

long long ConfigNode::integer() const {
    if (value_->is_number_integer()) return value_->get<long long>();
    if (value_->is_number_float()) {
        const double v = value_->get<double>();
        if (std::nearbyint(v) == v && std::abs(v) < 9e15) return static_cast<long long>(v);
    }
    fail(std::string("expected an integer, got ") + (value_->is_number() ? "a fraction" : type_name(*value_)));
}

bool ConfigNode::boolean() const {
    if (!value_->is_boolean()) fail(std::string("expected true or false, got ") + type_name(*value_));
    return value_->get<bool>();
}

std::string ConfigNode::string() const {
    if (!value_->is_string()) fail(std::string("expected a string, got ") + type_name(*value_));
    return value_->get<std::string>();
}

std::vector<ConfigNode> ConfigNode::items() const {
    if (!value_->is_array()) fail(std::string("expected an array, got ") + type_name(*value_));
    std::vector<ConfigNode> out;
    out.reserve(value_->size());
    for (std::size_t i = 0; i < value_->size(); ++i) {
        out.emplace_back((*value_)[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
}

double ConfigNode::number_or(std::string_view key, double fallback) const {
    const auto n = find(key);
    return n ? n->number() : fallback;
}

long long ConfigNode::integer_or(std::string_view key, long long fallback) const {
    const auto n = find(key);
    return n ? n->integer() : fallback;
}

bool ConfigNode::boolean_or(std::string_view key, bool fallback) const {
    const auto n = find(key);
    return n ? n->boolean() : fallback;
}

void ConfigNode::fail(const std::string& message) const { throw ConfigError(path_, message); }

Json load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return Json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", path.string() + " is not valid JSON: " + e.what());
    }
}

void check_top_level(const ConfigNode& root, std::initializer_list<std::string_view> sections) {
    if (!root.json().is_object()) root.fail("the config must be a JSON object");
    const ConfigNode version = root.at("schema_version");
    if (version.integer() != kSchemaVersion) {
        version.fail("unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    }
    if (const auto d = root.find("description")) (void)d->string();
    for (const auto& item : root.json().items()) {
        if (item.key() == "schema_version" || item.key() == "description") continue;
        bool known = false;
        for (auto s : sections) known = known || item.key() == s;
        if (!known) throw ConfigError(item.key(), "unknown key for this command");
    }
}

ChartSpec parse_chart(const ConfigNode& node) {
    node.allow_only({"name", "params", "grid"});
    const std::string name = node.at("name").string();
    const std::array<int, 2> grid = parse_grid(node.at("grid"));
    static const Json empty = Json::object();
    const auto params_node = node.find("params");
    const ConfigNode params = params_node ? *params_node : ConfigNode(empty, node.path() + ".params");

    try {
        if (name == "plane") {
            params.allow_only({"domain", "shear"});
            const ChartDomain d = parse_domain(params, {{0.0, 0.0}, {1.0, 1.0}});
            return {make_plane(d, grid, params.number_or("shear", 0.0)),
                    [](const Vec3&) { return std::array<double, 2>{0.0, 0.0}; }};
        }
        if (name == "sphere_cap") {
            params.allow_only({"radius", "domain", "shear"});
            const double r = params.find("radius") ? params.at("radius").positive_number() : 1.0;
            const ChartDomain d = parse_domain(params, {{M_PI / 6, 0.0}, {M_PI / 2, M_PI / 2}});
            return {make_sphere_cap(r, d, grid, params.number_or("shear", 0.0)),
                    [r](const Vec3&) { return std::array<double, 2>{2.0 / r, 1.0 / (r * r)}; }};
        }
        if (name == "cylinder") {
            params.allow_only({"radius", "domain", "shear"});
            const double r = params.find("radius") ? params.at("radius").positive_number() : 1.0;
            const ChartDomain d = parse_domain(params, {{0.0, 0.0}, {M_PI / 2, 1.0}});
            return {make_cylinder(r, d, grid, params.number_or("shear", 0.0)),
                    [r](const Vec3&) { return std::array<double, 2>{1.0 / r, 0.0}; }};
        }
        if (name == "torus") {
            params.allow_only({"major_radius", "minor_radius"});
            const double big = params.find("major_radius") ? params.at("major_radius").positive_number() : 2.0;
            const double small = params.find("minor_radius") ? params.at("minor_radius").positive_number() : 0.5;
            return {make_torus(big, small, grid), [big, small](const Vec3& x) {
                        const double rho = std::hypot(x(0), x(1));
                        const double cosv = (rho - big) / small;
                        return std::array<double, 2>{1.0 / small + cosv / rho, cosv / (small * rho)};
                    }};
        }
    } catch (const std::invalid_argument& e) {
        params.fail(e.what());
    }
    node.at("name").fail("unknown chart \"" + name + "\" (plane, sphere_cap, cylinder, torus)");
}

SpatialFunction parse_spatial(const ConfigNode& node) {
    SpatialFunction s;
    const std::string kind = node.at("kind").string();
    if (kind == "zero") {
        node.allow_only({"kind"});
        s.kind = SpatialFunction::Kind::zero;
    } else if (kind == "constant") {
        node.allow_only({"kind", "amplitude"});
        s.kind = SpatialFunction::Kind::constant;
        s.amplitude = node.at("amplitude").number();
    } else if (kind == "sin_product") {
        node.allow_only({"kind", "amplitude", "wave"});
        s.kind = SpatialFunction::Kind::sin_product;
        s.amplitude = node.number_or("amplitude", 1.0);
        if (const auto w = node.find("wave")) {
            const auto items = w->items();
            if (items.size() != 2) w->fail("expected [k1, k2]");
            s.wave = {items[0].number(), items[1].number()};
        }
    } else if (kind == "affine") {
        node.allow_only({"kind", "amplitude", "slope"});
        s.kind = SpatialFunction::Kind::affine;
        s.amplitude = node.number_or("amplitude", 0.0);
        const ConfigNode slope = node.at("slope");
        const auto items = slope.items();
        if (items.size() != 3) slope.fail("expected [s1, s2, s3]");
        s.slope = Vec3(items[0].number(), items[1].number(), items[2].number());
    } else if (kind == "polynomial") {
        node.allow_only({"kind", "amplitude", "seed"});
        s.kind = SpatialFunction::Kind::polynomial;
        s.amplitude = node.number_or("amplitude", 1.0);
        const long long seed = node.integer_or("seed", 42);
        if (seed < 0) node.at("seed").fail("seed must be nonnegative");
        s.seed = static_cast<unsigned long long>(seed);
    } else {
        node.at("kind").fail("unknown spatial function \"" + kind +
                             "\" (zero, constant, sin_product, affine, polynomial)");
    }
    return s;
}

TransverseProfile parse_profile(const ConfigNode& node) {
    TransverseProfile p;
    const std::string kind = node.at("kind").string();
    if (kind == "polynomial") {
        node.allow_only({"kind", "coefficients"});
        p.kind = TransverseProfile::Kind::polynomial;
        p.coefficients.clear();
        for (const auto& c : node.at("coefficients").items()) p.coefficients.push_back(c.number());
        if (p.coefficients.empty()) node.at("coefficients").fail("needs at least one coefficient");
    } else if (kind == "cosine") {
        node.allow_only({"kind", "frequency"});
        p.kind = TransverseProfile::Kind::cosine;
        p.frequency = node.number_or("frequency", 1.0);
    } else if (kind == "log_singular") {
        node.allow_only({"kind"});
        p.kind = TransverseProfile::Kind::log_singular;
    } else {
        node.at("kind").fail("unknown profile \"" + kind + "\" (polynomial, cosine, log_singular)");
    }
    return p;
}

SourceFamily parse_source(const ConfigNode& node) {
    node.allow_only({"spatial", "profile", "pathological"});
    SourceFamily f;
    f.spatial = parse_spatial(node.at("spatial"));
    if (const auto p = node.find("profile")) f.profile = parse_profile(*p);
    f.pathological = node.boolean_or("pathological", false);
    return f;
}

FluxFamily parse_flux(const ConfigNode& node) {
    FluxFamily q;
    const std::string kind = node.at("kind").string();
    if (kind == "zero") {
        node.allow_only({"kind"});
        q.kind = FluxFamily::Kind::zero;
        return q;
    }
    if (kind == "odd_power") {
        node.allow_only({"kind", "spatial", "exponent"});
        q.kind = FluxFamily::Kind::odd_power;
        q.exponent = node.find("exponent") ? node.at("exponent").positive_number() : 1.0;
    } else if (kind == "even") {
        node.allow_only({"kind", "spatial", "level"});
        q.kind = FluxFamily::Kind::even;
        q.level = node.number_or("level", 1.0);
    } else if (kind == "sine") {
        node.allow_only({"kind", "spatial", "frequency"});
        q.kind = FluxFamily::Kind::sine;
        q.frequency = node.number_or("frequency", 1.0);
    } else {
        node.at("kind").fail("unknown flux family \"" + kind + "\" (zero, odd_power, even, sine)");
    }
    q.spatial = parse_spatial(node.at("spatial"));
    return q;
}

std::uint8_t parse_edges(const ConfigNode& node) {
    std::uint8_t mask = 0;
    for (const auto& item : node.items()) {
        const std::string e = item.string();
        if (e == "u1_min") {
            mask |= kEdgeU1Min;
        } else if (e == "u1_max") {
            mask |= kEdgeU1Max;
        } else if (e == "u2_min") {
            mask |= kEdgeU2Min;
        } else if (e == "u2_max") {
            mask |= kEdgeU2Max;
        } else {
            item.fail("unknown edge \"" + e + "\" (u1_min, u1_max, u2_min, u2_max)");
        }
    }
    return mask;
}

std::vector<double> parse_eps_list(const ConfigNode& node) {
    std::vector<double> eps;
    const auto items = node.items();
    if (items.empty()) node.fail("needs at least one value");
    for (const auto& item : items) {
        const double e = item.positive_number();
        if (!eps.empty() && !(e < eps.back())) item.fail("values must be strictly decreasing");
        eps.push_back(e);
    }
    return eps;
}

}  // namespace thinlayer::cli
