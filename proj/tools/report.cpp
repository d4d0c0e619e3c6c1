#include "report.hpp"

#include "thinlayer/errors.hpp"
#include "thinlayer/io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace thinlayer::cli {

namespace {

void render(std::string& out, const Json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& item : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                out += Json(item.key()).dump(-1, ' ', false, Json::error_handler_t::strict);
                out += ": ";
                render(out, item.value(), indent + 2);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                render(out, v[i], indent + 2);
            }
            out += "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double d = v.get<double>();
            out += std::isfinite(d) ? format_double(d) : "null";
            return;
        }
        default:
            out += v.dump(-1, ' ', false, Json::error_handler_t::strict);
    }
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

Json number_array(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

std::vector<double> numbers_from_json(const Json& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(number_from_json(x));
    return v;
}

template <class Report>
void emit(const Report& report, ReportFormat format, const std::filesystem::path& path, const Json& config_echo) {
    if (format == ReportFormat::csv) {
        write_text_file(path, report_csv(report));
    } else {
        write_json_file(path, report_json(report, config_echo));
    }
}

}  // namespace

std::string render_json(const Json& value) {
    std::string out;
    render(out, value, 0);
    return out;
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from_json(const Json& value) {
    return value.is_null() ? std::numeric_limits<double>::quiet_NaN() : value.get<double>();
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
    write_text_file(path, render_json(value) + "\n");
}

Json report_json(const IdentityReport& report, const Json& config_echo) {
    Json out = Json::object();
    out["config"] = config_echo;
    Json list = Json::array();
    for (const auto& r : report.results) {
        list.push_back(Json{{"identity_name", r.identity_name},
                            {"max_residual", json_number(r.max_residual)},
                            {"nodes_checked", r.nodes_checked},
                            {"pass", r.pass}});
    }
    out["identities"] = std::move(list);
    out["pass"] = report.all_pass();
    return out;
}

Json report_json(const GammaReport& report, const Json& config_echo) {
    Json out = Json::object();
    out["config"] = config_echo;
    Json list = Json::array();
    for (const auto& r : report.records) {
        list.push_back(Json{{"eps", json_number(r.eps)},
                            {"l2_err", json_number(r.l2_err)},
                            {"h1_err", json_number(r.h1_err)},
                            {"avg_l2_err", json_number(r.avg_l2_err)},
                            {"exact_l2_err", json_number(r.exact_l2_err)},
                            {"scaled_energy", json_number(r.scaled_energy)},
                            {"limit_energy", json_number(r.limit_energy)},
                            {"recovery_energy", json_number(r.recovery_energy)},
                            {"t_indep_ratio", json_number(r.t_indep_ratio)},
                            {"iterations", r.iterations},
                            {"pass", r.pass},
                            {"failure", r.failure}});
    }
    out["records"] = std::move(list);
    out["fitted_order"] = json_number(report.fitted_order);
    out["limit_energy"] = json_number(report.limit_energy);
    out["limit_l2_norm"] = json_number(report.limit_l2_norm);
    out["noise_floor"] = json_number(report.noise_floor);
    out["q0_cauchy_defects"] = number_array(report.q0_cauchy_defects);
    out["q0_order"] = json_number(report.q0_order);
    out["monotone"] = report.monotone;
    out["pass"] = report.pass;
    return out;
}

Json report_json(const LebesgueReport& report, const Json& config_echo) {
    Json out = Json::object();
    out["config"] = config_echo;
    out["eps"] = number_array(report.eps);
    out["averages"] = number_array(report.averages);
    out["f_at_zero"] = json_number(report.f_at_zero);
    out["divergent"] = report.divergent;
    out["bounded_by_2f0"] = report.bounded_by_2f0;
    return out;
}

std::string report_csv(const IdentityReport& report) {
    std::ostringstream os;
    os << "identity_name,max_residual,nodes_checked,pass\n";
    for (const auto& r : report.results) {
        os << r.identity_name << ',' << format_double(r.max_residual) << ',' << r.nodes_checked << ','
           << bool_text(r.pass) << '\n';
    }
    return os.str();
}

std::string report_csv(const GammaReport& report) {
    std::ostringstream os;
    os << "eps,l2_err,h1_err,scaled_energy,limit_energy,t_indep_ratio,pass\n";
    for (const auto& r : report.records) {
        os << format_double(r.eps) << ',' << format_double(r.l2_err) << ',' << format_double(r.h1_err) << ','
           << format_double(r.scaled_energy) << ',' << format_double(r.limit_energy) << ','
           << format_double(r.t_indep_ratio) << ',' << bool_text(r.pass) << '\n';
    }
    return os.str();
}

std::string report_csv(const LebesgueReport& report) {
    std::ostringstream os;
    os << "eps,average,ratio_to_f0\n";
    for (std::size_t k = 0; k < report.eps.size(); ++k) {
        const double ratio = report.f_at_zero > 0.0 ? report.averages[k] / report.f_at_zero
                                                    : std::numeric_limits<double>::quiet_NaN();
        os << format_double(report.eps[k]) << ',' << format_double(report.averages[k]) << ','
           << format_double(ratio) << '\n';
    }
    return os.str();
}

GammaReport gamma_report_from_json(const Json& value) {
    GammaReport report;
    for (const auto& r : value.at("records")) {
        GammaRecord rec;
        rec.eps = number_from_json(r.at("eps"));
        rec.l2_err = number_from_json(r.at("l2_err"));
        rec.h1_err = number_from_json(r.at("h1_err"));
        rec.avg_l2_err = number_from_json(r.at("avg_l2_err"));
        rec.exact_l2_err = number_from_json(r.at("exact_l2_err"));
        rec.scaled_energy = number_from_json(r.at("scaled_energy"));
        rec.limit_energy = number_from_json(r.at("limit_energy"));
        rec.recovery_energy = number_from_json(r.at("recovery_energy"));
        rec.t_indep_ratio = number_from_json(r.at("t_indep_ratio"));
        rec.iterations = r.at("iterations").get<int>();
        rec.pass = r.at("pass").get<bool>();
        rec.failure = r.at("failure").get<std::string>();
        report.records.push_back(std::move(rec));
    }
    report.fitted_order = number_from_json(value.at("fitted_order"));
    report.limit_energy = number_from_json(value.at("limit_energy"));
    report.limit_l2_norm = number_from_json(value.at("limit_l2_norm"));
    report.noise_floor = number_from_json(value.at("noise_floor"));
    report.q0_cauchy_defects = numbers_from_json(value.at("q0_cauchy_defects"));
    report.q0_order = number_from_json(value.at("q0_order"));
    report.monotone = value.at("monotone").get<bool>();
    report.pass = value.at("pass").get<bool>();
    return report;
}

IdentityReport identity_report_from_json(const Json& value) {
    IdentityReport report;
    for (const auto& r : value.at("identities")) {
        report.results.push_back({r.at("identity_name").get<std::string>(), number_from_json(r.at("max_residual")),
                                  r.at("nodes_checked").get<std::size_t>(), r.at("pass").get<bool>()});
    }
    return report;
}

void emit_report(const IdentityReport& report, ReportFormat format, const std::filesystem::path& path,
                 const Json& config_echo) {
    emit(report, format, path, config_echo);
}

void emit_report(const GammaReport& report, ReportFormat format, const std::filesystem::path& path,
                 const Json& config_echo) {
    emit(report, format, path, config_echo);
}

void emit_report(const LebesgueReport& report, ReportFormat format, const std::filesystem::path& path,
                 const Json& config_echo) {
    emit(report, format, path, config_echo);
}

}  // namespace thinlayer::cli
