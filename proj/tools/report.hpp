#pragma once

#include "config.hpp"

#include "thinlayer/gamma_harness.hpp"
#include "thinlayer/tangential_ops.hpp"

#include <filesystem>
#include <string>

namespace thinlayer::cli {

enum class ReportFormat { csv, json };

/// Two-space indented JSON with member order preserved and every float
/// printed with 17 significant digits. Non-finite floats become null.
std::string render_json(const Json& value);

/// A finite double as a JSON number, anything else as null.
Json json_number(double v);
/// Inverse of json_number: null reads back as NaN.
double number_from_json(const Json& value);

Json report_json(const IdentityReport& report, const Json& config_echo);
Json report_json(const GammaReport& report, const Json& config_echo);
Json report_json(const LebesgueReport& report, const Json& config_echo);

std::string report_csv(const IdentityReport& report);
/// Columns eps,l2_err,h1_err,scaled_energy,limit_energy,t_indep_ratio,pass.
std::string report_csv(const GammaReport& report);
std::string report_csv(const LebesgueReport& report);

/// Reads back the output of report_json(GammaReport).
GammaReport gamma_report_from_json(const Json& value);
IdentityReport identity_report_from_json(const Json& value);

/// Writes the report; JSON output embeds `config_echo` under "config".
/// Throws IoError.
void emit_report(const IdentityReport& report, ReportFormat format, const std::filesystem::path& path,
                 const Json& config_echo = Json::object());
void emit_report(const GammaReport& report, ReportFormat format, const std::filesystem::path& path,
                 const Json& config_echo = Json::object());
void emit_report(const LebesgueReport& report, ReportFormat format, const std::filesystem::path& path,
                 const Json& config_echo = Json::object());

/// render_json plus a trailing newline, written with write_text_file.
void write_json_file(const std::filesystem::path& path, const Json& value);

}  // namespace thinlayer::cli
