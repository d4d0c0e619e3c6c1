#pragma once

#include "thinlayer/fields.hpp"
#include "thinlayer/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace thinlayer {

/// 17 significant digits, shortest exponent form; "nan", "inf", "-inf" for
/// non-finite values. Independent of the C locale.
std::string format_double(double v);

/// CSV with columns node,u1,u2,x,y,z,value.
void write_surface_csv(std::ostream& os, const SurfaceMesh& mesh, const ScalarField& t);

/// Writes `content` to `path` in binary mode (LF line endings kept as is).
/// Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace thinlayer
