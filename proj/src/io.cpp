#include "thinlayer/io.hpp"

#include "thinlayer/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace thinlayer {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_surface_csv(std::ostream& os, const SurfaceMesh& mesh, const ScalarField& t) {
    os << "node,u1,u2,x,y,z,value\n";
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const ChartCoords u = mesh.coords(n);
        const Vec3& x = mesh.geometry(n).position;
        os << n << ',' << format_double(u[0]) << ',' << format_double(u[1]) << ',' << format_double(x(0)) << ','
           << format_double(x(1)) << ',' << format_double(x(2)) << ',' << format_double(t[n]) << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace thinlayer
