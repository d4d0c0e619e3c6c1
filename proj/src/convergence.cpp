#include "thinlayer/convergence.hpp"

#include <cmath>
#include <stdexcept>

namespace thinlayer {

double fit_order(std::span<const double> h, std::span<const double> error) {
    if (h.size() != error.size() || h.size() < 2) {
        throw std::invalid_argument("fit_order needs at least two matching samples");
    }
    const double n = static_cast<double>(h.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(error[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double observed_order(double h_coarse, double e_coarse, double h_fine, double e_fine) {
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

}  // namespace thinlayer
