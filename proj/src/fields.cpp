#include "thinlayer/fields.hpp"

#include "thinlayer/parallel.hpp"

#include <cmath>
#include <random>

namespace thinlayer {

ScalarField VectorField::component(int j) const {
    ScalarField out = ScalarField::zeros(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = values[k](j);
    return out;
}

ScalarField sample(const SurfaceMesh& mesh, const AmbientFunction& fn) {
    ScalarField out = ScalarField::zeros(mesh.node_count());
    parallel_for(mesh.node_count(), [&](std::size_t k) { out[k] = fn(mesh.geometry(k).position); });
    return out;
}

AmbientPolynomial::AmbientPolynomial(unsigned long long seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b)
            for (int c = 0; a + b + c <= 3; ++c) terms_.push_back({coeff(gen), a, b, c});
}

namespace {

double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

}  // namespace

double AmbientPolynomial::value(const Vec3& x) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coeff * ipow(x(0), t.a) * ipow(x(1), t.b) * ipow(x(2), t.c);
    return s;
}

Vec3 AmbientPolynomial::gradient(const Vec3& x) const {
    Vec3 g = Vec3::Zero();
    for (const auto& t : terms_) {
        if (t.a > 0) g(0) += t.coeff * t.a * ipow(x(0), t.a - 1) * ipow(x(1), t.b) * ipow(x(2), t.c);
        if (t.b > 0) g(1) += t.coeff * t.b * ipow(x(0), t.a) * ipow(x(1), t.b - 1) * ipow(x(2), t.c);
        if (t.c > 0) g(2) += t.coeff * t.c * ipow(x(0), t.a) * ipow(x(1), t.b) * ipow(x(2), t.c - 1);
    }
    return g;
}

}  // namespace thinlayer
