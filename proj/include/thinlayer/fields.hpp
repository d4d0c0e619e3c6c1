#pragma once

#include "thinlayer/geometry.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace thinlayer {

/// One real value per surface node.
struct ScalarField {
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(std::vector<double> v) : values(std::move(v)) {}
    static ScalarField zeros(std::size_t n) { return ScalarField(std::vector<double>(n, 0.0)); }

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

/// Three ambient Cartesian components per surface node.
struct VectorField {
    std::vector<Vec3> values;

    VectorField() = default;
    explicit VectorField(std::vector<Vec3> v) : values(std::move(v)) {}

    std::size_t size() const noexcept { return values.size(); }
    const Vec3& operator[](std::size_t i) const { return values[i]; }
    Vec3& operator[](std::size_t i) { return values[i]; }
    /// Cartesian component j (0-based) as a scalar field.
    ScalarField component(int j) const;
};

using AmbientFunction = std::function<double(const Vec3&)>;

/// Evaluates fn at every node position.
ScalarField sample(const SurfaceMesh& mesh, const AmbientFunction& fn);

/// Random polynomial of degree <= 3 in the ambient coordinates, with its
/// exact ambient gradient.
class AmbientPolynomial {
public:
    /// Coefficients drawn uniformly from [-1, 1] by a generator seeded with `seed`.
    explicit AmbientPolynomial(unsigned long long seed);

    double value(const Vec3& x) const;
    Vec3 gradient(const Vec3& x) const;

private:
    struct Term {
        double coeff;
        int a, b, c;
    };
    std::vector<Term> terms_;
};

}  // namespace thinlayer
