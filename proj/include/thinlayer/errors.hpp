#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thinlayer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RankDeficientChart : public Error {
public:
    RankDeficientChart(std::size_t node, double sigma_min)
        : Error("chart differential is rank deficient at node " + std::to_string(node) +
                " (smallest singular value " + std::to_string(sigma_min) + ")"),
          node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

class LayerTooThick : public Error {
public:
    LayerTooThick(double requested, double limit)
        : Error("layer half-thickness " + std::to_string(requested) +
                " is not below the curvature bound " + std::to_string(limit)),
          requested_(requested), limit_(limit) {}
    double requested() const noexcept { return requested_; }
    double limit() const noexcept { return limit_; }

private:
    double requested_;
    double limit_;
};

class NonTangentInput : public Error {
public:
    NonTangentInput(std::size_t node, double defect)
        : Error("vector field is not tangent at node " + std::to_string(node) +
                " (normal component " + std::to_string(defect) + ")"),
          node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(std::size_t node, const std::string& why)
        : Error("anisotropy matrix at node " + std::to_string(node) + ": " + why), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

class EmptyDirichletBoundary : public Error {
public:
    EmptyDirichletBoundary() : Error("mixed problem needs a nonempty Dirichlet boundary") {}
};

class SolverDiverged : public Error {
public:
    SolverDiverged(int iterations, double residual)
        : Error("conjugate gradients did not converge in " + std::to_string(iterations) +
                " iterations (relative residual " + std::to_string(residual) + ")"),
          iterations_(iterations) {}
    int iterations() const noexcept { return iterations_; }

private:
    int iterations_;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string key_path, const std::string& message)
        : Error(key_path.empty() ? message : key_path + ": " + message),
          key_path_(std::move(key_path)) {}
    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace thinlayer
