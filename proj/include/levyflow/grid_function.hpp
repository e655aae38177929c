#pragma once

#include "levyflow/blob.hpp"
#include "levyflow/core.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace levyflow {

// Box [-R, R]^d with n nodes per axis (spacing 2R/(n-1)).
struct Lattice {
    int dim = 1;
    double half_width = 1.0;
    int nodes = 2;

    Lattice() = default;
    Lattice(int d, double R, int n);

    double spacing() const { return 2.0 * half_width / (nodes - 1); }
    std::size_t size() const;
    std::array<int, 3> index(std::size_t flat) const;
    std::size_t flat(const std::array<int, 3>& idx) const;
    Vec node(std::size_t flat) const;
    double coordinate(int i) const { return -half_width + spacing() * i; }
    bool inside(const Vec& x) const;
    // Nodes at least `margin` steps away from every face.
    bool interior(std::size_t flat, int margin) const;

    nlohmann::json to_json() const;
    static Lattice from_json(const nlohmann::json& j);
    bool operator==(const Lattice& o) const = default;
};

struct Provenance {
    std::string producer;
    std::size_t n_mc = 0;
    std::uint64_t seed = 0;
    double max_standard_error = 0.0;
    double out_of_box_fraction = 0.0;
    bool noise_warning = false;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
    static Provenance from_json(const nlohmann::json& j);
};

// Scalar, vector (rows x 1) or matrix (rows x cols) values on a lattice.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(const Lattice& lattice, int rows, int cols = 1);

    static GridFunction sample(const Lattice& lattice, const std::function<double(const Vec&)>& f);
    static GridFunction sample_vector(const Lattice& lattice, int rows,
                                      const std::function<Vec(const Vec&)>& f);

    const Lattice& lattice() const { return lattice_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int components() const { return rows_ * cols_; }

    double& at(std::size_t node, int comp = 0) { return values_[node * components() + comp]; }
    double at(std::size_t node, int comp = 0) const { return values_[node * components() + comp]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& standard_error() { return se_; }
    const std::vector<double>& standard_error() const { return se_; }
    Provenance& provenance() { return provenance_; }
    const Provenance& provenance() const { return provenance_; }

    // Multilinear interpolation of every component into out; arguments outside the box are
    // clamped to it and reported through the return value.
    bool interpolate(const Vec& x, double* out) const;
    double interpolate(const Vec& x, int comp = 0) const;
    Vec interpolate_vec(const Vec& x) const;
    Mat interpolate_mat(const Vec& x) const;

    // Euclidean norm for vectors, spectral norm for matrices.
    double value_norm(std::size_t node) const;
    double sup_norm() const;
    double sup_norm_interior(int margin) const;
    double max_standard_error() const;

    Blob to_blob() const;
    static GridFunction from_blob(const Blob& blob);

private:
    Lattice lattice_;
    int rows_ = 1;
    int cols_ = 1;
    std::vector<double> values_;
    std::vector<double> se_;
    Provenance provenance_;
};

// Largest |g(x) - g(x')| / |x - x'|^theta over node pairs at least two spacings apart:
// every pair along each axis at geometric offsets plus seeded random long-range pairs.
double estimate_holder_seminorm(const GridFunction& g, double theta, int margin = 0);

// Central lattice differences (one-sided on faces): gradient of a scalar field, or the
// Jacobian (rows x d) of a vector field.
GridFunction lattice_gradient(const GridFunction& g);

}  // namespace levyflow
