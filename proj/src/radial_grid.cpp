#include "qnls/radial_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qnls {

namespace {

void check_dimension(int dimension) {
    if (dimension < 1 || dimension > kMaxDimension) {
        throw std::invalid_argument("dimension must be in 1.." + std::to_string(kMaxDimension) +
                                    ", got " + std::to_string(dimension));
    }
}

// Gamma(n/2) for small positive integers n via Gamma(1/2) = sqrt(pi), Gamma(1) = 1
// and Gamma(x + 1) = x Gamma(x).
double gamma_half_integer(int n) {
    double x = (n % 2 == 0) ? 1.0 : 0.5;
    double g = (n % 2 == 0) ? 1.0 : std::sqrt(std::numbers::pi);
    while (x < 0.5 * n) {
        g *= x;
        x += 1.0;
    }
    return g;
}

template <class T>
void check_size(const RadialGrid& grid, std::span<const T> f, const char* what) {
    if (f.size() != grid.size()) {
        throw std::invalid_argument(std::string(what) + ": sample count " + std::to_string(f.size()) +
                                    " does not match grid size " + std::to_string(grid.size()));
    }
}

double sq_abs(double x) { return x * x; }
double sq_abs(const cplx& z) { return std::norm(z); }

template <class T>
std::vector<T> laplacian_impl(const RadialGrid& grid, std::span<const T> f) {
    check_size(grid, f, "laplacian");
    const std::size_t n = grid.size();
    if (n < 3) {
        throw std::invalid_argument("laplacian needs at least 3 grid nodes");
    }
    const auto c = grid.face_coefficients();
    const auto w = grid.weights();
    std::vector<T> out(n);
    T flux_left{};  // zero flux through the origin
    for (std::size_t j = 0; j < n; ++j) {
        const T right = (j + 1 < n) ? f[j + 1] : T{};
        const T flux_right = c[j] * (right - f[j]);
        out[j] = (flux_right - flux_left) / w[j];
        flux_left = flux_right;
    }
    return out;
}

template <class T>
double gradient_energy_impl(const RadialGrid& grid, std::span<const T> f) {
    check_size(grid, f, "gradient_energy");
    const auto c = grid.face_coefficients();
    const std::size_t n = grid.size();
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const T right = (j + 1 < n) ? f[j + 1] : T{};
        acc += c[j] * sq_abs(right - f[j]);
    }
    return acc;
}

}  // namespace

double unit_sphere_measure(int dimension) {
    check_dimension(dimension);
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dimension) / gamma_half_integer(dimension);
}

double ball_volume(int dimension, double radius) {
    return unit_sphere_measure(dimension) * std::pow(radius, dimension) / dimension;
}

RadialGrid::RadialGrid(int dimension, double r_max, std::size_t num_nodes)
    : dimension_(dimension), h_(0.0) {
    check_dimension(dimension);
    if (!(r_max > 0.0) || !std::isfinite(r_max)) {
        throw std::invalid_argument("r_max must be positive and finite");
    }
    if (num_nodes == 0) {
        throw std::invalid_argument("num_nodes must be positive");
    }
    h_ = r_max / static_cast<double>(num_nodes);
    nodes_.resize(num_nodes);
    build();
}

RadialGrid::RadialGrid(SpacingTag, int dimension, double h, std::size_t num_nodes)
    : dimension_(dimension), h_(h) {
    check_dimension(dimension);
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("grid spacing must be positive and finite");
    }
    if (num_nodes == 0) {
        throw std::invalid_argument("num_nodes must be positive");
    }
    nodes_.resize(num_nodes);
    build();
}

RadialGrid RadialGrid::with_spacing(int dimension, double h, std::size_t num_nodes) {
    return RadialGrid(SpacingTag{}, dimension, h, num_nodes);
}

void RadialGrid::build() {
    const std::size_t n = nodes_.size();
    const double omega = unit_sphere_measure(dimension_);
    const int p = dimension_ - 1;
    weights_.resize(n);
    face_radii_.resize(n);
    face_coeff_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double r = (static_cast<double>(j) + 0.5) * h_;
        const double rf = static_cast<double>(j + 1) * h_;
        nodes_[j] = r;
        weights_[j] = omega * std::pow(r, p) * h_;
        face_radii_[j] = rf;
        face_coeff_[j] = omega * std::pow(rf, p) / h_;
    }
}

RadialGrid RadialGrid::dilated(double l) const {
    if (!(l > 0.0) || !std::isfinite(l)) {
        throw std::invalid_argument("dilation factor must be positive and finite");
    }
    return with_spacing(dimension_, h_ * l, nodes_.size());
}

bool RadialGrid::same_as(const RadialGrid& other) const {
    return dimension_ == other.dimension_ && nodes_.size() == other.nodes_.size() && h_ == other.h_;
}

double integrate(const RadialGrid& grid, std::span<const double> values) {
    check_size(grid, values, "integrate");
    const auto w = grid.weights();
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j])) {
            throw std::invalid_argument("integrate: non-finite sample at node " + std::to_string(j));
        }
        acc += w[j] * values[j];
    }
    return acc;
}

cplx integrate(const RadialGrid& grid, std::span<const cplx> values) {
    check_size(grid, values, "integrate");
    const auto w = grid.weights();
    cplx acc{};
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j].real()) || !std::isfinite(values[j].imag())) {
            throw std::invalid_argument("integrate: non-finite sample at node " + std::to_string(j));
        }
        acc += w[j] * values[j];
    }
    return acc;
}

double inner(const RadialGrid& grid, std::span<const double> f, std::span<const double> g) {
    check_size(grid, f, "inner");
    check_size(grid, g, "inner");
    const auto w = grid.weights();
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += w[j] * f[j] * g[j];
    return acc;
}

cplx inner(const RadialGrid& grid, std::span<const cplx> f, std::span<const cplx> g) {
    check_size(grid, f, "inner");
    check_size(grid, g, "inner");
    const auto w = grid.weights();
    cplx acc{};
    for (std::size_t j = 0; j < f.size(); ++j) acc += w[j] * f[j] * std::conj(g[j]);
    return acc;
}

double l2_norm(const RadialGrid& grid, std::span<const double> f) {
    return std::sqrt(inner(grid, f, f));
}

double l2_norm(const RadialGrid& grid, std::span<const cplx> f) {
    check_size(grid, f, "l2_norm");
    const auto w = grid.weights();
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += w[j] * std::norm(f[j]);
    return std::sqrt(acc);
}

double gradient_energy(const RadialGrid& grid, std::span<const double> f) {
    return gradient_energy_impl(grid, f);
}

double gradient_energy(const RadialGrid& grid, std::span<const cplx> f) {
    return gradient_energy_impl(grid, f);
}

std::vector<double> apply_laplacian(const RadialGrid& grid, std::span<const double> f) {
    return laplacian_impl(grid, f);
}

std::vector<cplx> apply_laplacian(const RadialGrid& grid, std::span<const cplx> f) {
    return laplacian_impl(grid, f);
}

}  // namespace qnls
