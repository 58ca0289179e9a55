#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qnls {

using cplx = std::complex<double>;

inline constexpr int kMaxDimension = 5;

/// Surface measure of the unit sphere S^{n-1} in R^n, 2 pi^{n/2} / Gamma(n/2).
/// For n = 1 this is 2: integrals of even functions over the whole line.
double unit_sphere_measure(int dimension);

/// Volume of the n-ball of the given radius.
double ball_volume(int dimension, double radius);

/**
 * Cell-centred uniform discretisation of [0, r_max] for radial functions on R^n.
 *
 * Node j sits at r_j = (j + 1/2) h and carries the midpoint weight
 * w_j = |S^{n-1}| r_j^{n-1} h. Faces sit at r_{j+1/2} = (j + 1) h; the face
 * coefficient c_{j+1/2} = |S^{n-1}| r_{j+1/2}^{n-1} / h is what the flux-form
 * Laplacian and the gradient quadrature use. The last face couples node N-1 to
 * a homogeneous Dirichlet ghost value.
 *
 * Every quantity is a homogeneous function of h (weights ~ h^n, face
 * coefficients ~ h^{n-2}), so dilating the grid rescales integrals exactly.
 */
class RadialGrid {
public:
    RadialGrid(int dimension, double r_max, std::size_t num_nodes);

    static RadialGrid with_spacing(int dimension, double h, std::size_t num_nodes);

    int dimension() const { return dimension_; }
    double r_max() const { return h_ * static_cast<double>(nodes_.size()); }
    double spacing() const { return h_; }
    std::size_t size() const { return nodes_.size(); }

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }
    std::span<const double> face_radii() const { return face_radii_; }
    std::span<const double> face_coefficients() const { return face_coeff_; }

    /// Grid representing x -> x / l, i.e. spacing l*h with the same node count.
    RadialGrid dilated(double l) const;

    /// Same dimension, node count and spacing (bitwise).
    bool same_as(const RadialGrid& other) const;

private:
    struct SpacingTag {};
    RadialGrid(SpacingTag, int dimension, double h, std::size_t num_nodes);
    void build();

    int dimension_;
    double h_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> face_radii_;
    std::vector<double> face_coeff_;
};

/// Sum_j w_j f_j. Rejects non-finite samples.
double integrate(const RadialGrid& grid, std::span<const double> values);
cplx integrate(const RadialGrid& grid, std::span<const cplx> values);

/// Weighted inner product <f, g> = Sum_j w_j f_j conj(g_j).
double inner(const RadialGrid& grid, std::span<const double> f, std::span<const double> g);
cplx inner(const RadialGrid& grid, std::span<const cplx> f, std::span<const cplx> g);

/// Weighted L2 norm.
double l2_norm(const RadialGrid& grid, std::span<const double> f);
double l2_norm(const RadialGrid& grid, std::span<const cplx> f);

/// Face-based quadrature of |grad f|^2, including the Dirichlet wall face.
double gradient_energy(const RadialGrid& grid, std::span<const double> f);
double gradient_energy(const RadialGrid& grid, std::span<const cplx> f);

/// Flux-form radial Laplacian, self-adjoint for the weighted inner product.
/// Zero flux through r = 0, homogeneous Dirichlet value beyond r_max.
/// Requires at least 3 nodes.
std::vector<double> apply_laplacian(const RadialGrid& grid, std::span<const double> f);
std::vector<cplx> apply_laplacian(const RadialGrid& grid, std::span<const cplx> f);

}  // namespace qnls
