#pragma once

#include <vector>

#include "qnls/radial_grid.hpp"

namespace qnls {

/// Radial cutoff chi with chi(r) = r^2 on [0, 1], chi = 0 on [3, inf) and chi'' <= 2.
///
/// On 1 < r < 3 the second derivative is a chain of quintic smoothsteps through
/// the levels 2, -D, -D, G, G, 0 (knots at s = r - 1 = 0, 0.4, 0.45, 0.9, 1.9, 2).
/// D and G are fixed by chi'(3) = chi(3) = 0. chi'' is C^2, so chi is C^4 and the
/// bilaplacian is continuous.
class CutoffBridge {
public:
    static const CutoffBridge& instance();

    /// Derivatives chi^{(k)}(r), k = 0..4.
    double derivative(int k, double r) const;
    double value(double r) const { return derivative(0, r); }

    double max_second_derivative() const { return max_chi2_; }
    double depth() const { return D_; }
    double plateau() const { return G_; }

private:
    CutoffBridge();
    double D_ = 0.0;
    double G_ = 0.0;
    double max_chi2_ = 0.0;
};

/// chi_R(r) = R^2 chi(r / R) sampled on a grid, with the radial Laplacian and
/// bilaplacian evaluated analytically at the nodes and chi_R'' at the faces.
class CutoffProfile {
public:
    CutoffProfile(double R, const RadialGrid& grid);

    double R() const { return R_; }
    const std::vector<double>& chi() const { return chi_; }
    const std::vector<double>& chi2_faces() const { return chi2_faces_; }
    const std::vector<double>& chi2_nodes() const { return chi2_nodes_; }
    const std::vector<double>& laplacian() const { return lap_; }
    const std::vector<double>& bilaplacian() const { return bilap_; }

    /// The grid the samples belong to (dimension, spacing, node count).
    bool matches(const RadialGrid& grid) const { return grid_.same_as(grid); }

    static double chi_R(double R, double r) { return R * R * CutoffBridge::instance().value(r / R); }

private:
    double R_;
    RadialGrid grid_;
    std::vector<double> chi_, chi2_faces_, chi2_nodes_, lap_, bilap_;
};

}  // namespace qnls
