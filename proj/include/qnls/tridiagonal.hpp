#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qnls/radial_grid.hpp"

namespace qnls {

/// LU factors of a tridiagonal matrix (Thomas algorithm, no pivoting).
/// Meant for the diagonally dominant systems built from the radial stiffness matrix.
template <class T>
class Tridiagonal {
public:
    Tridiagonal() = default;

    /// lower[j] couples rows j+1 and j, upper[j] couples rows j and j+1 (both size n-1).
    Tridiagonal(std::vector<T> lower, std::vector<T> diag, std::vector<T> upper)
        : lower_(std::move(lower)), upper_(std::move(upper)), pivot_(std::move(diag)) {
        const std::size_t n = pivot_.size();
        if (n == 0 || lower_.size() + 1 != n || upper_.size() + 1 != n) {
            throw std::invalid_argument("Tridiagonal: inconsistent band sizes");
        }
        mult_.assign(n > 0 ? n - 1 : 0, T{});
        for (std::size_t j = 1; j < n; ++j) {
            if (pivot_[j - 1] == T{}) throw std::domain_error("Tridiagonal: zero pivot");
            mult_[j - 1] = lower_[j - 1] / pivot_[j - 1];
            pivot_[j] -= mult_[j - 1] * upper_[j - 1];
        }
        if (pivot_[n - 1] == T{}) throw std::domain_error("Tridiagonal: zero pivot");
    }

    std::size_t size() const { return pivot_.size(); }

    std::vector<T> solve(std::span<const T> rhs) const {
        std::vector<T> x(rhs.begin(), rhs.end());
        solve_in_place(x);
        return x;
    }

    void solve_in_place(std::vector<T>& x) const {
        const std::size_t n = pivot_.size();
        if (x.size() != n) throw std::invalid_argument("Tridiagonal: rhs size mismatch");
        for (std::size_t j = 1; j < n; ++j) x[j] -= mult_[j - 1] * x[j - 1];
        x[n - 1] /= pivot_[n - 1];
        for (std::size_t j = n - 1; j-- > 0;) x[j] = (x[j] - upper_[j] * x[j + 1]) / pivot_[j];
    }

private:
    std::vector<T> lower_;
    std::vector<T> upper_;
    std::vector<T> pivot_;
    std::vector<T> mult_;
};

/// alpha * S + beta * W, where S is the stiffness matrix of the face-based gradient
/// energy (sum_j c_j |f_{j+1} - f_j|^2 = f^T S f) and W = diag(weights).
template <class T>
Tridiagonal<T> stiffness_plus_mass(const RadialGrid& grid, T alpha, T beta) {
    const auto c = grid.face_coefficients();
    const auto w = grid.weights();
    const std::size_t n = grid.size();
    std::vector<T> diag(n), off(n > 0 ? n - 1 : 0);
    for (std::size_t j = 0; j < n; ++j) {
        const double left = j > 0 ? c[j - 1] : 0.0;
        diag[j] = alpha * (c[j] + left) + beta * w[j];
        if (j + 1 < n) off[j] = -alpha * c[j];
    }
    return Tridiagonal<T>(off, std::move(diag), off);
}

}  // namespace qnls
