#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "qnls/radial_grid.hpp"

namespace qnls {

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int dimension, double r_max, std::size_t num_nodes);

/**
 * Complex samples of a radial function on a RadialGrid, together with a lazily
 * applied scaling pair (amp, dilation). The field represents amp * f(x / dilation);
 * materialize() folds the pair into the samples and the grid spacing.
 */
class RadialField {
public:
    /// Single zero sample on a one-node placeholder grid.
    RadialField();
    RadialField(GridPtr grid, std::vector<cplx> samples, double amp = 1.0, double dilation = 1.0);

    static RadialField from_real(GridPtr grid, std::span<const double> values);
    static RadialField from_function(GridPtr grid, const std::function<cplx(double)>& f);
    static RadialField zeros(GridPtr grid);

    /// Grid the raw samples live on (before the pending dilation).
    const RadialGrid& base_grid() const { return *grid_; }
    const GridPtr& base_grid_ptr() const { return grid_; }
    std::span<const cplx> samples() const { return samples_; }
    double amp() const { return amp_; }
    double dilation() const { return dilation_; }
    std::size_t size() const { return samples_.size(); }

    bool materialized() const { return amp_ == 1.0 && dilation_ == 1.0; }
    RadialField materialize() const;

    /// a * delta_l on top of whatever scaling is pending.
    RadialField scaled(double a, double l) const;

    /// Pointwise complex prefactor (folds the pending amplitude).
    RadialField multiplied(cplx factor) const;

    /// Real parts of the materialized samples.
    std::vector<double> real_values() const;
    /// Largest |Im| over the materialized samples.
    double max_imag() const;

private:
    GridPtr grid_;
    std::vector<cplx> samples_;
    double amp_;
    double dilation_;
};

/// State (u, v) of the coupled system.
struct FieldPair {
    RadialField u;
    RadialField v;
};

FieldPair make_field_pair(GridPtr grid, std::vector<cplx> u, std::vector<cplx> v);
FieldPair make_real_pair(GridPtr grid, std::span<const double> u, std::span<const double> v);
FieldPair zero_pair(GridPtr grid);

/// Both components materialized onto one shared grid. Throws when the components
/// do not resolve to the same grid.
FieldPair materialize(const FieldPair& state);

/// Grid of a materialized pair (checks that both components agree).
const RadialGrid& common_grid(const FieldPair& state);

}  // namespace qnls
