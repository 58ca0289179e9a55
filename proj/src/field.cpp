#include "qnls/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qnls {

GridPtr make_grid(int dimension, double r_max, std::size_t num_nodes) {
    return std::make_shared<const RadialGrid>(dimension, r_max, num_nodes);
}

RadialField::RadialField() : RadialField(make_grid(1, 1.0, 1), std::vector<cplx>(1)) {}

RadialField::RadialField(GridPtr grid, std::vector<cplx> samples, double amp, double dilation)
    : grid_(std::move(grid)), samples_(std::move(samples)), amp_(amp), dilation_(dilation) {
    if (!grid_) {
        throw std::invalid_argument("RadialField: null grid");
    }
    if (samples_.size() != grid_->size()) {
        throw std::invalid_argument("RadialField: sample count does not match grid size");
    }
    if (amp_ == 0.0 || !std::isfinite(amp_)) {
        throw std::invalid_argument("RadialField: amplitude must be finite and nonzero");
    }
    if (!(dilation_ > 0.0) || !std::isfinite(dilation_)) {
        throw std::invalid_argument("RadialField: dilation must be positive and finite");
    }
}

RadialField RadialField::from_real(GridPtr grid, std::span<const double> values) {
    std::vector<cplx> s(values.begin(), values.end());
    return RadialField(std::move(grid), std::move(s));
}

RadialField RadialField::from_function(GridPtr grid, const std::function<cplx(double)>& f) {
    std::vector<cplx> s;
    s.reserve(grid->size());
    for (double r : grid->nodes()) s.push_back(f(r));
    return RadialField(std::move(grid), std::move(s));
}

RadialField RadialField::zeros(GridPtr grid) {
    std::vector<cplx> s(grid->size());
    return RadialField(std::move(grid), std::move(s));
}

RadialField RadialField::materialize() const {
    if (materialized()) return *this;
    std::vector<cplx> s(samples_);
    if (amp_ != 1.0) {
        for (auto& z : s) z *= amp_;
    }
    GridPtr g = grid_;
    if (dilation_ != 1.0) {
        g = std::make_shared<const RadialGrid>(grid_->dilated(dilation_));
    }
    return RadialField(std::move(g), std::move(s));
}

RadialField RadialField::scaled(double a, double l) const {
    if (!(l > 0.0)) {
        throw std::invalid_argument("scale: dilation l must be positive");
    }
    if (a == 0.0) {
        throw std::invalid_argument("scale: amplitude a must be nonzero");
    }
    return RadialField(grid_, samples_, amp_ * a, dilation_ * l);
}

RadialField RadialField::multiplied(cplx factor) const {
    std::vector<cplx> s(samples_);
    for (auto& z : s) z *= amp_ * factor;
    return RadialField(grid_, std::move(s), 1.0, dilation_);
}

std::vector<double> RadialField::real_values() const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& z : samples_) out.push_back(amp_ * z.real());
    return out;
}

double RadialField::max_imag() const {
    double m = 0.0;
    for (const auto& z : samples_) m = std::max(m, std::abs(amp_ * z.imag()));
    return m;
}

FieldPair make_field_pair(GridPtr grid, std::vector<cplx> u, std::vector<cplx> v) {
    return FieldPair{RadialField(grid, std::move(u)), RadialField(grid, std::move(v))};
}

FieldPair make_real_pair(GridPtr grid, std::span<const double> u, std::span<const double> v) {
    return FieldPair{RadialField::from_real(grid, u), RadialField::from_real(grid, v)};
}

FieldPair zero_pair(GridPtr grid) {
    return FieldPair{RadialField::zeros(grid), RadialField::zeros(grid)};
}

FieldPair materialize(const FieldPair& state) {
    FieldPair out{state.u.materialize(), state.v.materialize()};
    if (!out.u.base_grid().same_as(out.v.base_grid())) {
        throw std::invalid_argument("field pair components live on different grids");
    }
    // Share one grid object between the components.
    if (out.u.base_grid_ptr() != out.v.base_grid_ptr()) {
        out.v = RadialField(out.u.base_grid_ptr(),
                            std::vector<cplx>(out.v.samples().begin(), out.v.samples().end()));
    }
    return out;
}

const RadialGrid& common_grid(const FieldPair& state) {
    if (!state.u.materialized() || !state.v.materialized()) {
        throw std::invalid_argument("common_grid: state is not materialized");
    }
    if (!state.u.base_grid().same_as(state.v.base_grid())) {
        throw std::invalid_argument("field pair components live on different grids");
    }
    return state.u.base_grid();
}

}  // namespace qnls
