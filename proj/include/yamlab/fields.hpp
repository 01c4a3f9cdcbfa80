#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "yamlab/model.hpp"
#include "yamlab/numeric.hpp"

namespace yamlab {

using ScalarField = std::vector<double>;

inline ScalarField constant_field(const ProductModel& m, double value = 1.0) {
    return ScalarField(m.cell_count(), value);
}

/// Volume-weighted L^p norm, p >= 1.
inline double lp_norm(const ProductModel& m, std::span<const double> f, double p) {
    if (!(p >= 1.0)) throw std::domain_error("lp_norm: need p >= 1");
    if (f.size() != m.cell_count()) throw std::invalid_argument("lp_norm: size mismatch");
    KahanSum s;
    for (std::size_t c = 0; c < f.size(); ++c)
        s.add(std::pow(std::fabs(f[c]), p) * m.volume[c]);
    return std::pow(s.value(), 1.0 / p);
}

inline double integral(const ProductModel& m, std::span<const double> f) {
    return integrate(m, f);
}

/// Dirichlet energy split into base-direction and fiber-direction parts.
/// A model with no base factors reports everything in the fiber part.
struct DirichletSplit {
    double base = 0.0;
    double fiber = 0.0;
    double total() const { return base + fiber; }
};

inline DirichletSplit dirichlet_split(const ProductModel& m, std::span<const double> f) {
    if (f.size() != m.cell_count()) throw std::invalid_argument("dirichlet_split: size mismatch");
    DirichletSplit out;
    out.base = dirichlet_energy_axes(m, f, 0, m.n_base_axes);
    out.fiber = dirichlet_energy_axes(m, f, m.n_base_axes, m.axes.size());
    return out;
}

inline double dirichlet_energy(const ProductModel& m, std::span<const double> f) {
    return dirichlet_energy_axes(m, f, 0, m.axes.size());
}

/// L = V^{-1} A applied to a field (nonnegative spectrum).
inline ScalarField laplacian_apply(const ProductModel& m, std::span<const double> f) {
    if (f.size() != m.cell_count())
        throw std::invalid_argument("laplacian_apply: size mismatch");
    return laplacian_vec(m, f);
}

/// Numerator of the quotient: a_d * |df|^2 + s * f^2 integrated.
inline double yamabe_numerator(const ProductModel& m, std::span<const double> f) {
    YamabeConstants k = YamabeConstants::for_dimension(m.total_dim);
    KahanSum s;
    for (std::size_t c = 0; c < f.size(); ++c)
        s.add(m.scalar_curv[c] * f[c] * f[c] * m.volume[c]);
    return k.a * dirichlet_energy(m, f) + s.value();
}

/// The quotient itself. Throws for surfaces (the exponent degenerates)
/// and for fields with vanishing L^p norm.
inline double yamabe_quotient(const ProductModel& m, std::span<const double> f) {
    if (m.total_dim < 3)
        throw std::domain_error("yamabe_quotient: needs dimension >= 3");
    if (f.size() != m.cell_count())
        throw std::invalid_argument("yamabe_quotient: size mismatch");
    YamabeConstants k = YamabeConstants::for_dimension(m.total_dim);
    double denom = lp_norm(m, f, k.p);
    if (!(denom > 0.0)) throw std::domain_error("yamabe_quotient: field has zero norm");
    return yamabe_numerator(m, f) / (denom * denom);
}

/// Quotient of the constant field: s-average times V^{2/d} when the
/// curvature is constant; computed honestly for the general case.
inline double constant_field_quotient(const ProductModel& m) {
    return yamabe_quotient(m, constant_field(m));
}

/// Conformally invariant answer in two dimensions: 4 pi chi.
inline double gauss_bonnet_constant(const ProductModel& m) {
    if (m.total_dim != 2)
        throw std::domain_error("gauss_bonnet_constant: model is not a surface");
    return 4.0 * pi * m.euler_characteristic();
}

}  // namespace yamlab
