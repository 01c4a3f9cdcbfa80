#pragma once

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "yamlab/grid.hpp"
#include "yamlab/numeric.hpp"

namespace yamlab {

constexpr std::uint32_t no_edge = UINT32_MAX;

/// Assembled warped product of factor grids: base factors first, fiber
/// factors last, cells flattened row-major so one fiber slice is
/// contiguous. Cell volumes carry the rho^m warp factor; fiber metric
/// coefficients carry rho^{-2}. All data is immutable after assembly.
struct ProductModel {
    std::vector<AxisGrid> axes;
    std::size_t n_base_axes = 0;
    CatalogEntry fiber;

    int base_dim = 0;
    int fiber_dim = 0;
    int total_dim = 0;
    double fiber_volume = 1.0;

    std::vector<double> rho;  // warp samples, one per base cell

    std::vector<std::size_t> shape;
    std::vector<std::size_t> stride;
    std::vector<double> volume;
    std::vector<double> scalar_curv;
    std::vector<double> base_cell_volume;   // d mu_h, unwarped
    std::vector<double> fiber_cell_volume;  // d mu_g, unwarped

    // per axis, per cell
    std::vector<std::vector<double>> axis_coeff;
    std::vector<std::vector<double>> edge_weight;
    std::vector<std::vector<std::uint32_t>> edge_neighbor;

    std::size_t cell_count() const { return volume.size(); }
    std::size_t base_cells() const { return base_cell_volume.size(); }
    std::size_t fiber_cells() const { return fiber_cell_volume.size(); }
    std::size_t base_of(std::size_t c) const { return c / fiber_cells(); }
    std::size_t fiber_of(std::size_t c) const { return c % fiber_cells(); }

    std::size_t axis_index(std::size_t c, std::size_t a) const {
        return (c / stride[a]) % shape[a];
    }
    double coord(std::size_t c, std::size_t a) const {
        return axes[a].coord[axis_index(c, a)];
    }

    double total_volume() const { return sum(volume); }
    bool has_base() const { return n_base_axes > 0; }
    bool is_surface() const { return total_dim == 2; }
    bool solver_supported() const { return total_dim >= 3; }

    /// Euler characteristic, meaningful for 2-d models only: a circle
    /// factor kills it, otherwise the model is a 2-sphere. Only genuine
    /// circle factors count; the azimuth axis of a full 2-sphere is
    /// periodic without being one.
    int euler_characteristic() const {
        for (std::size_t a = 0; a < n_base_axes; ++a)
            if (axes[a].periodic()) return 0;
        if (fiber.kind == ManifoldKind::Circle) return 0;
        return 2;
    }

    double max_spacing() const {
        double h = 0.0;
        for (const auto& ax : axes) h = std::max(h, ax.spacing);
        return h;
    }
};

/// Stiffness action y = A x: edge-difference form of the Dirichlet
/// energy, so x^T A x equals dirichlet energy exactly.
inline void apply_stiffness(const ProductModel& m, std::span<const double> x,
                            std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t a = 0; a < m.axes.size(); ++a) {
        const double* w = m.edge_weight[a].data();
        const std::uint32_t* nb = m.edge_neighbor[a].data();
        const std::size_t n = m.cell_count();
        for (std::size_t c = 0; c < n; ++c) {
            if (nb[c] == no_edge) continue;
            double d = w[c] * (x[c] - x[nb[c]]);
            y[c] += d;
            y[nb[c]] -= d;
        }
    }
}

/// Divergence-form Laplacian: V^{-1} A, nonnegative, geometer's sign,
/// self-adjoint in the volume-weighted inner product.
inline std::vector<double> laplacian_vec(const ProductModel& m, std::span<const double> x) {
    std::vector<double> y(m.cell_count());
    apply_stiffness(m, x, y);
    for (std::size_t c = 0; c < y.size(); ++c) y[c] /= m.volume[c];
    return y;
}

inline double dirichlet_energy_axes(const ProductModel& m, std::span<const double> x,
                                    std::size_t a_begin, std::size_t a_end) {
    KahanSum e;
    for (std::size_t a = a_begin; a < a_end; ++a) {
        const double* w = m.edge_weight[a].data();
        const std::uint32_t* nb = m.edge_neighbor[a].data();
        const std::size_t n = m.cell_count();
        for (std::size_t c = 0; c < n; ++c) {
            if (nb[c] == no_edge) continue;
            double d = x[c] - x[nb[c]];
            e.add(w[c] * d * d);
        }
    }
    return e.value();
}

inline double integrate(const ProductModel& m, std::span<const double> f) {
    KahanSum s;
    for (std::size_t c = 0; c < m.cell_count(); ++c) s.add(f[c] * m.volume[c]);
    return s.value();
}

/// Pointwise squared gradient: central differences inside, one-sided at
/// non-periodic ends, weighted by the per-cell metric coefficients.
inline std::vector<double> pointwise_grad_sq(const ProductModel& m, std::span<const double> x) {
    std::vector<double> out(m.cell_count(), 0.0);
    for (std::size_t a = 0; a < m.axes.size(); ++a) {
        const auto& sh = m.shape[a];
        const auto& st = m.stride[a];
        const bool wrap = m.axes[a].periodic();
        const double dx = m.axes[a].spacing;
        for (std::size_t c = 0; c < m.cell_count(); ++c) {
            std::size_t i = m.axis_index(c, a);
            bool has_lo = i > 0 || wrap;
            bool has_hi = i + 1 < sh || wrap;
            std::size_t lo = i > 0 ? c - st : c + (sh - 1) * st;
            std::size_t hi = i + 1 < sh ? c + st : c - (sh - 1) * st;
            double slope;
            if (has_lo && has_hi)
                slope = (x[hi] - x[lo]) / (2.0 * dx);
            else if (has_hi)
                slope = (x[hi] - x[c]) / dx;
            else
                slope = (x[c] - x[lo]) / dx;
            out[c] += m.axis_coeff[a][c] * slope * slope;
        }
    }
    return out;
}

/// Scalar curvature of h + rho^2 g over the base:
///   s_h + s_g / rho^2 + (2m/rho) Lap_h rho - m(m-1)/rho^2 |d rho|_h^2,
/// with Lap_h the divergence-form operator of the base grid. The sign
/// convention is pinned by the sin-warp round-sphere oracle.
inline std::vector<double> warped_scalar_curvature(const ProductModel& base_model,
                                                   double fiber_scalar, int fiber_dim,
                                                   std::span<const double> rho) {
    if (base_model.fiber.kind != ManifoldKind::Point)
        throw std::invalid_argument("warped_scalar_curvature: expected a base-only model");
    if (rho.size() != base_model.cell_count())
        throw std::invalid_argument("warped_scalar_curvature: rho size mismatch");
    for (double r : rho)
        if (!(r > 0.0)) throw std::domain_error("warped_scalar_curvature: rho must be positive");

    std::vector<double> out(base_model.scalar_curv.begin(), base_model.scalar_curv.end());
    if (fiber_dim == 0) return out;

    std::vector<double> lap = laplacian_vec(base_model, rho);
    std::vector<double> grad2 = pointwise_grad_sq(base_model, rho);
    const double mm1 = double(fiber_dim) * (fiber_dim - 1);
    for (std::size_t c = 0; c < out.size(); ++c) {
        double r = rho[c];
        out[c] += fiber_scalar / (r * r) + 2.0 * fiber_dim / r * lap[c] - mm1 / (r * r) * grad2[c];
    }
    return out;
}

namespace detail {

inline std::vector<double> per_cell_volumes(const std::vector<AxisGrid>& axes) {
    std::size_t n = 1;
    for (const auto& ax : axes) n *= ax.cells();
    std::vector<double> v(n, 1.0);
    std::size_t stride = n;
    for (const auto& ax : axes) {
        stride /= ax.cells();
        for (std::size_t c = 0; c < n; ++c) v[c] *= ax.cell_volume[(c / stride) % ax.cells()];
    }
    return v;
}

}  // namespace detail

/// Assemble the warped product of base axes with a catalog fiber.
/// `rho` is sampled at base cells (empty means identically 1).
/// Passing no fiber axes for a non-point fiber builds the homogeneous
/// reduction: fields are constant along the fiber, which then enters
/// only through its volume and curvature.
inline ProductModel assemble_product(std::vector<AxisGrid> base_axes,
                                     std::vector<AxisGrid> fiber_axes,
                                     const CatalogEntry& fiber,
                                     std::vector<double> rho = {}) {
    std::size_t expected_fiber_axes = 0;
    switch (fiber.kind) {
        case ManifoldKind::RoundSphere: expected_fiber_axes = 1; break;
        case ManifoldKind::FullSphere2: expected_fiber_axes = 2; break;
        case ManifoldKind::Circle: expected_fiber_axes = 1; break;
        case ManifoldKind::Point: expected_fiber_axes = 0; break;
    }
    if (!fiber_axes.empty() && fiber_axes.size() != expected_fiber_axes)
        throw std::invalid_argument("assemble_product: fiber axis count does not match catalog kind");

    ProductModel m;
    m.n_base_axes = base_axes.size();
    m.fiber = fiber;
    m.fiber_dim = fiber.dim;
    m.fiber_volume = fiber.volume;
    m.base_dim = 0;
    for (const auto& ax : base_axes) m.base_dim += ax.reduced_dim;
    m.total_dim = m.base_dim + m.fiber_dim;

    m.base_cell_volume = detail::per_cell_volumes(base_axes);
    m.fiber_cell_volume = detail::per_cell_volumes(fiber_axes);
    if (fiber_axes.empty() && fiber.kind != ManifoldKind::Point)
        m.fiber_cell_volume = {fiber.volume};  // homogeneous reduction
    const std::size_t nb = m.base_cell_volume.size();
    const std::size_t nf = m.fiber_cell_volume.size();
    const std::size_t n = nb * nf;

    if (rho.empty()) rho.assign(nb, 1.0);
    if (rho.size() != nb)
        throw std::invalid_argument("assemble_product: rho must be sampled at base cells");
    for (double r : rho)
        if (!(r > 0.0)) throw std::domain_error("assemble_product: rho must be positive");
    m.rho = std::move(rho);

    m.axes = std::move(base_axes);
    for (auto& ax : fiber_axes) m.axes.push_back(std::move(ax));
    fiber_axes.clear();

    m.shape.resize(m.axes.size());
    m.stride.resize(m.axes.size());
    for (std::size_t a = 0; a < m.axes.size(); ++a) m.shape[a] = m.axes[a].cells();
    std::size_t st = 1;
    for (std::size_t a = m.axes.size(); a-- > 0;) {
        m.stride[a] = st;
        st *= m.shape[a];
    }

    // warped scalar curvature over the base
    std::vector<double> s_base;
    if (fiber.kind == ManifoldKind::Point) {
        double s_h = 0.0;
        for (std::size_t a = 0; a < m.n_base_axes; ++a) s_h += m.axes[a].scalar_curvature;
        s_base.assign(nb, s_h);
    } else {
        std::vector<AxisGrid> base_copy(m.axes.begin(), m.axes.begin() + m.n_base_axes);
        ProductModel base_only = assemble_product(std::move(base_copy), {}, catalog_point());
        s_base = warped_scalar_curvature(base_only, fiber.scalar, m.fiber_dim, m.rho);
    }

    m.volume.resize(n);
    m.scalar_curv.resize(n);
    for (std::size_t b = 0; b < nb; ++b) {
        double warp = std::pow(m.rho[b], m.fiber_dim);
        for (std::size_t f = 0; f < nf; ++f) {
            m.volume[b * nf + f] = m.base_cell_volume[b] * warp * m.fiber_cell_volume[f];
            m.scalar_curv[b * nf + f] = s_base[b];
        }
    }

    // per-cell metric coefficients
    m.axis_coeff.assign(m.axes.size(), std::vector<double>(n));
    for (std::size_t a = 0; a < m.axes.size(); ++a) {
        const bool is_base = a < m.n_base_axes;
        const bool azimuthal = fiber.kind == ManifoldKind::FullSphere2 && a == m.n_base_axes + 1;
        for (std::size_t c = 0; c < n; ++c) {
            double coeff = m.axes[a].inv_metric[m.axis_index(c, a)];
            if (azimuthal) {
                // phi-coefficient of the 2-sphere depends on the polar angle
                double sin_th = std::sin(m.coord(c, m.n_base_axes));
                coeff = 1.0 / (fiber.size * fiber.size * sin_th * sin_th);
            }
            if (!is_base) {
                double r = m.rho[m.base_of(c)];
                coeff /= r * r;
            }
            m.axis_coeff[a][c] = coeff;
        }
    }

    // edge weights: harmonic mean of the adjacent coefficient-volume
    // products, divided by the squared spacing
    m.edge_weight.assign(m.axes.size(), std::vector<double>(n, 0.0));
    m.edge_neighbor.assign(m.axes.size(), std::vector<std::uint32_t>(n, no_edge));
    for (std::size_t a = 0; a < m.axes.size(); ++a) {
        const double dx2 = m.axes[a].spacing * m.axes[a].spacing;
        const bool wrap = m.axes[a].periodic();
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t i = m.axis_index(c, a);
            std::size_t nbr;
            if (i + 1 < m.shape[a])
                nbr = c + m.stride[a];
            else if (wrap && m.shape[a] > 2)
                nbr = c - (m.shape[a] - 1) * m.stride[a];
            else
                continue;
            double wa = m.axis_coeff[a][c] * m.volume[c];
            double wb = m.axis_coeff[a][nbr] * m.volume[nbr];
            m.edge_weight[a][c] = harmonic_mean(wa, wb) / dx2;
            m.edge_neighbor[a][c] = static_cast<std::uint32_t>(nbr);
        }
    }
    return m;
}

/// (theta, phi) axes of the full round 2-sphere, phi periodic. The
/// phi coefficient depends on theta and is set per cell at assembly.
inline std::vector<AxisGrid> full_sphere2_axes(double r, int n_polar, int n_azimuth) {
    if (r <= 0.0) throw std::domain_error("full_sphere2_axes: need r > 0");
    if (n_polar < 8 || n_azimuth < 8)
        throw std::invalid_argument("full_sphere2_axes: need at least 8 cells per direction");

    AxisGrid polar;
    polar.topology = AxisTopology::PolarInterval;
    polar.reduced_dim = 1;  // one coordinate of a 2-d factor
    polar.spacing = pi / n_polar;
    polar.coord.resize(n_polar);
    polar.cell_volume.resize(n_polar);
    polar.inv_metric.assign(n_polar, 1.0 / (r * r));
    KahanSum raw;
    for (int i = 0; i < n_polar; ++i) {
        polar.coord[i] = (i + 0.5) * polar.spacing;
        polar.cell_volume[i] = r * r * std::sin(polar.coord[i]) * polar.spacing;
        raw.add(polar.cell_volume[i]);
    }
    double scale = 2.0 * r * r / raw.value();
    for (double& v : polar.cell_volume) v *= scale;

    std::vector<AxisGrid> axes;
    axes.push_back(std::move(polar));
    axes.push_back(build_circle(2.0 * pi, n_azimuth));
    return axes;
}

/// Full round 2-sphere as a stand-alone model. Kept around so radial
/// symmetry can be tested instead of assumed.
inline ProductModel build_full_sphere2(double r, int n_polar, int n_azimuth) {
    return assemble_product({}, full_sphere2_axes(r, n_polar, n_azimuth),
                            catalog_full_sphere2(r));
}

/// Convenience: radially reduced sphere as a stand-alone model.
inline ProductModel build_radial_sphere_model(int m_dim, double r, int n) {
    return assemble_product({}, {build_radial_sphere(m_dim, r, n)}, catalog_sphere(m_dim, r));
}

}  // namespace yamlab
