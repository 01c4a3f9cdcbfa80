#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "yamlab/fields.hpp"
#include "yamlab/model.hpp"

namespace yamlab {

/// Round m-sphere of prescribed volume V, reduced to its polar angle
/// (measured from the south pole), together with the cumulative
/// geodesic-ball volume table at cell edges.
struct RearrangementTarget {
    int m = 0;
    double volume = 0.0;  // V
    double radius = 1.0;  // R = (V/V_m)^{1/m}
    AxisGrid grid;        // polar interval, angle in [0, pi]
    std::vector<double> ball_volume;  // size cells+1, 0 .. V

    std::size_t cells() const { return grid.cells(); }

    /// Arc length (from the south pole) of the ball holding volume v.
    double radius_for_volume(double v) const {
        const double V = volume;
        double x = std::clamp(v, 0.0, V);
        auto it = std::upper_bound(ball_volume.begin(), ball_volume.end(), x);
        std::size_t i = it == ball_volume.end() ? ball_volume.size() - 1
                                                : std::size_t(it - ball_volume.begin());
        if (i == 0) return 0.0;
        double lo = ball_volume[i - 1], hi = ball_volume[i];
        double frac = hi > lo ? (x - lo) / (hi - lo) : 0.0;
        return radius * grid.spacing * (double(i - 1) + frac);
    }

    /// Ball volume at arc length s, interpolated from the edge table.
    double ball_volume_at_arc(double s) const {
        double theta = std::clamp(s / radius, 0.0, pi);
        double u = theta / grid.spacing;
        std::size_t i = std::min(std::size_t(u), cells() - 1);
        double frac = u - double(i);
        return ball_volume[i] + frac * (ball_volume[i + 1] - ball_volume[i]);
    }
};

inline RearrangementTarget build_target(int m, double V, int n_cells) {
    if (!(V > 0.0)) throw std::domain_error("build_target: need V > 0");
    RearrangementTarget t;
    t.m = m;
    t.volume = V;
    t.radius = std::pow(V / sphere_volume(m), 1.0 / m);
    t.grid = build_radial_sphere(m, t.radius, n_cells);
    // snap cell volumes so they total V itself, then build the edge table
    double raw = sum(t.grid.cell_volume);
    for (double& v : t.grid.cell_volume) v *= V / raw;
    t.ball_volume.resize(t.grid.cells() + 1);
    KahanSum run;
    t.ball_volume[0] = 0.0;
    for (std::size_t i = 0; i < t.grid.cells(); ++i) {
        run.add(t.grid.cell_volume[i]);
        t.ball_volume[i + 1] = run.value();
    }
    t.ball_volume.back() = V;
    return t;
}

/// Exact rearrangement of weighted samples: cells sorted ascending by
/// value (ties by original index), weights carried along unscaled.
/// This step function on [0, total] is the rearranged restriction; it
/// shares every L^p integral, min and max with the input exactly.
struct RearrangedProfile {
    std::vector<double> value;   // ascending
    std::vector<double> weight;  // matching volumes
    std::vector<double> edge;    // cumulative weights, size n+1
    double total() const { return edge.back(); }
};

inline RearrangedProfile rearrangement_profile(std::span<const double> values,
                                               std::span<const double> volumes) {
    if (values.size() != volumes.size() || values.empty())
        throw std::invalid_argument("rearrangement_profile: bad sizes");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    RearrangedProfile p;
    p.value.resize(values.size());
    p.weight.resize(values.size());
    p.edge.resize(values.size() + 1);
    p.edge[0] = 0.0;
    KahanSum run;
    for (std::size_t k = 0; k < order.size(); ++k) {
        p.value[k] = values[order[k]];
        p.weight[k] = volumes[order[k]];
        run.add(p.weight[k]);
        p.edge[k + 1] = run.value();
    }
    return p;
}

/// Conservative projection of the profile onto the target's radial
/// cells: each cell gets the volume-weighted average of the profile
/// over its ball-volume interval. The source edges are rescaled
/// affinely so both totals agree exactly; the output is non-decreasing
/// in the polar angle and never leaves [min, max] of the input.
inline std::vector<double> resample_profile(const RearrangedProfile& p,
                                            const RearrangementTarget& t) {
    const double scale = t.volume / p.total();
    std::vector<double> out(t.cells(), 0.0);
    std::size_t k = 0;
    for (std::size_t j = 0; j < t.cells(); ++j) {
        const double lo = t.ball_volume[j], hi = t.ball_volume[j + 1];
        double acc = 0.0, wsum = 0.0;
        double first_val = 0.0, last_val = 0.0;
        bool any = false;
        while (k < p.value.size()) {
            double a = p.edge[k] * scale, b = p.edge[k + 1] * scale;
            if (k + 1 == p.value.size()) b = t.volume;  // snap the last edge
            double w = std::min(b, hi) - std::max(a, lo);
            if (w > 0.0) {
                if (!any) first_val = p.value[k];
                last_val = p.value[k];
                any = true;
                acc += p.value[k] * w;
                wsum += w;
            }
            if (b >= hi) break;
            ++k;
        }
        if (!any)
            out[j] = j > 0 ? out[j - 1] : p.value.front();
        else if (first_val == last_val)
            out[j] = first_val;  // single-valued window: skip the division, keep it exact
        else
            out[j] = acc / wsum;
        // The averages of an ascending profile are non-decreasing; restore
        // that exactly where division rounding nicks the last ulp.
        if (j > 0 && out[j] < out[j - 1]) out[j] = out[j - 1];
    }
    return out;
}

/// Spherical rearrangement of one fiber restriction onto the target.
inline std::vector<double> rearrange_fiber(std::span<const double> values,
                                           std::span<const double> volumes,
                                           const RearrangementTarget& t,
                                           double volume_rel_tol = 1e-8) {
    RearrangedProfile p = rearrangement_profile(values, volumes);
    if (std::fabs(p.total() - t.volume) > volume_rel_tol * t.volume)
        throw std::domain_error("rearrange_fiber: cell volumes do not sum to the target volume");
    return resample_profile(p, t);
}

namespace detail {

inline std::vector<AxisGrid> base_axes_of(const ProductModel& m) {
    return {m.axes.begin(), m.axes.begin() + m.n_base_axes};
}
inline std::vector<AxisGrid> fiber_axes_of(const ProductModel& m) {
    return {m.axes.begin() + m.n_base_axes, m.axes.end()};
}

inline CatalogEntry target_fiber_entry(const RearrangementTarget& t) {
    CatalogEntry e = catalog_sphere(t.m, t.radius);
    e.volume = t.volume;
    return e;
}

}  // namespace detail

/// The comparison product: base rescaled to h_V = (V/V_m)^{2/m} h (cell
/// volumes pick up (V/V_m)^{dim/m}, inverse metric and curvature pick up
/// the reciprocal square factor; coordinates stay put), fiber replaced
/// by the volume-matched round sphere, warp carried over unchanged.
struct SymmetrizedModel {
    RearrangementTarget target;
    ProductModel model;
    double volume_ratio = 1.0;  // V / V_m
};

inline SymmetrizedModel symmetrize_model(const ProductModel& src, int n_target_cells) {
    if (src.fiber.kind != ManifoldKind::RoundSphere && src.fiber.kind != ManifoldKind::FullSphere2)
        throw std::invalid_argument("symmetrize_model: fiber must be a round sphere");
    SymmetrizedModel s;
    s.target = build_target(src.fiber_dim, src.fiber.volume, n_target_cells);
    s.volume_ratio = s.target.volume / sphere_volume(src.fiber_dim);

    std::vector<AxisGrid> base = detail::base_axes_of(src);
    for (auto& ax : base) {
        double vol_factor = std::pow(s.volume_ratio, double(ax.reduced_dim) / src.fiber_dim);
        double inv_factor = std::pow(s.volume_ratio, -2.0 / src.fiber_dim);
        for (double& v : ax.cell_volume) v *= vol_factor;
        for (double& c : ax.inv_metric) c *= inv_factor;
        ax.scalar_curvature *= inv_factor;
    }
    s.model = assemble_product(std::move(base), {s.target.grid},
                               detail::target_fiber_entry(s.target), src.rho);
    return s;
}

/// Slice-by-slice rearrangement over every base cell.
inline ScalarField fiberwise_rearrange(const ProductModel& src, std::span<const double> F,
                                       const RearrangementTarget& t) {
    if (F.size() != src.cell_count())
        throw std::invalid_argument("fiberwise_rearrange: size mismatch");
    const std::size_t nb = src.base_cells(), nf = src.fiber_cells(), nt = t.cells();
    ScalarField out(nb * nt);
    for (std::size_t b = 0; b < nb; ++b) {
        auto slice = F.subspan(b * nf, nf);
        std::vector<double> r = rearrange_fiber(slice, src.fiber_cell_volume, t);
        std::copy(r.begin(), r.end(), out.begin() + b * nt);
    }
    return out;
}

inline ScalarField fiberwise_rearrange(const ProductModel& src, std::span<const double> F,
                                       const SymmetrizedModel& s) {
    return fiberwise_rearrange(src, F, s.target);
}

/// The two unwarped, unscaled models the gradient inequalities compare:
/// N x M and N x S^m_V, both with the plain base metric and rho = 1.
struct PlainPair {
    ProductModel source;
    ProductModel target;
};

inline PlainPair make_plain_pair(const ProductModel& src, const SymmetrizedModel& s) {
    PlainPair p;
    p.source = assemble_product(detail::base_axes_of(src), detail::fiber_axes_of(src), src.fiber);
    p.target = assemble_product(detail::base_axes_of(src), {s.target.grid},
                                detail::target_fiber_entry(s.target));
    return p;
}

struct PolyaSzegoMargins {
    double fiber = 0.0;  // fiber-direction energy drop, expected >= -eps(h)
    double base = 0.0;   // base-direction energy drop, expected >= 0 discretely
};

inline void require_ricci_hypothesis(const ProductModel& src) {
    double need = double(src.fiber_dim - 1);
    if (src.fiber.ricci_lower < need - 1e-12)
        throw std::domain_error("check_polya_szego: fiber Ricci lower bound below m-1");
}

/// Gradient-energy comparison between F on N x M and its fiberwise
/// rearrangement on N x S^m_V, split by direction. Fiber part carries
/// the (V/V_m)^{2/m} factor; base part is a straight comparison.
inline PolyaSzegoMargins check_polya_szego(const PlainPair& pair, std::span<const double> F,
                                           std::span<const double> Fstar, double volume_ratio) {
    require_ricci_hypothesis(pair.source);
    DirichletSplit orig = dirichlet_split(pair.source, F);
    DirichletSplit rear = dirichlet_split(pair.target, Fstar);
    PolyaSzegoMargins m;
    m.fiber = orig.fiber - std::pow(volume_ratio, 2.0 / pair.source.fiber_dim) * rear.fiber;
    m.base = orig.base - rear.base;
    return m;
}

inline PolyaSzegoMargins check_polya_szego(const ProductModel& src, std::span<const double> F,
                                           const SymmetrizedModel& s) {
    ScalarField Fstar = fiberwise_rearrange(src, F, s.target);
    return check_polya_szego(make_plain_pair(src, s), F, Fstar, s.volume_ratio);
}

struct QuotientBound {
    double lhs = 0.0;     // quotient on the original model
    double rhs = 0.0;     // (V/V_m)^{2/(m+n)} times quotient on the comparison model
    double margin = 0.0;  // lhs - rhs, expected >= -eps(h)
};

/// The per-field inequality the whole construction exists for:
/// Y(F) on N x_rho M dominates the scaled quotient of F_* on the
/// symmetrized product.
inline QuotientBound symmetrized_quotient_bound(const ProductModel& src,
                                                std::span<const double> F,
                                                const SymmetrizedModel& s) {
    require_ricci_hypothesis(src);
    QuotientBound b;
    b.lhs = yamabe_quotient(src, F);
    ScalarField Fstar = fiberwise_rearrange(src, F, s.target);
    b.rhs = std::pow(s.volume_ratio, 2.0 / src.total_dim) * yamabe_quotient(s.model, Fstar);
    b.margin = b.lhs - b.rhs;
    return b;
}

namespace detail {

/// Cyclic shift along base axis 0 by k cells (field laid out with that
/// axis slowest): out[(i0+k) mod n0, ...] = f[i0, ...].
inline ScalarField shift_axis0(std::span<const double> f, std::size_t n0, std::size_t k) {
    if (f.size() % n0 != 0) throw std::invalid_argument("shift_axis0: size mismatch");
    const std::size_t block = f.size() / n0;
    ScalarField out(f.size());
    for (std::size_t i = 0; i < n0; ++i) {
        std::size_t j = (i + k) % n0;
        std::copy(f.begin() + i * block, f.begin() + (i + 1) * block, out.begin() + j * block);
    }
    return out;
}

}  // namespace detail

/// Rotation equivariance along a circular base axis: rearranging the
/// shifted field must equal shifting the rearranged field, cell for
/// cell. The same slices are sorted either way, so the residual is
/// exactly zero.
inline double check_equivariance(const ProductModel& src, std::span<const double> F,
                                 std::size_t shift_cells, const RearrangementTarget& t) {
    if (src.n_base_axes == 0 || !src.axes[0].periodic())
        throw std::invalid_argument("check_equivariance: base axis 0 must be a circle");
    const std::size_t n0 = src.shape[0];
    ScalarField lhs = fiberwise_rearrange(src, detail::shift_axis0(F, n0, shift_cells), t);
    ScalarField rhs = detail::shift_axis0(fiberwise_rearrange(src, F, t), n0, shift_cells);
    double r = 0.0;
    for (std::size_t c = 0; c < lhs.size(); ++c)
        r = std::max(r, std::fabs(lhs[c] - rhs[c]));
    return r;
}

/// Declared discretization allowance for the inequality margins: first
/// order in the coarsest spacing, scaled by the size of the quantities
/// compared. The constant is pinned; refinement tests confirm order.
inline double discretization_tolerance(double max_spacing, double scale = 1.0) {
    return 0.05 * max_spacing * std::max(scale, 1e-12);
}

inline double discretization_tolerance(const ProductModel& m, double scale = 1.0) {
    return discretization_tolerance(m.max_spacing(), scale);
}

}  // namespace yamlab
