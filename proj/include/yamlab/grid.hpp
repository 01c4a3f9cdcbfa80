#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamlab/numeric.hpp"

namespace yamlab {

enum class AxisTopology { Circle, PolarInterval, Interval };

/// One discretized 1-d factor of a product model.
///
/// Nodes sit at cell centers (no node ever lands on a polar singularity)
/// and cell volumes come from the midpoint rule, rescaled by a single
/// factor so they sum to the represented manifold's volume exactly.
/// `inv_metric` multiplies squared finite differences in the Dirichlet
/// energy; `reduced_dim` is the intrinsic dimension of the manifold this
/// axis stands for (1 for a circle, m for a radially reduced m-sphere).
struct AxisGrid {
    AxisTopology topology = AxisTopology::Interval;
    std::vector<double> coord;
    std::vector<double> cell_volume;
    std::vector<double> inv_metric;
    int reduced_dim = 1;
    double spacing = 0.0;
    double scalar_curvature = 0.0;

    std::size_t cells() const { return coord.size(); }
    bool periodic() const { return topology == AxisTopology::Circle; }
    double total_volume() const { return sum(cell_volume); }
};

enum class ManifoldKind { RoundSphere, FullSphere2, Circle, Point };

/// Closed-form data for the model manifolds a product can be built from.
/// Restricted to shapes whose Ricci lower bound is known in closed form,
/// since the symmetrization inequalities require certifying Ric >= m-1.
struct CatalogEntry {
    ManifoldKind kind = ManifoldKind::Point;
    int dim = 0;
    double size = 0.0;  // radius for spheres, length for circles
    double scalar = 0.0;
    double ricci_lower = 0.0;
    double volume = 1.0;
};

inline CatalogEntry catalog_sphere(int m, double r) {
    if (m < 1 || r <= 0.0) throw std::domain_error("catalog_sphere: need m >= 1, r > 0");
    CatalogEntry e;
    e.kind = ManifoldKind::RoundSphere;
    e.dim = m;
    e.size = r;
    e.scalar = m * (m - 1) / (r * r);
    e.ricci_lower = (m - 1) / (r * r);
    e.volume = std::pow(r, m) * sphere_volume(m);
    return e;
}

inline CatalogEntry catalog_full_sphere2(double r) {
    CatalogEntry e = catalog_sphere(2, r);
    e.kind = ManifoldKind::FullSphere2;
    return e;
}

inline CatalogEntry catalog_circle(double length) {
    if (length <= 0.0) throw std::domain_error("catalog_circle: need length > 0");
    CatalogEntry e;
    e.kind = ManifoldKind::Circle;
    e.dim = 1;
    e.size = length;
    e.scalar = 0.0;
    e.ricci_lower = 0.0;
    e.volume = length;
    return e;
}

inline CatalogEntry catalog_point() { return CatalogEntry{}; }

/// Periodic grid on a circle of the given length; unit metric coefficient.
inline AxisGrid build_circle(double length, int n) {
    if (length <= 0.0) throw std::domain_error("build_circle: need length > 0");
    if (n < 3) throw std::invalid_argument("build_circle: need at least 3 cells");
    AxisGrid g;
    g.topology = AxisTopology::Circle;
    g.reduced_dim = 1;
    g.spacing = length / n;
    g.scalar_curvature = 0.0;
    g.coord.resize(n);
    g.cell_volume.assign(n, g.spacing);
    g.inv_metric.assign(n, 1.0);
    for (int i = 0; i < n; ++i) g.coord[i] = (i + 0.5) * g.spacing;
    return g;
}

/// Flat interval [0, length] with zero-flux closure at both ends.
inline AxisGrid build_interval(double length, int n) {
    if (length <= 0.0) throw std::domain_error("build_interval: need length > 0");
    if (n < 3) throw std::invalid_argument("build_interval: need at least 3 cells");
    AxisGrid g;
    g.topology = AxisTopology::Interval;
    g.reduced_dim = 1;
    g.spacing = length / n;
    g.scalar_curvature = 0.0;
    g.coord.resize(n);
    g.cell_volume.assign(n, g.spacing);
    g.inv_metric.assign(n, 1.0);
    for (int i = 0; i < n; ++i) g.coord[i] = (i + 0.5) * g.spacing;
    return g;
}

/// Radial reduction of the round m-sphere of radius r: a polar grid over
/// theta in [0, pi] with cell volume ~ r^m sin^{m-1}(theta), rescaled so
/// the total equals r^m V_m exactly. Squared theta-differences scale to
/// the intrinsic gradient through the 1/r^2 coefficient.
inline AxisGrid build_radial_sphere(int m, double r, int n) {
    if (m < 2 || r <= 0.0) throw std::domain_error("build_radial_sphere: need m >= 2, r > 0");
    if (n < 8) throw std::invalid_argument("build_radial_sphere: need at least 8 cells");
    AxisGrid g;
    g.topology = AxisTopology::PolarInterval;
    g.reduced_dim = m;
    g.spacing = pi / n;
    g.scalar_curvature = m * (m - 1) / (r * r);
    g.coord.resize(n);
    g.cell_volume.resize(n);
    g.inv_metric.assign(n, 1.0 / (r * r));
    double band = sphere_volume(m - 1) * std::pow(r, m) * g.spacing;
    KahanSum raw;
    for (int i = 0; i < n; ++i) {
        g.coord[i] = (i + 0.5) * g.spacing;
        g.cell_volume[i] = band * std::pow(std::sin(g.coord[i]), m - 1);
        raw.add(g.cell_volume[i]);
    }
    double scale = std::pow(r, m) * sphere_volume(m) / raw.value();
    for (double& v : g.cell_volume) v *= scale;
    return g;
}

}  // namespace yamlab
