#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "yamlab.hpp"
#include "oracles.hpp"

using namespace yamlab;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo, double hi) {
    std::vector<double> v(n);
    std::uint64_t st = seed;
    for (double& x : v) x = lo + (hi - lo) * 0.5 * (unit_uniform(st) + 1.0);
    return v;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::fabs(a[i] - b[i]));
    return r;
}

}  // namespace

TEST_CASE("rearrangement target tables") {
    const double V = 2.0 * pi * pi;  // unit 3-sphere
    auto t = build_target(3, V, 64);
    REQUIRE(t.cells() == 64);
    REQUIRE(relative_diff(t.radius, 1.0) < 1e-14);
    REQUIRE(t.ball_volume.front() == 0.0);
    REQUIRE(t.ball_volume.back() == V);
    for (std::size_t i = 0; i + 1 < t.ball_volume.size(); ++i)
        REQUIRE(t.ball_volume[i] < t.ball_volume[i + 1]);

    // endpoints and the half-volume point of the inverse table
    REQUIRE(t.radius_for_volume(0.0) == 0.0);
    REQUIRE(relative_diff(t.radius_for_volume(V), pi) < 1e-12);
    REQUIRE(relative_diff(t.radius_for_volume(0.5 * V), 0.5 * pi) < 1e-12);

    // the two interpolants invert each other
    std::uint64_t st = 99;
    for (int i = 0; i < 200; ++i) {
        double v = 0.5 * (unit_uniform(st) + 1.0) * V;
        REQUIRE(std::fabs(t.ball_volume_at_arc(t.radius_for_volume(v)) - v) < 1e-12 * V);
    }

    REQUIRE_THROWS_AS(build_target(3, -1.0, 32), std::domain_error);
}

TEST_CASE("geodesic ball volumes on a 2-sphere match the closed form") {
    const double R = 1.3;
    const double V = 4.0 * pi * R * R;
    auto t = build_target(2, V, 48);
    REQUIRE(relative_diff(t.radius, R) < 1e-14);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.ball_volume.size(); ++i) {
        double theta = i * t.grid.spacing;
        double ref = 2.0 * pi * R * R * (1.0 - std::cos(theta));
        worst = std::max(worst, std::fabs(t.ball_volume[i] - ref));
    }
    REQUIRE(worst / V < 1e-12);  // telescoping makes the table essentially exact
}

TEST_CASE("geodesic ball volumes on a 3-sphere converge to the closed form") {
    const double V = 2.0 * pi * pi;
    auto worst_rel = [&](int n) {
        auto t = build_target(3, V, n);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.ball_volume.size(); ++i) {
            double theta = i * t.grid.spacing;
            double ref = 4.0 * pi * (0.5 * theta - 0.25 * std::sin(2.0 * theta));
            worst = std::max(worst, std::fabs(t.ball_volume[i] - ref));
        }
        return worst / V;
    };
    double e32 = worst_rel(32), e64 = worst_rel(64);
    REQUIRE(e32 < 1e-2);
    REQUIRE(oracle::observed_order(e32, e64) >= 1.8);
}

TEST_CASE("rearranged profiles are equimeasurable with the input") {
    auto vals = random_vector(200, 7, -2.0, 3.0);
    auto vols = random_vector(200, 11, 0.2, 1.0);
    auto p = rearrangement_profile(vals, vols);

    REQUIRE(std::is_sorted(p.value.begin(), p.value.end()));
    REQUIRE(p.value.front() == *std::min_element(vals.begin(), vals.end()));
    REQUIRE(p.value.back() == *std::max_element(vals.begin(), vals.end()));
    REQUIRE(relative_diff(p.total(), sum(vols)) < 1e-15);

    // every weighted power sum survives the permutation
    for (double q : {1.0, 2.0, 6.0}) {
        KahanSum before, after;
        for (std::size_t i = 0; i < vals.size(); ++i)
            before.add(std::pow(std::fabs(vals[i]), q) * vols[i]);
        for (std::size_t i = 0; i < p.value.size(); ++i)
            after.add(std::pow(std::fabs(p.value[i]), q) * p.weight[i]);
        REQUIRE(relative_diff(before.value(), after.value()) < 1e-12);
    }

    // sub-level volumes agree exactly at every threshold between samples
    std::vector<double> sorted_vals(p.value);
    for (std::size_t i = 1; i < sorted_vals.size(); i += 17) {
        double thr = 0.5 * (sorted_vals[i - 1] + sorted_vals[i]);
        KahanSum direct;
        for (std::size_t c = 0; c < vals.size(); ++c)
            if (vals[c] < thr) direct.add(vols[c]);
        auto it = std::lower_bound(p.value.begin(), p.value.end(), thr);
        double via_profile = p.edge[std::size_t(it - p.value.begin())];
        REQUIRE(relative_diff(direct.value(), via_profile) < 1e-13);
    }
}

TEST_CASE("ties keep their original order") {
    std::vector<double> vals{3.0, 1.0, 3.0, 1.0};
    std::vector<double> vols{10.0, 20.0, 30.0, 40.0};
    auto p = rearrangement_profile(vals, vols);
    REQUIRE(p.weight == std::vector<double>{20.0, 40.0, 10.0, 30.0});
}

TEST_CASE("resampling stays within range and is radially monotone") {
    auto t = build_target(3, 2.0 * pi * pi, 40);
    auto vals = random_vector(150, 5, -1.0, 2.0);
    auto vols = random_vector(150, 6, 0.1, 1.0);
    double total = sum(vols);
    for (double& v : vols) v *= t.volume / total;  // make the volumes match

    auto out = rearrange_fiber(vals, vols, t);
    REQUIRE(out.size() == t.cells());
    REQUIRE(std::is_sorted(out.begin(), out.end()));
    double lo = *std::min_element(vals.begin(), vals.end());
    double hi = *std::max_element(vals.begin(), vals.end());
    for (double x : out) {
        REQUIRE(x >= lo - 1e-14);
        REQUIRE(x <= hi + 1e-14);
    }

    // sub-level volumes on the target agree within one target cell
    for (double thr : {-0.2, 0.4, 1.1, 1.8}) {
        KahanSum src_vol, dst_vol;
        for (std::size_t c = 0; c < vals.size(); ++c)
            if (vals[c] < thr) src_vol.add(vols[c]);
        for (std::size_t c = 0; c < out.size(); ++c)
            if (out[c] < thr) dst_vol.add(t.grid.cell_volume[c]);
        double cell_cap = *std::max_element(t.grid.cell_volume.begin(),
                                            t.grid.cell_volume.end());
        REQUIRE(std::fabs(src_vol.value() - dst_vol.value()) <= cell_cap + 1e-12 * t.volume);
    }
}

TEST_CASE("rearranging a constant gives the same constant") {
    auto t = build_target(2, 4.0 * pi, 24);
    std::vector<double> vals(60, 1.75);
    std::vector<double> vols(60, 4.0 * pi / 60);
    auto out = rearrange_fiber(vals, vols, t);
    for (double x : out) REQUIRE(x == 1.75);
}

TEST_CASE("volume mismatch is rejected") {
    auto t = build_target(3, 2.0 * pi * pi, 24);
    std::vector<double> vals(50, 1.0);
    std::vector<double> vols(50, 0.9 * t.volume / 50);
    REQUIRE_THROWS_AS(rearrange_fiber(vals, vols, t), std::domain_error);
}

TEST_CASE("rearrangement is idempotent") {
    auto t = build_target(3, 2.0 * pi * pi, 48);
    auto vals = random_vector(97, 13, -1.0, 1.0);
    auto vols = random_vector(97, 17, 0.2, 1.0);
    double total = sum(vols);
    for (double& v : vols) v *= t.volume / total;

    auto once = rearrange_fiber(vals, vols, t);
    auto twice = rearrange_fiber(once, t.grid.cell_volume, t);
    REQUIRE(sup_diff(once, twice) < 1e-12);
}

TEST_CASE("positive base factors pass through the rearrangement") {
    auto model = assemble_product({build_circle(2.0 * pi, 12)},
                                  {build_radial_sphere(3, 1.0, 20)}, catalog_sphere(3, 1.0));
    auto t = build_target(3, 2.0 * pi * pi, 20);
    auto w = random_vector(model.fiber_cells(), 23, -1.0, 1.0);
    std::vector<double> F(model.cell_count());
    std::vector<double> u(model.base_cells());
    std::uint64_t st = 31;
    for (std::size_t b = 0; b < u.size(); ++b) u[b] = 1.0 + 0.5 * unit_uniform(st);
    for (std::size_t c = 0; c < F.size(); ++c) F[c] = u[model.base_of(c)] * w[model.fiber_of(c)];

    auto Fstar = fiberwise_rearrange(model, F, t);
    auto wstar = rearrange_fiber(w, model.fiber_cell_volume, t);
    double worst = 0.0;
    for (std::size_t c = 0; c < Fstar.size(); ++c) {
        std::size_t b = c / t.cells(), f = c % t.cells();
        worst = std::max(worst, std::fabs(Fstar[c] - u[b] * wstar[f]));
    }
    REQUIRE(worst < 1e-13);
}

TEST_CASE("rearrangement commutes with base rotations") {
    auto model = assemble_product({build_circle(2.0 * pi, 16)},
                                  {build_radial_sphere(3, 1.0, 24)}, catalog_sphere(3, 1.0));
    auto t = build_target(3, 2.0 * pi * pi, 24);
    auto F = random_vector(model.cell_count(), 41, -1.0, 1.0);
    REQUIRE(check_equivariance(model, F, 0, t) == 0.0);
    REQUIRE(check_equivariance(model, F, 5, t) == 0.0);
    REQUIRE(check_equivariance(model, F, 8, t) == 0.0);

    auto no_circle = assemble_product({build_interval(1.0, 8)},
                                      {build_radial_sphere(3, 1.0, 16)}, catalog_sphere(3, 1.0));
    auto G = random_vector(no_circle.cell_count(), 43, -1.0, 1.0);
    REQUIRE_THROWS_AS(check_equivariance(no_circle, G, 1, t), std::invalid_argument);
}

TEST_CASE("the comparison model carries the right scalings") {
    auto src = assemble_product({build_circle(2.0 * pi, 16)},
                                {build_radial_sphere(3, 0.9, 24)}, catalog_sphere(3, 0.9));
    auto s = symmetrize_model(src, 24);
    double ratio = std::pow(0.9, 3);
    REQUIRE(relative_diff(s.volume_ratio, ratio) < 1e-13);
    REQUIRE(relative_diff(s.target.volume, ratio * 2.0 * pi * pi) < 1e-13);

    // base volumes pick up ratio^{n/m}, total picks up the fiber volume too
    double expect = 2.0 * pi * std::pow(ratio, 1.0 / 3.0) * ratio * 2.0 * pi * pi;
    REQUIRE(relative_diff(s.model.total_volume(), expect) < 1e-12);

    // inverse metric (and with it curvature) scales by ratio^{-2/m}
    double inv_factor = std::pow(ratio, -2.0 / 3.0);
    REQUIRE(relative_diff(s.model.axes[0].inv_metric[0],
                          src.axes[0].inv_metric[0] * inv_factor) < 1e-13);

    auto not_sphere = assemble_product({build_circle(1.0, 8)}, {build_circle(2.0, 8)},
                                       catalog_circle(2.0));
    REQUIRE_THROWS_AS(symmetrize_model(not_sphere, 16), std::invalid_argument);
}

TEST_CASE("gradient comparison: constants and slice-constant fields") {
    auto src = assemble_product({build_circle(2.0 * pi, 16)},
                                {build_radial_sphere(3, 0.9, 24)}, catalog_sphere(3, 0.9));
    auto s = symmetrize_model(src, 24);

    auto mc = check_polya_szego(src, constant_field(src, 2.0), s);
    REQUIRE(mc.fiber == 0.0);
    REQUIRE(mc.base == 0.0);

    // a field depending only on the base keeps its base energy exactly
    std::vector<double> F(src.cell_count());
    for (std::size_t c = 0; c < F.size(); ++c) F[c] = std::sin(src.coord(c, 0));
    auto mb = check_polya_szego(src, F, s);
    REQUIRE(mb.fiber == 0.0);
    REQUIRE(std::fabs(mb.base) < 1e-10);
}

TEST_CASE("gradient comparison holds on random fields") {
    auto src = assemble_product({build_circle(2.0 * pi, 24)},
                                {build_radial_sphere(3, 0.9, 16)}, catalog_sphere(3, 0.9));
    auto s = symmetrize_model(src, 16);
    auto pair = make_plain_pair(src, s);
    double eps = discretization_tolerance(pair.source);

    std::uint64_t st = 4242;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> F(src.cell_count());
        for (double& x : F) x = unit_uniform(st);
        double scale = std::sqrt(dirichlet_energy(pair.source, F) +
                                 lp_norm(pair.source, F, 2.0) * lp_norm(pair.source, F, 2.0));
        for (double& x : F) x /= scale;
        auto Fstar = fiberwise_rearrange(src, F, s.target);
        auto m = check_polya_szego(pair, F, Fstar, s.volume_ratio);
        REQUIRE(m.base >= -1e-13);   // exact rearrangement inequality, discretely
        REQUIRE(m.fiber >= -eps);    // first-order discretization allowance
    }
}

TEST_CASE("the Ricci hypothesis is enforced") {
    auto big = assemble_product({build_circle(2.0 * pi, 8)},
                                {build_radial_sphere(3, 1.2, 16)}, catalog_sphere(3, 1.2));
    auto s = symmetrize_model(big, 16);
    auto F = random_vector(big.cell_count(), 3, 0.5, 1.5);
    REQUIRE_THROWS_AS(check_polya_szego(big, F, s), std::domain_error);
    REQUIRE_THROWS_AS(symmetrized_quotient_bound(big, F, s), std::domain_error);
}

TEST_CASE("quotient bound on smooth positive fields") {
    auto src = assemble_product({build_circle(2.0 * pi, 24)},
                                {build_radial_sphere(3, 0.9, 16)}, catalog_sphere(3, 0.9));
    auto s = symmetrize_model(src, 16);
    std::uint64_t st = 777;
    for (int trial = 0; trial < 10; ++trial) {
        auto f = RandomSmoothField::make(st, 2.0 * pi);
        st += 17;
        std::vector<double> F(src.cell_count());
        for (std::size_t c = 0; c < F.size(); ++c)
            F[c] = 1.0 + 0.8 * f(src.coord(c, 0), src.coord(c, 1));
        auto b = symmetrized_quotient_bound(src, F, s);
        double eps = discretization_tolerance(src, 1.0 + std::fabs(b.lhs));
        REQUIRE(b.margin >= -eps);
    }
}

TEST_CASE("unit fiber radius collapses the bound to equality") {
    const int nf = 24;
    auto src = assemble_product({build_circle(2.0 * pi, 16)},
                                {build_radial_sphere(3, 1.0, nf)}, catalog_sphere(3, 1.0));
    auto s = symmetrize_model(src, nf);
    REQUIRE(s.volume_ratio == 1.0);

    // a field already radial and increasing from the pole is (nearly) fixed
    std::vector<double> F(src.cell_count());
    for (std::size_t c = 0; c < F.size(); ++c)
        F[c] = 2.0 - std::cos(src.coord(c, 1)) + 0.2 * std::sin(src.coord(c, 0));
    auto b = symmetrized_quotient_bound(src, F, s);
    REQUIRE(std::fabs(b.margin) < 1e-10 * std::fabs(b.lhs));

    auto m = check_polya_szego(src, F, s);
    REQUIRE(std::fabs(m.fiber) < 1e-10 * (1.0 + dirichlet_energy(src, F)));
}

TEST_CASE("declared discretization allowance is linear in the spacing") {
    REQUIRE(discretization_tolerance(0.1) == 0.5 * discretization_tolerance(0.2));
    REQUIRE(discretization_tolerance(0.1, 3.0) == 3.0 * discretization_tolerance(0.1));
    auto m = assemble_product({build_circle(2.0 * pi, 16)},
                              {build_radial_sphere(3, 1.0, 64)}, catalog_sphere(3, 1.0));
    REQUIRE(discretization_tolerance(m) == discretization_tolerance(m.max_spacing()));
}
