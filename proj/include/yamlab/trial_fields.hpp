#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "yamlab/fields.hpp"
#include "yamlab/model.hpp"

namespace yamlab {

/// Grid-independent random smooth field on circle x sphere: a short
/// Fourier series in the circle coordinate times polynomials in
/// cos(theta). Coefficients decay quadratically in the mode indices, so
/// the same seed can be sampled at several resolutions for refinement
/// studies of the inequality margins.
struct RandomSmoothField {
    double period = 2.0 * pi;
    int j_max = 3;  // circle modes 0..j_max
    int k_max = 3;  // powers of cos(theta) 0..k_max
    std::vector<double> c_cos, c_sin;  // (j_max+1) x (k_max+1), row-major

    static RandomSmoothField make(std::uint64_t seed, double period, int j_max = 3,
                                  int k_max = 3) {
        RandomSmoothField f;
        f.period = period;
        f.j_max = j_max;
        f.k_max = k_max;
        std::uint64_t rng = seed ? seed : 1u;
        double total = 0.0;
        auto draw = [&](int j, int k) {
            double decay = 1.0 / (1.0 + double(j * j + k * k));
            double c = unit_uniform(rng) * decay;
            total += std::fabs(c);
            return c;
        };
        for (int j = 0; j <= j_max; ++j)
            for (int k = 0; k <= k_max; ++k) {
                f.c_cos.push_back(draw(j, k));
                f.c_sin.push_back(draw(j, k));
            }
        // deterministic normalization: |F| <= 1 everywhere
        for (double& c : f.c_cos) c /= total;
        for (double& c : f.c_sin) c /= total;
        return f;
    }

    double operator()(double t, double theta) const {
        double x = std::cos(theta);
        double out = 0.0;
        std::size_t idx = 0;
        for (int j = 0; j <= j_max; ++j) {
            double w = 2.0 * pi * j / period;
            double cj = std::cos(w * t), sj = std::sin(w * t);
            double xk = 1.0;
            for (int k = 0; k <= k_max; ++k, ++idx) {
                out += (c_cos[idx] * cj + c_sin[idx] * sj) * xk;
                xk *= x;
            }
        }
        return out;
    }
};

/// Sample onto a two-axis model (axis 0 = circle coordinate, axis 1 =
/// polar angle).
inline ScalarField sample_field(const RandomSmoothField& f, const ProductModel& m) {
    if (m.axes.size() != 2)
        throw std::invalid_argument("sample_field: expected a two-axis model");
    ScalarField out(m.cell_count());
    for (std::size_t c = 0; c < m.cell_count(); ++c)
        out[c] = f(m.coord(c, 0), m.coord(c, 1));
    return out;
}

/// Independent uniform cell values in [lo, hi] (rough data for the
/// exact-identity batteries).
inline ScalarField random_cell_field(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                     double hi = 1.0) {
    ScalarField out(n);
    std::uint64_t rng = seed ? seed : 1u;
    for (double& v : out) v = lo + (hi - lo) * 0.5 * (unit_uniform(rng) + 1.0);
    return out;
}

}  // namespace yamlab
