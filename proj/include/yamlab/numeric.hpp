#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace yamlab {

inline constexpr double pi = std::numbers::pi;

/// Compensated accumulator. Cell sums routinely run over 1e5 terms and
/// several invariants are checked at 1e-12 relative, which plain
/// left-to-right summation does not reliably deliver.
class KahanSum {
public:
    void add(double x) {
        double y = x - carry_;
        double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

inline double sum(std::span<const double> xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

/// Volume of the unit round m-sphere, 2 pi^{(m+1)/2} / Gamma((m+1)/2).
inline double sphere_volume(int m) {
    if (m < 1) throw std::domain_error("sphere_volume: dimension must be >= 1");
    return 2.0 * std::pow(pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

/// Conformal-Laplacian coefficient a_d and critical exponent p_d.
struct YamabeConstants {
    int dim;
    double a;
    double p;

    static YamabeConstants for_dimension(int d) {
        if (d < 3) throw std::domain_error("YamabeConstants: dimension must be >= 3");
        return {d, 4.0 * (d - 1) / (d - 2), 2.0 * d / (d - 2)};
    }
};

/// Yamabe constant of the round m-sphere, m(m-1) V_m^{2/m}.
/// At m = 2 the same expression evaluates to 8 pi, the Gauss-Bonnet value.
inline double round_sphere_yamabe(int m) {
    if (m < 2) throw std::domain_error("round_sphere_yamabe: dimension must be >= 2");
    return double(m) * (m - 1) * std::pow(sphere_volume(m), 2.0 / m);
}

inline double harmonic_mean(double x, double y) {
    double s = x + y;
    return s > 0.0 ? 2.0 * x * y / s : 0.0;
}

inline double relative_diff(double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

/// Deterministic uniform double in [-1, 1), xorshift*-based so results
/// do not depend on standard-library distribution internals.
inline double unit_uniform(std::uint64_t& state) {
    if (state == 0) state = 0x9E3779B97F4A7C15ULL;
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    std::uint64_t z = state * 0x2545F4914F6CDD1DULL;
    return double(z >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace yamlab
