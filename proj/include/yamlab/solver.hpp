#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamlab/fields.hpp"
#include "yamlab/model.hpp"

namespace yamlab {

// ---------------------------------------------------------------- linear algebra

inline double dot(std::span<const double> a, std::span<const double> b) {
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

inline double weighted_dot(std::span<const double> a, std::span<const double> b,
                           std::span<const double> w) {
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i] * w[i]);
    return s.value();
}

inline double weighted_norm(std::span<const double> a, std::span<const double> w) {
    return std::sqrt(weighted_dot(a, a, w));
}

namespace detail {
inline double plain_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
}  // namespace detail

/// Jacobi-preconditioned conjugate gradients for an SPD operator given
/// as a functor apply(x, y). Returns iterations used, or -1 if the
/// relative residual target was not reached.
template <class Apply>
int pcg(const Apply& apply, std::span<const double> b, std::span<double> x,
        std::span<const double> inv_diag, double rel_tol, int max_iter) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), d(n), q(n);
    std::fill(x.begin(), x.end(), 0.0);
    std::copy(b.begin(), b.end(), r.begin());
    double b_norm = std::sqrt(detail::plain_dot(b, b));
    if (b_norm == 0.0) return 0;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    std::copy(z.begin(), z.end(), d.begin());
    double rz = detail::plain_dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        apply(d, q);
        double dq = detail::plain_dot(d, q);
        if (!(dq > 0.0)) return -1;  // lost positive-definiteness
        double alpha = rz / dq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        if (std::sqrt(detail::plain_dot(r, r)) <= rel_tol * b_norm) return it;
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        double rz_new = detail::plain_dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
    }
    return -1;
}

/// Diagonal of the stiffness operator A (sum of incident edge weights).
inline std::vector<double> stiffness_diagonal(const ProductModel& m) {
    std::vector<double> diag(m.cell_count(), 0.0);
    for (std::size_t a = 0; a < m.axes.size(); ++a) {
        const auto& w = m.edge_weight[a];
        const auto& nb = m.edge_neighbor[a];
        for (std::size_t c = 0; c < m.cell_count(); ++c) {
            if (nb[c] == no_edge) continue;
            diag[c] += w[c];
            diag[nb[c]] += w[c];
        }
    }
    return diag;
}

// ---------------------------------------------------------------- eigenvalue

struct EigenResult {
    double lambda = 0.0;
    ScalarField eigenfield;  // volume-orthogonal to constants, unit volume-norm
    double residual = 0.0;   // |L e - lambda e|_V / (lambda |e|_V)
    int iterations = 0;
    bool converged = false;
};

namespace detail {

inline void project_out_constants(const ProductModel& m, std::span<double> x) {
    double vol = 0.0, mean = 0.0;
    {
        KahanSum v, s;
        for (std::size_t c = 0; c < x.size(); ++c) {
            v.add(m.volume[c]);
            s.add(x[c] * m.volume[c]);
        }
        vol = v.value();
        mean = s.value() / vol;
    }
    for (double& xi : x) xi -= mean;
}

}  // namespace detail

/// Smallest nonzero eigenvalue of the volume-weighted divergence-form
/// operator, by inverse power iteration with constants deflated. The
/// stiffness system is singular but consistent (the right-hand side is
/// kept volume-orthogonal to constants), so plain PCG applies.
inline EigenResult first_eigenvalue(const ProductModel& m, double tol = 1e-9,
                                    int max_iter = 400) {
    const std::size_t n = m.cell_count();
    if (n < 2) throw std::invalid_argument("first_eigenvalue: model too small");

    std::vector<double> inv_diag = stiffness_diagonal(m);
    for (double& d : inv_diag) d = 1.0 / d;
    auto apply = [&m](std::span<const double> x, std::span<double> y) {
        apply_stiffness(m, x, y);
    };

    // deterministic start with broad low-mode content
    std::vector<double> x(n);
    for (std::size_t c = 0; c < n; ++c) {
        double v = 0.0;
        for (std::size_t a = 0; a < m.axes.size(); ++a)
            v += std::cos((a + 1.0) * m.coord(c, a)) + 0.3 * std::sin(m.coord(c, a));
        x[c] = v + 1e-3 * double(c % 7);
    }

    EigenResult out;
    std::vector<double> b(n), y(n), Ay(n);
    for (int it = 1; it <= max_iter; ++it) {
        detail::project_out_constants(m, x);
        double nrm = weighted_norm(x, m.volume);
        if (!(nrm > 0.0)) throw std::runtime_error("first_eigenvalue: degenerate iterate");
        for (std::size_t c = 0; c < n; ++c) {
            x[c] /= nrm;
            b[c] = x[c] * m.volume[c];
        }
        if (pcg(apply, b, std::span<double>(y), inv_diag, 1e-12, 10000) < 0)
            throw std::runtime_error("first_eigenvalue: inner solve failed");
        detail::project_out_constants(m, y);

        apply_stiffness(m, y, Ay);
        double yy = weighted_dot(y, y, m.volume);
        double lambda = dot(y, Ay) / yy;
        // residual of (L - lambda) y in the volume-weighted norm
        KahanSum rs;
        for (std::size_t c = 0; c < n; ++c) {
            double r = Ay[c] / m.volume[c] - lambda * y[c];
            rs.add(r * r * m.volume[c]);
        }
        double rel = std::sqrt(rs.value()) / (lambda * std::sqrt(yy));
        out.lambda = lambda;
        out.residual = rel;
        out.iterations = it;
        if (rel < tol) {
            out.converged = true;
            double ny = std::sqrt(yy);
            out.eigenfield.assign(y.begin(), y.end());
            for (double& e : out.eigenfield) e /= ny;
            return out;
        }
        std::swap(x, y);
    }
    out.eigenfield.assign(x.begin(), x.end());
    return out;
}

// ---------------------------------------------------------------- minimization

enum class SolveStatus { Converged, MaxIter, Diverged };
enum class InitKind { Constant, Supplied, Bubble };

struct SolveOptions {
    double tol = 1e-9;            // relative decrement over the window
    int window = 10;              // iterations per decrement check
    int max_iter_per_stage = 3000;
    double step0 = 1.0;
    int random_restarts = 1;
    InitKind init = InitKind::Constant;
    ScalarField initial_field;    // used when init == Supplied
    std::vector<double> exponents;  // subcritical schedule; empty = default
    std::uint64_t seed = 20231u;
    double cg_tol = 5e-3;  // loose: the solve only shapes a descent direction
    int cg_max_iter = 80;

    /// Default continuation: fractions of the way from 2 to p.
    std::vector<double> schedule_for(double p) const {
        if (!exponents.empty()) {
            for (std::size_t i = 1; i < exponents.size(); ++i)
                if (!(exponents[i] > exponents[i - 1]))
                    throw std::invalid_argument("SolveOptions: schedule must increase strictly");
            if (std::fabs(exponents.back() - p) > 1e-12)
                throw std::invalid_argument("SolveOptions: schedule must end at the critical exponent");
            return exponents;
        }
        std::vector<double> q;
        for (double f : {0.125, 0.25, 0.5, 0.75, 1.0}) q.push_back(2.0 + f * (p - 2.0));
        q.back() = p;
        return q;
    }
};

struct SolveResult {
    ScalarField minimizer;     // L^p norm 1
    double constant = 0.0;     // yamabe_quotient at the minimizer
    long iterations = 0;
    double final_decrement = 0.0;
    std::vector<double> exponents;
    SolveStatus status = SolveStatus::Converged;
    std::string note;
};

namespace detail {

inline double subcritical_quotient(const ProductModel& m, const YamabeConstants& k,
                                   std::span<const double> f, double q) {
    double nq = lp_norm(m, f, q);
    if (!(nq > 0.0)) throw std::domain_error("subcritical_quotient: zero field");
    KahanSum s;
    for (std::size_t c = 0; c < f.size(); ++c)
        s.add(m.scalar_curv[c] * f[c] * f[c] * m.volume[c]);
    return (k.a * dirichlet_energy(m, f) + s.value()) / (nq * nq);
}

/// One descent run at a fixed exponent q, warm-started from f.
/// Returns iterations used; f is updated in place, kept positive and
/// q-normalized. Monotone decrease is enforced by backtracking.
struct StageOutcome {
    long iterations = 0;
    bool converged = false;
    double decrement = 0.0;
    double quotient = 0.0;
};

inline StageOutcome descend_stage(const ProductModel& m, const YamabeConstants& k, double q,
                                  ScalarField& f, const SolveOptions& opt,
                                  std::span<const double> precond_inv_diag,
                                  std::span<const double> precond_mass) {
    const std::size_t n = m.cell_count();
    auto precond_apply = [&](std::span<const double> x, std::span<double> y) {
        apply_stiffness(m, x, y);
        for (std::size_t c = 0; c < n; ++c) y[c] = k.a * y[c] + precond_mass[c] * x[c];
    };

    auto normalize = [&](ScalarField& g) {
        double nq = lp_norm(m, g, q);
        for (double& v : g) v = std::fabs(v) / nq;
    };
    normalize(f);

    std::vector<double> grad(n), dir(n), Af(n);
    ScalarField trial(n);
    std::vector<double> history;
    double y_cur = subcritical_quotient(m, k, f, q);
    history.push_back(y_cur);

    double step = opt.step0;
    StageOutcome out;
    out.quotient = y_cur;

    for (int it = 1; it <= opt.max_iter_per_stage; ++it) {
        // gradient of N(f)/|f|_q^2 at |f|_q = 1
        apply_stiffness(m, f, Af);
        for (std::size_t c = 0; c < n; ++c) {
            double fq = std::pow(std::fabs(f[c]), q - 2.0) * f[c];
            grad[c] = 2.0 * (k.a * Af[c] + m.scalar_curv[c] * m.volume[c] * f[c]
                             - y_cur * m.volume[c] * fq);
        }
        pcg(precond_apply, grad, std::span<double>(dir), precond_inv_diag, opt.cg_tol,
            opt.cg_max_iter);

        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t c = 0; c < n; ++c) trial[c] = f[c] - step * dir[c];
            normalize(trial);
            double y_try = subcritical_quotient(m, k, trial, q);
            if (std::isfinite(y_try) && y_try < y_cur) {
                f.swap(trial);
                y_cur = y_try;
                accepted = true;
                step = std::min(step * 1.4, 1e6);
                break;
            }
            step *= 0.4;
            if (step < 1e-14) break;
        }
        out.iterations = it;
        history.push_back(y_cur);
        if (!accepted) {
            // no descent direction at line-search resolution: stationary
            out.converged = true;
            out.decrement = 0.0;
            break;
        }
        if (int(history.size()) > opt.window) {
            double past = history[history.size() - 1 - opt.window];
            out.decrement = (past - y_cur) / std::max(std::fabs(y_cur), 1e-300);
            if (out.decrement < opt.tol) {
                out.converged = true;
                break;
            }
        }
    }
    out.quotient = y_cur;
    return out;
}

inline ScalarField bubble_seed(const ProductModel& m, const YamabeConstants& k) {
    // cylinder profile cosh(t - T/2)^{-(d-2)/2} along the first base
    // circle, constant over the fiber; falls back to constant + tilt
    ScalarField f(m.cell_count(), 1.0);
    if (m.n_base_axes == 0 || !m.axes[0].periodic()) return f;
    double T = m.axes[0].spacing * m.shape[0];
    double expo = (k.dim - 2.0) / 2.0;
    for (std::size_t c = 0; c < m.cell_count(); ++c) {
        double t = m.coord(c, 0);
        double d = std::fabs(t - 0.5 * T);
        d = std::min(d, T - d);
        f[c] = std::pow(1.0 / std::cosh(d), expo);
    }
    return f;
}

}  // namespace detail

/// Constrained minimization of the quotient by preconditioned,
/// normalized gradient descent with subcritical continuation. Surfaces
/// take the closed-form two-dimensional path (no iteration). Multiple
/// starts (deterministic + seeded random) are solved independently and
/// the best grid-resolved result is reported; candidates concentrated on
/// single cells are kept only as a fallback (see the note field).
inline SolveResult minimize_yamabe(const ProductModel& m, const SolveOptions& opt = {}) {
    if (m.total_dim < 2)
        throw std::domain_error("minimize_yamabe: unsupported dimension");
    if (m.is_surface()) {
        SolveResult r;
        r.constant = gauss_bonnet_constant(m);
        r.minimizer = constant_field(m, 1.0 / std::sqrt(integrate(m, constant_field(m))));
        r.status = SolveStatus::Converged;
        r.note = "surface: conformally invariant value, no iteration";
        return r;
    }

    const YamabeConstants k = YamabeConstants::for_dimension(m.total_dim);
    const std::size_t n = m.cell_count();

    // fixed SPD preconditioner a*A + max(s, floor) V
    std::vector<double> precond_mass(n), inv_diag = stiffness_diagonal(m);
    for (std::size_t c = 0; c < n; ++c) {
        precond_mass[c] = std::max(m.scalar_curv[c], 0.1) * m.volume[c];
        inv_diag[c] = 1.0 / (k.a * inv_diag[c] + precond_mass[c]);
    }

    const std::vector<double> schedule = opt.schedule_for(k.p);
    // Targeted seeds (supplied fields, bubbles) are already adapted to the
    // critical exponent; dragging them through near-linear stages, where the
    // constant is the stable minimizer, flattens them into it. They descend
    // at p directly unless the caller pinned an explicit schedule.
    const std::vector<double> direct{k.p};
    const bool custom_schedule = !opt.exponents.empty();

    struct Start {
        ScalarField field;
        bool targeted = false;
    };
    std::vector<Start> starts;
    if (opt.init == InitKind::Supplied) {
        if (opt.initial_field.size() != n)
            throw std::invalid_argument("minimize_yamabe: supplied field has wrong size");
        starts.push_back({opt.initial_field, true});
    } else if (opt.init == InitKind::Bubble) {
        starts.push_back({detail::bubble_seed(m, k), true});
    }
    starts.push_back({constant_field(m), false});
    std::uint64_t rng = opt.seed ? opt.seed : 1u;
    for (int r = 0; r < opt.random_restarts; ++r) {
        ScalarField g(n);
        for (std::size_t c = 0; c < n; ++c) g[c] = 1.0 + 0.6 * unit_uniform(rng);
        starts.push_back({std::move(g), false});
    }

    // Share of the p-mass carried by the heaviest single cell. A field
    // whose mass sits on O(1) cells is below the grid scale: the continuum
    // quotient of a concentrating family tends to the round-sphere constant,
    // while its discrete stand-in can drop far under it (tiny polar cells
    // make this a resolution-independent artifact), so such candidates are
    // only reported when nothing resolved is found.
    auto concentration = [&](const ScalarField& f) {
        double tot = 0.0, peak = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            double w = m.volume[c] * std::pow(std::fabs(f[c]), k.p);
            tot += w;
            peak = std::max(peak, w);
        }
        return tot > 0.0 ? peak / tot : 1.0;
    };
    const double conc_cap = std::max(0.25, 2.0 / double(n));

    SolveResult best, best_spike;
    best.constant = std::numeric_limits<double>::infinity();
    best_spike.constant = std::numeric_limits<double>::infinity();
    bool saw_non_finite = false;
    for (const Start& start : starts) {
        const std::vector<double>& sched =
            (start.targeted && !custom_schedule) ? direct : schedule;
        ScalarField f = start.field;
        long iters = 0;
        bool all_converged = true;
        double last_dec = 0.0;
        for (double q : sched) {
            detail::StageOutcome st =
                detail::descend_stage(m, k, q, f, opt, inv_diag, precond_mass);
            iters += st.iterations;
            last_dec = st.decrement;
            if (q == sched.back() && !st.converged) all_converged = false;
        }
        double norm_p = lp_norm(m, f, k.p);
        for (double& v : f) v = std::fabs(v) / norm_p;
        double constant = yamabe_quotient(m, f);
        if (!std::isfinite(constant)) {
            saw_non_finite = true;
            continue;
        }
        SolveResult& slot = concentration(f) > conc_cap ? best_spike : best;
        if (constant < slot.constant) {
            slot.minimizer = std::move(f);
            slot.constant = constant;
            slot.iterations = iters;
            slot.final_decrement = last_dec;
            slot.status = all_converged ? SolveStatus::Converged : SolveStatus::MaxIter;
            slot.exponents = sched;
        }
    }
    if (!std::isfinite(best.constant) && std::isfinite(best_spike.constant)) {
        best = std::move(best_spike);
        best.note = "all starts collapsed below the grid scale";
    } else if (best_spike.constant < best.constant) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.6g", best_spike.constant);
        best.note = std::string("discarded a sub-grid spike at ") + buf;
    }
    if (!std::isfinite(best.constant)) {
        best.status = SolveStatus::Diverged;
        best.note = saw_non_finite ? "all runs failed to produce a finite quotient" : best.note;
    }
    return best;
}

}  // namespace yamlab
