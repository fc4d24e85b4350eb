#ifndef TRISPLIT_NUMERICS_ODE_HPP
#define TRISPLIT_NUMERICS_ODE_HPP

#include "trisplit/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trisplit::numerics {

struct ReferenceIntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-13;
    long max_steps = 5'000'000;
    double max_step = 0.0;  // 0 means unbounded
};

template <class State>
struct ReferenceSolveResult {
    State y;
    long steps = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
};

namespace detail {

inline double scaled_error_sq(double err, double y0, double y1, const ReferenceIntegratorConfig& cfg, long& count) {
    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y0), std::abs(y1));
    ++count;
    return (err / sc) * (err / sc);
}

inline double rms_error(double err, double y0, double y1, const ReferenceIntegratorConfig& cfg) {
    long count = 0;
    return std::sqrt(scaled_error_sq(err, y0, y1, cfg, count));
}

template <typename Derived>
double rms_error(const Eigen::MatrixBase<Derived>& err, const Eigen::MatrixBase<Derived>& y0,
                 const Eigen::MatrixBase<Derived>& y1, const ReferenceIntegratorConfig& cfg) {
    long count = 0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) sum += scaled_error_sq(err(i), y0(i), y1(i), cfg, count);
    return count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

inline double max_abs(double y) { return std::abs(y); }

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& y) {
    return y.size() ? static_cast<double>(y.cwiseAbs().maxCoeff()) : 0.0;
}

inline bool all_finite(double y) { return std::isfinite(y); }

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& y) {
    return y.allFinite();
}

}  // namespace detail

/// Dormand-Prince 5(4) with local extrapolation and the standard
/// step-size controller. `rhs(t, y)` returns dy/dt. Integrates backwards
/// when t1 < t0. State is a scalar or an Eigen column vector.
template <class State, class Rhs>
ReferenceSolveResult<State> reference_solve(Rhs&& rhs, const State& y0, double t0, double t1,
                                            const ReferenceIntegratorConfig& cfg = {}) {
    if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0)) {
        throw std::invalid_argument("reference_solve: rtol and atol must be positive");
    }
    ReferenceSolveResult<State> out{y0, 0, 0, 0};
    if (t1 == t0) return out;

    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double direction = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double t = t0;
    State y = y0;
    State k1 = rhs(t, y);
    out.rhs_evaluations = 1;

    // initial step from the Hairer-Norsett-Wanner heuristic
    double h;
    {
        const double d0 = detail::rms_error(y, y, y, cfg);
        const double d1 = detail::rms_error(k1, y, y, cfg);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        const State y1 = y + (direction * h0) * k1;
        const State f1 = rhs(t + direction * h0, y1);
        ++out.rhs_evaluations;
        const double d2 = detail::rms_error(State(f1 - k1), y, y, cfg) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
        h = std::min(100 * h0, h1);
    }
    if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);

    double err_prev = 1e-4;
    bool last_rejected = false;
    while (true) {
        const double remaining = std::abs(t1 - t);
        if (remaining <= 1e-14 * std::max(1.0, std::abs(t1))) break;
        if (out.steps + out.rejected >= cfg.max_steps) {
            throw NumericalError("reference_solve: maximum number of steps exceeded");
        }
        bool final_step = false;
        if (h >= remaining) {
            h = remaining;
            final_step = true;
        }
        const double hs = direction * h;
        const State k2 = rhs(t + c2 * hs, State(y + hs * (a21 * k1)));
        const State k3 = rhs(t + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
        const State k4 = rhs(t + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
        const State k5 = rhs(t + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const State k6 = rhs(t + hs, State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const State ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = rhs(t + hs, ynew);
        out.rhs_evaluations += 6;
        const State errv = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = detail::rms_error(errv, y, ynew, cfg);

        if (!std::isfinite(err) || !detail::all_finite(ynew)) {
            ++out.rejected;
            h *= 0.25;
            if (t + direction * h == t) throw NumericalError("reference_solve: step size underflow");
            last_rejected = true;
            continue;
        }

        if (err <= 1.0) {
            t = final_step ? t1 : t + hs;
            y = ynew;
            k1 = k7;
            ++out.steps;
            // PI controller
            double fac = 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            if (err == 0.0) fac = 5.0;
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
            h *= fac;
            err_prev = std::max(err, 1e-4);
            last_rejected = false;
            if (final_step) break;
        } else {
            ++out.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
            last_rejected = true;
            if (t + direction * h == t) throw NumericalError("reference_solve: step size underflow");
        }
        if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);
    }
    out.y = y;
    return out;
}

}  // namespace trisplit::numerics

#endif
