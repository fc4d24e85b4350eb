#ifndef TRISPLIT_NUMERICS_ROOT_HPP
#define TRISPLIT_NUMERICS_ROOT_HPP

#include "trisplit/errors.hpp"

#include <cmath>
#include <utility>

namespace trisplit::numerics {

struct RootOptions {
    double tol = 1e-12;
    int max_iterations = 100;
};

struct RootResult {
    double root = 0.0;
    int iterations = 0;
};

/// Newton iteration kept inside a shrinking sign-change bracket; a step that
/// would leave the bracket or stall becomes a bisection. Converged when
/// |f(x)| <= tol or the bracket is narrower than tol.
template <class F, class DF>
RootResult solve_scalar(F&& f, DF&& df, double a, double b, const RootOptions& opts = {}) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return {a, 0};
    if (fb == 0.0) return {b, 0};
    if (!(fa * fb < 0.0)) throw NumericalError("solve_scalar: no sign change on the bracket");
    if (a > b) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double x = 0.5 * (a + b);
    double width_before = b - a;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const double fx = f(x);
        if (!std::isfinite(fx)) throw NumericalError("solve_scalar: non-finite function value");
        if (std::abs(fx) <= opts.tol) return {x, it};
        if ((fx < 0.0) == (fa < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        if (b - a <= opts.tol) return {0.5 * (a + b), it};

        const double d = df(x);
        double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : a - 1.0;
        const bool inside = next > a && next < b;
        // bisect when Newton leaves the bracket or the bracket stopped shrinking
        if (!inside || (b - a) > 0.5 * width_before) next = 0.5 * (a + b);
        width_before = b - a;
        if (next == x) return {x, it};
        x = next;
    }
    throw NumericalError("solve_scalar: no convergence within the iteration cap");
}

/// Derivative-free variant: secant slopes from the bracket ends replace f'.
template <class F>
RootResult solve_scalar(F&& f, double a, double b, const RootOptions& opts = {}) {
    double last_x = a, last_f = f(a);
    auto slope = [&](double x) {
        const double fx = f(x);
        const double d = (x != last_x) ? (fx - last_f) / (x - last_x) : 0.0;
        last_x = x;
        last_f = fx;
        return d;
    };
    return solve_scalar(f, slope, a, b, opts);
}

}  // namespace trisplit::numerics

#endif
