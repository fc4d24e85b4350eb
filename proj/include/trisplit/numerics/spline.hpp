#ifndef TRISPLIT_NUMERICS_SPLINE_HPP
#define TRISPLIT_NUMERICS_SPLINE_HPP

#include "trisplit/numerics/tridiagonal.hpp"

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace trisplit::numerics {

enum class SplineBoundary { periodic, natural };

namespace detail {

// Right-hand side 6 * second difference; periodic wraps, natural leaves the
// end rows out (their second derivative is pinned to zero).
template <typename Scalar>
void second_difference_rhs(std::span<const Scalar> y, std::span<Scalar> rhs, SplineBoundary boundary) {
    const std::size_t n = y.size();
    if (boundary == SplineBoundary::periodic) {
        for (std::size_t i = 0; i < n; ++i) {
            const Scalar left = y[(i + n - 1) % n];
            const Scalar right = y[(i + 1) % n];
            rhs[i] = Scalar(6) * (left - Scalar(2) * y[i] + right);
        }
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) rhs[i - 1] = Scalar(6) * (y[i - 1] - Scalar(2) * y[i] + y[i + 1]);
    }
}

}  // namespace detail

/// Interpolating cubic spline on a uniform grid x0 + i*h, i = 0..n-1.
/// A periodic spline has period n*h (knot n coincides with knot 0).
/// Second derivatives are stored pre-multiplied by h^2.
template <typename Scalar = double>
class CubicSpline1D {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    CubicSpline1D(const Vector& values, Scalar spacing, SplineBoundary boundary, Scalar x0 = Scalar(0))
        : values_(values), h_(spacing), x0_(x0), boundary_(boundary) {
        const auto n = static_cast<std::size_t>(values.size());
        if (n < 4) throw std::invalid_argument("cubic spline needs at least 4 knots");
        if (!(spacing > Scalar(0))) throw std::invalid_argument("cubic spline spacing must be positive");
        curvature_ = Vector::Zero(values.size());
        const std::span<const Scalar> y(values_.data(), n);
        if (boundary == SplineBoundary::periodic) {
            std::span<Scalar> m(curvature_.data(), n);
            detail::second_difference_rhs<Scalar>(y, m, boundary);
            ConstantTridiagonal<Scalar>(n, Scalar(1), Scalar(4), true).solve(m);
        } else {
            std::span<Scalar> m(curvature_.data() + 1, n - 2);
            detail::second_difference_rhs<Scalar>(y, m, boundary);
            ConstantTridiagonal<Scalar>(n - 2, Scalar(1), Scalar(4), false).solve(m);
        }
    }

    Eigen::Index size() const { return values_.size(); }
    Scalar spacing() const { return h_; }
    SplineBoundary boundary() const { return boundary_; }
    const Vector& values() const { return values_; }

    Scalar operator()(Scalar x) const { return eval(x, 0); }
    Scalar derivative(Scalar x) const { return eval(x, 1); }
    Scalar second_derivative(Scalar x) const { return eval(x, 2); }

    /// Second derivative at knot i (natural ends are exactly zero).
    Scalar knot_second_derivative(Eigen::Index i) const { return curvature_(i) / (h_ * h_); }

private:
    Scalar eval(Scalar x, int order) const {
        const Eigen::Index n = values_.size();
        Scalar s = (x - x0_) / h_;
        Eigen::Index i;
        if (boundary_ == SplineBoundary::periodic) {
            s -= Scalar(n) * std::floor(s / Scalar(n));
            i = static_cast<Eigen::Index>(std::floor(s));
            if (i >= n) i = n - 1;
        } else {
            i = static_cast<Eigen::Index>(std::floor(s));
            if (i < 0) i = 0;
            if (i > n - 2) i = n - 2;
        }
        const Scalar t = s - Scalar(i);
        const Eigen::Index j = (i + 1) % n;
        const Scalar y0 = values_(i), y1 = values_(j);
        Scalar m0 = curvature_(i), m1 = curvature_(j);
        // natural splines extrapolate linearly
        if (boundary_ == SplineBoundary::natural && (t < Scalar(0) || t > Scalar(1))) {
            const Scalar edge = t < Scalar(0) ? Scalar(0) : Scalar(1);
            const Scalar slope = (y1 - y0) + (m1 * (Scalar(3) * edge * edge - Scalar(1)) -
                                              m0 * (Scalar(3) * (Scalar(1) - edge) * (Scalar(1) - edge) - Scalar(1))) /
                                                 Scalar(6);
            if (order == 2) return Scalar(0);
            if (order == 1) return slope / h_;
            const Scalar base = edge == Scalar(0) ? y0 : y1;
            return base + slope * (t - edge);
        }
        const Scalar u = Scalar(1) - t;
        switch (order) {
            case 0:
                return u * y0 + t * y1 + ((u * u * u - u) * m0 + (t * t * t - t) * m1) / Scalar(6);
            case 1:
                return ((y1 - y0) + (-(Scalar(3) * u * u - Scalar(1)) * m0 + (Scalar(3) * t * t - Scalar(1)) * m1) /
                                        Scalar(6)) /
                       h_;
            default:
                return (u * m0 + t * m1) / (h_ * h_);
        }
    }

    Vector values_;
    Vector curvature_;
    Scalar h_;
    Scalar x0_;
    SplineBoundary boundary_;
};

template <typename Scalar>
CubicSpline1D<Scalar> spline_build(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values, SplineBoundary boundary,
                                   Scalar spacing = Scalar(1), Scalar x0 = Scalar(0)) {
    return CubicSpline1D<Scalar>(values, spacing, boundary, x0);
}

/// Reusable kernel that shifts many lines of the same length: out[j] = S(j - shift),
/// S the cubic spline through `in`, `shift` in grid cells. Holds scratch
/// space, so give each thread its own copy.
template <typename Scalar = double>
class SplineShifter {
public:
    SplineShifter(std::size_t n, SplineBoundary boundary)
        : n_(n),
          boundary_(boundary),
          solver_(boundary == SplineBoundary::periodic ? n : (n >= 2 ? n - 2 : 0), Scalar(1), Scalar(4),
                  boundary == SplineBoundary::periodic),
          curvature_(n, Scalar(0)) {
        if (n < 4) throw std::invalid_argument("cubic spline needs at least 4 knots");
    }

    std::size_t size() const { return n_; }
    SplineBoundary boundary() const { return boundary_; }

    /// `in` and `out` must not alias. Natural boundary writes `fill` where the
    /// characteristic foot leaves [0, n-1].
    void shift(std::span<const Scalar> in, std::span<Scalar> out, Scalar shift, Scalar fill = Scalar(0)) {
        if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("spline shift: line length mismatch");
        const long n = static_cast<long>(n_);
        const Scalar back = -shift;
        const Scalar qf = std::floor(back);
        const Scalar t = back - qf;
        const long q = static_cast<long>(qf);

        if (t == Scalar(0)) {
            for (long j = 0; j < n; ++j) {
                long i = j + q;
                if (boundary_ == SplineBoundary::periodic) {
                    i %= n;
                    if (i < 0) i += n;
                    out[j] = in[i];
                } else {
                    out[j] = (i >= 0 && i < n) ? in[i] : fill;
                }
            }
            return;
        }

        if (boundary_ == SplineBoundary::periodic) {
            std::span<Scalar> m(curvature_.data(), n_);
            detail::second_difference_rhs<Scalar>(in, m, boundary_);
            solver_.solve(m);
        } else {
            curvature_.front() = curvature_.back() = Scalar(0);
            std::span<Scalar> m(curvature_.data() + 1, n_ - 2);
            detail::second_difference_rhs<Scalar>(in, m, boundary_);
            solver_.solve(m);
        }

        const Scalar u = Scalar(1) - t;
        const Scalar w0 = u, w1 = t;
        const Scalar c0 = (u * u * u - u) / Scalar(6);
        const Scalar c1 = (t * t * t - t) / Scalar(6);
        if (boundary_ == SplineBoundary::periodic) {
            long i = q % n;
            if (i < 0) i += n;
            for (long j = 0; j < n; ++j) {
                const long i1 = (i + 1 == n) ? 0 : i + 1;
                out[j] = w0 * in[i] + w1 * in[i1] + c0 * curvature_[i] + c1 * curvature_[i1];
                i = i1;
            }
        } else {
            for (long j = 0; j < n; ++j) {
                const long i = j + q;
                if (i < 0 || i + 1 > n - 1) {
                    out[j] = fill;
                } else {
                    out[j] = w0 * in[i] + w1 * in[i + 1] + c0 * curvature_[i] + c1 * curvature_[i + 1];
                }
            }
        }
    }

private:
    std::size_t n_;
    SplineBoundary boundary_;
    ConstantTridiagonal<Scalar> solver_;
    std::vector<Scalar> curvature_;
};

/// Values of the cubic spline through `values` at x_j - shift*dx for every knot j.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> spline_shift(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values,
                                                      Scalar shift, SplineBoundary boundary,
                                                      Scalar out_of_domain_fill = Scalar(0)) {
    const auto n = static_cast<std::size_t>(values.size());
    SplineShifter<Scalar> shifter(n, boundary);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(values.size());
    shifter.shift(std::span<const Scalar>(values.data(), n), std::span<Scalar>(out.data(), n), shift,
                  out_of_domain_fill);
    return out;
}

}  // namespace trisplit::numerics

#endif
