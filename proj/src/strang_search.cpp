#include "trisplit/splitting.hpp"

#include <algorithm>
#include <cmath>

namespace trisplit {

namespace {

// c0 + c1*u + c2*v + c3*u*v
struct Bilinear {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    double operator()(double u, double v) const { return c0 + c1 * u + c2 * v + c3 * u * v; }
    Bilinear swapped() const { return {c0, c2, c1, c3}; }
};

// Affine parametrisation alpha(u, v) of the five nonzero entries that already
// satisfies the first-order conditions.
struct Parametrisation {
    std::array<bool, 9> zero{};
    std::array<int, 3> free_param_start{};  // first parameter index per column, -1 if fixed

    CoefficientMatrix alpha(double u, double v) const {
        const double p[2] = {u, v};
        CoefficientMatrix a = CoefficientMatrix::Zero(3, 3);
        for (int l = 0; l < 3; ++l) {
            std::vector<int> rows;
            for (int k = 0; k < 3; ++k) {
                if (!zero[3 * k + l]) rows.push_back(k);
            }
            double used = 0.0;
            for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
                const double x = p[free_param_start[l] + static_cast<int>(i)];
                a(rows[i], l) = x;
                used += x;
            }
            a(rows.back(), l) = 1.0 - used;
        }
        return a;
    }
};

std::array<double, 3> order2_residuals(const CoefficientMatrix& a) {
    std::array<double, 3> r{};
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int p = 0; p < 3; ++p) {
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            double tail = 0.0;
            for (int kk = k; kk < 3; ++kk) tail += a(kk, pairs[p][1]);
            sum += a(k, pairs[p][0]) * tail;
        }
        r[p] = sum - 0.5;
    }
    return r;
}

std::vector<double> real_roots(double a, double b, double c) {
    constexpr double tiny = 1e-12;
    if (std::abs(a) <= tiny) {
        if (std::abs(b) <= tiny) return {};
        return {-c / b};
    }
    const double disc = b * b - 4 * a * c;
    if (disc < -tiny) return {};
    const double sq = std::sqrt(std::max(0.0, disc));
    // numerically stable pair
    const double q = -0.5 * (b + std::copysign(sq, b));
    std::vector<double> roots;
    if (q != 0.0) roots.push_back(c / q);
    roots.push_back(q / a);
    if (q == 0.0) roots.push_back(0.0);
    return roots;
}

struct BilinearSolve {
    std::vector<std::pair<double, double>> points;
    bool family = false;
};

// Common zeros of three bilinear polynomials. Returns isolated points and
// flags a continuum of solutions.
BilinearSolve solve_by_eliminating_u(const std::array<Bilinear, 3>& eq, double tol, bool& degenerate) {
    BilinearSolve out;
    degenerate = true;
    for (int i = 0; i < 3 && degenerate; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            // (c0i + c2i v)(c1j + c3j v) - (c0j + c2j v)(c1i + c3i v)
            const auto& p = eq[i];
            const auto& q = eq[j];
            const double a2 = p.c2 * q.c3 - q.c2 * p.c3;
            const double a1 = p.c0 * q.c3 + p.c2 * q.c1 - q.c0 * p.c3 - q.c2 * p.c1;
            const double a0 = p.c0 * q.c1 - q.c0 * p.c1;
            if (std::max({std::abs(a2), std::abs(a1), std::abs(a0)}) <= 1e-12) continue;
            degenerate = false;
            for (double v : real_roots(a2, a1, a0)) {
                double best = 0.0;
                int pick = -1;
                for (int e = 0; e < 3; ++e) {
                    const double coef = eq[e].c1 + eq[e].c3 * v;
                    if (std::abs(coef) > best) {
                        best = std::abs(coef);
                        pick = e;
                    }
                }
                if (pick < 0 || best <= 1e-12) {
                    bool consistent = true;
                    for (const auto& e : eq) consistent = consistent && std::abs(e.c0 + e.c2 * v) <= tol;
                    if (consistent) out.family = true;
                    continue;
                }
                const double u = -(eq[pick].c0 + eq[pick].c2 * v) / (eq[pick].c1 + eq[pick].c3 * v);
                out.points.emplace_back(u, v);
            }
            break;
        }
    }
    return out;
}

BilinearSolve solve_bilinear(const std::array<Bilinear, 3>& eq, double tol) {
    bool degenerate = false;
    auto out = solve_by_eliminating_u(eq, tol, degenerate);
    if (!degenerate) return out;

    const std::array<Bilinear, 3> sw = {eq[0].swapped(), eq[1].swapped(), eq[2].swapped()};
    out = solve_by_eliminating_u(sw, tol, degenerate);
    for (auto& [u, v] : out.points) std::swap(u, v);
    if (!degenerate) return out;

    // Neither variable can be eliminated: every equation is constant in both.
    BilinearSolve constant;
    bool all_zero = true;
    for (const auto& e : eq) all_zero = all_zero && std::abs(e.c0) <= tol;
    constant.family = all_zero;
    return constant;
}

}  // namespace

MinimalSearchResult enumerate_minimal_os32_3(double tolerance) {
    MinimalSearchResult result;
    for (int mask = 0; mask < (1 << 9); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) != 4) continue;
        Parametrisation par;
        for (int i = 0; i < 9; ++i) par.zero[i] = (mask >> i) & 1;

        // first-order conditions forbid a column of three zeros
        bool admissible = true;
        int next_param = 0;
        for (int l = 0; l < 3; ++l) {
            int nonzero = 0;
            for (int k = 0; k < 3; ++k) nonzero += !par.zero[3 * k + l];
            if (nonzero == 0) admissible = false;
            par.free_param_start[l] = nonzero > 1 ? next_param : -1;
            next_param += std::max(0, nonzero - 1);
        }
        if (!admissible) continue;
        ++result.patterns_examined;

        std::array<Bilinear, 3> eq;
        {
            const auto r00 = order2_residuals(par.alpha(0, 0));
            const auto r10 = order2_residuals(par.alpha(1, 0));
            const auto r01 = order2_residuals(par.alpha(0, 1));
            const auto r11 = order2_residuals(par.alpha(1, 1));
            for (int e = 0; e < 3; ++e) {
                eq[e] = {r00[e], r10[e] - r00[e], r01[e] - r00[e], r11[e] - r10[e] - r01[e] + r00[e]};
            }
        }

        const auto solved = solve_bilinear(eq, tolerance);
        if (solved.family) ++result.patterns_with_free_family;

        for (auto [u, v] : solved.points) {
            // Newton polish on the (over-determined) system
            for (int it = 0; it < 8; ++it) {
                Eigen::Matrix<double, 3, 2> jac;
                Eigen::Vector3d res;
                for (int e = 0; e < 3; ++e) {
                    res(e) = eq[e](u, v);
                    jac(e, 0) = eq[e].c1 + eq[e].c3 * v;
                    jac(e, 1) = eq[e].c2 + eq[e].c3 * u;
                }
                const Eigen::Vector2d delta = jac.colPivHouseholderQr().solve(-res);
                if (!delta.allFinite()) break;
                u += delta(0);
                v += delta(1);
            }
            const CoefficientMatrix alpha = par.alpha(u, v);
            const SplittingMethod candidate{"candidate", alpha, std::nullopt, 2};
            const auto report = verify_order_conditions(candidate, tolerance);
            if (report.satisfied_to_order < 2) continue;
            if (count_subintegrations(candidate) != 5) continue;
            bool exact_zeros = true;
            for (int i = 0; i < 9; ++i) {
                if (!par.zero[i] && std::abs(alpha(i / 3, i % 3)) <= 1e-12) exact_zeros = false;
            }
            if (!exact_zeros) continue;
            result.solutions.push_back({par.zero, alpha, report.max_abs_residual});
        }
    }
    return result;
}

}  // namespace trisplit
