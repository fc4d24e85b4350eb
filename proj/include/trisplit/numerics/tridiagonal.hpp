#ifndef TRISPLIT_NUMERICS_TRIDIAGONAL_HPP
#define TRISPLIT_NUMERICS_TRIDIAGONAL_HPP

#include <cassert>
#include <span>
#include <vector>

namespace trisplit::numerics {

/// Thomas algorithm for a general tridiagonal system. `lower[i]` multiplies
/// x[i-1] in row i (lower[0] unused), `upper[i]` multiplies x[i+1]
/// (upper[n-1] unused). Overwrites `rhs` with the solution.
template <typename Scalar>
void solve_tridiagonal(std::span<const Scalar> lower, std::span<const Scalar> diag, std::span<const Scalar> upper,
                       std::span<Scalar> rhs) {
    const std::size_t n = diag.size();
    assert(lower.size() == n && upper.size() == n && rhs.size() == n);
    if (n == 0) return;
    std::vector<Scalar> c(n);
    Scalar denom = diag[0];
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * c[i - 1];
        c[i] = (i + 1 < n) ? upper[i] / denom : Scalar(0);
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

/// Pre-factored constant-coefficient system (off, diag, off), optionally
/// cyclic (corner entries equal to `off`). Used for uniform cubic splines
/// where one factorisation serves every line.
template <typename Scalar>
class ConstantTridiagonal {
public:
    ConstantTridiagonal() = default;

    ConstantTridiagonal(std::size_t n, Scalar off, Scalar diag, bool cyclic)
        : n_(n), off_(off), cyclic_(cyclic) {
        if (n_ == 0) return;
        if (!cyclic_ || n_ < 3) {
            factor(diag, diag, diag);
            return;
        }
        // Sherman-Morrison: A = B + u v^T with u = (gamma, 0, ..., 0, off),
        // v = (1, 0, ..., 0, off / gamma).
        gamma_ = -diag;
        factor(diag - gamma_, diag, diag - off_ * off_ / gamma_);
        z_.assign(n_, Scalar(0));
        z_[0] = gamma_;
        z_[n_ - 1] = off_;
        solve_factored(z_);
        zfact_ = Scalar(1) / (Scalar(1) + z_[0] + off_ * z_[n_ - 1] / gamma_);
    }

    std::size_t size() const { return n_; }

    /// Overwrites `x` (the right-hand side) with the solution.
    void solve(std::span<Scalar> x) const {
        assert(x.size() == n_);
        solve_factored(x);
        if (cyclic_ && n_ >= 3) {
            const Scalar f = (x[0] + off_ * x[n_ - 1] / gamma_) * zfact_;
            for (std::size_t i = 0; i < n_; ++i) x[i] -= f * z_[i];
        }
    }

private:
    void factor(Scalar first_diag, Scalar interior_diag, Scalar last_diag) {
        cprime_.assign(n_, Scalar(0));
        inv_denom_.assign(n_, Scalar(0));
        Scalar denom = first_diag;
        inv_denom_[0] = Scalar(1) / denom;
        cprime_[0] = off_ * inv_denom_[0];
        for (std::size_t i = 1; i < n_; ++i) {
            const Scalar d = (i + 1 == n_) ? last_diag : interior_diag;
            denom = d - off_ * cprime_[i - 1];
            inv_denom_[i] = Scalar(1) / denom;
            cprime_[i] = off_ * inv_denom_[i];
        }
    }

    template <class Vec>
    void solve_factored(Vec& x) const {
        x[0] *= inv_denom_[0];
        for (std::size_t i = 1; i < n_; ++i) x[i] = (x[i] - off_ * x[i - 1]) * inv_denom_[i];
        for (std::size_t i = n_ - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
    }

    std::size_t n_ = 0;
    Scalar off_{};
    bool cyclic_ = false;
    Scalar gamma_{};
    std::vector<Scalar> cprime_, inv_denom_, z_;
    Scalar zfact_{};
};

}  // namespace trisplit::numerics

#endif
