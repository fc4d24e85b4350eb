#ifndef TRISPLIT_NUMERICS_EXPM_HPP
#define TRISPLIT_NUMERICS_EXPM_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <utility>

namespace trisplit::numerics {

inline constexpr Eigen::Index kMaxExpmDimension = 4096;

namespace detail {

template <typename Matrix>
std::pair<Matrix, Matrix> pade_uv(const Matrix& A, int degree) {
    using Scalar = typename Matrix::Scalar;
    const Eigen::Index n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    if (degree == 13) {
        static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                       1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                       670442572800.0,      33522128640.0,       1323241920.0,
                                       40840800.0,          960960.0,            16380.0,
                                       182.0,               1.0};
        const Matrix A4 = A2 * A2;
        const Matrix A6 = A4 * A2;
        Matrix tmp = Scalar(b[13]) * A6 + Scalar(b[11]) * A4 + Scalar(b[9]) * A2;
        const Matrix U = A * (A6 * tmp + Scalar(b[7]) * A6 + Scalar(b[5]) * A4 + Scalar(b[3]) * A2 +
                              Scalar(b[1]) * I);
        tmp = Scalar(b[12]) * A6 + Scalar(b[10]) * A4 + Scalar(b[8]) * A2;
        const Matrix V = A6 * tmp + Scalar(b[6]) * A6 + Scalar(b[4]) * A4 + Scalar(b[2]) * A2 + Scalar(b[0]) * I;
        return {U, V};
    }
    static constexpr double b3[] = {120.0, 60.0, 12.0, 1.0};
    static constexpr double b5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
    static constexpr double b7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
    static constexpr double b9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                    2162160.0,     110880.0,     3960.0,       90.0,        1.0};
    const double* b = degree == 3 ? b3 : degree == 5 ? b5 : degree == 7 ? b7 : b9;
    // odd powers -> U, even powers -> V
    Matrix power = I;
    Matrix Usum = Scalar(b[1]) * I;
    Matrix Vsum = Scalar(b[0]) * I;
    for (int k = 2; k <= degree; k += 2) {
        power = power * A2;
        Usum += Scalar(b[k + 1]) * power;
        Vsum += Scalar(b[k]) * power;
    }
    return {A * Usum, Vsum};
}

}  // namespace detail

/// Matrix exponential by scaling and squaring with a diagonal Pade core of
/// degree 3..13 chosen from the 1-norm.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm(const Eigen::MatrixBase<Derived>& A) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (A.rows() != A.cols()) throw std::invalid_argument("expm: matrix must be square");
    if (A.rows() > kMaxExpmDimension) throw std::length_error("expm: dimension exceeds supported maximum");
    const Eigen::Index n = A.rows();
    if (n == 0) return Matrix(0, 0);

    const Matrix M = A;
    if (!M.allFinite()) throw std::domain_error("expm: non-finite matrix entries");
    const double norm = static_cast<double>(M.cwiseAbs().colwise().sum().maxCoeff());

    static constexpr std::pair<int, double> small[] = {
        {3, 1.495585217958292e-2}, {5, 2.539398330063230e-1}, {7, 9.504178996162932e-1}, {9, 2.097847961257068e0}};
    for (const auto& [degree, theta] : small) {
        if (norm <= theta) {
            const auto [U, V] = detail::pade_uv(M, degree);
            return (V - U).partialPivLu().solve(V + U);
        }
    }

    constexpr double theta13 = 5.371920351148152e0;
    int squarings = 0;
    if (norm > theta13) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    const Matrix scaled = M * Scalar(std::ldexp(1.0, -squarings));
    const auto [U, V] = detail::pade_uv(scaled, 13);
    Matrix R = (V - U).partialPivLu().solve(V + U);
    for (int i = 0; i < squarings; ++i) R = R * R;
    return R;
}

/// e^{hA}.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm_action(const Eigen::MatrixBase<Derived>& A,
                                                                                   typename Derived::Scalar h) {
    using Matrix = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (h == 0) {
        if (A.rows() != A.cols()) throw std::invalid_argument("expm: matrix must be square");
        return Matrix::Identity(A.rows(), A.cols());
    }
    return expm(Matrix(A * h));
}

/// e^{hA} memoised per (operator id, h). Concurrent lookups share a lock;
/// inserts are exclusive.
template <typename Scalar = double>
class ExpmCache {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    std::shared_ptr<const Matrix> get(std::uint64_t operator_id, const Matrix& A, Scalar h) {
        const Key key{operator_id, h};
        {
            std::shared_lock lock(mutex_);
            if (auto it = entries_.find(key); it != entries_.end()) return it->second;
        }
        auto value = std::make_shared<const Matrix>(expm_action(A, h));
        std::unique_lock lock(mutex_);
        return entries_.try_emplace(key, std::move(value)).first->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

    void clear() {
        std::unique_lock lock(mutex_);
        entries_.clear();
    }

private:
    using Key = std::pair<std::uint64_t, Scalar>;
    mutable std::shared_mutex mutex_;
    std::map<Key, std::shared_ptr<const Matrix>> entries_;
};

}  // namespace trisplit::numerics

#endif
