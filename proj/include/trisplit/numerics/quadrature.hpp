#ifndef TRISPLIT_NUMERICS_QUADRATURE_HPP
#define TRISPLIT_NUMERICS_QUADRATURE_HPP

#include <Eigen/Core>

#include <span>
#include <stdexcept>

namespace trisplit::numerics {

/// Composite trapezoid rule on uniformly spaced samples.
template <typename Scalar>
Scalar trapezoid(std::span<const Scalar> values, Scalar spacing) {
    if (values.size() < 2) throw std::invalid_argument("trapezoid: need at least two samples");
    Scalar sum = Scalar(0.5) * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * spacing;
}

template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::DenseBase<Derived>& values, typename Derived::Scalar spacing) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = values.size();
    if (n < 2) throw std::invalid_argument("trapezoid: need at least two samples");
    const Scalar inner = values.sum() - Scalar(0.5) * (values(0) + values(n - 1));
    return inner * spacing;
}

/// Trapezoid rule over one period of a periodic integrand sampled at n
/// points (the endpoint duplicate is implicit): spacing * sum.
template <typename Derived>
typename Derived::Scalar periodic_sum(const Eigen::DenseBase<Derived>& values, typename Derived::Scalar spacing) {
    return values.sum() * spacing;
}

}  // namespace trisplit::numerics

#endif
