#ifndef TRISPLIT_ERRORS_HPP
#define TRISPLIT_ERRORS_HPP

#include <stdexcept>

namespace trisplit {

/// A computation that cannot produce a trustworthy number: divergence,
/// non-convergence, a missing bracket, a blown-up state.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace trisplit

#endif
