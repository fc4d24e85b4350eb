#ifndef TRISPLIT_HARNESS_HPP
#define TRISPLIT_HARNESS_HPP

#include "trisplit/splitting.hpp"

#include <functional>
#include <string>
#include <vector>

/// Timing protocol, efficiency model and step-size search.
namespace trisplit::harness {

/// One point of a work-precision diagram. `metric` names the error measure
/// ("mrms", "max_deltaU_percent", ...).
struct WorkPrecisionRecord {
    std::string method;
    double dt = 0.0;
    long steps = 0;
    std::string metric;
    double error = 0.0;
    double wall_seconds = 0.0;  // minimum over repeats
    int repeats = 1;

    bool operator==(const WorkPrecisionRecord&) const = default;
};

/// eta = 1 - (1 + rho) / delta. Throws std::invalid_argument for delta <= 0.
double efficiency_gain(double delta, double rho);

/// rho = sum(extra_seconds) / strang_step_seconds.
double extra_time_fraction(const std::vector<double>& extra_seconds, double strang_step_seconds);

struct ExtraTime {
    std::vector<int> extra_calls;  // k_psi - k_strang per operator (may be negative)
    double extra_seconds = 0.0;
    double rho = 0.0;
};

/// Extra cost of `psi` over `strang` per step: the per-operator difference in
/// sub-integration counts weighted by the measured seconds per call of each
/// operator, relative to the Strang step time. Throws std::domain_error if
/// psi has fewer sub-integrations in total than strang.
ExtraTime extra_time_fraction(const SplittingMethod& psi, const SplittingMethod& strang,
                              const std::vector<double>& seconds_per_call, double strang_step_seconds);

struct TimingResult {
    std::vector<double> samples;
    double min = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

/// Runs `closure` once untimed, then `repeats` times on a monotonic clock.
/// Exceptions from the closure propagate.
TimingResult timing_protocol(const std::function<void()>& closure, int repeats = 10);

struct DtSearch {
    double dt = 0.0;           // largest dt found to meet the target
    double error = 0.0;        // error at dt
    double upper = 0.0;        // smallest dt seen to miss the target (0 if none)
    bool at_bracket_top = false;
    std::vector<std::pair<double, double>> evaluations;  // (dt, error) in call order
    // pairs (dt_small, dt_large) where the error went down as dt grew
    std::vector<std::pair<double, double>> monotonicity_violations;
};

/// Largest dt in [dt_lo, dt_hi] with error(dt) <= target, by bisection until
/// the bracket is narrower than `relative_width` of its lower end. Throws
/// NumericalError if error(dt_lo) already misses the target.
DtSearch largest_dt_for_target(const std::function<double(double)>& error_of_dt, double target, double dt_lo,
                               double dt_hi, double relative_width = 0.005);

}  // namespace trisplit::harness

#endif
