#include "trisplit/harness.hpp"

#include "trisplit/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trisplit::harness {

double efficiency_gain(double delta, double rho) {
    if (!(delta > 0.0)) throw std::invalid_argument("efficiency_gain: step-size ratio must be positive");
    return 1.0 - (1.0 + rho) / delta;
}

double extra_time_fraction(const std::vector<double>& extra_seconds, double strang_step_seconds) {
    if (!(strang_step_seconds > 0.0)) {
        throw std::invalid_argument("extra_time_fraction: Strang step time must be positive");
    }
    return std::accumulate(extra_seconds.begin(), extra_seconds.end(), 0.0) / strang_step_seconds;
}

ExtraTime extra_time_fraction(const SplittingMethod& psi, const SplittingMethod& strang,
                              const std::vector<double>& seconds_per_call, double strang_step_seconds) {
    if (psi.num_operators() != strang.num_operators() ||
        static_cast<int>(seconds_per_call.size()) != psi.num_operators()) {
        throw std::invalid_argument("extra_time_fraction: operator counts do not match");
    }
    const int kpsi = count_subintegrations(psi), ks = count_subintegrations(strang);
    if (kpsi < ks) {
        throw std::domain_error("extra_time_fraction: " + psi.name + " has fewer sub-integrations (" +
                                std::to_string(kpsi) + ") than " + strang.name + " (" + std::to_string(ks) + ")");
    }
    const auto cp = subintegrations_per_operator(psi);
    const auto cs = subintegrations_per_operator(strang);
    ExtraTime out;
    std::vector<double> extra;
    for (std::size_t j = 0; j < cp.size(); ++j) {
        out.extra_calls.push_back(cp[j] - cs[j]);
        extra.push_back(out.extra_calls.back() * seconds_per_call[j]);
    }
    out.extra_seconds = std::accumulate(extra.begin(), extra.end(), 0.0);
    out.rho = extra_time_fraction(extra, strang_step_seconds);
    return out;
}

TimingResult timing_protocol(const std::function<void()>& closure, int repeats) {
    if (repeats < 1) throw std::invalid_argument("timing_protocol: repeats must be at least 1");
    closure();  // warm-up

    TimingResult r;
    for (int i = 0; i < repeats; ++i) {
        const auto start = std::chrono::steady_clock::now();
        closure();
        r.samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    r.min = *std::min_element(r.samples.begin(), r.samples.end());
    r.mean = std::accumulate(r.samples.begin(), r.samples.end(), 0.0) / repeats;
    if (repeats > 1) {
        double ss = 0.0;
        for (double s : r.samples) ss += (s - r.mean) * (s - r.mean);
        r.stddev = std::sqrt(ss / (repeats - 1));
    }
    return r;
}

DtSearch largest_dt_for_target(const std::function<double(double)>& error_of_dt, double target, double dt_lo,
                               double dt_hi, double relative_width) {
    if (!(dt_lo > 0.0) || !(dt_hi > dt_lo)) throw std::invalid_argument("largest_dt_for_target: need 0 < dt_lo < dt_hi");
    if (!(relative_width > 0.0)) throw std::invalid_argument("largest_dt_for_target: relative_width must be positive");

    DtSearch s;
    auto eval = [&](double dt) {
        const double e = error_of_dt(dt);
        if (!std::isfinite(e)) throw NumericalError("largest_dt_for_target: non-finite error at dt = " + std::to_string(dt));
        s.evaluations.emplace_back(dt, e);
        return e;
    };

    double e_lo = eval(dt_lo);
    if (e_lo > target) {
        throw NumericalError("largest_dt_for_target: target " + std::to_string(target) +
                             " not reached even at dt = " + std::to_string(dt_lo) + " (error " +
                             std::to_string(e_lo) + ")");
    }
    const double e_hi = eval(dt_hi);
    double lo = dt_lo, hi = dt_hi;
    if (e_hi <= target) {
        s.at_bracket_top = true;
        lo = dt_hi;
        e_lo = e_hi;
    } else {
        while ((hi - lo) > relative_width * lo) {
            const double mid = 0.5 * (lo + hi);
            const double e = eval(mid);
            if (e <= target) {
                lo = mid;
                e_lo = e;
            } else {
                hi = mid;
            }
        }
        s.upper = hi;
    }
    s.dt = lo;
    s.error = e_lo;

    auto sorted = s.evaluations;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].second < sorted[i - 1].second) s.monotonicity_violations.emplace_back(sorted[i - 1].first, sorted[i].first);
    }
    return s;
}

}  // namespace trisplit::harness
