#include "trisplit/vlasov.hpp"

#include "trisplit/errors.hpp"
#include "trisplit/numerics/spline.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace trisplit::vlasov {

using numerics::SplineBoundary;
using numerics::SplineShifter;

namespace {

// Shifts `count` lines of length n laid out as base + line_offset(l) + i*stride.
// Each thread owns its shifter and scratch; line results are independent of
// the schedule, so the output is deterministic.
template <class Offset, class Shift>
void shift_lines(std::vector<double>& data, int count, int n, std::size_t stride, SplineBoundary boundary,
                 Offset&& line_offset, Shift&& shift_of) {
#pragma omp parallel
    {
        SplineShifter<double> shifter(static_cast<std::size_t>(n), boundary);
        std::vector<double> in(n), out(n);
#pragma omp for schedule(static)
        for (int l = 0; l < count; ++l) {
            const double s = shift_of(l);
            if (s == 0.0) continue;
            double* base = data.data() + line_offset(l);
            if (stride == 1) {
                std::copy(base, base + n, in.begin());
            } else {
                for (int i = 0; i < n; ++i) in[i] = base[i * stride];
            }
            shifter.shift(std::span<const double>(in), std::span<double>(out), s, 0.0);
            if (stride == 1) {
                std::copy(out.begin(), out.end(), base);
            } else {
                for (int i = 0; i < n; ++i) base[i * stride] = out[i];
            }
        }
    }
}

}  // namespace

Solver::Solver(EcdiConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

template <class F>
void Solver::timed(const char* name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    auto& t = timings_[name];
    t.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ++t.calls;
}

void Solver::advect_x(PhaseSpace& ps, double h) {
    const int nx = ps.x().nodes(), nvx = ps.vxe().nodes(), nvz = ps.vze().nodes(), nvi = ps.vxi().nodes();
    const double dx = ps.x().spacing();
    timed("x_electron", [&] {
        shift_lines(
            ps.f_e, nvx * nvz, nx, static_cast<std::size_t>(nvx) * nvz, SplineBoundary::periodic,
            [&](int l) { return static_cast<std::size_t>(l); }, [&](int l) { return ps.vxe()[l / nvz] * h / dx; });
    });
    timed("x_ion", [&] {
        shift_lines(
            ps.f_i, nvi, nx, static_cast<std::size_t>(nvi), SplineBoundary::periodic,
            [&](int l) { return static_cast<std::size_t>(l); }, [&](int l) { return ps.vxi()[l] * h / dx; });
    });
}

void Solver::advect_vz(PhaseSpace& ps, double h) {
    const int nx = ps.x().nodes(), nvx = ps.vxe().nodes(), nvz = ps.vze().nodes();
    const double dvz = ps.vze().spacing();
    const double a1 = cfg_.alpha1, a2 = cfg_.alpha2, a3 = cfg_.alpha3;
    timed("vz_electron", [&] {
        shift_lines(
            ps.f_e, nx * nvx, nvz, 1, SplineBoundary::natural,
            [&](int l) { return static_cast<std::size_t>(l) * nvz; },
            [&](int l) {
                const double az = -a1 * (a3 + ps.vxe()[l % nvx] * a2);
                return az * h / dvz;
            });
    });
}

void Solver::advect_vx(PhaseSpace& ps, double h) {
    const int nx = ps.x().nodes(), nvx = ps.vxe().nodes(), nvz = ps.vze().nodes(), nvi = ps.vxi().nodes();
    const double dvx = ps.vxe().spacing(), dvi = ps.vxi().spacing();
    const double a1 = cfg_.alpha1, a2 = cfg_.alpha2;
    timed("vx_electron", [&] {
        shift_lines(
            ps.f_e, nx * nvz, nvx, static_cast<std::size_t>(nvz), SplineBoundary::natural,
            [&](int l) { return static_cast<std::size_t>(l / nvz) * nvx * nvz + l % nvz; },
            [&](int l) {
                const double ax = -a1 * (ps.E(l / nvz) - ps.vze()[l % nvz] * a2);
                return ax * h / dvx;
            });
    });
    timed("vx_ion", [&] {
        shift_lines(
            ps.f_i, nx, nvi, 1, SplineBoundary::natural, [&](int l) { return static_cast<std::size_t>(l) * nvi; },
            [&](int l) { return ps.E(l) * h / dvi; });
    });
}

void Solver::solve_field(PhaseSpace& ps) {
    timed("field", [&] { ps.E = field_from_density(charge_density(ps), ps.x().spacing()); });
}

SubFlowSet<PhaseSpace> Solver::subflows() {
    SubFlowSet<PhaseSpace> set;
    set.flows = {[this](PhaseSpace& ps, double h) { advect_x(ps, h); },
                 [this](PhaseSpace& ps, double h) { advect_vz(ps, h); },
                 [this](PhaseSpace& ps, double h) { advect_vx(ps, h); }};
    if (cfg_.field_solve) set.stage_hook = [this](PhaseSpace& ps) { solve_field(ps); };
    set.hook_after_stage = 1;
    set.hook_after_operator = cfg_.field_after_operator;
    return set;
}

namespace {

void check_health(const PhaseSpace& ps, long step) {
    const auto [lo, hi] = std::minmax_element(ps.f_e.begin(), ps.f_e.end());
    const bool finite = std::isfinite(*lo) && std::isfinite(*hi) && ps.E.allFinite();
    if (!finite || *lo < -0.5 * *hi) {
        throw NumericalError("vlasov: solution blew up at step " + std::to_string(step) + " (t = " +
                             std::to_string(ps.t) + "): min f_e = " + std::to_string(*lo) +
                             ", max f_e = " + std::to_string(*hi) + (ps.E.allFinite() ? "" : ", E non-finite"));
    }
}

}  // namespace

RunResult run(const EcdiConfig& cfg) { return run(cfg, initialize(cfg)); }

RunResult run(const EcdiConfig& cfg, PhaseSpace ps) {
    const auto wall_start = std::chrono::steady_clock::now();
    const SplittingMethod method = builtin_method(cfg.method);
    Solver solver(cfg);
    const auto flows = solver.subflows();

    RunResult r;
    auto diagnostic_field = [&](const PhaseSpace& s) {
        return cfg.field_solve ? field_from_density(charge_density(s), s.x().spacing()) : s.E;
    };
    auto record_field = [&](double t, const Eigen::VectorXd& E) {
        r.field_times.push_back(t);
        r.field_modes.conservativeResize(static_cast<Eigen::Index>(r.field_times.size()), cfg.recorded_modes);
        r.field_modes.row(r.field_modes.rows() - 1) = field_mode_amplitudes(E, cfg.recorded_modes).transpose();
    };

    r.initial_particles = electron_count(ps);
    Eigen::VectorXd E = diagnostic_field(ps);
    r.times.push_back(ps.t);
    r.energy.push_back(energy_parts(ps, cfg.alpha1, E).total());
    record_field(ps.t, E);

    const double t0 = ps.t;
    const long n = step_count(t0, t0 + cfg.t_final, cfg.dt);
    double rate = work_rate(ps, cfg.alpha3);
    for (long i = 0; i < n; ++i) {
        const double h = (i + 1 == n) ? (t0 + cfg.t_final) - ps.t : cfg.dt;
        step(method, flows, ps, h);
        ps.t = (i + 1 == n) ? t0 + cfg.t_final : ps.t + h;
        const double next_rate = work_rate(ps, cfg.alpha3);
        ps.work_integral += 0.5 * h * (rate + next_rate);
        rate = next_rate;
        check_health(ps, i + 1);

        E = diagnostic_field(ps);
        r.times.push_back(ps.t);
        r.energy.push_back(energy_parts(ps, cfg.alpha1, E).total());
        if ((i + 1) % cfg.field_stride == 0 || i + 1 == n) record_field(ps.t, E);
    }
    ps.E = E;
    r.steps = n;
    r.deviation = energy_deviation(r.energy);
    r.final_particles = electron_count(ps);
    r.timings = solver.timings();
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    r.final_state = std::move(ps);
    return r;
}

}  // namespace trisplit::vlasov
