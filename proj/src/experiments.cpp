#include "trisplit/experiments.hpp"

#include "trisplit/errors.hpp"
#include "trisplit/report.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <iomanip>
#include <sstream>

namespace trisplit::experiments {

using brusselator::NonlinearMode;

void apply(BrusselatorSettings& s, const KeyValueConfig& kv) {
    auto& c = s.config;
    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"alpha", [&](const std::string& k) { c.alpha = kv.get_double(k); }},
        {"beta", [&](const std::string& k) { c.beta = kv.get_double(k); }},
        {"D1", [&](const std::string& k) { c.D1 = kv.get_double(k); }},
        {"D2", [&](const std::string& k) { c.D2 = kv.get_double(k); }},
        {"M", [&](const std::string& k) { c.M = static_cast<int>(kv.get_int(k)); }},
        {"t_final", [&](const std::string& k) { c.t_final = kv.get_double(k); }},
        {"nonlinear",
         [&](const std::string& k) {
             const auto v = kv.get_string(k);
             if (v == "adaptive") {
                 s.mode = NonlinearMode::adaptive;
             } else if (v == "closed_form") {
                 s.mode = NonlinearMode::implicit_closed_form;
             } else {
                 throw ConfigError("nonlinear must be 'adaptive' or 'closed_form', got '" + v + "'");
             }
         }},
    };
    for (const auto& [key, value] : kv.entries()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown brusselator config key '" + key + "'");
        it->second(key);
    }
    c.validate();
}

std::string describe(const BrusselatorSettings& s) {
    std::ostringstream o;
    o << std::setprecision(17) << "alpha = " << s.config.alpha << "\nbeta = " << s.config.beta
      << "\nD1 = " << s.config.D1 << "\nD2 = " << s.config.D2 << "\nM = " << s.config.M
      << "\nt_final = " << s.config.t_final
      << "\nnonlinear = " << (s.mode == NonlinearMode::adaptive ? "adaptive" : "closed_form") << "\n";
    return o.str();
}

namespace {

WorkPrecisionRecord timed_run(const brusselator::Problem& p, const BrusselatorSettings& s, const std::string& name,
                              double dt, const Eigen::VectorXd& reference, int repeats) {
    const auto method = builtin_method(name);
    brusselator::RunResult last;
    const auto t = harness::timing_protocol([&] { last = brusselator::run(p, method, dt, s.mode); }, repeats);
    return {name, dt, last.steps, "mrms", brusselator::mrms_error(p.sample(last.state), reference), t.min, repeats};
}

}  // namespace

ConvergenceStudy brusselator_convergence(const BrusselatorSettings& s, const std::vector<std::string>& methods,
                                         const std::vector<double>& dts, const Eigen::VectorXd& reference,
                                         int repeats) {
    const brusselator::Problem p(s.config);
    ConvergenceStudy out;
    for (const auto& m : methods) {
        std::vector<std::pair<double, double>> errs;
        for (double dt : dts) {
            out.records.push_back(timed_run(p, s, m, dt, reference, repeats));
            errs.emplace_back(dt, out.records.back().error);
        }
        if (errs.size() >= 2) {
            out.pairwise_order[m] = brusselator::convergence_order(errs);
            if (auto slope = report::loglog_slope(errs)) out.slope[m] = *slope;
        }
    }
    return out;
}

std::vector<StepRatio> brusselator_step_ratios(const BrusselatorSettings& s, const std::string& psi,
                                               const std::string& strang, std::vector<double> targets,
                                               const Eigen::VectorXd& reference, double dt_max) {
    const brusselator::Problem p(s.config);
    std::sort(targets.begin(), targets.end(), std::greater<>());

    auto search = [&](const std::string& name, double target, double hi) {
        const auto method = builtin_method(name);
        auto err = [&](double dt) {
            return brusselator::mrms_error(p.sample(brusselator::run(p, method, dt, s.mode).state), reference);
        };
        // errors fall roughly like dt^2, so a quarter of the cap is usually
        // already below the target; widen downwards if it is not
        double lo = hi / 4;
        for (int attempt = 0;; ++attempt) {
            try {
                return harness::largest_dt_for_target(err, target, lo, hi);
            } catch (const NumericalError&) {
                if (attempt == 4) throw;
                hi = lo;
                lo /= 4;
            }
        }
    };

    std::vector<StepRatio> out;
    double cap_psi = dt_max, cap_strang = dt_max;
    for (double target : targets) {
        StepRatio r;
        r.target = target;
        r.psi = search(psi, target, cap_psi);
        r.strang = search(strang, target, cap_strang);
        r.delta = r.psi.dt / r.strang.dt;
        cap_psi = r.psi.dt;
        cap_strang = r.strang.dt;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<EfficiencyRow> brusselator_efficiency(const BrusselatorSettings& s, const std::string& psi,
                                                  const std::string& strang, const std::vector<StepRatio>& ratios,
                                                  const Eigen::VectorXd& reference, int repeats) {
    const brusselator::Problem p(s.config);
    std::vector<EfficiencyRow> out;
    for (const auto& r : ratios) {
        EfficiencyRow row;
        row.target = r.target;
        row.strang = timed_run(p, s, strang, r.strang.dt, reference, repeats);
        row.psi = timed_run(p, s, psi, r.psi.dt, reference, repeats);
        row.delta = r.delta;
        row.time_saved = 1.0 - row.psi.wall_seconds / row.strang.wall_seconds;
        const double step_psi = row.psi.wall_seconds / row.psi.steps;
        const double step_strang = row.strang.wall_seconds / row.strang.steps;
        row.rho = step_psi / step_strang - 1.0;
        row.eta = harness::efficiency_gain(row.delta, row.rho);
        out.push_back(std::move(row));
    }
    return out;
}

vlasov::EcdiConfig vlasov_preset(const std::string& name) {
    if (name == "desk") return vlasov::EcdiConfig::desk();
    if (name == "two_stream") return vlasov::EcdiConfig::two_stream();
    if (name == "default") return vlasov::EcdiConfig{};
    throw ConfigError("unknown vlasov preset '" + name + "' (expected desk, two_stream or default)");
}

vlasov::EcdiConfig vlasov_config(const KeyValueConfig& kv) {
    auto cfg = vlasov_preset(kv.contains("preset") ? kv.get_string("preset") : "desk");
    vlasov::apply(cfg, kv);
    cfg.validate();
    return cfg;
}

VlasovCost vlasov_cost(const vlasov::RunResult& r) {
    VlasovCost c;
    const std::array<std::array<const char*, 2>, 3> groups = {
        {{"x_electron", "x_ion"}, {"vz_electron", nullptr}, {"vx_electron", "vx_ion"}}};
    for (const auto& g : groups) {
        double seconds = 0.0;
        long calls = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g[i]) continue;
            auto it = r.timings.find(g[i]);
            if (it == r.timings.end()) continue;
            seconds += it->second.seconds;
            // electrons and ions share one sub-flow call; count the electron timer
            if (i == 0) calls = it->second.calls;
        }
        c.seconds_per_call.push_back(calls > 0 ? seconds / calls : 0.0);
    }
    if (r.steps <= 0) throw std::invalid_argument("vlasov_cost: run has no steps");
    c.step_seconds = r.wall_seconds / r.steps;
    return c;
}

VlasovEfficiency vlasov_efficiency(const vlasov::RunResult& strang_run, const SplittingMethod& psi,
                                   const SplittingMethod& strang, double delta) {
    VlasovEfficiency e;
    e.strang_cost = vlasov_cost(strang_run);
    e.extra = harness::extra_time_fraction(psi, strang, e.strang_cost.seconds_per_call, e.strang_cost.step_seconds);
    e.delta = delta;
    e.eta = harness::efficiency_gain(delta, e.extra.rho);
    return e;
}

GrowthStudy vlasov_growth(const vlasov::EcdiConfig& cfg, const std::vector<int>& modes, double t_begin, double t_end) {
    GrowthStudy g;
    g.run = vlasov::run(cfg);
    g.fits = vlasov::growth_rates(g.run.field_times, g.run.field_modes, modes, t_begin, t_end);

    // amplitude at the last sample inside the window
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < g.run.field_times.size(); ++i) {
        if (g.run.field_times[i] <= t_end) row = static_cast<Eigen::Index>(i);
    }
    double best = -1.0;
    for (int m : modes) {
        if (g.run.field_modes(row, m) > best) {
            best = g.run.field_modes(row, m);
            g.dominant_mode = m;
        }
    }
    return g;
}

}  // namespace trisplit::experiments
