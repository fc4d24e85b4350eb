// trisplit: command-line front end for the splitting workbench.
//
// Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
// computation fails (blow-up, no convergence, unmet order conditions) or an
// output cannot be written.

#include "trisplit/brusselator.hpp"
#include "trisplit/errors.hpp"
#include "trisplit/experiments.hpp"
#include "trisplit/report.hpp"
#include "trisplit/splitting.hpp"
#include "trisplit/vlasov.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace trisplit;

namespace {

struct Options {
    std::string config;
    std::vector<std::string> overrides;
    std::vector<double> dts;
    std::vector<std::string> methods;
    int repeats = 0;  // 0 picks the subcommand default
    std::string output_dir = "trisplit_output";

    // subcommand specific
    bool minimal = false;
    std::string reference = "semidiscrete";
    std::vector<double> targets = {5, 4, 3, 2, 1, 0.5};
    double dt_max = 0.6;
    bool snapshot = false;
    std::vector<double> window = {1.0, 4.0};
    std::vector<int> modes = {1, 2, 3};
    double delta = 1.4;
    std::string input;
    std::string format = "both";
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

KeyValueConfig load_config(const Options& o) {
    KeyValueConfig kv = o.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(o.config);
    for (const auto& s : o.overrides) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
        auto trim = [](std::string x) {
            x.erase(0, x.find_first_not_of(" \t"));
            x.erase(x.find_last_not_of(" \t") + 1);
            return x;
        };
        kv.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return kv;
}

fs::path output_dir(const Options& o) {
    fs::path dir(o.output_dir);
    fs::create_directories(dir);
    return dir;
}

int repeats_or(const Options& o, int fallback) { return o.repeats > 0 ? o.repeats : fallback; }

std::string file_stem(std::string name) {
    for (char& c : name) {
        if (c == '(' || c == ')' || c == '-' || c == ' ') c = '_';
    }
    while (!name.empty() && name.back() == '_') name.pop_back();
    return name;
}

// -- coeffs -------------------------------------------------------------------

int coeffs_list(const Options& o) {
    const auto names = o.methods.empty() ? builtin_method_names() : o.methods;
    std::vector<SplittingMethod> methods;
    std::printf("%-16s %6s %6s %6s %8s\n", "method", "stages", "order", "subint", "LEM");
    for (const auto& n : names) {
        methods.push_back(builtin_method(n));
        const auto& m = methods.back();
        std::printf("%-16s %6d %6d %6d %8s\n", m.name.c_str(), m.num_stages(), m.declared_order,
                    count_subintegrations(m), m.lem ? std::to_string(*m.lem).substr(0, 6).c_str() : "-");
    }
    const auto path = output_dir(o) / "coefficients.csv";
    report::write_text(path, coefficient_catalog_csv(methods));
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int coeffs_verify(const Options& o) {
    const auto names = o.methods.empty() ? builtin_method_names() : o.methods;
    bool ok = true;
    std::printf("%-16s %8s %10s %14s\n", "method", "declared", "satisfied", "max residual");
    for (const auto& n : names) {
        const auto m = builtin_method(n);
        const auto r = verify_order_conditions(m);
        const bool pass = r.satisfied_to_order >= m.declared_order;
        ok = ok && pass;
        std::printf("%-16s %8d %10d %14.3e %s\n", m.name.c_str(), m.declared_order, r.satisfied_to_order,
                    r.max_abs_residual, pass ? "ok" : "FAILED");
    }
    if (o.minimal) {
        const auto res = enumerate_minimal_os32_3();
        std::printf("\n5-sub-integration 3-stage methods: %zu solutions over %d zero patterns\n",
                    res.solutions.size(), res.patterns_examined);
        for (const auto& s : res.solutions) {
            const auto order = matching_strang_order(s.alpha);
            std::printf("  residual %.2e  ", s.residual);
            if (order) {
                std::printf("equals Strang(%d-%d-%d)\n", (*order)[0], (*order)[1], (*order)[2]);
            } else {
                std::printf("NOT a Strang permutation\n");
                ok = false;
            }
        }
    }
    return ok ? 0 : 2;
}

// -- brusselator ----------------------------------------------------------------

experiments::BrusselatorSettings brusselator_settings(const Options& o) {
    experiments::BrusselatorSettings s;
    experiments::apply(s, load_config(o));
    return s;
}

Eigen::VectorXd brusselator_reference(const Options& o, const experiments::BrusselatorSettings& s) {
    if (o.reference == "semidiscrete") return brusselator::semidiscrete_reference(s.config);
    if (o.reference == "converged") {
        brusselator::ReferenceOptions ro;
        ro.cache_file = output_dir(o) / "brusselator_reference.csv";
        const auto ref = brusselator::reference_solution(s.config, ro);
        std::printf("reference: %s, grids up to M = %d, last relative difference %.2e\n",
                    ref.from_cache ? "cached" : "computed", ref.grids.empty() ? 0 : ref.grids.back(),
                    ref.max_relative_difference);
        return ref.samples;
    }
    throw UsageError("--reference must be 'semidiscrete' or 'converged'");
}

int brusselator_converge(const Options& o) {
    const auto s = brusselator_settings(o);
    const auto methods = o.methods.empty() ? std::vector<std::string>{"Strang(1-2-3)", "AK32i", "AK32ii", "AK52"}
                                           : o.methods;
    const auto dts = o.dts.empty() ? std::vector<double>{0.2, 0.1, 0.05, 0.025} : o.dts;
    const auto ref = brusselator_reference(o, s);
    const auto study = experiments::brusselator_convergence(s, methods, dts, ref, repeats_or(o, 1));

    std::printf("%-16s %10s %8s %14s %12s\n", "method", "dt", "steps", "mrms", "wall [s]");
    for (const auto& r : study.records) {
        std::printf("%-16s %10.5g %8ld %14.6e %12.4f\n", r.method.c_str(), r.dt, r.steps, r.error, r.wall_seconds);
    }
    std::printf("\nobserved order (consecutive pairs, then least-squares slope)\n");
    for (const auto& [m, p] : study.pairwise_order) {
        std::printf("%-16s", m.c_str());
        for (double v : p) std::printf(" %7.3f", v);
        std::printf("   slope %.3f\n", study.slope.at(m));
    }

    const auto dir = output_dir(o);
    report::write_text(dir / "brusselator_convergence.csv", report::brusselator_csv(study.records));
    for (const auto& p : report::emit_report(study.records, report::Format::csv, dir, "brusselator_records")) {
        std::printf("wrote %s\n", p.c_str());
    }
    for (const auto& p : report::emit_report(study.records, report::Format::svg, dir, "brusselator")) {
        std::printf("wrote %s\n", p.c_str());
    }
    std::printf("wrote %s\n", (dir / "brusselator_convergence.csv").c_str());
    return 0;
}

int brusselator_efficiency(const Options& o) {
    const auto s = brusselator_settings(o);
    if (!o.methods.empty() && o.methods.size() != 2) {
        throw UsageError("brusselator efficiency takes two methods: --method <candidate> --method <Strang variant>");
    }
    const std::string psi = o.methods.empty() ? "AK32i" : o.methods[0];
    const std::string strang = o.methods.empty() ? "Strang(2-3-1)" : o.methods[1];
    const auto ref = brusselator_reference(o, s);

    std::vector<double> targets;
    for (double t : o.targets) targets.push_back(t / 100.0);
    const auto ratios = experiments::brusselator_step_ratios(s, psi, strang, targets, ref, o.dt_max);
    for (const auto& r : ratios) {
        for (const auto* search : {&r.psi, &r.strang}) {
            for (auto [a, b] : search->monotonicity_violations) {
                std::printf("warning: error not monotone in dt between %.6g and %.6g (target %.2f%%)\n", a, b,
                            100 * r.target);
            }
        }
    }
    const auto rows = experiments::brusselator_efficiency(s, psi, strang, ratios, ref, repeats_or(o, 10));

    std::printf("%-8s %12s %12s %8s %12s %12s %10s %8s %8s\n", "MRMS %", ("dt " + strang).c_str(),
                ("dt " + psi).c_str(), "delta", "wall S [s]", "wall P [s]", "saved %", "rho", "eta");
    std::string csv = "target_percent,dt_strang,dt_psi,delta,wall_strang,wall_psi,time_saved_percent,rho,eta\n";
    std::vector<report::WorkPrecisionRecord> records;
    for (const auto& r : rows) {
        std::printf("%-8.2f %12.6f %12.6f %8.4f %12.4f %12.4f %10.2f %8.4f %8.4f\n", 100 * r.target, r.strang.dt,
                    r.psi.dt, r.delta, r.strang.wall_seconds, r.psi.wall_seconds, 100 * r.time_saved, r.rho, r.eta);
        char line[512];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", 100 * r.target,
                      r.strang.dt, r.psi.dt, r.delta, r.strang.wall_seconds, r.psi.wall_seconds, 100 * r.time_saved,
                      r.rho, r.eta);
        csv += line;
        records.push_back(r.strang);
        records.push_back(r.psi);
    }
    const auto dir = output_dir(o);
    report::write_text(dir / "brusselator_efficiency.csv", csv);
    report::write_text(dir / "brusselator_work_precision.csv", report::brusselator_csv(records));
    report::write_text(dir / "brusselator_work_precision.svg",
                       report::render_svg(report::work_precision_plot(records)));
    std::printf("wrote %s, brusselator_work_precision.csv and .svg in %s\n",
                (dir / "brusselator_efficiency.csv").c_str(), dir.c_str());
    return 0;
}

// -- vlasov -------------------------------------------------------------------

vlasov::EcdiConfig vlasov_settings(const Options& o, const std::string& default_preset) {
    auto kv = load_config(o);
    if (!kv.contains("preset")) kv.set("preset", default_preset);
    auto cfg = experiments::vlasov_config(kv);
    if (!o.dts.empty()) cfg.dt = o.dts.front();
    if (!o.methods.empty()) cfg.method = o.methods.front();
    cfg.validate();
    return cfg;
}

void print_run(const std::string& label, const vlasov::RunResult& r) {
    std::printf("%-16s steps %ld  wall %.2f s  max |dU|/U0 %.4e %%  particle drift %.2e\n", label.c_str(), r.steps,
                r.wall_seconds, r.deviation.max,
                (r.final_particles - r.initial_particles) / r.initial_particles);
}

int vlasov_run(const Options& o) {
    const auto cfg = vlasov_settings(o, "desk");
    const auto r = vlasov::run(cfg);
    print_run(cfg.method, r);
    const auto dir = output_dir(o);
    vlasov::write_energy_csv(r, dir / "energy.csv");
    vlasov::write_field_modes_csv(r, dir / "field_modes.csv");
    vlasov::write_timing_csv(r.timings, dir / "timing.csv");
    if (o.snapshot) vlasov::write_field_snapshot(r.final_state, dir / "field.bin");
    report::write_text(dir / "run_config.txt", vlasov::describe(cfg));
    std::printf("wrote energy.csv, field_modes.csv, timing.csv%s in %s\n", o.snapshot ? ", field.bin" : "",
                dir.c_str());
    return 0;
}

int vlasov_growth(const Options& o) {
    const auto cfg = vlasov_settings(o, "two_stream");
    if (o.window.size() != 2) throw UsageError("--window takes two times: begin end");
    const auto g = experiments::vlasov_growth(cfg, o.modes, o.window[0], o.window[1]);
    print_run(cfg.method, g.run);
    std::printf("%6s %12s %12s %10s %8s\n", "mode", "rate", "intercept", "R^2", "samples");
    std::string csv = "mode,rate,intercept,r_squared,samples\n";
    for (const auto& f : g.fits) {
        std::printf("%6d %12.5f %12.5f %10.6f %8d%s\n", f.mode, f.rate, f.intercept, f.r_squared, f.samples,
                    f.mode == g.dominant_mode ? "  dominant" : "");
        char line[256];
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%d\n", f.mode, f.rate, f.intercept, f.r_squared,
                      f.samples);
        csv += line;
    }
    const auto dir = output_dir(o);
    vlasov::write_field_modes_csv(g.run, dir / "field_modes.csv");
    vlasov::write_energy_csv(g.run, dir / "energy.csv");
    report::write_text(dir / "growth.csv", csv);
    std::printf("wrote growth.csv, field_modes.csv, energy.csv in %s\n", dir.c_str());
    return 0;
}

int vlasov_energy(const Options& o) {
    auto cfg = vlasov_settings(o, "desk");
    const auto methods = o.methods.empty() ? std::vector<std::string>{"Strang(1-2-3)", "AK32i"} : o.methods;
    if (methods.size() < 2) throw UsageError("vlasov energy compares a Strang variant with at least one other method");
    const auto dir = output_dir(o);

    std::vector<vlasov::RunResult> runs;
    for (const auto& m : methods) {
        cfg.method = m;
        runs.push_back(vlasov::run(cfg));
        print_run(m, runs.back());
        vlasov::write_energy_csv(runs.back(), dir / ("energy_" + file_stem(m) + ".csv"));
        vlasov::write_timing_csv(runs.back().timings, dir / ("timing_" + file_stem(m) + ".csv"));
    }

    const auto strang = builtin_method(methods[0]);
    std::string csv = "method,delta,rho,eta,extra_seconds,strang_step_seconds\n";
    std::printf("\nefficiency model against %s (delta = %.3f is an input, not measured here)\n", methods[0].c_str(),
                o.delta);
    for (std::size_t i = 1; i < methods.size(); ++i) {
        const auto e = experiments::vlasov_efficiency(runs[0], builtin_method(methods[i]), strang, o.delta);
        std::printf("%-16s extra calls per operator [%d %d %d]  rho %.4f  eta %.4f\n", methods[i].c_str(),
                    e.extra.extra_calls[0], e.extra.extra_calls[1], e.extra.extra_calls[2], e.extra.rho, e.eta);
        char line[256];
        std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", methods[i].c_str(), e.delta,
                      e.extra.rho, e.eta, e.extra.extra_seconds, e.strang_cost.step_seconds);
        csv += line;
    }
    report::write_text(dir / "vlasov_efficiency.csv", csv);
    std::printf("wrote energy_*.csv, timing_*.csv, vlasov_efficiency.csv in %s\n", dir.c_str());
    return 0;
}

// -- report -------------------------------------------------------------------

int make_report(const Options& o) {
    const auto records = report::parse_records_csv(report::read_text(o.input));
    const auto dir = output_dir(o);
    const std::string stem = fs::path(o.input).stem().string();
    std::vector<fs::path> written;
    if (o.format == "csv" || o.format == "both") {
        for (auto& p : report::emit_report(records, report::Format::csv, dir, stem + "_report")) written.push_back(p);
    }
    if (o.format == "svg" || o.format == "both") {
        for (auto& p : report::emit_report(records, report::Format::svg, dir, stem)) written.push_back(p);
    }
    for (const auto& p : written) std::printf("wrote %s\n", p.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trisplit: three-operator splitting methods on a Brusselator and a 1D2V Vlasov-Poisson model"};
    app.require_subcommand(1);
    app.fallthrough();
    app.footer(
        "Exit status: 0 success, 1 usage or configuration error, 2 numerical failure.\n"
        "Config files hold 'key = value' lines ('#' starts a comment). Brusselator keys: alpha, beta, D1, D2, M,\n"
        "t_final, nonlinear (adaptive|closed_form). Vlasov keys: preset (desk|two_stream|default) and the\n"
        "EcdiConfig field names (alpha1, Nx, dt, t_final, method, field_after_operator, ...).");

    Options o;
    app.add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", o.overrides, "override one config key (key=value), repeatable");
    app.add_option("--dt", o.dts, "step size(s); a list for sweeps, the first value otherwise");
    app.add_option("--method", o.methods, "method name(s), see 'coeffs list'");
    app.add_option("--repeats", o.repeats, "timed repetitions, minimum taken (default 1 for sweeps, 10 for efficiency)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--output-dir", o.output_dir, "directory for CSV/SVG output")
        ->envname("TRISPLIT_OUTPUT_DIR")
        ->capture_default_str();

    auto* coeffs = app.add_subcommand("coeffs", "splitting coefficient tables");
    coeffs->require_subcommand(1);
    auto* c_list = coeffs->add_subcommand("list", "print methods and write coefficients.csv");
    auto* c_verify = coeffs->add_subcommand("verify", "check first and second order conditions");
    c_verify->add_flag("--minimal", o.minimal, "also solve for all 5-sub-integration methods and match them to Strang");

    auto* bruss = app.add_subcommand("brusselator", "Brusselator experiments");
    bruss->require_subcommand(1);
    auto* b_conv = bruss->add_subcommand("converge", "MRMS error and observed order over a dt sweep");
    auto* b_eff = bruss->add_subcommand("efficiency", "largest dt per MRMS target, step ratio and time saved");
    for (auto* sc : {b_conv, b_eff}) {
        sc->add_option("--reference", o.reference, "semidiscrete (same grid, unsplit) or converged (refined grids)")
            ->capture_default_str();
    }
    b_eff->add_option("--target", o.targets, "MRMS targets in percent")->capture_default_str();
    b_eff->add_option("--dt-max", o.dt_max, "upper end of the step-size search")->capture_default_str();

    auto* vl = app.add_subcommand("vlasov", "1D2V Vlasov-Poisson runs");
    vl->require_subcommand(1);
    auto* v_run = vl->add_subcommand("run", "one run; writes energy.csv, field_modes.csv, timing.csv");
    v_run->add_flag("--snapshot", o.snapshot, "also write the final field as field.bin");
    auto* v_growth = vl->add_subcommand("growth", "fit exponential growth of field modes (two_stream preset)");
    v_growth->add_option("--window", o.window, "fit window: begin end")->expected(2)->capture_default_str();
    v_growth->add_option("--modes", o.modes, "modes to fit")->capture_default_str();
    auto* v_energy = vl->add_subcommand("energy", "energy deviation of several methods at equal dt, plus rho and eta");
    v_energy->add_option("--delta", o.delta, "step-size ratio assumed for the efficiency gain")->capture_default_str();

    auto* rep = app.add_subcommand("report", "CSV and SVG plots from a records CSV");
    rep->add_option("input", o.input, "records CSV (" + std::string(report::records_header) + ")")
        ->required()
        ->check(CLI::ExistingFile);
    rep->add_option("--format", o.format, "csv, svg or both")
        ->check(CLI::IsMember({"csv", "svg", "both"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_list->parsed()) return coeffs_list(o);
        if (c_verify->parsed()) return coeffs_verify(o);
        if (b_conv->parsed()) return brusselator_converge(o);
        if (b_eff->parsed()) return brusselator_efficiency(o);
        if (v_run->parsed()) return vlasov_run(o);
        if (v_growth->parsed()) return vlasov_growth(o);
        if (v_energy->parsed()) return vlasov_energy(o);
        if (rep->parsed()) return make_report(o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const UnknownMethodError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << app.help();
    return 1;
}
