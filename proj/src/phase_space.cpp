#include "trisplit/vlasov.hpp"

#include "trisplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace trisplit::vlasov {

namespace {

double gaussian(double v, double centre, double vth) {
    const double s = (v - centre) / vth;
    return std::exp(-0.5 * s * s) / (std::sqrt(2.0 * std::numbers::pi) * vth);
}

// trapezoid weight of node i on an axis with n nodes
double trap_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

}  // namespace

// -- configuration --------------------------------------------------------

EcdiConfig EcdiConfig::desk() { return EcdiConfig{}; }

EcdiConfig EcdiConfig::two_stream() {
    EcdiConfig c;
    c.alpha1 = 100.0;  // electrons 100x lighter than ions, so the beams drive the growth
    c.alpha2 = 0.0;
    c.alpha3 = 0.0;
    c.L = 10.0;
    c.Nx = 64;
    c.Nvxe = 128;
    c.Nvze = 16;
    c.Nvxi = 32;
    c.use_exb_drift = false;
    c.electron_temperature = 0.01;  // vth = 1
    c.beam_velocity = 10.0;
    c.vmax_e_x = 30.0;
    c.vmax_e_z = 8.0;
    c.ion_temperature = 0.01;
    c.vmax_i = 1.0;
    c.perturbation = 1e-6;
    c.mode = 1;
    c.dt = 0.01;
    c.t_final = 6.0;
    return c;
}

double EcdiConfig::electron_thermal_speed() const { return std::sqrt(alpha1 * electron_temperature); }
double EcdiConfig::ion_thermal_speed() const { return std::sqrt(ion_temperature); }
double EcdiConfig::drift_x() const { return use_exb_drift ? -alpha3 / alpha2 : electron_drift_x; }

Axis EcdiConfig::vxe_axis() const {
    const double w = vmax_e_x > 0.0 ? vmax_e_x : 6.5 * electron_thermal_speed() + beam_velocity;
    return {drift_x() - w, drift_x() + w, Nvxe, false};
}

Axis EcdiConfig::vze_axis() const {
    const double w = vmax_e_z > 0.0 ? vmax_e_z : 6.5 * electron_thermal_speed();
    return {drift_z() - w, drift_z() + w, Nvze, false};
}

void EcdiConfig::validate() const {
    if (Nx < 8 || Nvxe < 8 || Nvze < 8 || Nvxi < 8) throw std::invalid_argument("vlasov: all cell counts must be >= 8");
    if (!(L > 0.0)) throw std::invalid_argument("vlasov: L must be positive");
    if (!(electron_temperature > 0.0) || !(ion_temperature > 0.0)) {
        throw std::invalid_argument("vlasov: temperatures must be positive");
    }
    if (use_exb_drift && alpha2 == 0.0) throw std::invalid_argument("vlasov: ExB drift needs alpha2 != 0");
    if (!(vmax_i > 0.0)) throw std::invalid_argument("vlasov: vmax_i must be positive");
    if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("vlasov: dt and t_final must be positive");
    if (field_after_operator < 0 || field_after_operator > 3) {
        throw std::invalid_argument("vlasov: field_after_operator must be 0..3");
    }
    if (field_stride < 1) throw std::invalid_argument("vlasov: field_stride must be >= 1");
    if (recorded_modes < 1 || recorded_modes > Nx / 2 + 1) {
        throw std::invalid_argument("vlasov: recorded_modes must lie in [1, Nx/2 + 1]");
    }
    if (!std::isfinite(alpha1) || !std::isfinite(alpha2) || !std::isfinite(alpha3)) {
        throw std::invalid_argument("vlasov: alpha parameters must be finite");
    }
}

void apply(EcdiConfig& c, const KeyValueConfig& kv) {
    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"alpha1", [&](const std::string& k) { c.alpha1 = kv.get_double(k); }},
        {"alpha2", [&](const std::string& k) { c.alpha2 = kv.get_double(k); }},
        {"alpha3", [&](const std::string& k) { c.alpha3 = kv.get_double(k); }},
        {"L", [&](const std::string& k) { c.L = kv.get_double(k); }},
        {"Nx", [&](const std::string& k) { c.Nx = static_cast<int>(kv.get_int(k)); }},
        {"Nvxe", [&](const std::string& k) { c.Nvxe = static_cast<int>(kv.get_int(k)); }},
        {"Nvze", [&](const std::string& k) { c.Nvze = static_cast<int>(kv.get_int(k)); }},
        {"Nvxi", [&](const std::string& k) { c.Nvxi = static_cast<int>(kv.get_int(k)); }},
        {"vmax_e_x", [&](const std::string& k) { c.vmax_e_x = kv.get_double(k); }},
        {"vmax_e_z", [&](const std::string& k) { c.vmax_e_z = kv.get_double(k); }},
        {"vmax_i", [&](const std::string& k) { c.vmax_i = kv.get_double(k); }},
        {"electron_temperature", [&](const std::string& k) { c.electron_temperature = kv.get_double(k); }},
        {"electron_drift_x", [&](const std::string& k) { c.electron_drift_x = kv.get_double(k); }},
        {"electron_drift_z", [&](const std::string& k) { c.electron_drift_z = kv.get_double(k); }},
        {"use_exb_drift", [&](const std::string& k) { c.use_exb_drift = kv.get_bool(k); }},
        {"beam_velocity", [&](const std::string& k) { c.beam_velocity = kv.get_double(k); }},
        {"ion_temperature", [&](const std::string& k) { c.ion_temperature = kv.get_double(k); }},
        {"ion_drift", [&](const std::string& k) { c.ion_drift = kv.get_double(k); }},
        {"perturbation", [&](const std::string& k) { c.perturbation = kv.get_double(k); }},
        {"mode", [&](const std::string& k) { c.mode = static_cast<int>(kv.get_int(k)); }},
        {"dt", [&](const std::string& k) { c.dt = kv.get_double(k); }},
        {"t_final", [&](const std::string& k) { c.t_final = kv.get_double(k); }},
        {"method", [&](const std::string& k) { c.method = kv.get_string(k); }},
        {"field_solve", [&](const std::string& k) { c.field_solve = kv.get_bool(k); }},
        {"field_after_operator",
         [&](const std::string& k) { c.field_after_operator = static_cast<int>(kv.get_int(k)); }},
        {"field_stride", [&](const std::string& k) { c.field_stride = static_cast<int>(kv.get_int(k)); }},
        {"recorded_modes", [&](const std::string& k) { c.recorded_modes = static_cast<int>(kv.get_int(k)); }},
    };
    for (const auto& [key, value] : kv.entries()) {
        if (key == "preset") continue;
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown vlasov config key '" + key + "'");
        it->second(key);
    }
}

std::string describe(const EcdiConfig& c) {
    std::ostringstream o;
    o << std::setprecision(17);
    o << "alpha1 = " << c.alpha1 << "\nalpha2 = " << c.alpha2 << "\nalpha3 = " << c.alpha3 << "\nL = " << c.L
      << "\nNx = " << c.Nx << "\nNvxe = " << c.Nvxe << "\nNvze = " << c.Nvze << "\nNvxi = " << c.Nvxi
      << "\nvmax_e_x = " << c.vmax_e_x << "\nvmax_e_z = " << c.vmax_e_z << "\nvmax_i = " << c.vmax_i
      << "\nelectron_temperature = " << c.electron_temperature << "\nelectron_drift_x = " << c.electron_drift_x
      << "\nelectron_drift_z = " << c.electron_drift_z << "\nuse_exb_drift = " << (c.use_exb_drift ? "true" : "false")
      << "\nbeam_velocity = " << c.beam_velocity << "\nion_temperature = " << c.ion_temperature
      << "\nion_drift = " << c.ion_drift << "\nperturbation = " << c.perturbation << "\nmode = " << c.mode
      << "\ndt = " << c.dt << "\nt_final = " << c.t_final << "\nmethod = " << c.method
      << "\nfield_solve = " << (c.field_solve ? "true" : "false")
      << "\nfield_after_operator = " << c.field_after_operator << "\nfield_stride = " << c.field_stride
      << "\nrecorded_modes = " << c.recorded_modes << "\n";
    return o.str();
}

// -- phase space ----------------------------------------------------------

PhaseSpace::PhaseSpace(const EcdiConfig& cfg)
    : x_(cfg.x_axis()), vxe_(cfg.vxe_axis()), vze_(cfg.vze_axis()), vxi_(cfg.vxi_axis()) {
    f_e.assign(static_cast<std::size_t>(x_.nodes()) * vxe_.nodes() * vze_.nodes(), 0.0);
    f_i.assign(static_cast<std::size_t>(x_.nodes()) * vxi_.nodes(), 0.0);
    E = Eigen::VectorXd::Zero(x_.nodes());
}

PhaseSpace initialize(const EcdiConfig& cfg) {
    cfg.validate();
    PhaseSpace ps(cfg);
    const int nx = ps.x().nodes(), nvx = ps.vxe().nodes(), nvz = ps.vze().nodes(), nvi = ps.vxi().nodes();
    const double vte = cfg.electron_thermal_speed(), vti = cfg.ion_thermal_speed();

    std::vector<double> gx(nvx), gz(nvz), gi(nvi);
    for (int j = 0; j < nvx; ++j) {
        const double v = ps.vxe()[j];
        gx[j] = cfg.beam_velocity > 0.0 ? 0.5 * (gaussian(v, cfg.drift_x() + cfg.beam_velocity, vte) +
                                                 gaussian(v, cfg.drift_x() - cfg.beam_velocity, vte))
                                        : gaussian(v, cfg.drift_x(), vte);
    }
    for (int k = 0; k < nvz; ++k) gz[k] = gaussian(ps.vze()[k], cfg.drift_z(), vte);
    for (int j = 0; j < nvi; ++j) gi[j] = gaussian(ps.vxi()[j], cfg.ion_drift, vti);

    auto edge_ratio = [](const std::vector<double>& g) {
        return std::max(g.front(), g.back()) / *std::max_element(g.begin(), g.end());
    };
    const double worst = std::max({edge_ratio(gx), edge_ratio(gz), edge_ratio(gi)});
    if (worst > 1e-8) {
        throw std::invalid_argument("vlasov: velocity window too narrow, boundary value is " + std::to_string(worst) +
                                    " of the peak (needs <= 1e-8)");
    }

    const double k = 2.0 * std::numbers::pi * cfg.mode / cfg.L;
    for (int ix = 0; ix < nx; ++ix) {
        const double n = 1.0 + cfg.perturbation * std::cos(k * ps.x()[ix]);
        for (int j = 0; j < nvx; ++j) {
            for (int kz = 0; kz < nvz; ++kz) ps.fe(ix, j, kz) = n * gx[j] * gz[kz];
        }
        for (int j = 0; j < nvi; ++j) ps.fi(ix, j) = gi[j];
    }
    if (cfg.field_solve) ps.E = field_from_density(charge_density(ps), ps.x().spacing());
    return ps;
}

// -- moments --------------------------------------------------------------

Eigen::VectorXd charge_density(const PhaseSpace& ps) {
    const int nx = ps.x().nodes(), nvx = ps.vxe().nodes(), nvz = ps.vze().nodes(), nvi = ps.vxi().nodes();
    const double dve = ps.vxe().spacing() * ps.vze().spacing(), dvi = ps.vxi().spacing();
    Eigen::VectorXd rho(nx);
    for (int ix = 0; ix < nx; ++ix) {
        double ne = 0.0;
        for (int j = 0; j < nvx; ++j) {
            double line = 0.0;
            const double* f = &ps.f_e[ps.electron_index(ix, j, 0)];
            for (int k = 0; k < nvz; ++k) line += trap_weight(k, nvz) * f[k];
            ne += trap_weight(j, nvx) * line;
        }
        double ni = 0.0;
        for (int j = 0; j < nvi; ++j) ni += trap_weight(j, nvi) * ps.fi(ix, j);
        rho(ix) = ni * dvi - ne * dve;
    }
    return rho;
}

double electron_count(const PhaseSpace& ps) {
    const int nx = ps.x().nodes(), nvx = ps.vxe().nodes(), nvz = ps.vze().nodes();
    double total = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        for (int j = 0; j < nvx; ++j) {
            const double* f = &ps.f_e[ps.electron_index(ix, j, 0)];
            double line = 0.0;
            for (int k = 0; k < nvz; ++k) line += trap_weight(k, nvz) * f[k];
            total += trap_weight(j, nvx) * line;
        }
    }
    return total * ps.x().spacing() * ps.vxe().spacing() * ps.vze().spacing();
}

double ion_count(const PhaseSpace& ps) {
    const int nx = ps.x().nodes(), nvi = ps.vxi().nodes();
    double total = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        for (int j = 0; j < nvi; ++j) total += trap_weight(j, nvi) * ps.fi(ix, j);
    }
    return total * ps.x().spacing() * ps.vxi().spacing();
}

Eigen::VectorXd field_from_density(const Eigen::VectorXd& rho, double dx) {
    const Eigen::Index n = rho.size();
    const Eigen::VectorXd r = rho.array() - rho.mean();
    Eigen::VectorXd E(n);
    E(0) = 0.0;
    for (Eigen::Index j = 1; j < n; ++j) E(j) = E(j - 1) + 0.5 * dx * (r(j - 1) + r(j));
    E.array() -= E.mean();
    return E;
}

EnergyParts energy_parts(const PhaseSpace& ps, double alpha1) { return energy_parts(ps, alpha1, ps.E); }

EnergyParts energy_parts(const PhaseSpace& ps, double alpha1, const Eigen::VectorXd& E) {
    const int nx = ps.x().nodes(), nvx = ps.vxe().nodes(), nvz = ps.vze().nodes(), nvi = ps.vxi().nodes();
    const double dx = ps.x().spacing();
    EnergyParts parts;
    double ke = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        for (int j = 0; j < nvx; ++j) {
            const double vx = ps.vxe()[j];
            const double* f = &ps.f_e[ps.electron_index(ix, j, 0)];
            double line = 0.0;
            for (int k = 0; k < nvz; ++k) {
                const double vz = ps.vze()[k];
                line += trap_weight(k, nvz) * (vx * vx + vz * vz) * f[k];
            }
            ke += trap_weight(j, nvx) * line;
        }
    }
    parts.electron_kinetic = ke * dx * ps.vxe().spacing() * ps.vze().spacing() / (2.0 * alpha1);
    double ki = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        for (int j = 0; j < nvi; ++j) {
            const double v = ps.vxi()[j];
            ki += trap_weight(j, nvi) * v * v * ps.fi(ix, j);
        }
    }
    parts.ion_kinetic = 0.5 * ki * dx * ps.vxi().spacing();
    parts.field = 0.5 * E.squaredNorm() * dx;
    parts.work = ps.work_integral;
    return parts;
}

double total_energy(const PhaseSpace& ps, double alpha1) { return energy_parts(ps, alpha1).total(); }

double work_rate(const PhaseSpace& ps, double alpha3) {
    if (alpha3 == 0.0) return 0.0;
    const int nx = ps.x().nodes(), nvx = ps.vxe().nodes(), nvz = ps.vze().nodes();
    double total = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        for (int j = 0; j < nvx; ++j) {
            const double* f = &ps.f_e[ps.electron_index(ix, j, 0)];
            double line = 0.0;
            for (int k = 0; k < nvz; ++k) line += trap_weight(k, nvz) * ps.vze()[k] * f[k];
            total += trap_weight(j, nvx) * line;
        }
    }
    return alpha3 * total * ps.x().spacing() * ps.vxe().spacing() * ps.vze().spacing();
}

EnergyDeviation energy_deviation(const std::vector<double>& U) {
    if (U.empty()) throw std::invalid_argument("energy_deviation: empty history");
    if (U.front() == 0.0) throw std::domain_error("energy_deviation: U(0) = 0, relative deviation undefined");
    EnergyDeviation d;
    d.percent.reserve(U.size());
    d.running_max.reserve(U.size());
    for (double u : U) {
        const double p = std::abs((u - U.front()) / U.front()) * 100.0;
        d.max = std::max(d.max, p);
        d.percent.push_back(p);
        d.running_max.push_back(d.max);
    }
    return d;
}

// -- field modes and growth rates ------------------------------------------

Eigen::VectorXd field_mode_amplitudes(const Eigen::VectorXd& E, int count) {
    const Eigen::Index n = E.size();
    Eigen::VectorXd amp(count);
    for (int m = 0; m < count; ++m) {
        std::complex<double> c = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            c += E(j) * std::polar(1.0, -2.0 * std::numbers::pi * m * static_cast<double>(j) / static_cast<double>(n));
        }
        amp(m) = std::abs(c) * (m == 0 ? 1.0 : 2.0) / static_cast<double>(n);
    }
    return amp;
}

std::vector<GrowthFit> growth_rates(const std::vector<double>& times, const Eigen::MatrixXd& amplitudes,
                                    const std::vector<int>& modes, double t_begin, double t_end) {
    if (static_cast<Eigen::Index>(times.size()) != amplitudes.rows()) {
        throw std::invalid_argument("growth_rates: one amplitude row per time sample required");
    }
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= t_begin && times[i] <= t_end) rows.push_back(static_cast<Eigen::Index>(i));
    }
    if (rows.size() < 10) {
        throw std::invalid_argument("growth_rates: fit window holds " + std::to_string(rows.size()) +
                                    " samples, need at least 10");
    }
    std::vector<GrowthFit> fits;
    for (int m : modes) {
        if (m < 0 || m >= amplitudes.cols()) throw std::invalid_argument("growth_rates: mode not recorded");
        const auto n = static_cast<double>(rows.size());
        double st = 0, sy = 0, stt = 0, sty = 0;
        std::vector<double> y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double a = amplitudes(rows[i], m);
            if (!(a > 1e-300) || !std::isfinite(a)) {
                throw NumericalError("growth_rates: mode " + std::to_string(m) + " has no amplitude to fit");
            }
            y[i] = std::log(a);
            const double t = times[rows[i]];
            st += t;
            sy += y[i];
            stt += t * t;
            sty += t * y[i];
        }
        GrowthFit fit;
        fit.mode = m;
        fit.samples = static_cast<int>(rows.size());
        const double denom = n * stt - st * st;
        fit.rate = (n * sty - st * sy) / denom;
        fit.intercept = (sy - fit.rate * st) / n;
        const double mean = sy / n;
        double ss_res = 0, ss_tot = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double r = y[i] - (fit.intercept + fit.rate * times[rows[i]]);
            ss_res += r * r;
            ss_tot += (y[i] - mean) * (y[i] - mean);
        }
        // a constant series is fitted exactly by slope 0
        fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        fits.push_back(fit);
    }
    return fits;
}

// -- files ----------------------------------------------------------------

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

}  // namespace

void write_energy_csv(const RunResult& r, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "t,U,deltaU_percent\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        out << r.times[i] << ',' << r.energy[i] << ',' << r.deviation.percent[i] << '\n';
    }
}

void write_field_modes_csv(const RunResult& r, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "t,mode,abs_amplitude\n";
    for (std::size_t i = 0; i < r.field_times.size(); ++i) {
        for (Eigen::Index m = 0; m < r.field_modes.cols(); ++m) {
            out << r.field_times[i] << ',' << m << ',' << r.field_modes(static_cast<Eigen::Index>(i), m) << '\n';
        }
    }
}

void write_timing_csv(const Timings& t, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "operator,calls,seconds\n";
    for (const auto& [name, timer] : t) out << name << ',' << timer.calls << ',' << timer.seconds << '\n';
}

void write_field_snapshot(const PhaseSpace& ps, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "trisplit-field v1 nx=" << ps.E.size() << " dx=" << ps.x().spacing() << " t=" << ps.t << '\n';
    out.write(reinterpret_cast<const char*>(ps.E.data()), static_cast<std::streamsize>(ps.E.size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

FieldSnapshot read_field_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    long nx = 0;
    FieldSnapshot snap;
    if (std::sscanf(header.c_str(), "trisplit-field v1 nx=%ld dx=%lf t=%lf", &nx, &snap.dx, &snap.t) != 3 || nx < 0) {
        throw std::runtime_error(path.string() + ": not a field snapshot");
    }
    snap.E.resize(nx);
    in.read(reinterpret_cast<char*>(snap.E.data()), static_cast<std::streamsize>(nx * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(nx * sizeof(double))) {
        throw std::runtime_error(path.string() + ": truncated snapshot");
    }
    return snap;
}

}  // namespace trisplit::vlasov
