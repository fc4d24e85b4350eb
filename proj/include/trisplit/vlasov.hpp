#ifndef TRISPLIT_VLASOV_HPP
#define TRISPLIT_VLASOV_HPP

#include "trisplit/config.hpp"
#include "trisplit/splitting.hpp"

#include <Eigen/Core>

#include <array>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

/// 1D2V semi-Lagrangian Vlasov-Poisson solver: electrons in (x, vx, vz),
/// ions in (x, vx), periodic in x.
namespace trisplit::vlasov {

/// Uniform grid. Periodic axes have `cells` nodes (the endpoint repeats node
/// 0); bounded axes have `cells + 1` nodes including both ends.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int cells = 8;
    bool periodic = false;

    int nodes() const { return periodic ? cells : cells + 1; }
    double spacing() const { return (hi - lo) / cells; }
    double operator[](int i) const { return lo + i * spacing(); }
};

struct EcdiConfig {
    double alpha1 = 2.39e5;
    double alpha2 = 4.03e-4;
    double alpha3 = 0.1487;
    double L = 600.0;
    int Nx = 128;
    int Nvxe = 128;
    int Nvze = 128;
    int Nvxi = 64;

    // velocity windows: centre +- half-width
    double vmax_e_x = 0.0;  // 0 picks 6.5 thermal speeds around the drift
    double vmax_e_z = 0.0;
    double vmax_i = 3.0;

    // electrons: Maxwellian(s) in (vx, vz); beam_velocity > 0 splits the
    // population into two counter-streaming beams at drift_x +- beam_velocity
    double electron_temperature = 1.0;  // thermal speed sqrt(alpha1 * Te)
    double electron_drift_x = 0.0;      // only used when use_exb_drift is false
    double electron_drift_z = 0.0;
    bool use_exb_drift = true;          // drift_x = -alpha3 / alpha2
    double beam_velocity = 0.0;
    double ion_temperature = 0.1;       // thermal speed sqrt(Ti)
    double ion_drift = 0.0;

    double perturbation = 1e-3;  // epsilon, applied to the electron density
    int mode = 1;

    double dt = 4e-4;
    double t_final = 0.04;
    std::string method = "Strang(1-2-3)";

    bool field_solve = true;
    // The single field solve per step happens in stage 1, right after this
    // operator (1 = after the x advection); 0 means after the whole stage.
    int field_after_operator = 1;
    int field_stride = 1;  // steps between field-mode samples
    int recorded_modes = 16;

    /// ECDI parameters with the desk-scale grid.
    static EcdiConfig desk();
    /// Electron two-stream setup (alpha1 = 100, no magnetic or drift terms).
    /// Mode 1 grows at about 3.37 (cold-beam dispersion relation) until
    /// t ~ 4, when it saturates.
    static EcdiConfig two_stream();

    double electron_thermal_speed() const;
    double ion_thermal_speed() const;
    double drift_x() const;
    double drift_z() const { return electron_drift_z; }

    Axis x_axis() const { return {0.0, L, Nx, true}; }
    Axis vxe_axis() const;
    Axis vze_axis() const;
    Axis vxi_axis() const { return {ion_drift - vmax_i, ion_drift + vmax_i, Nvxi, false}; }

    void validate() const;
};

/// Overrides fields of `cfg` from `key = value` entries. Keys are the field
/// names above; unknown keys are rejected.
void apply(EcdiConfig& cfg, const KeyValueConfig& kv);
std::string describe(const EcdiConfig& cfg);

class PhaseSpace {
public:
    PhaseSpace() = default;
    /// Zero distributions and field on the grids of `cfg`.
    explicit PhaseSpace(const EcdiConfig& cfg);

    const Axis& x() const { return x_; }
    const Axis& vxe() const { return vxe_; }
    const Axis& vze() const { return vze_; }
    const Axis& vxi() const { return vxi_; }

    // f_e(ix, ivx, ivz), vz fastest
    std::size_t electron_index(int ix, int ivx, int ivz) const {
        return (static_cast<std::size_t>(ix) * vxe_.nodes() + ivx) * vze_.nodes() + ivz;
    }
    std::size_t ion_index(int ix, int ivx) const { return static_cast<std::size_t>(ix) * vxi_.nodes() + ivx; }

    double& fe(int ix, int ivx, int ivz) { return f_e[electron_index(ix, ivx, ivz)]; }
    double fe(int ix, int ivx, int ivz) const { return f_e[electron_index(ix, ivx, ivz)]; }
    double& fi(int ix, int ivx) { return f_i[ion_index(ix, ivx)]; }
    double fi(int ix, int ivx) const { return f_i[ion_index(ix, ivx)]; }

    std::vector<double> f_e;
    std::vector<double> f_i;
    Eigen::VectorXd E;
    double t = 0.0;
    double work_integral = 0.0;

private:
    Axis x_, vxe_, vze_, vxi_;
};

/// Maxwellian initial data with a cosine density perturbation on the
/// electrons, followed by one field solve. Throws if the velocity windows
/// are too narrow (boundary values above 1e-8 of the peak).
PhaseSpace initialize(const EcdiConfig& cfg);

/// Wall-clock accumulators per sub-operator.
struct OperatorTimer {
    long calls = 0;
    double seconds = 0.0;
};
using Timings = std::map<std::string, OperatorTimer>;

/// The split operators. All of them work line by line and may run the lines
/// in parallel; results do not depend on the thread count.
class Solver {
public:
    explicit Solver(EcdiConfig cfg);

    const EcdiConfig& config() const { return cfg_; }

    void advect_x(PhaseSpace& ps, double h);   // operator [1]
    void advect_vz(PhaseSpace& ps, double h);  // operator [2]
    void advect_vx(PhaseSpace& ps, double h);  // operator [3]
    void solve_field(PhaseSpace& ps);

    /// Flows [advect_x, advect_vz, advect_vx] with the field solve hooked
    /// into stage 1 (unless disabled in the config).
    SubFlowSet<PhaseSpace> subflows();

    const Timings& timings() const { return timings_; }
    void reset_timings() { timings_.clear(); }

private:
    template <class F>
    void timed(const char* name, F&& f);

    EcdiConfig cfg_;
    Timings timings_;
};

/// Net charge density rho(x) = int f_i dv - int int f_e dv (trapezoid in v).
Eigen::VectorXd charge_density(const PhaseSpace& ps);
/// Electron and ion particle counts (trapezoid in v, periodic sum in x).
double electron_count(const PhaseSpace& ps);
double ion_count(const PhaseSpace& ps);

/// E with dE/dx = rho - mean(rho) by cumulative trapezoid, then zero mean.
Eigen::VectorXd field_from_density(const Eigen::VectorXd& rho, double dx);

struct EnergyParts {
    double electron_kinetic = 0.0;
    double ion_kinetic = 0.0;
    double field = 0.0;
    double work = 0.0;
    double total() const { return electron_kinetic + ion_kinetic + field + work; }
};
EnergyParts energy_parts(const PhaseSpace& ps, double alpha1);
/// Same, with `E` in place of the stored field.
EnergyParts energy_parts(const PhaseSpace& ps, double alpha1, const Eigen::VectorXd& E);
double total_energy(const PhaseSpace& ps, double alpha1);
/// int int int alpha3 f_e vz, the integrand of the work term.
double work_rate(const PhaseSpace& ps, double alpha3);

struct EnergyDeviation {
    std::vector<double> percent;  // |U(t) - U(0)| / |U(0)| * 100
    std::vector<double> running_max;
    double max = 0.0;
};
EnergyDeviation energy_deviation(const std::vector<double>& U);

/// |E_m| for modes 0..count-1, normalised so a pure cos of amplitude A gives A.
Eigen::VectorXd field_mode_amplitudes(const Eigen::VectorXd& E, int count);

struct GrowthFit {
    int mode = 0;
    double rate = 0.0;       // slope of ln|E_m| against t
    double intercept = 0.0;
    double r_squared = 0.0;
    int samples = 0;
};

/// Least-squares slope of ln|E_m(t)| over t in [t_begin, t_end]. `amplitudes`
/// has one row per time and one column per mode.
std::vector<GrowthFit> growth_rates(const std::vector<double>& times, const Eigen::MatrixXd& amplitudes,
                                    const std::vector<int>& modes, double t_begin, double t_end);

struct RunResult {
    std::vector<double> times;  // per step, starting with t = 0
    std::vector<double> energy;
    EnergyDeviation deviation;
    std::vector<double> field_times;
    Eigen::MatrixXd field_modes;  // rows: field_times, cols: modes
    Timings timings;
    long steps = 0;
    double wall_seconds = 0.0;
    double initial_particles = 0.0;
    double final_particles = 0.0;
    PhaseSpace final_state;
};

/// Integrate from the initial data to t_final with the configured method.
/// Aborts with NumericalError on non-finite values or a blown-up distribution.
/// The stepping field is the one solved inside stage 1; diagnostics (energy,
/// field modes, final_state.E) use the field of the end-of-step density.
RunResult run(const EcdiConfig& cfg);
RunResult run(const EcdiConfig& cfg, PhaseSpace initial);

// -- outputs --------------------------------------------------------------

void write_energy_csv(const RunResult& r, const std::filesystem::path& path);
void write_field_modes_csv(const RunResult& r, const std::filesystem::path& path);
void write_timing_csv(const Timings& t, const std::filesystem::path& path);

/// Raw E_x snapshot: text header line "trisplit-field v1 nx=<n> dx=<dx> t=<t>"
/// followed by n little-endian doubles.
void write_field_snapshot(const PhaseSpace& ps, const std::filesystem::path& path);
struct FieldSnapshot {
    Eigen::VectorXd E;
    double dx = 0.0;
    double t = 0.0;
};
FieldSnapshot read_field_snapshot(const std::filesystem::path& path);

}  // namespace trisplit::vlasov

#endif
