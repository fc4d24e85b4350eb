#ifndef TRISPLIT_EXPERIMENTS_HPP
#define TRISPLIT_EXPERIMENTS_HPP

#include "trisplit/brusselator.hpp"
#include "trisplit/config.hpp"
#include "trisplit/harness.hpp"
#include "trisplit/vlasov.hpp"

#include <map>
#include <string>
#include <vector>

/// Parameter sweeps shared by the command-line tool and the acceptance run.
namespace trisplit::experiments {

using harness::WorkPrecisionRecord;

// -- Brusselator ------------------------------------------------------------

struct BrusselatorSettings {
    brusselator::Config config;
    brusselator::NonlinearMode mode = brusselator::NonlinearMode::adaptive;
};

/// Keys: alpha, beta, D1, D2, M, t_final, nonlinear (adaptive | closed_form).
void apply(BrusselatorSettings& s, const KeyValueConfig& kv);
std::string describe(const BrusselatorSettings& s);

struct ConvergenceStudy {
    std::vector<WorkPrecisionRecord> records;  // metric "mrms"
    std::map<std::string, std::vector<double>> pairwise_order;
    std::map<std::string, double> slope;  // least squares over all dt
};

/// MRMS error at t_final against `reference` (samples as produced by
/// Problem::sample) for every method and dt. Wall time is the minimum over
/// `repeats` timed runs.
ConvergenceStudy brusselator_convergence(const BrusselatorSettings& s, const std::vector<std::string>& methods,
                                         const std::vector<double>& dts, const Eigen::VectorXd& reference,
                                         int repeats = 1);

struct StepRatio {
    double target = 0.0;
    harness::DtSearch psi;
    harness::DtSearch strang;
    double delta = 0.0;  // psi.dt / strang.dt
};

/// Largest dt meeting each MRMS target for both methods. Targets are searched
/// loosest first; each answer caps the bracket of the next tighter target.
std::vector<StepRatio> brusselator_step_ratios(const BrusselatorSettings& s, const std::string& psi,
                                               const std::string& strang, std::vector<double> targets,
                                               const Eigen::VectorXd& reference, double dt_max = 0.6);

struct EfficiencyRow {
    double target = 0.0;
    WorkPrecisionRecord strang;
    WorkPrecisionRecord psi;
    double delta = 0.0;
    double time_saved = 0.0;  // 1 - wall_psi / wall_strang
    double rho = 0.0;         // per-step cost of psi over strang, minus one
    double eta = 0.0;         // efficiency_gain(delta, rho)
};

/// Times both methods at the step sizes found by brusselator_step_ratios.
std::vector<EfficiencyRow> brusselator_efficiency(const BrusselatorSettings& s, const std::string& psi,
                                                  const std::string& strang, const std::vector<StepRatio>& ratios,
                                                  const Eigen::VectorXd& reference, int repeats);

// -- Vlasov -----------------------------------------------------------------

/// "desk", "two_stream" or "default" (the EcdiConfig defaults).
vlasov::EcdiConfig vlasov_preset(const std::string& name);
/// Preset named by the `preset` key (default "desk"), then the other keys.
vlasov::EcdiConfig vlasov_config(const KeyValueConfig& kv);

struct VlasovCost {
    std::vector<double> seconds_per_call;  // operators 1..3 (electrons plus ions)
    double step_seconds = 0.0;             // wall seconds per step of the measured run
};
/// Per-operator cost of a finished run.
VlasovCost vlasov_cost(const vlasov::RunResult& r);

struct VlasovEfficiency {
    VlasovCost strang_cost;
    harness::ExtraTime extra;  // psi over strang, from the Strang per-call costs
    double delta = 0.0;
    double eta = 0.0;
};
VlasovEfficiency vlasov_efficiency(const vlasov::RunResult& strang_run, const SplittingMethod& psi,
                                   const SplittingMethod& strang, double delta);

struct GrowthStudy {
    vlasov::RunResult run;
    std::vector<vlasov::GrowthFit> fits;
    int dominant_mode = 0;  // largest amplitude at the end of the window
};
GrowthStudy vlasov_growth(const vlasov::EcdiConfig& cfg, const std::vector<int>& modes, double t_begin, double t_end);

}  // namespace trisplit::experiments

#endif
