#ifndef TRISPLIT_BRUSSELATOR_HPP
#define TRISPLIT_BRUSSELATOR_HPP

#include "trisplit/numerics/expm.hpp"
#include "trisplit/numerics/ode.hpp"
#include "trisplit/numerics/root.hpp"
#include "trisplit/splitting.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

/// Reaction-diffusion Brusselator on [0, 1] with constant Dirichlet data,
/// split into diffusion, linear reaction and nonlinear reaction.
namespace trisplit::brusselator {

struct Config {
    double alpha = 0.6;
    double beta = 2.0;
    double D1 = 1.0 / 40.0;
    double D2 = 1.0 / 40.0;
    int M = 200;  // interior grid points, dx = 1 / (M + 1)
    double t_final = 80.0;

    double boundary_T() const { return alpha; }
    double boundary_C() const { return beta / alpha; }
    void validate() const;
};

struct State {
    Eigen::VectorXd T;
    Eigen::VectorXd C;
    double t = 0.0;
};

enum class NonlinearMode { adaptive, implicit_closed_form };

/// Closed-form linear reaction flow at one point: returns (T, C) after time h.
std::pair<double, double> linear_reaction_point(double T, double C, double h, double alpha, double beta);

/// T after time h of T' = T^2 (k - T) from the implicit logarithmic relation,
/// k = T + C. Requires 0 <= T <= k.
double nonlinear_closed_form_point(double T, double C, double h, const numerics::RootOptions& opts = {});

/// Same flow integrated with the adaptive reference integrator.
double nonlinear_adaptive_point(double T, double C, double h, const numerics::ReferenceIntegratorConfig& cfg = {});

class Problem {
public:
    explicit Problem(Config cfg, numerics::ReferenceIntegratorConfig oracle = {});

    const Config& config() const { return cfg_; }
    double dx() const { return 1.0 / (cfg_.M + 1); }
    /// Interior node positions.
    Eigen::VectorXd grid() const;
    /// Dirichlet Laplacian with homogeneous boundary rows, scaled by 1/dx^2.
    const Eigen::MatrixXd& laplacian() const { return *laplacian_; }

    State initial_state() const;

    // operator [1]
    void diffusion(State& s, double h) const;
    // operator [2]
    void linear_reaction(State& s, double h) const;
    // operator [3]
    void nonlinear_reaction(State& s, double h, NonlinearMode mode = NonlinearMode::adaptive) const;

    SubFlowSet<State> subflows(NonlinearMode mode = NonlinearMode::adaptive) const;

    /// Right-hand side of the unsplit semi-discrete system, y = [T; C].
    Eigen::VectorXd rhs(const Eigen::VectorXd& y) const;

    /// Unsplit semi-discrete solution at time t from the initial data.
    State solve_unsplit(double t, const numerics::ReferenceIntegratorConfig& cfg = {}) const;

    /// [T; C] at `points` equally spaced positions on [0, 1], including the
    /// boundary values, read off a natural cubic spline through the nodes.
    Eigen::VectorXd sample(const State& s, int points = 101) const;

    std::size_t cached_exponentials() const { return expm_cache_->size(); }

private:
    Config cfg_;
    numerics::ReferenceIntegratorConfig oracle_;
    std::shared_ptr<const Eigen::MatrixXd> laplacian_;
    std::shared_ptr<const Eigen::MatrixXd> generator_T_;  // D1 * laplacian
    std::shared_ptr<const Eigen::MatrixXd> generator_C_;  // D2 * laplacian
    std::shared_ptr<numerics::ExpmCache<double>> expm_cache_;
};

/// Mixed root-mean-square error: sqrt(mean(((ref - y) / (1 + |ref|))^2)).
double mrms_error(const Eigen::VectorXd& y, const Eigen::VectorXd& reference);

/// p = log(e1/e2) / log(dt1/dt2) for consecutive (dt, error) pairs.
std::vector<double> convergence_order(const std::vector<std::pair<double, double>>& errors);

struct ReferenceOptions {
    int sample_points = 101;
    int base_intervals = 100;  // coarsest grid has base_intervals - 1 interior points
    int max_levels = 4;
    double matching_digits = 6.0;
    numerics::ReferenceIntegratorConfig integrator{};
    std::optional<std::filesystem::path> cache_file;
};

struct ReferenceSolution {
    Eigen::VectorXd samples;  // [T; C] at the sample points
    std::vector<int> grids;   // interior point counts that were solved
    double max_relative_difference = 0.0;  // between the last two approximations
    bool from_cache = false;
};

/// Converged unsplit solution at t_final. Grids are refined by halving dx
/// (aligned with the sample points); successive Richardson-extrapolated
/// approximations must agree to `matching_digits` significant digits.
ReferenceSolution reference_solution(const Config& cfg, const ReferenceOptions& opts = {});

/// Unsplit solution on the experiment's own grid, sampled like the split runs.
Eigen::VectorXd semidiscrete_reference(const Config& cfg, const numerics::ReferenceIntegratorConfig& icfg = {});

struct RunResult {
    State state;
    long steps = 0;
};

/// Integrate the split system from the initial data to t_final.
RunResult run(const Problem& problem, const SplittingMethod& method, double dt,
              NonlinearMode mode = NonlinearMode::adaptive);

}  // namespace trisplit::brusselator

#endif
