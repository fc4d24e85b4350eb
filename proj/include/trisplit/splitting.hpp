#ifndef TRISPLIT_SPLITTING_HPP
#define TRISPLIT_SPLITTING_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trisplit {

/// Step fractions of an s-stage, N-operator splitting method.
/// Row k holds stage k, column l holds the fraction of dt given to operator l.
using CoefficientMatrix = Eigen::MatrixXd;

struct SplittingMethod {
    std::string name;
    CoefficientMatrix alpha;
    std::optional<double> lem;  // literature local error measure, metadata only
    int declared_order = 0;

    int num_stages() const { return static_cast<int>(alpha.rows()); }
    int num_operators() const { return static_cast<int>(alpha.cols()); }
};

struct OrderConditionReport {
    std::vector<double> residuals_order1;
    std::vector<double> residuals_order2;  // pairs (0,1), (0,2), ..., (1,2), ... in lexicographic order
    double max_abs_residual = 0.0;
    int satisfied_to_order = 0;
};

class UnknownMethodError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Names accepted by builtin_method(), in catalog order.
std::vector<std::string> builtin_method_names();

/// Exact coefficient table of a named method. Strang permutations are spelled
/// "Strang(a-b-c)"; "Strang" alone is Strang(1-2-3).
SplittingMethod builtin_method(std::string_view name);

/// Strang splitting for an arbitrary operator order. `order` lists the
/// 1-based operators in application order: order[0] gets two half steps on the
/// outside, order.back() one full step in the middle.
SplittingMethod strang_method(const std::vector<int>& order);

/// Column sums and nested column products against 1 and 1/2.
OrderConditionReport verify_order_conditions(const SplittingMethod& method, double tolerance = 1e-10);

/// Number of nonzero coefficients, i.e. sub-flow applications per step.
int count_subintegrations(const SplittingMethod& method);

/// Per-operator count of nonzero coefficients.
std::vector<int> subintegrations_per_operator(const SplittingMethod& method);

/// CSV rows `name,stage,alpha1,...,alphaN` (stage is 1-based) with a header line.
std::string coefficient_catalog_csv(const std::vector<SplittingMethod>& methods);

/// Raised when a sub-flow throws inside step(); carries where it happened.
class SubFlowError : public std::runtime_error {
public:
    SubFlowError(int stage, int op, const std::string& what)
        : std::runtime_error("sub-flow failure at stage " + std::to_string(stage) + ", operator " +
                             std::to_string(op) + ": " + what),
          stage_(stage),
          operator_(op) {}

    int stage() const { return stage_; }
    int op() const { return operator_; }

private:
    int stage_;
    int operator_;
};

/// Flows of the split sub-problems. Each flow advances the state in place by
/// a (possibly negative) time increment.
template <class State>
struct SubFlowSet {
    using Flow = std::function<void(State&, double)>;
    using Hook = std::function<void(State&)>;

    std::vector<Flow> flows;
    Hook stage_hook;
    int hook_after_stage = 1;     // 1-based stage index
    int hook_after_operator = 0;  // 1-based operator within that stage; 0 fires at the end of the stage

    int size() const { return static_cast<int>(flows.size()); }
};

/// One step of the composition: every stage applies operator 1, 2, ..., N in
/// turn with step alpha(k, l) * dt. Zero coefficients are skipped. The hook
/// fires once per step at its configured position, whether or not the
/// operator at that position had a nonzero coefficient.
template <class State>
void step(const SplittingMethod& method, const SubFlowSet<State>& flows, State& state, double dt) {
    if (method.num_operators() != flows.size()) {
        throw std::invalid_argument("method '" + method.name + "' has " +
                                    std::to_string(method.num_operators()) + " operators but " +
                                    std::to_string(flows.size()) + " flows were supplied");
    }
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("step size must be finite and non-negative");
    }
    for (int k = 0; k < method.num_stages(); ++k) {
        for (int l = 0; l < method.num_operators(); ++l) {
            const double a = method.alpha(k, l);
            if (a != 0.0) {
                try {
                    flows.flows[l](state, a * dt);
                } catch (const SubFlowError&) {
                    throw;
                } catch (const std::exception& e) {
                    throw SubFlowError(k + 1, l + 1, e.what());
                }
            }
            if (flows.stage_hook && flows.hook_after_stage == k + 1 && flows.hook_after_operator == l + 1) {
                flows.stage_hook(state);
            }
        }
        if (flows.stage_hook && flows.hook_after_stage == k + 1 && flows.hook_after_operator == 0) {
            flows.stage_hook(state);
        }
    }
}

/// Step count for covering [t0, tf] with steps of at most dt; the last step is
/// shortened to land on tf. Ratios within 1e-9 of an integer count as exact.
long step_count(double t0, double tf, double dt);

/// Advance from t0 to tf. `observer(state, t, steps_taken)` is called after every step.
template <class State>
long integrate(const SplittingMethod& method, const SubFlowSet<State>& flows, State& state, double t0,
               double tf, double dt,
               const std::function<void(const State&, double, long)>& observer = {}) {
    if (!(tf > t0)) throw std::invalid_argument("integrate: tf must exceed t0");
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
    const long n = step_count(t0, tf, dt);
    for (long i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        const double h = (i + 1 == n) ? tf - t : dt;
        step(method, flows, state, h);
        if (observer) observer(state, (i + 1 == n) ? tf : t + h, i + 1);
    }
    return n;
}

// -- minimal OS 32-3 methods ------------------------------------------------

/// A 3-stage, 3-operator coefficient matrix with exactly five nonzero entries
/// satisfying the first- and second-order conditions.
struct MinimalSolution {
    std::array<bool, 9> zero_pattern{};  // row-major, true where alpha is forced to 0
    CoefficientMatrix alpha;
    double residual = 0.0;
};

struct MinimalSearchResult {
    std::vector<MinimalSolution> solutions;
    int patterns_examined = 0;
    int patterns_with_free_family = 0;  // patterns whose solution set is not isolated
};

/// Solve the order conditions on every admissible 4-zero pattern exactly
/// (the system is bilinear in two free parameters).
MinimalSearchResult enumerate_minimal_os32_3(double tolerance = 1e-10);

/// Sequence of (operator, fraction) sub-flow applications, merging consecutive
/// applications of the same operator.
std::vector<std::pair<int, double>> application_sequence(const CoefficientMatrix& alpha);

/// If `alpha` composes the same sequence as one of the six Strang orders (to
/// `tolerance`), returns that order as 1-based operator indices.
std::optional<std::array<int, 3>> matching_strang_order(const CoefficientMatrix& alpha, double tolerance = 1e-8);

}  // namespace trisplit

#endif
