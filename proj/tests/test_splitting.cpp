#include "trisplit/splitting.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace trisplit;

namespace {

const std::vector<std::string> second_order = {"Strang(1-2-3)", "Strang(1-3-2)", "Strang(2-1-3)",
                                               "Strang(2-3-1)", "Strang(3-1-2)", "Strang(3-2-1)",
                                               "AK32i",         "AK32ii",        "AK52"};

// Exact flows of y' = A_l y for dense matrices.
SubFlowSet<Eigen::VectorXd> linear_flows(const std::vector<Eigen::MatrixXd>& ops) {
    SubFlowSet<Eigen::VectorXd> set;
    for (const auto& A : ops) {
        set.flows.push_back([A](Eigen::VectorXd& y, double h) {
            // eigen-decomposition is fine for the symmetric test matrices used here
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
            y = es.eigenvectors() * (es.eigenvalues().array() * h).exp().matrix().asDiagonal() *
                es.eigenvectors().transpose() * y;
        });
    }
    return set;
}

Eigen::VectorXd exact_sum_flow(const std::vector<Eigen::MatrixXd>& ops, const Eigen::VectorXd& y0, double h) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(y0.size(), y0.size());
    for (const auto& A : ops) S += A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    return es.eigenvectors() * (es.eigenvalues().array() * h).exp().matrix().asDiagonal() *
           es.eigenvectors().transpose() * y0;
}

Eigen::MatrixXd random_symmetric(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = u(rng);
    return 0.5 * (M + M.transpose());
}

}  // namespace

TEST(BuiltinMethod, AK32iCoefficients) {
    const auto m = builtin_method("AK32i");
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXd expected(3, 3);
    expected << 0.5, 1 - r, r, 0, r, 1 - r, 0.5, 0, 0;
    EXPECT_EQ(m.alpha, expected);
    EXPECT_EQ(m.declared_order, 2);
}

TEST(BuiltinMethod, Strang231Coefficients) {
    Eigen::MatrixXd expected(3, 3);
    expected << 0, 0.5, 0.5, 1, 0, 0.5, 0, 0.5, 0;
    EXPECT_EQ(builtin_method("Strang(2-3-1)").alpha, expected);
}

TEST(BuiltinMethod, AK52FirstRowAndShape) {
    const auto m = builtin_method("AK52");
    ASSERT_EQ(m.num_stages(), 5);
    EXPECT_DOUBLE_EQ(m.alpha(0, 0), 0.161862914279624);
    EXPECT_DOUBLE_EQ(m.alpha(0, 1), 0.242677859055102);
    EXPECT_DOUBLE_EQ(m.alpha(0, 2), 0.5);
}

TEST(BuiltinMethod, PlainStrangIsOneTwoThree) {
    EXPECT_EQ(builtin_method("Strang").alpha, builtin_method("Strang(1-2-3)").alpha);
}

TEST(BuiltinMethod, UnknownNameIsRejected) {
    EXPECT_THROW(builtin_method("RK4"), UnknownMethodError);
    try {
        builtin_method("RK4");
    } catch (const UnknownMethodError& e) {
        EXPECT_NE(std::string(e.what()).find("AK32i"), std::string::npos);
    }
}

TEST(BuiltinMethod, StrangPermutationsMatchTheirSequence) {
    for (const std::vector<int>& order : {std::vector<int>{1, 2, 3}, {1, 3, 2}, {2, 1, 3}, {2, 3, 1}, {3, 1, 2},
                                          {3, 2, 1}}) {
        const auto seq = application_sequence(strang_method(order).alpha);
        ASSERT_EQ(seq.size(), 5u);
        const std::vector<double> fractions = {0.5, 0.5, 1.0, 0.5, 0.5};
        const std::vector<int> ops = {order[0], order[1], order[2], order[1], order[0]};
        for (int i = 0; i < 5; ++i) {
            EXPECT_EQ(seq[i].first, ops[i]);
            EXPECT_DOUBLE_EQ(seq[i].second, fractions[i]);
        }
    }
}

TEST(OrderConditions, BuiltinSecondOrderMethods) {
    for (const auto& name : second_order) {
        const auto r = verify_order_conditions(builtin_method(name), 1e-10);
        EXPECT_EQ(r.satisfied_to_order, 2) << name;
        EXPECT_LE(r.max_abs_residual, 1e-10) << name;
        EXPECT_EQ(r.residuals_order1.size(), 3u);
        EXPECT_EQ(r.residuals_order2.size(), 3u);
    }
}

TEST(OrderConditions, GodunovIsFirstOrderOnly) {
    for (const char* name : {"Godunov", "GodunovAdjoint"}) {
        const auto r = verify_order_conditions(builtin_method(name), 1e-10);
        EXPECT_EQ(r.satisfied_to_order, 1) << name;
        for (double v : r.residuals_order2) EXPECT_DOUBLE_EQ(v, 0.5) << name;
    }
}

TEST(OrderConditions, ZeroMatrixSatisfiesNothing) {
    SplittingMethod m{"zero", Eigen::MatrixXd::Zero(2, 3), std::nullopt, 0};
    const auto r = verify_order_conditions(m, 1e-10);
    EXPECT_EQ(r.satisfied_to_order, 0);
    for (double v : r.residuals_order1) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(OrderConditions, SatisfiedOrderMatchesResiduals) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        SplittingMethod m{"perturbed", builtin_method(second_order[trial % second_order.size()]).alpha,
                          std::nullopt, 2};
        const double eps = std::pow(10.0, -3 - trial % 12);
        m.alpha(trial % m.num_stages(), trial % 3) += eps * u(rng);
        const auto r = verify_order_conditions(m, 1e-10);
        double max1 = 0, max2 = 0;
        for (double v : r.residuals_order1) max1 = std::max(max1, v);
        for (double v : r.residuals_order2) max2 = std::max(max2, v);
        const int expected = max1 > 1e-10 ? 0 : (max2 > 1e-10 ? 1 : 2);
        EXPECT_EQ(r.satisfied_to_order, expected);
        EXPECT_DOUBLE_EQ(r.max_abs_residual, std::max(max1, max2));
    }
}

TEST(Subintegrations, CountsPerMethod) {
    EXPECT_EQ(count_subintegrations(builtin_method("Strang(2-3-1)")), 5);
    EXPECT_EQ(count_subintegrations(builtin_method("AK32i")), 6);
    EXPECT_EQ(count_subintegrations(builtin_method("AK32ii")), 9);
    EXPECT_EQ(count_subintegrations(builtin_method("AK52")), 9);
    for (const auto& name : builtin_method_names()) {
        const auto m = builtin_method(name);
        const auto per_op = subintegrations_per_operator(m);
        EXPECT_EQ(per_op[0] + per_op[1] + per_op[2], count_subintegrations(m)) << name;
        if (name.rfind("Strang", 0) == 0) EXPECT_EQ(count_subintegrations(m), 5) << name;
    }
}

TEST(Step, GodunovOnCommutingScalarFlows) {
    SubFlowSet<double> set;
    for (int i = 0; i < 2; ++i) set.flows.push_back([](double& y, double h) { y *= std::exp(h); });
    const SplittingMethod god{"Godunov 2-split", Eigen::MatrixXd::Ones(1, 2), std::nullopt, 1};
    double y = 1.0;
    step(god, set, y, 0.3);
    EXPECT_NEAR(y, std::exp(0.6), 1e-15);
}

TEST(Step, ZeroStepLeavesStateUnchanged) {
    std::mt19937 rng(1);
    SubFlowSet<Eigen::VectorXd> set;
    for (int l = 0; l < 3; ++l) {
        set.flows.push_back([A = random_symmetric(rng, 3)](Eigen::VectorXd& y, double h) { y += h * (A * y); });
    }
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(3, 1, 3);
    const Eigen::VectorXd y0 = y;
    step(builtin_method("Strang(1-2-3)"), set, y, 0.0);
    EXPECT_EQ(y, y0);
}

TEST(Step, CommutingLinearFlowsAreExactForEveryMethod) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        // shared eigenbasis, so the three operators commute
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_symmetric(rng, 4));
        const Eigen::MatrixXd Q = qr.householderQ();
        std::vector<Eigen::MatrixXd> ops;
        for (int l = 0; l < 3; ++l) {
            Eigen::VectorXd d(4);
            for (int i = 0; i < 4; ++i) d(i) = u(rng);
            ops.push_back(Q * d.asDiagonal() * Q.transpose());
        }
        const auto flows = linear_flows(ops);
        Eigen::VectorXd y0(4);
        for (int i = 0; i < 4; ++i) y0(i) = u(rng);
        const double h = 0.37;
        const Eigen::VectorXd exact = exact_sum_flow(ops, y0, h);
        for (const auto& name : builtin_method_names()) {
            Eigen::VectorXd y = y0;
            step(builtin_method(name), flows, y, h);
            EXPECT_LE((y - exact).norm(), 1e-13 * exact.norm()) << name;
        }
    }
}

TEST(Step, LocalErrorOrderOnNonCommutingFlows) {
    std::mt19937 rng(11);
    std::vector<Eigen::MatrixXd> ops = {random_symmetric(rng, 3), random_symmetric(rng, 3), random_symmetric(rng, 3)};
    const auto flows = linear_flows(ops);
    const Eigen::VectorXd y0 = Eigen::VectorXd::Ones(3);
    for (const auto& name : builtin_method_names()) {
        const auto m = builtin_method(name);
        auto local_error = [&](double h) {
            Eigen::VectorXd y = y0;
            step(m, flows, y, h);
            return (y - exact_sum_flow(ops, y0, h)).norm();
        };
        const double p = std::log2(local_error(0.02) / local_error(0.01));
        EXPECT_NEAR(p, m.declared_order + 1, 0.1) << name;
    }
}

TEST(Step, ZeroCoefficientsAreSkipped) {
    for (const auto& name : builtin_method_names()) {
        const auto m = builtin_method(name);
        std::vector<int> calls(3, 0);
        std::vector<double> increments;
        SubFlowSet<int> set;
        for (int l = 0; l < 3; ++l) {
            set.flows.push_back([&, l](int&, double h) {
                ++calls[l];
                increments.push_back(h);
            });
        }
        int state = 0;
        step(m, set, state, 0.1);
        EXPECT_EQ(calls[0] + calls[1] + calls[2], count_subintegrations(m)) << name;
        EXPECT_EQ(m.num_stages() * 3 - (calls[0] + calls[1] + calls[2]),
                  m.num_stages() * 3 - count_subintegrations(m));
        for (double h : increments) EXPECT_NE(h, 0.0);
    }
}

TEST(Step, NegativeCoefficientsReachTheFlowAsNegativeSteps) {
    const auto m = builtin_method("AK32ii");
    std::vector<double> increments;
    SubFlowSet<int> set;
    for (int l = 0; l < 3; ++l) set.flows.push_back([&](int&, double h) { increments.push_back(h); });
    int state = 0;
    step(m, set, state, 1.0);
    EXPECT_TRUE(std::any_of(increments.begin(), increments.end(), [](double h) { return h < 0; }));
}

TEST(Step, OperatorsRunInOrderWithinEachStage) {
    const auto m = builtin_method("Strang(3-2-1)");
    std::vector<std::pair<int, double>> trace;
    SubFlowSet<int> set;
    for (int l = 0; l < 3; ++l) set.flows.push_back([&, l](int&, double h) { trace.emplace_back(l + 1, h); });
    int state = 0;
    step(m, set, state, 2.0);
    const std::vector<std::pair<int, double>> expected = {{3, 1.0}, {2, 1.0}, {1, 2.0}, {2, 1.0}, {3, 1.0}};
    EXPECT_EQ(trace, expected);
}

TEST(Step, HookFiresOncePerStepAtItsPosition) {
    const auto m = builtin_method("AK32i");
    for (int after_op = 0; after_op <= 3; ++after_op) {
        std::vector<std::string> trace;
        SubFlowSet<int> set;
        for (int l = 0; l < 3; ++l) set.flows.push_back([&, l](int&, double) { trace.push_back(std::to_string(l + 1)); });
        set.stage_hook = [&](int&) { trace.push_back("H"); };
        set.hook_after_stage = 1;
        set.hook_after_operator = after_op;
        int state = 0;
        step(m, set, state, 0.1);
        ASSERT_EQ(std::count(trace.begin(), trace.end(), "H"), 1);
        const auto pos = std::find(trace.begin(), trace.end(), "H") - trace.begin();
        // stage 1 of AK32i applies all three operators
        EXPECT_EQ(pos, after_op == 0 ? 3 : after_op) << after_op;
    }
}

TEST(Step, SubFlowFailureCarriesItsPosition) {
    SubFlowSet<int> set;
    set.flows = {[](int&, double) {}, [](int&, double) {}, [](int&, double) { throw std::runtime_error("boom"); }};
    int state = 0;
    try {
        step(builtin_method("Strang(1-2-3)"), set, state, 0.1);
        FAIL() << "expected SubFlowError";
    } catch (const SubFlowError& e) {
        EXPECT_EQ(e.stage(), 1);
        EXPECT_EQ(e.op(), 3);
        EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
    }
}

TEST(Step, RejectsMismatchedFlowCount) {
    SubFlowSet<int> set;
    set.flows = {[](int&, double) {}, [](int&, double) {}};
    int state = 0;
    EXPECT_THROW(step(builtin_method("AK32i"), set, state, 0.1), std::invalid_argument);
}

TEST(Step, IsDeterministic) {
    std::mt19937 rng(5);
    std::vector<Eigen::MatrixXd> ops = {random_symmetric(rng, 5), random_symmetric(rng, 5), random_symmetric(rng, 5)};
    const auto flows = linear_flows(ops);
    Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(5, -1, 1), b = a;
    step(builtin_method("AK52"), flows, a, 0.2);
    step(builtin_method("AK52"), flows, b, 0.2);
    EXPECT_EQ(a, b);
}

TEST(Integrate, StepCounts) {
    SubFlowSet<double> set;
    std::vector<double> hs;
    set.flows = {[&](double& y, double h) {
                     hs.push_back(h);
                     y += h;
                 },
                 [](double&, double) {}, [](double&, double) {}};
    const auto godunov = builtin_method("Godunov");

    double y = 0;
    EXPECT_EQ(integrate(godunov, set, y, 0.0, 1.0, 0.1), 10);
    EXPECT_NEAR(y, 1.0, 1e-14);

    hs.clear();
    y = 0;
    double last_t = 0;
    const std::function<void(const double&, double, long)> observer = [&](const double&, double t, long) {
        last_t = t;
    };
    EXPECT_EQ(integrate(godunov, set, y, 0.0, 1.05, 0.1, observer), 11);
    EXPECT_NEAR(hs.back(), 0.05, 1e-12);
    EXPECT_EQ(last_t, 1.05);

    hs.clear();
    EXPECT_EQ(integrate(godunov, set, y, 0.0, 0.3, 1.0), 1);
    EXPECT_DOUBLE_EQ(hs.front(), 0.3);
}

TEST(Integrate, RejectsBadArguments) {
    SubFlowSet<double> set;
    set.flows = {[](double&, double) {}, [](double&, double) {}, [](double&, double) {}};
    double y = 0;
    EXPECT_THROW(integrate(builtin_method("AK32i"), set, y, 1.0, 0.0, 0.1), std::invalid_argument);
    EXPECT_THROW(integrate(builtin_method("AK32i"), set, y, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Catalog, CsvHasOneRowPerStage) {
    std::vector<SplittingMethod> methods;
    int rows = 0;
    for (const auto& n : second_order) {
        methods.push_back(builtin_method(n));
        rows += methods.back().num_stages();
    }
    const auto csv = coefficient_catalog_csv(methods);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "name,stage,alpha1,alpha2,alpha3");
    int count = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++count;
    }
    EXPECT_EQ(count, rows);
    EXPECT_NE(csv.find("AK52,5,"), std::string::npos);
}

TEST(MinimalMethods, EveryFiveCoefficientSolutionIsAStrangPermutation) {
    const auto res = enumerate_minimal_os32_3(1e-10);
    EXPECT_GT(res.patterns_examined, 0);
    std::set<std::array<int, 3>> orders;
    for (const auto& s : res.solutions) {
        EXPECT_LE(s.residual, 1e-8);
        EXPECT_EQ(count_subintegrations({"s", s.alpha, std::nullopt, 2}), 5);
        const auto order = matching_strang_order(s.alpha);
        ASSERT_TRUE(order.has_value()) << s.alpha;
        orders.insert(*order);
    }
    EXPECT_EQ(orders.size(), 6u);
}

TEST(MinimalMethods, NonStrangMatrixDoesNotMatch) {
    EXPECT_FALSE(matching_strang_order(builtin_method("AK32i").alpha).has_value());
    EXPECT_TRUE(matching_strang_order(builtin_method("Strang(2-1-3)").alpha).has_value());
}

TEST(StepCount, RoundsNearIntegersAndShortensTheLastStep) {
    EXPECT_EQ(step_count(0.0, 80.0, 0.2), 400);
    EXPECT_EQ(step_count(0.0, 1.0, 0.3), 4);
    EXPECT_EQ(step_count(0.0, 0.04, 4e-4), 100);
}
