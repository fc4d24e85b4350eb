#include "trisplit/splitting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace trisplit {

namespace {

std::string normalize(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

// Pack a sequence of (operator, fraction) applications into stages where the
// operator index strictly increases within a stage.
CoefficientMatrix pack_sequence(const std::vector<std::pair<int, double>>& seq, int num_operators) {
    std::vector<Eigen::RowVectorXd> rows;
    int last = num_operators;
    for (const auto& [op, frac] : seq) {
        if (op <= last) {
            rows.emplace_back(Eigen::RowVectorXd::Zero(num_operators));
        }
        rows.back()(op - 1) = frac;
        last = op;
    }
    CoefficientMatrix alpha(static_cast<Eigen::Index>(rows.size()), num_operators);
    for (std::size_t k = 0; k < rows.size(); ++k) alpha.row(static_cast<Eigen::Index>(k)) = rows[k];
    return alpha;
}

std::string order_label(const std::vector<int>& order) {
    std::string label = "Strang(";
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) label += '-';
        label += std::to_string(order[i]);
    }
    return label + ")";
}

const std::vector<std::array<int, 3>>& strang_orders() {
    static const std::vector<std::array<int, 3>> orders = {
        {1, 2, 3}, {1, 3, 2}, {2, 1, 3}, {2, 3, 1}, {3, 1, 2}, {3, 2, 1}};
    return orders;
}

SplittingMethod ak32i() {
    const double r = 1.0 / std::sqrt(2.0);
    CoefficientMatrix a(3, 3);
    a << 0.5, 1.0 - r, r,
         0.0, r, 1.0 - r,
         0.5, 0.0, 0.0;
    return {"AK32i", a, 1.06, 2};
}

SplittingMethod ak32ii() {
    CoefficientMatrix a(3, 3);
    a << 0.316620935432115636, 0.273890572734778059, 0.662265355057626845,
         -0.0303736077786568570, 0.438287559165397521, 0.0664399910533392230,
         0.713752672346541221, 0.287821868099824420, 0.271294653889033932;
    return {"AK32ii", a, 0.29, 2};
}

SplittingMethod ak52() {
    CoefficientMatrix a(5, 3);
    a << 0.161862914279624, 0.242677859055102, 0.5,
         0.338137085720376, 0.514644281889796, 0.0,
         0.338137085720376, 0.0, 0.5,
         0.0, 0.242677859055102, 0.0,
         0.161862914279624, 0.0, 0.0;
    return {"AK52", a, 0.22, 2};
}

}  // namespace

std::vector<std::string> builtin_method_names() {
    std::vector<std::string> names;
    for (const auto& o : strang_orders()) names.push_back(order_label({o.begin(), o.end()}));
    names.insert(names.end(), {"AK32i", "AK32ii", "AK52", "Godunov", "GodunovAdjoint"});
    return names;
}

SplittingMethod strang_method(const std::vector<int>& order) {
    const int n = static_cast<int>(order.size());
    if (n < 2) throw std::invalid_argument("Strang splitting needs at least two operators");
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) {
        if (sorted[i] != i + 1) throw std::invalid_argument("Strang order must be a permutation of 1..N");
    }
    std::vector<std::pair<int, double>> seq;
    for (int i = 0; i + 1 < n; ++i) seq.emplace_back(order[i], 0.5);
    seq.emplace_back(order[n - 1], 1.0);
    for (int i = n - 2; i >= 0; --i) seq.emplace_back(order[i], 0.5);
    return {order_label(order), pack_sequence(seq, n), 1.48, 2};
}

SplittingMethod builtin_method(std::string_view name) {
    const std::string key = normalize(name);
    if (key == "strang") return strang_method({1, 2, 3});
    for (const auto& o : strang_orders()) {
        const std::string label = order_label({o.begin(), o.end()});
        if (key == normalize(label)) return strang_method({o.begin(), o.end()});
    }
    if (key == "ak32i" || key == "ak3-2(i)") return ak32i();
    if (key == "ak32ii" || key == "ak3-2(ii)") return ak32ii();
    if (key == "ak52" || key == "ak5-2") return ak52();
    if (key == "godunov" || key == "lie-trotter") {
        return {"Godunov", CoefficientMatrix::Ones(1, 3), std::nullopt, 1};
    }
    if (key == "godunovadjoint") {
        CoefficientMatrix a(3, 3);
        a << 0, 0, 1,
             0, 1, 0,
             1, 0, 0;
        return {"GodunovAdjoint", a, std::nullopt, 1};
    }
    std::string known;
    for (const auto& n : builtin_method_names()) known += (known.empty() ? "" : ", ") + n;
    throw UnknownMethodError("unknown splitting method '" + std::string(name) + "' (known: " + known + ")");
}

OrderConditionReport verify_order_conditions(const SplittingMethod& method, double tolerance) {
    const auto& a = method.alpha;
    const Eigen::Index s = a.rows();
    const Eigen::Index n = a.cols();
    OrderConditionReport report;

    double max1 = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
        const double r = std::abs(a.col(l).sum() - 1.0);
        report.residuals_order1.push_back(r);
        max1 = std::max(max1, r);
    }

    // tail(k, l) = sum_{k' >= k} alpha(k', l)
    Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(s + 1, n);
    for (Eigen::Index k = s - 1; k >= 0; --k) tail.row(k) = tail.row(k + 1) + a.row(k);

    double max2 = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index m = l + 1; m < n; ++m) {
            double sum = 0.0;
            for (Eigen::Index k = 0; k < s; ++k) sum += a(k, l) * tail(k, m);
            const double r = std::abs(sum - 0.5);
            report.residuals_order2.push_back(r);
            max2 = std::max(max2, r);
        }
    }

    report.max_abs_residual = std::max(max1, max2);
    if (max1 <= tolerance) report.satisfied_to_order = (max2 <= tolerance) ? 2 : 1;
    return report;
}

int count_subintegrations(const SplittingMethod& method) {
    return static_cast<int>((method.alpha.array() != 0.0).count());
}

std::vector<int> subintegrations_per_operator(const SplittingMethod& method) {
    std::vector<int> counts;
    for (Eigen::Index l = 0; l < method.alpha.cols(); ++l) {
        counts.push_back(static_cast<int>((method.alpha.col(l).array() != 0.0).count()));
    }
    return counts;
}

std::string coefficient_catalog_csv(const std::vector<SplittingMethod>& methods) {
    Eigen::Index width = 0;
    for (const auto& m : methods) width = std::max(width, m.alpha.cols());
    std::ostringstream out;
    out << "name,stage";
    for (Eigen::Index l = 0; l < width; ++l) out << ",alpha" << (l + 1);
    out << '\n' << std::setprecision(18);
    for (const auto& m : methods) {
        for (Eigen::Index k = 0; k < m.alpha.rows(); ++k) {
            out << m.name << ',' << (k + 1);
            for (Eigen::Index l = 0; l < width; ++l) {
                out << ',' << (l < m.alpha.cols() ? m.alpha(k, l) : 0.0);
            }
            out << '\n';
        }
    }
    return out.str();
}

long step_count(double t0, double tf, double dt) {
    const double ratio = (tf - t0) / dt;
    const double nearest = std::round(ratio);
    if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
        return static_cast<long>(nearest);
    }
    return std::max(1L, static_cast<long>(std::ceil(ratio)));
}

std::vector<std::pair<int, double>> application_sequence(const CoefficientMatrix& alpha) {
    std::vector<std::pair<int, double>> seq;
    for (Eigen::Index k = 0; k < alpha.rows(); ++k) {
        for (Eigen::Index l = 0; l < alpha.cols(); ++l) {
            const double a = alpha(k, l);
            if (a == 0.0) continue;
            const int op = static_cast<int>(l) + 1;
            if (!seq.empty() && seq.back().first == op) {
                seq.back().second += a;
            } else {
                seq.emplace_back(op, a);
            }
        }
    }
    return seq;
}

std::optional<std::array<int, 3>> matching_strang_order(const CoefficientMatrix& alpha, double tolerance) {
    const auto seq = application_sequence(alpha);
    for (const auto& o : strang_orders()) {
        const auto ref = application_sequence(strang_method({o.begin(), o.end()}).alpha);
        if (ref.size() != seq.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < ref.size() && same; ++i) {
            same = ref[i].first == seq[i].first && std::abs(ref[i].second - seq[i].second) <= tolerance;
        }
        if (same) return o;
    }
    return std::nullopt;
}

}  // namespace trisplit
