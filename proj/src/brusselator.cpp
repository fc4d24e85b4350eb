#include "trisplit/brusselator.hpp"

#include "trisplit/errors.hpp"
#include "trisplit/numerics/spline.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace trisplit::brusselator {

namespace {

Eigen::MatrixXd dirichlet_laplacian(int m, double dx) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
    const double w = 1.0 / (dx * dx);
    for (int i = 0; i < m; ++i) {
        L(i, i) = -2.0 * w;
        if (i > 0) L(i, i - 1) = w;
        if (i + 1 < m) L(i, i + 1) = w;
    }
    return L;
}

// D * (u_{i-1} - 2 u_i + u_{i+1}) / dx^2 with constant boundary value b.
void apply_laplacian(const Eigen::Ref<const Eigen::VectorXd>& u, double boundary, double coef, double dx,
                     Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::Index m = u.size();
    const double w = coef / (dx * dx);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double left = i > 0 ? u(i - 1) : boundary;
        const double right = i + 1 < m ? u(i + 1) : boundary;
        out(i) = w * (left - 2.0 * u(i) + right);
    }
}

double log_relation(double T, double k) {
    return std::log(std::abs(T / (T - k))) / (k * k) - 1.0 / (k * T);
}

constexpr std::uint64_t kDiffusionT = 1;
constexpr std::uint64_t kDiffusionC = 2;

}  // namespace

void Config::validate() const {
    if (!(D1 > 0.0) || !(D2 > 0.0)) throw std::invalid_argument("brusselator: diffusion coefficients must be positive");
    if (M < 3) throw std::invalid_argument("brusselator: need at least 3 interior points");
    if (beta == -1.0) throw std::invalid_argument("brusselator: beta = -1 is singular");
    if (alpha == 0.0) throw std::invalid_argument("brusselator: alpha must be nonzero (boundary C = beta/alpha)");
    if (!(t_final > 0.0)) throw std::invalid_argument("brusselator: t_final must be positive");
}

std::pair<double, double> linear_reaction_point(double T, double C, double h, double alpha, double beta) {
    const double rate = beta + 1.0;
    const double steady = alpha / rate;
    const double decay = -std::expm1(-rate * h);  // 1 - e^{-rate h}
    const double T_new = steady + (T - steady) * (1.0 - decay);
    const double C_new = C + beta * (steady * h + (T - steady) * decay / rate);
    return {T_new, C_new};
}

double nonlinear_closed_form_point(double T, double C, double h, const numerics::RootOptions& opts) {
    const double k = T + C;
    if (h == 0.0 || T == 0.0 || C == 0.0) return T;  // fixed points T = 0 and T = k
    if (!(k > 0.0) || T < 0.0 || T > k) {
        throw NumericalError("nonlinear reaction: closed form needs 0 <= T <= T + C (T=" + std::to_string(T) +
                             ", C=" + std::to_string(C) + ")");
    }
    const double target = log_relation(T, k) + h;
    auto f = [&](double x) { return log_relation(x, k) - target; };
    auto df = [&](double x) { return 1.0 / (x * x * (k - x)); };

    double lo, hi;
    if (h > 0.0) {
        lo = T;
        hi = std::nextafter(k, 0.0);
        // the solution sits within one ulp of k
        if (f(hi) <= 0.0) return hi;
    } else {
        lo = T * 1e-12;
        hi = T;
        if (f(lo) >= 0.0) return lo;
    }
    return numerics::solve_scalar(f, df, lo, hi, opts).root;
}

double nonlinear_adaptive_point(double T, double C, double h, const numerics::ReferenceIntegratorConfig& cfg) {
    const double k = T + C;
    if (h == 0.0 || T == 0.0) return T;
    auto rhs = [k](double, double x) { return x * x * (k - x); };
    return numerics::reference_solve(rhs, T, 0.0, h, cfg).y;
}

Problem::Problem(Config cfg, numerics::ReferenceIntegratorConfig oracle)
    : cfg_(cfg), oracle_(oracle), expm_cache_(std::make_shared<numerics::ExpmCache<double>>()) {
    cfg_.validate();
    laplacian_ = std::make_shared<const Eigen::MatrixXd>(dirichlet_laplacian(cfg_.M, dx()));
    generator_T_ = std::make_shared<const Eigen::MatrixXd>(cfg_.D1 * *laplacian_);
    generator_C_ = std::make_shared<const Eigen::MatrixXd>(cfg_.D2 * *laplacian_);
}

Eigen::VectorXd Problem::grid() const {
    return Eigen::VectorXd::LinSpaced(cfg_.M, dx(), cfg_.M * dx());
}

State Problem::initial_state() const {
    const Eigen::ArrayXd x = grid().array();
    State s;
    s.T = (cfg_.alpha + x * (1.0 - x)).matrix();
    s.C = (cfg_.boundary_C() + x * x * (1.0 - x)).matrix();
    s.t = 0.0;
    return s;
}

void Problem::diffusion(State& s, double h) const {
    if (h == 0.0) return;
    const auto eT = expm_cache_->get(kDiffusionT, *generator_T_, h);
    const auto eC = cfg_.D2 == cfg_.D1 ? eT : expm_cache_->get(kDiffusionC, *generator_C_, h);
    const double bT = cfg_.boundary_T();
    const double bC = cfg_.boundary_C();
    Eigen::VectorXd tmp = s.T.array() - bT;
    s.T.noalias() = *eT * tmp;
    s.T.array() += bT;
    tmp = s.C.array() - bC;
    s.C.noalias() = *eC * tmp;
    s.C.array() += bC;
}

void Problem::linear_reaction(State& s, double h) const {
    if (h == 0.0) return;
    for (Eigen::Index i = 0; i < s.T.size(); ++i) {
        std::tie(s.T(i), s.C(i)) = linear_reaction_point(s.T(i), s.C(i), h, cfg_.alpha, cfg_.beta);
    }
}

void Problem::nonlinear_reaction(State& s, double h, NonlinearMode mode) const {
    if (h == 0.0) return;
    for (Eigen::Index i = 0; i < s.T.size(); ++i) {
        const double k = s.T(i) + s.C(i);
        const double T = mode == NonlinearMode::adaptive ? nonlinear_adaptive_point(s.T(i), s.C(i), h, oracle_)
                                                         : nonlinear_closed_form_point(s.T(i), s.C(i), h);
        s.T(i) = T;
        s.C(i) = k - T;
    }
}

SubFlowSet<State> Problem::subflows(NonlinearMode mode) const {
    SubFlowSet<State> set;
    // the flows share this problem's expm cache through the copy
    const Problem self = *this;
    set.flows.emplace_back([self](State& s, double h) { self.diffusion(s, h); });
    set.flows.emplace_back([self](State& s, double h) { self.linear_reaction(s, h); });
    set.flows.emplace_back([self, mode](State& s, double h) { self.nonlinear_reaction(s, h, mode); });
    return set;
}

Eigen::VectorXd Problem::rhs(const Eigen::VectorXd& y) const {
    const Eigen::Index m = cfg_.M;
    const auto T = y.head(m);
    const auto C = y.tail(m);
    Eigen::VectorXd out(2 * m);
    apply_laplacian(T, cfg_.boundary_T(), cfg_.D1, dx(), out.head(m));
    apply_laplacian(C, cfg_.boundary_C(), cfg_.D2, dx(), out.tail(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const double r = T(i) * T(i) * C(i);
        out(i) += cfg_.alpha - (cfg_.beta + 1.0) * T(i) + r;
        out(m + i) += cfg_.beta * T(i) - r;
    }
    return out;
}

State Problem::solve_unsplit(double t, const numerics::ReferenceIntegratorConfig& cfg) const {
    const State s0 = initial_state();
    const Eigen::Index m = cfg_.M;
    Eigen::VectorXd y0(2 * m);
    y0 << s0.T, s0.C;
    auto f = [this](double, const Eigen::VectorXd& y) { return rhs(y); };
    const auto res = numerics::reference_solve(f, y0, 0.0, t, cfg);
    return {res.y.head(m), res.y.tail(m), t};
}

Eigen::VectorXd Problem::sample(const State& s, int points) const {
    if (points < 2) throw std::invalid_argument("sample: need at least two points");
    const Eigen::Index m = cfg_.M;
    auto sample_field = [&](const Eigen::VectorXd& u, double boundary) {
        Eigen::VectorXd nodes(m + 2);
        nodes << boundary, u, boundary;
        const numerics::CubicSpline1D<double> spline(nodes, dx(), numerics::SplineBoundary::natural);
        Eigen::VectorXd out(points);
        for (int i = 0; i < points; ++i) out(i) = spline(static_cast<double>(i) / (points - 1));
        return out;
    };
    Eigen::VectorXd y(2 * points);
    y << sample_field(s.T, cfg_.boundary_T()), sample_field(s.C, cfg_.boundary_C());
    return y;
}

double mrms_error(const Eigen::VectorXd& y, const Eigen::VectorXd& reference) {
    if (y.size() != reference.size()) throw std::invalid_argument("mrms_error: length mismatch");
    if (y.size() == 0) throw std::invalid_argument("mrms_error: empty input");
    const Eigen::ArrayXd scaled = (reference - y).array() / (1.0 + reference.array().abs());
    return std::sqrt(scaled.square().mean());
}

std::vector<double> convergence_order(const std::vector<std::pair<double, double>>& errors) {
    if (errors.size() < 2) throw std::invalid_argument("convergence_order: need at least two runs");
    std::vector<double> p;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const auto [dt1, e1] = errors[i];
        const auto [dt2, e2] = errors[i + 1];
        if (!(e1 > 0.0) || !(e2 > 0.0) || !std::isfinite(e1) || !std::isfinite(e2)) {
            throw NumericalError("convergence_order: errors must be positive and finite");
        }
        if (dt1 == dt2) throw std::invalid_argument("convergence_order: step sizes must differ");
        p.push_back(std::log(e1 / e2) / std::log(dt1 / dt2));
    }
    return p;
}

namespace {

std::string reference_header(const Config& cfg, const ReferenceOptions& opts) {
    std::ostringstream h;
    h << std::setprecision(17) << "# brusselator reference alpha=" << cfg.alpha << " beta=" << cfg.beta
      << " D1=" << cfg.D1 << " D2=" << cfg.D2 << " t_final=" << cfg.t_final << " points=" << opts.sample_points
      << " rtol=" << opts.integrator.rtol << " atol=" << opts.integrator.atol;
    return h.str();
}

std::optional<ReferenceSolution> load_reference(const std::filesystem::path& path, const std::string& header,
                                                int points) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line) || line != header) return std::nullopt;
    ReferenceSolution ref;
    if (!std::getline(in, line)) return std::nullopt;  // "# grids=..."
    {
        std::istringstream meta(line.substr(line.find('=') + 1));
        std::string tok;
        while (std::getline(meta, tok, ' ')) {
            if (tok.rfind("max_rel_diff=", 0) == 0) {
                ref.max_relative_difference = std::stod(tok.substr(13));
            } else if (!tok.empty()) {
                std::istringstream g(tok);
                std::string n;
                while (std::getline(g, n, ',')) ref.grids.push_back(std::stoi(n));
            }
        }
    }
    std::getline(in, line);  // column header
    ref.samples.resize(2 * points);
    for (int i = 0; i < points; ++i) {
        if (!std::getline(in, line)) return std::nullopt;
        std::istringstream row(line);
        std::string x, T, C;
        std::getline(row, x, ',');
        std::getline(row, T, ',');
        std::getline(row, C, ',');
        ref.samples(i) = std::stod(T);
        ref.samples(points + i) = std::stod(C);
    }
    ref.from_cache = true;
    return ref;
}

void store_reference(const std::filesystem::path& path, const std::string& header, const ReferenceSolution& ref,
                     int points) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write reference solution to " + path.string());
    out << header << '\n' << "# grids=";
    for (std::size_t i = 0; i < ref.grids.size(); ++i) out << (i ? "," : "") << ref.grids[i];
    out << " max_rel_diff=" << std::setprecision(6) << ref.max_relative_difference << '\n';
    out << "x,T,C\n" << std::setprecision(17);
    for (int i = 0; i < points; ++i) {
        out << static_cast<double>(i) / (points - 1) << ',' << ref.samples(i) << ',' << ref.samples(points + i)
            << '\n';
    }
}

}  // namespace

ReferenceSolution reference_solution(const Config& cfg, const ReferenceOptions& opts) {
    const std::string header = reference_header(cfg, opts);
    if (opts.cache_file) {
        if (auto cached = load_reference(*opts.cache_file, header, opts.sample_points)) return *cached;
    }
    if ((opts.base_intervals % (opts.sample_points - 1)) != 0) {
        throw std::invalid_argument("reference_solution: grid must align with the sample points");
    }

    ReferenceSolution ref;
    std::vector<Eigen::VectorXd> raw;
    std::optional<Eigen::VectorXd> previous_extrapolated;
    const double threshold = std::pow(10.0, -opts.matching_digits);
    for (int level = 0; level < opts.max_levels; ++level) {
        Config c = cfg;
        c.M = opts.base_intervals * (1 << level) - 1;
        const Problem p(c);
        raw.push_back(p.sample(p.solve_unsplit(cfg.t_final, opts.integrator), opts.sample_points));
        ref.grids.push_back(c.M);
        if (raw.size() < 2) continue;
        // second-order spatial error: Richardson extrapolation of the last two grids
        const Eigen::VectorXd extrapolated = (4.0 * raw.back() - raw[raw.size() - 2]) / 3.0;
        if (previous_extrapolated) {
            const Eigen::ArrayXd rel = (extrapolated - *previous_extrapolated).array().abs() /
                                       extrapolated.array().abs().max(1e-300);
            ref.max_relative_difference = rel.maxCoeff();
            ref.samples = extrapolated;
            if (ref.max_relative_difference <= threshold) {
                if (opts.cache_file) store_reference(*opts.cache_file, header, ref, opts.sample_points);
                return ref;
            }
        }
        previous_extrapolated = extrapolated;
    }
    throw NumericalError("reference_solution: refinement did not reach the requested agreement (max relative "
                         "difference " + std::to_string(ref.max_relative_difference) + ")");
}

Eigen::VectorXd semidiscrete_reference(const Config& cfg, const numerics::ReferenceIntegratorConfig& icfg) {
    const Problem p(cfg);
    return p.sample(p.solve_unsplit(cfg.t_final, icfg));
}

RunResult run(const Problem& problem, const SplittingMethod& method, double dt, NonlinearMode mode) {
    State s = problem.initial_state();
    const auto flows = problem.subflows(mode);
    const long steps = integrate(method, flows, s, 0.0, problem.config().t_final, dt);
    s.t = problem.config().t_final;
    return {std::move(s), steps};
}

}  // namespace trisplit::brusselator
