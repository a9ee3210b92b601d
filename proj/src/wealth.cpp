#include "mmtail/wealth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "mmtail/errors.hpp"
#include "mmtail/spectral.hpp"

namespace mmtail {

namespace {

constexpr double kEta = 1.0;
constexpr int kMaxDamped = 100000;
constexpr double kHandoff = 1e-8;
constexpr double kEquilibriumTol = 1e-10;

double residual_norm(const WealthModel& m, double r, const RealVector& b) {
    return (b - b_system_rhs(m, r, b)).cwiseAbs().maxCoeff();
}

bool converged(const WealthModel& m, double r, const RealVector& b) {
    return residual_norm(m, r, b) <= 1e-12 * (1.0 + b.cwiseAbs().maxCoeff());
}

// Jacobian of b - rhs(b): an M-matrix with unit row sums.
RealMatrix newton_jacobian(const WealthModel& m, double r, const RealVector& b) {
    const int n = m.n();
    const RealMatrix& pi = m.generator.entries;
    RealMatrix j = RealMatrix::Identity(n, n);
    for (int a = 0; a < n; ++a) {
        for (int c = 0; c < n; ++c) {
            if (a == c || pi(a, c) == 0.0) continue;
            const double t = pi(a, c) * std::exp(m.gamma * (b(a) - b(c))) / r;
            j(a, a) += t;
            j(a, c) -= t;
        }
    }
    return j;
}

}  // namespace

void validate_wealth_model(const WealthModel& model) {
    const int n = model.n();
    if (n == 0) throw ValidationError("wealth model has no states");
    if (!model.y.allFinite()) throw ValidationError("incomes must be finite");
    if (model.generator.entries.rows() != n || model.generator.entries.cols() != n)
        throw ValidationError("generator dimension differs from the number of income states");
    const auto gen = check_generator(model.generator.entries);
    if (!gen.empty()) throw ValidationError(gen.front());
    if (!(model.gamma > 0.0) || !std::isfinite(model.gamma)) throw ValidationError("gamma must be positive");
    if (!(model.rho_tilde > 0.0) || !std::isfinite(model.rho_tilde)) throw ValidationError("rho_tilde must be positive");
    if (!(model.phi > 0.0) || !std::isfinite(model.phi)) throw ValidationError("phi must be positive");
    if (!is_irreducible(model.generator.entries)) throw Reducible("income generator is reducible");
}

RealVector stationary_distribution(const RealMatrix& pi) {
    const auto n = static_cast<int>(pi.rows());
    if (n == 0 || pi.cols() != n) throw ValidationError("generator must be square and nonempty");
    if (!is_irreducible(pi)) throw Reducible("generator is reducible");
    RealMatrix m = pi.transpose();
    m.row(n - 1).setOnes();
    RealVector rhs = RealVector::Zero(n);
    rhs(n - 1) = 1.0;
    RealVector v = m.partialPivLu().solve(rhs);
    v = v.cwiseMax(0.0);
    v /= v.sum();
    return v;
}

RealVector b_system_rhs(const WealthModel& model, double r, const RealVector& b) {
    const int n = model.n();
    const RealMatrix& pi = model.generator.entries;
    const double g = model.gamma;
    const double base = -1.0 / g + model.rho() / (g * r);
    RealVector out(n);
    for (int a = 0; a < n; ++a) {
        double sum = 0.0;
        for (int c = 0; c < n; ++c) {
            if (c == a || pi(a, c) == 0.0) continue;
            sum += pi(a, c) * std::expm1(g * (b(a) - b(c)));
        }
        // pi_aa e^0 + sum_c pi_ac e^{...} = sum_{c != a} pi_ac (e^{...} - 1)
        out(a) = model.y(a) + base - sum / (g * r);
    }
    return out;
}

BSolution solve_b(const WealthModel& model, double r) {
    validate_wealth_model(model);
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("interest rate must be positive");
    const int n = model.n();
    const RealMatrix& pi = model.generator.entries;
    const double g = model.gamma;
    const double shift = -1.0 / g + model.rho() / (g * r);

    BSolution sol;
    sol.r = r;
    sol.lower_bound = model.y.minCoeff() + shift;
    sol.upper_bound = model.y.maxCoeff() + shift;
    const double u = sol.lower_bound - kEta;
    const double v = sol.upper_bound + kEta;
    double row_max = 0.0;
    for (int a = 0; a < n; ++a) {
        double row = 0.0;
        for (int c = 0; c < n; ++c)
            if (c != a) row += pi(a, c);
        row_max = std::max(row_max, row);
    }
    sol.k = 1.0 + row_max * std::exp(g * (v - u)) / r;

    RealVector b = RealVector::Constant(n, 0.5 * (u + v));
    auto in_box = [&](const RealVector& x) { return x.minCoeff() >= u && x.maxCoeff() <= v; };
    auto damped_until = [&](double step_tol, int cap) {
        while (sol.iterations < cap) {
            const RealVector next = (sol.k * b + b_system_rhs(model, r, b)) / (sol.k + 1.0);
            const double step = (next - b).cwiseAbs().maxCoeff();
            b = next;
            ++sol.iterations;
            if (!in_box(b)) sol.iterates_in_box = false;
            if (step < step_tol) return;
        }
    };

    damped_until(kHandoff * (1.0 + std::abs(shift)), kMaxDamped);
    if (!converged(model, r, b)) {
        // Newton on b - rhs(b); the Jacobian is a nonsingular M-matrix everywhere
        RealVector x = b;
        for (int it = 0; it < 50; ++it) {
            const RealVector f = x - b_system_rhs(model, r, x);
            const RealVector dx = newton_jacobian(model, r, x).partialPivLu().solve(f);
            x -= dx;
            ++sol.newton_steps;
            if (!x.allFinite()) break;
            if (converged(model, r, x) || dx.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff())) break;
        }
        if (x.allFinite() && residual_norm(model, r, x) <= residual_norm(model, r, b)) b = x;
    }
    if (!converged(model, r, b)) damped_until(1e-14, kMaxDamped);
    sol.b = b;
    sol.residual = residual_norm(model, r, b);
    if (!converged(model, r, b)) {
        std::ostringstream os;
        os << "b-system did not converge at r = " << r << " (residual " << sol.residual << ")";
        throw ConvergenceError(os.str());
    }
    return sol;
}

double excess_supply(const WealthModel& model, double r) {
    const RealVector varpi = stationary_distribution(model.generator.entries);
    const BSolution sol = solve_b(model, r);
    return varpi.dot(model.y - sol.b);
}

double budget_spectral_check(const WealthModel& model, const BSolution& b) {
    const int n = model.n();
    const RealMatrix a = -model.rho() * RealMatrix::Identity(n, n) -
                         model.gamma * b.r * RealMatrix((model.y - b.b).asDiagonal()) + model.generator.entries;
    return metzler_abscissa(a) + b.r;
}

ModelSpec wealth_spec(const WealthModel& model, const RealVector& b) {
    const int n = model.n();
    std::vector<LevyExponent> ex;
    for (int i = 0; i < n; ++i) ex.emplace_back(LinearDrift{model.y(i) - b(i)});
    return make_spec(stationary_distribution(model.generator.entries), model.generator.entries, std::move(ex),
                     RealVector::Constant(n, model.phi));
}

DecayRates wealth_tail_rates(const WealthModel& model, double r) {
    const BSolution sol = solve_b(model, r);
    return find_decay_rates(wealth_spec(model, sol.b));
}

Equilibrium solve_equilibrium(const WealthModel& model) {
    validate_wealth_model(model);
    const double rho = model.rho();
    const RealVector varpi = stationary_distribution(model.generator.entries);
    Equilibrium eq;
    auto g = [&](double r) {
        const double v = varpi.dot(model.y - solve_b(model, r).b);
        eq.bracket_log.emplace_back(r, v);
        return v;
    };

    if (model.y.maxCoeff() == model.y.minCoeff()) {
        eq.degenerate = true;
        eq.r_star = rho;
        eq.b = solve_b(model, rho);
        eq.slopes = RealVector::Zero(model.n());
        eq.g_residual = std::abs(varpi.dot(model.y - eq.b.b));
        eq.rates.alpha_status = RootStatus::DomainDegenerate;
        eq.rates.beta_status = RootStatus::DomainDegenerate;
        eq.rates.zeta_at_zero = -model.phi;
        return eq;
    }

    double r_hi = rho;
    double g_hi = g(r_hi);
    double r_star = rho;
    if (std::abs(g_hi) > kEquilibriumTol) {
        double r_lo = 0.5 * rho;
        double g_lo = g(r_lo);
        while (!(g_lo < 0.0)) {
            r_hi = r_lo;
            g_hi = g_lo;
            r_lo *= 0.5;
            if (r_lo < 1e-12) throw BracketFailure("no sign change of g above r = 1e-12");
            g_lo = g(r_lo);
        }
        if (g_hi < 0.0) throw BracketFailure("g(rho) is negative");
        auto tol = [](double a, double b) {
            return std::abs(b - a) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(a);
        };
        std::uintmax_t iters = 300;
        const auto [a, b] = boost::math::tools::toms748_solve(g, r_lo, r_hi, g_lo, g_hi, tol, iters);
        const double ga = std::abs(g(a));
        const double gb = std::abs(g(b));
        r_star = ga <= gb ? a : b;
    }
    eq.r_star = r_star;
    eq.b = solve_b(model, r_star);
    eq.slopes = model.y - eq.b.b;
    eq.g_residual = std::abs(varpi.dot(eq.slopes));
    if (eq.g_residual > kEquilibriumTol) {
        std::ostringstream os;
        os << "equilibrium residual " << eq.g_residual << " exceeds 1e-10";
        throw ConvergenceError(os.str());
    }
    eq.rates = find_decay_rates(wealth_spec(model, eq.b.b));
    return eq;
}

std::vector<std::pair<double, double>> sweep_excess_supply(const WealthModel& model, double from, double to,
                                                           int points) {
    if (points < 1) throw ValidationError("sweep needs at least one point");
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < points; ++i) {
        const double r = points == 1 ? from : from + (to - from) * i / (points - 1);
        out.emplace_back(r, r > 0.0 ? excess_supply(model, r) : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

}  // namespace mmtail
