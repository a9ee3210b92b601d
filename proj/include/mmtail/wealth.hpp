#pragma once

#include <utility>
#include <vector>

#include "mmtail/model.hpp"
#include "mmtail/tail.hpp"

namespace mmtail {

/// CARA economy with Markov income and perpetual-youth mortality.
struct WealthModel {
    RealVector y;               // income flow per state
    GeneratorMatrix generator;  // irreducible
    double gamma = 1.0;         // absolute risk aversion
    double rho_tilde = 0.0;     // pure time preference
    double phi = 0.0;           // mortality rate

    [[nodiscard]] int n() const { return static_cast<int>(y.size()); }
    [[nodiscard]] double rho() const { return rho_tilde + phi; }
};

/// Throws ValidationError or Reducible on a malformed model.
void validate_wealth_model(const WealthModel& model);

/// Probability vector with varpi' Pi = 0. Throws Reducible.
[[nodiscard]] RealVector stationary_distribution(const RealMatrix& pi);

struct BSolution {
    double r = 0.0;
    RealVector b;
    double residual = 0.0;  // sup-norm defect of the b-system
    int iterations = 0;     // damped fixed-point steps
    int newton_steps = 0;
    double k = 0.0;         // damping constant
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    bool iterates_in_box = true;
};

/// Right-hand side of the b-system at b.
[[nodiscard]] RealVector b_system_rhs(const WealthModel& model, double r, const RealVector& b);

/// Unique solution of the b-system at interest rate r > 0: damped monotone iteration from
/// the midpoint of the order interval, finished by Newton. Throws ConvergenceError.
[[nodiscard]] BSolution solve_b(const WealthModel& model, double r);

/// g(r) = varpi'(y - b(r)).
[[nodiscard]] double excess_supply(const WealthModel& model, double r);

/// zeta(-rho I - gamma r diag(y - b) + Pi) + r; zero for an exact solution.
[[nodiscard]] double budget_spectral_check(const WealthModel& model, const BSolution& b);

/// The wealth process as a ModelSpec: linear drifts y - b, killing phi in every state,
/// started from the stationary distribution.
[[nodiscard]] ModelSpec wealth_spec(const WealthModel& model, const RealVector& b);

[[nodiscard]] DecayRates wealth_tail_rates(const WealthModel& model, double r);

struct Equilibrium {
    double r_star = 0.0;
    BSolution b;
    RealVector slopes;
    DecayRates rates;
    double g_residual = 0.0;
    bool degenerate = false;  // all incomes equal, W* is identically 0
    std::vector<std::pair<double, double>> bracket_log;  // (r, g(r)) evaluations while bracketing
};

/// A root of g in (0, rho]: r_lo is halved from rho/2 until g(r_lo) < 0, then the bracket
/// [r_lo, 2 r_lo] is refined. Throws BracketFailure when r_lo passes 1e-12.
[[nodiscard]] Equilibrium solve_equilibrium(const WealthModel& model);

/// (r, g(r)) on a uniform grid; NaN for r <= 0.
[[nodiscard]] std::vector<std::pair<double, double>> sweep_excess_supply(const WealthModel& model, double from,
                                                                         double to, int points);

}  // namespace mmtail
