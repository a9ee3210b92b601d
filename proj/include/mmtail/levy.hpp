#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "mmtail/linalg.hpp"

namespace mmtail {

/// Real interval with open/closed endpoint flags. Infinite endpoints are always open.
struct DomainInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = false;
    bool hi_closed = false;

    static DomainInterval whole_line() { return {}; }
    static DomainInterval singleton(double x) { return {x, x, true, true}; }

    [[nodiscard]] bool contains(double s) const {
        const bool above = s > lo || (lo_closed && s == lo);
        const bool below = s < hi || (hi_closed && s == hi);
        return above && below;
    }
    [[nodiscard]] bool interior(double s) const { return s > lo && s < hi; }
    [[nodiscard]] bool is_singleton() const { return lo == hi; }

    [[nodiscard]] DomainInterval intersect(const DomainInterval& other) const;

    bool operator==(const DomainInterval&) const = default;
};

struct Atom {
    double value = 0.0;
    double prob = 0.0;
    bool operator==(const Atom&) const = default;
};

// ---- Levy exponents ------------------------------------------------------

/// psi(z) = mu z + sigma2 z^2 / 2
struct BrownianDrift {
    double mu = 0.0;
    double sigma2 = 0.0;
    bool operator==(const BrownianDrift&) const = default;
};

/// psi(z) = mu z. Kept separate from BrownianDrift for lattice classification.
struct LinearDrift {
    double mu = 0.0;
    bool operator==(const LinearDrift&) const = default;
};

/// psi(z) = gamma (e^{hz} - 1)
struct PoissonJump {
    double gamma = 0.0;
    double h = 1.0;
    bool operator==(const PoissonJump&) const = default;
};

/// psi(z) = gamma (sum_i p_i e^{z x_i} - 1)
struct CompoundPoissonDiscrete {
    double gamma = 0.0;
    std::vector<Atom> atoms;
    bool operator==(const CompoundPoissonDiscrete&) const = default;
};

/// Pure-jump process with Levy measure c x^{-2} e^{-x} dx on [1, inf):
/// psi(s) = c int_1^inf (e^{(s-1)x} - e^{-x}) x^{-2} dx, domain (-inf, 1].
struct TruncatedParetoExpJump {
    double c = 1.0;
    bool operator==(const TruncatedParetoExpJump&) const = default;
};

/// psi(it) = -|t|. Domain {0}; present only so that heavy-tailed input is
/// representable and rejected by the analysis routines.
struct CauchyStub {
    bool operator==(const CauchyStub&) const = default;
};

using LevyExponent = std::variant<BrownianDrift, LinearDrift, PoissonJump, CompoundPoissonDiscrete,
                                  TruncatedParetoExpJump, CauchyStub>;

// ---- MGFs of jumps at modulator transitions ------------------------------

struct DegenerateZero {
    bool operator==(const DegenerateZero&) const = default;
};

struct DegeneratePoint {
    double a = 0.0;
    bool operator==(const DegeneratePoint&) const = default;
};

struct DiscreteAtoms {
    std::vector<Atom> atoms;
    bool operator==(const DiscreteAtoms&) const = default;
};

struct GaussianJump {
    double mean = 0.0;
    double variance = 0.0;
    bool operator==(const GaussianJump&) const = default;
};

using JumpMgf = std::variant<DegenerateZero, DegeneratePoint, DiscreteAtoms, GaussianJump>;

// ---- evaluation ------------------------------------------------------------

[[nodiscard]] DomainInterval domain(const LevyExponent& e);
[[nodiscard]] DomainInterval domain(const JumpMgf& m);

/// psi(z). Throws DomainError when Re z is outside the exponent's domain.
[[nodiscard]] Complex evaluate_exponent(const LevyExponent& e, Complex z);
[[nodiscard]] double evaluate_exponent(const LevyExponent& e, double s);

/// psi'(z). Requires Re z in the interior of the domain.
[[nodiscard]] Complex exponent_derivative(const LevyExponent& e, Complex z);
[[nodiscard]] double exponent_derivative(const LevyExponent& e, double s);

[[nodiscard]] Complex evaluate_jump_mgf(const JumpMgf& m, Complex z);
[[nodiscard]] double evaluate_jump_mgf(const JumpMgf& m, double s);
[[nodiscard]] Complex jump_mgf_derivative(const JumpMgf& m, Complex z);
[[nodiscard]] double jump_mgf_derivative(const JumpMgf& m, double s);

/// Parameter checks for a single component; empty when well-formed.
[[nodiscard]] std::vector<std::string> check_exponent(const LevyExponent& e);
[[nodiscard]] std::vector<std::string> check_jump_mgf(const JumpMgf& m);

[[nodiscard]] std::string exponent_name(const LevyExponent& e);
[[nodiscard]] std::string jump_mgf_name(const JumpMgf& m);

/// Total jump intensity c E_2(1) of the truncated Pareto-exponential Levy measure.
[[nodiscard]] double pareto_exp_total_rate(double c);

}  // namespace mmtail
