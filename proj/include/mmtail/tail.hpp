#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmtail/model.hpp"

namespace mmtail {

enum class RootStatus { FoundInterior, NoRootInDomain, RootAtBoundary, DomainDegenerate };

[[nodiscard]] std::string to_string(RootStatus s);

struct DecayRates {
    std::optional<double> alpha;  // positive root
    std::optional<double> beta;   // the negative root is -beta
    RootStatus alpha_status = RootStatus::NoRootInDomain;
    RootStatus beta_status = RootStatus::NoRootInDomain;
    double zeta_at_zero = 0.0;
    double alpha_residual = 0.0;  // |zeta(A(alpha))|
    double beta_residual = 0.0;
    DomainInterval domain;
    // zeta(A(.)) at finite closed endpoints of I, when they were reached
    std::optional<double> zeta_at_hi;
    std::optional<double> zeta_at_lo;
    int evaluations = 0;
};

/// alpha and -beta: the roots of zeta(A(s)) = 0 on either side of 0.
/// Throws ValidationError on a malformed spec and DomainDegenerate when I = {0}.
[[nodiscard]] DecayRates find_decay_rates(const ModelSpec& spec);

/// zeta(A(s)) for real s in I.
[[nodiscard]] double zeta_of_A(const ModelSpec& spec, double s);

/// (s, zeta(A(s))) on a uniform grid; NaN where s is outside I.
[[nodiscard]] std::vector<std::pair<double, double>> sweep_zeta(const ModelSpec& spec, double from, double to,
                                                                int points);

/// M(z) = varpi' A(z)^{-1} A(0) 1. Requires zeta(A(Re z)) < 0 (DomainError otherwise);
/// throws SingularMatrix when the LU pivot is below 1e-14 ||A(z)||.
[[nodiscard]] Complex mgf_stopped(const ModelSpec& spec, Complex z);
[[nodiscard]] double mgf_stopped(const ModelSpec& spec, double s);

/// Same formula without the zeta(A(Re z)) < 0 check, i.e. the meromorphic continuation.
[[nodiscard]] Complex mgf_continuation(const ModelSpec& spec, Complex z);

/// exp(t (Psi(z) + Pi o Upsilon(z))), or exp(t A(z)) with killing.
[[nodiscard]] ComplexMatrix conditional_mgf_matrix(const ModelSpec& spec, double t, Complex z, bool with_killing);

struct PoleData {
    double location = 0.0;
    RealMatrix matrix_residue;
    double c = 0.0;
    double mgf_residue = 0.0;
    bool simple = false;
    RealVector right;
    RealVector left;
};

/// Residue data at a real root s0 of zeta(A(s)). Throws Reducible when Pi is reducible
/// and NotSimple when y'A'(s0)x vanishes.
[[nodiscard]] PoleData pole_residue(const ModelSpec& spec, double s0);

enum class LatticeStatus { NonLattice, Lattice, DegenerateDrift, Incommensurable, Trivial };

struct LatticeInfo {
    bool non_lattice = false;
    std::optional<double> span;
    std::string reason;
    LatticeStatus status = LatticeStatus::Lattice;
};

[[nodiscard]] std::string to_string(LatticeStatus s);

[[nodiscard]] LatticeInfo lattice_info(const ModelSpec& spec);

/// Largest h with every value an integer multiple of h, using rational ratios with
/// denominators up to 10^6. Empty when the values are incommensurable or all zero.
[[nodiscard]] std::optional<double> common_span(const std::vector<double>& values);

enum class TailSide { Upper, Lower };

[[nodiscard]] std::string to_string(TailSide s);

struct NakagawaBounds {
    TailSide side = TailSide::Upper;
    double rate = 0.0;
    double C = 0.0;
    double B = 0.0;  // may be +inf
    double lower = 0.0;
    double upper = 0.0;
    std::optional<double> exact_limit;
};

/// Bounds on liminf / limsup of e^{rate w} Pr(W_T > w) (upper side) or
/// e^{rate w} Pr(W_T < -w) (lower side). Throws BUnknown without a lattice span.
[[nodiscard]] NakagawaBounds nakagawa_bounds(const PoleData& pole, const LatticeInfo& lattice,
                                             TailSide side = TailSide::Upper);

/// Direct form for a known residue constant C > 0, rate and span width B.
[[nodiscard]] NakagawaBounds nakagawa_from(double C, double rate, double B);

}  // namespace mmtail
