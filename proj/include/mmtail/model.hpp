#pragma once

#include <string>
#include <vector>

#include "mmtail/levy.hpp"
#include "mmtail/linalg.hpp"

namespace mmtail {

/// Transition-rate matrix of the modulating chain.
struct GeneratorMatrix {
    RealMatrix entries;

    [[nodiscard]] int n() const { return static_cast<int>(entries.rows()); }
};

/// Markov-modulated Levy process with state-dependent killing.
struct ModelSpec {
    RealVector varpi;
    GeneratorMatrix generator;
    std::vector<LevyExponent> exponents;
    std::vector<std::vector<JumpMgf>> jumps;  // N x N, diagonal DegenerateZero
    RealVector phi;

    [[nodiscard]] int n() const { return static_cast<int>(exponents.size()); }
};

struct ValidationReport {
    std::vector<std::string> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
    [[nodiscard]] std::string summary() const;
};

/// Generator checks only: square, Metzler, zero row sums.
[[nodiscard]] std::vector<std::string> check_generator(const RealMatrix& pi);

[[nodiscard]] ValidationReport validate(const ModelSpec& spec);

/// Throws ValidationError carrying the report summary when the spec is malformed.
void require_valid(const ModelSpec& spec);

/// Intersection of the domains of every exponent and every jump MGF.
[[nodiscard]] DomainInterval domain_interval(const ModelSpec& spec);

/// A(z) = Psi(z) + Pi o Upsilon(z) - Phi. Throws DomainError when Re z is outside I.
[[nodiscard]] ComplexMatrix assemble_A(const ModelSpec& spec, Complex z);
[[nodiscard]] RealMatrix assemble_A(const ModelSpec& spec, double s);

/// Psi(z) + Pi o Upsilon(z), i.e. A(z) without the killing term.
[[nodiscard]] ComplexMatrix assemble_unkilled(const ModelSpec& spec, Complex z);

/// Entry-wise derivative of A. Requires Re z interior to I.
[[nodiscard]] ComplexMatrix derivative_A(const ModelSpec& spec, Complex z);
[[nodiscard]] RealMatrix derivative_A(const ModelSpec& spec, double s);

/// Helpers for building specs.
[[nodiscard]] ModelSpec single_state(const LevyExponent& e, double phi);
[[nodiscard]] ModelSpec make_spec(const RealVector& varpi, const RealMatrix& pi,
                                  std::vector<LevyExponent> exponents, const RealVector& phi);

}  // namespace mmtail
