#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mmtail/model.hpp"

namespace mmtail {

/// Two-state Brownian (or, with sigma2 = 0, linear-trend) parameters.
/// pi[0] is the rate 1 -> 2 and pi[1] the rate 2 -> 1.
struct TwoStateParams {
    std::array<double, 2> mu{0.0, 0.0};
    std::array<double, 2> sigma2{0.0, 0.0};
    std::array<double, 2> pi{1.0, 1.0};
    std::array<double, 2> phi{0.0, 0.0};

    [[nodiscard]] bool linear() const { return sigma2[0] == 0.0 && sigma2[1] == 0.0; }
};

struct TwoStateRoot {
    double s = 0.0;
    bool admissible = false;  // g1(s) + g2(s) <= 0
    double trace = 0.0;
};

struct TwoStateSolution {
    std::vector<double> coefficients;  // f(s) = g1 g2 - pi1 pi2, ascending powers
    std::vector<TwoStateRoot> roots;   // real roots, ascending
    std::optional<double> alpha;
    std::optional<double> neg_beta;
};

/// g_n(s) = sigma2_n s^2 / 2 + mu_n s - phi_n - pi_n
[[nodiscard]] double two_state_g(const TwoStateParams& p, int n, double s);

/// Real roots of the quartic (or quadratic) with trace admissibility flags.
/// Throws DegenerateInput when both killing rates vanish or a rate is not positive.
[[nodiscard]] TwoStateSolution two_state_closed_form(const TwoStateParams& p);

/// The corresponding ModelSpec (Brownian exponents, or linear when both sigma2 vanish).
[[nodiscard]] ModelSpec two_state_spec(const TwoStateParams& p, const RealVector& varpi);

}  // namespace mmtail
