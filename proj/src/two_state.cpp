#include "mmtail/two_state.hpp"

#include <algorithm>
#include <cmath>

#include "mmtail/errors.hpp"

namespace mmtail {

namespace {

double horner(const std::vector<double>& c, double s) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
    return v;
}

double horner_derivative(const std::vector<double>& c, double s) {
    double v = 0.0;
    for (std::size_t k = c.size() - 1; k >= 1; --k) v = v * s + static_cast<double>(k) * c[k];
    return v;
}

std::vector<double> real_roots(std::vector<double> c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    const int deg = static_cast<int>(c.size()) - 1;
    std::vector<double> out;
    if (deg < 1) return out;
    RealMatrix comp = RealMatrix::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
    Eigen::EigenSolver<RealMatrix> es(comp, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("companion eigensolver failed");
    for (int i = 0; i < deg; ++i) {
        const Complex r = es.eigenvalues()(i);
        if (std::abs(r.imag()) > 1e-7 * (1.0 + std::abs(r))) continue;
        double s = r.real();
        for (int k = 0; k < 4; ++k) {
            const double d = horner_derivative(c, s);
            if (d == 0.0) break;
            const double step = horner(c, s) / d;
            s -= step;
            if (std::abs(step) <= 1e-16 * (1.0 + std::abs(s))) break;
        }
        out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double two_state_g(const TwoStateParams& p, int n, double s) {
    return 0.5 * p.sigma2[n] * s * s + p.mu[n] * s - p.phi[n] - p.pi[n];
}

TwoStateSolution two_state_closed_form(const TwoStateParams& p) {
    if (p.phi[0] == 0.0 && p.phi[1] == 0.0) throw DegenerateInput("both killing rates are zero");
    if (!(p.pi[0] > 0.0) || !(p.pi[1] > 0.0)) throw DegenerateInput("both transition rates must be positive");
    if (p.phi[0] < 0.0 || p.phi[1] < 0.0 || p.sigma2[0] < 0.0 || p.sigma2[1] < 0.0)
        throw DegenerateInput("negative killing rate or variance");
    TwoStateSolution sol;
    const std::array<double, 3> g1{-p.phi[0] - p.pi[0], p.mu[0], 0.5 * p.sigma2[0]};
    const std::array<double, 3> g2{-p.phi[1] - p.pi[1], p.mu[1], 0.5 * p.sigma2[1]};
    sol.coefficients.assign(5, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) sol.coefficients[i + j] += g1[i] * g2[j];
    sol.coefficients[0] -= p.pi[0] * p.pi[1];
    for (double s : real_roots(sol.coefficients)) {
        TwoStateRoot r;
        r.s = s;
        r.trace = two_state_g(p, 0, s) + two_state_g(p, 1, s);
        r.admissible = r.trace <= 1e-12 * (1.0 + std::abs(s));
        sol.roots.push_back(r);
    }
    for (const auto& r : sol.roots) {
        if (!r.admissible) continue;
        if (r.s > 0.0 && !sol.alpha) sol.alpha = r.s;
        if (r.s < 0.0) sol.neg_beta = r.s;
    }
    return sol;
}

ModelSpec two_state_spec(const TwoStateParams& p, const RealVector& varpi) {
    RealMatrix pi(2, 2);
    pi << -p.pi[0], p.pi[0], p.pi[1], -p.pi[1];
    std::vector<LevyExponent> ex;
    for (int n = 0; n < 2; ++n) {
        if (p.linear())
            ex.emplace_back(LinearDrift{p.mu[n]});
        else
            ex.emplace_back(BrownianDrift{p.mu[n], p.sigma2[n]});
    }
    RealVector phi(2);
    phi << p.phi[0], p.phi[1];
    return make_spec(varpi, pi, std::move(ex), phi);
}

}  // namespace mmtail
