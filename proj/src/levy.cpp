#include "mmtail/levy.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "mmtail/errors.hpp"

namespace mmtail {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Truncation target for the Pareto-exponential integrals.
constexpr double kTailBound = 1e-12;
constexpr double kPanelTol = 1e-14;

double prob_sum(const std::vector<Atom>& atoms) {
    return std::accumulate(atoms.begin(), atoms.end(), 0.0,
                           [](double acc, const Atom& a) { return acc + a.prob; });
}

void check_atoms(const std::vector<Atom>& atoms, const std::string& what,
                 std::vector<std::string>& out) {
    if (atoms.empty()) {
        out.push_back(what + ": atom list is empty");
        return;
    }
    for (const auto& a : atoms) {
        if (!std::isfinite(a.value) || !std::isfinite(a.prob) || a.prob < 0.0) {
            out.push_back(what + ": atom probabilities must be finite and nonnegative");
            return;
        }
    }
    const double total = prob_sum(atoms);
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os << what << ": atom probabilities sum to " << total;
        out.push_back(os.str());
    }
}

void require_in(const DomainInterval& d, double re, const char* what) {
    if (!d.contains(re)) {
        std::ostringstream os;
        os << what << ": real part " << re << " outside domain";
        throw DomainError(os.str());
    }
}

void require_interior(const DomainInterval& d, double re, const char* what) {
    if (!d.interior(re)) {
        std::ostringstream os;
        os << what << ": real part " << re << " not in the interior of the domain";
        throw DomainError(os.str());
    }
}

// e^{w} - 1 for complex w without cancellation near 0.
Complex expm1(Complex w) {
    const double a = w.real();
    const double b = w.imag();
    const double half_sin = std::sin(0.5 * b);
    const double re = std::expm1(a) * std::cos(b) - 2.0 * half_sin * half_sin;
    const double im = std::exp(a) * std::sin(b);
    return {re, im};
}

// Integrates f over [start, end] on geometric panels [x_k, 2 x_k] (first panel
// [start, start + 1] when start is 0), each by adaptive Gauss-Kronrod.
template <class F>
auto integrate_panels(F f, double start, double end) {
    using Result = decltype(f(start));
    Result total{};
    double a = start;
    while (a < end) {
        const double b = std::min(end, a == 0.0 ? 1.0 : 2.0 * a);
        total += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 15, kPanelTol);
        a = b;
    }
    return total;
}

// Smallest doubling X >= 2 such that bound(X) < kTailBound.
template <class Bound>
double truncation_point(Bound bound) {
    double x = 2.0;
    while (bound(x) >= kTailBound && x < 1e300) x *= 2.0;
    return x;
}

double e2_at_one() {
    // E_2(1) = e^{-1} - E_1(1)
    static const double value = std::exp(-1.0) - boost::math::expint(1, 1.0);
    return value;
}

// int_1^inf e^{(z-1)x} x^{-power} dx for Re z <= 1, Im z > 0, along x = 1 + iy.
Complex rotated_integral(Complex z, int power) {
    const Complex w = z - 1.0;
    const double t = z.imag();
    const Complex i(0.0, 1.0);
    const Complex ew = std::exp(w);
    auto f = [&](double y) {
        const Complex x(1.0, y);
        Complex denom = power == 2 ? x * x : x;
        return ew * std::exp(i * w * y) / denom * i;
    };
    const double y_max = truncation_point([&](double y) { return std::exp(-t * y) / (t * y * y); });
    return integrate_panels(f, 0.0, y_max);
}

double pareto_value(double c, double s) {
    if (s == 0.0) return 0.0;
    if (s == 1.0) {
        // int_1^inf (1 - e^{-x}) x^{-2} dx = 1 - E_2(1) = 1 - e^{-1} + E_1(1)
        return c * (1.0 - std::exp(-1.0) + boost::math::expint(1, 1.0));
    }
    const double a = std::min(1.0 - s, 1.0);
    auto f = [s](double x) {
        const double diff = std::abs(s) * x < 50.0 ? std::exp(-x) * std::expm1(s * x)
                                                    : std::exp((s - 1.0) * x) - std::exp(-x);
        return diff / (x * x);
    };
    const double x_max = truncation_point([&](double x) { return c * std::exp(-a * x) / (a * x * x); });
    return c * integrate_panels(f, 1.0, x_max);
}

Complex pareto_value(double c, Complex z) {
    if (z.imag() == 0.0) return pareto_value(c, z.real());
    if (z.imag() < 0.0) return std::conj(pareto_value(c, std::conj(z)));
    const double a = 1.0 - z.real();
    if (a >= z.imag()) {
        const double decay = std::min(a, 1.0);
        auto f = [z](double x) {
            const Complex diff = std::abs(z.real()) * x < 50.0
                                     ? std::exp(-x) * expm1(z * x)
                                     : std::exp((z - 1.0) * x) - std::exp(-x);
            return diff / (x * x);
        };
        const double x_max =
            truncation_point([&](double x) { return c * std::exp(-decay * x) / (decay * x * x); });
        return c * integrate_panels(f, 1.0, x_max);
    }
    // Close to the boundary line the real-axis integrand decays too slowly; rotate the contour.
    return c * (rotated_integral(z, 2) - e2_at_one());
}

double pareto_derivative(double c, double s) {
    const double a = 1.0 - s;
    auto f = [s](double x) { return std::exp((s - 1.0) * x) / x; };
    const double x_max = truncation_point([&](double x) { return c * std::exp(-a * x) / (a * x); });
    return c * integrate_panels(f, 1.0, x_max);
}

Complex pareto_derivative(double c, Complex z) {
    if (z.imag() == 0.0) return pareto_derivative(c, z.real());
    if (z.imag() < 0.0) return std::conj(pareto_derivative(c, std::conj(z)));
    const double a = 1.0 - z.real();
    if (a >= z.imag()) {
        auto f = [z](double x) { return std::exp((z - 1.0) * x) / x; };
        const double x_max = truncation_point([&](double x) { return c * std::exp(-a * x) / (a * x); });
        return c * integrate_panels(f, 1.0, x_max);
    }
    return c * rotated_integral(z, 1);
}

template <class T>
T atoms_mgf(const std::vector<Atom>& atoms, T z) {
    T acc{};
    for (const auto& a : atoms) acc += a.prob * std::exp(z * a.value);
    return acc;
}

template <class T>
T atoms_mgf_derivative(const std::vector<Atom>& atoms, T z) {
    T acc{};
    for (const auto& a : atoms) acc += a.prob * a.value * std::exp(z * a.value);
    return acc;
}

template <class T>
T exponent_impl(const LevyExponent& e, T z) {
    return std::visit(
        overloaded{
            [&](const BrownianDrift& b) -> T { return b.mu * z + 0.5 * b.sigma2 * z * z; },
            [&](const LinearDrift& l) -> T { return l.mu * z; },
            [&](const PoissonJump& p) -> T { return p.gamma * (std::exp(p.h * z) - 1.0); },
            [&](const CompoundPoissonDiscrete& cp) -> T {
                return cp.gamma * (atoms_mgf(cp.atoms, z) - 1.0);
            },
            [&](const TruncatedParetoExpJump& tp) -> T { return pareto_value(tp.c, z); },
            [&](const CauchyStub&) -> T { return T(-std::abs(z)); },
        },
        e);
}

template <class T>
T exponent_derivative_impl(const LevyExponent& e, T z) {
    return std::visit(
        overloaded{
            [&](const BrownianDrift& b) -> T { return b.mu + b.sigma2 * z; },
            [&](const LinearDrift& l) -> T { return T(l.mu); },
            [&](const PoissonJump& p) -> T { return p.gamma * p.h * std::exp(p.h * z); },
            [&](const CompoundPoissonDiscrete& cp) -> T {
                return cp.gamma * atoms_mgf_derivative(cp.atoms, z);
            },
            [&](const TruncatedParetoExpJump& tp) -> T { return pareto_derivative(tp.c, z); },
            [&](const CauchyStub&) -> T { throw DomainError("Cauchy exponent has no interior"); },
        },
        e);
}

template <class T>
T jump_impl(const JumpMgf& m, T z) {
    return std::visit(overloaded{
                          [&](const DegenerateZero&) -> T { return T(1.0); },
                          [&](const DegeneratePoint& p) -> T { return std::exp(p.a * z); },
                          [&](const DiscreteAtoms& d) -> T { return atoms_mgf(d.atoms, z); },
                          [&](const GaussianJump& g) -> T {
                              return std::exp(g.mean * z + 0.5 * g.variance * z * z);
                          },
                      },
                      m);
}

template <class T>
T jump_derivative_impl(const JumpMgf& m, T z) {
    return std::visit(overloaded{
                          [&](const DegenerateZero&) -> T { return T(0.0); },
                          [&](const DegeneratePoint& p) -> T { return p.a * std::exp(p.a * z); },
                          [&](const DiscreteAtoms& d) -> T { return atoms_mgf_derivative(d.atoms, z); },
                          [&](const GaussianJump& g) -> T {
                              return (g.mean + g.variance * z) *
                                     std::exp(g.mean * z + 0.5 * g.variance * z * z);
                          },
                      },
                      m);
}

}  // namespace

DomainInterval DomainInterval::intersect(const DomainInterval& other) const {
    DomainInterval out;
    if (lo > other.lo) {
        out.lo = lo;
        out.lo_closed = lo_closed;
    } else if (other.lo > lo) {
        out.lo = other.lo;
        out.lo_closed = other.lo_closed;
    } else {
        out.lo = lo;
        out.lo_closed = lo_closed && other.lo_closed;
    }
    if (hi < other.hi) {
        out.hi = hi;
        out.hi_closed = hi_closed;
    } else if (other.hi < hi) {
        out.hi = other.hi;
        out.hi_closed = other.hi_closed;
    } else {
        out.hi = hi;
        out.hi_closed = hi_closed && other.hi_closed;
    }
    return out;
}

DomainInterval domain(const LevyExponent& e) {
    return std::visit(overloaded{
                          [](const TruncatedParetoExpJump&) { return DomainInterval{-kInf, 1.0, false, true}; },
                          [](const CauchyStub&) { return DomainInterval::singleton(0.0); },
                          [](const auto&) { return DomainInterval::whole_line(); },
                      },
                      e);
}

DomainInterval domain(const JumpMgf&) { return DomainInterval::whole_line(); }

Complex evaluate_exponent(const LevyExponent& e, Complex z) {
    require_in(domain(e), z.real(), "Levy exponent");
    return exponent_impl(e, z);
}

double evaluate_exponent(const LevyExponent& e, double s) {
    require_in(domain(e), s, "Levy exponent");
    return exponent_impl(e, s);
}

Complex exponent_derivative(const LevyExponent& e, Complex z) {
    require_interior(domain(e), z.real(), "Levy exponent derivative");
    return exponent_derivative_impl(e, z);
}

double exponent_derivative(const LevyExponent& e, double s) {
    require_interior(domain(e), s, "Levy exponent derivative");
    return exponent_derivative_impl(e, s);
}

Complex evaluate_jump_mgf(const JumpMgf& m, Complex z) { return jump_impl(m, z); }
double evaluate_jump_mgf(const JumpMgf& m, double s) { return jump_impl(m, s); }
Complex jump_mgf_derivative(const JumpMgf& m, Complex z) { return jump_derivative_impl(m, z); }
double jump_mgf_derivative(const JumpMgf& m, double s) { return jump_derivative_impl(m, s); }

std::vector<std::string> check_exponent(const LevyExponent& e) {
    std::vector<std::string> out;
    std::visit(overloaded{
                   [&](const BrownianDrift& b) {
                       if (!std::isfinite(b.mu)) out.push_back("brownian: mu must be finite");
                       if (!std::isfinite(b.sigma2) || b.sigma2 < 0.0)
                           out.push_back("brownian: sigma2 must be finite and nonnegative");
                   },
                   [&](const LinearDrift& l) {
                       if (!std::isfinite(l.mu)) out.push_back("linear: mu must be finite");
                   },
                   [&](const PoissonJump& p) {
                       if (!std::isfinite(p.gamma) || p.gamma < 0.0)
                           out.push_back("poisson: gamma must be finite and nonnegative");
                       if (!std::isfinite(p.h) || p.h <= 0.0) out.push_back("poisson: h must be positive");
                   },
                   [&](const CompoundPoissonDiscrete& cp) {
                       if (!std::isfinite(cp.gamma) || cp.gamma < 0.0)
                           out.push_back("compound_poisson: gamma must be finite and nonnegative");
                       check_atoms(cp.atoms, "compound_poisson", out);
                   },
                   [&](const TruncatedParetoExpJump& tp) {
                       if (!std::isfinite(tp.c) || tp.c <= 0.0)
                           out.push_back("truncated_pareto_exp: c must be positive");
                   },
                   [&](const CauchyStub&) {},
               },
               e);
    return out;
}

std::vector<std::string> check_jump_mgf(const JumpMgf& m) {
    std::vector<std::string> out;
    std::visit(overloaded{
                   [&](const DegenerateZero&) {},
                   [&](const DegeneratePoint& p) {
                       if (!std::isfinite(p.a)) out.push_back("point jump: a must be finite");
                   },
                   [&](const DiscreteAtoms& d) { check_atoms(d.atoms, "atoms jump", out); },
                   [&](const GaussianJump& g) {
                       if (!std::isfinite(g.mean)) out.push_back("gaussian jump: mean must be finite");
                       if (!std::isfinite(g.variance) || g.variance < 0.0)
                           out.push_back("gaussian jump: variance must be finite and nonnegative");
                   },
               },
               m);
    return out;
}

std::string exponent_name(const LevyExponent& e) {
    return std::visit(overloaded{
                          [](const BrownianDrift&) { return std::string("brownian"); },
                          [](const LinearDrift&) { return std::string("linear"); },
                          [](const PoissonJump&) { return std::string("poisson"); },
                          [](const CompoundPoissonDiscrete&) { return std::string("compound_poisson"); },
                          [](const TruncatedParetoExpJump&) { return std::string("truncated_pareto_exp"); },
                          [](const CauchyStub&) { return std::string("cauchy"); },
                      },
                      e);
}

std::string jump_mgf_name(const JumpMgf& m) {
    return std::visit(overloaded{
                          [](const DegenerateZero&) { return std::string("zero"); },
                          [](const DegeneratePoint&) { return std::string("point"); },
                          [](const DiscreteAtoms&) { return std::string("atoms"); },
                          [](const GaussianJump&) { return std::string("gaussian"); },
                      },
                      m);
}

double pareto_exp_total_rate(double c) { return c * e2_at_one(); }

}  // namespace mmtail
