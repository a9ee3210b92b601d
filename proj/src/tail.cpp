#include "mmtail/tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "mmtail/errors.hpp"
#include "mmtail/spectral.hpp"

namespace mmtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFirstStep = 1e-3;
constexpr double kBracketCap = 1e6;
constexpr double kRootTol = 1e-12;
constexpr double kZeroTol = 1e-10;

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    return a < 0 ? -a : a;
}

struct SideResult {
    std::optional<double> root;
    RootStatus status = RootStatus::NoRootInDomain;
    double residual = 0.0;
    std::optional<double> endpoint_zeta;
};

SideResult search_side(const ModelSpec& spec, const DomainInterval& dom, int sign, double f0, int& evals) {
    auto f = [&](double t) {
        ++evals;
        try {
            const double v = zeta_of_A(spec, sign * t);
            return std::isfinite(v) ? v : kInf;
        } catch (const DomainError&) {
            return kInf;
        }
    };
    const double end = sign > 0 ? dom.hi : -dom.lo;
    const bool closed = sign > 0 ? dom.hi_closed : dom.lo_closed;
    SideResult out;
    if (end <= 0.0) return out;
    const double cap = std::isinf(end) ? kBracketCap : (closed ? end : end - 1e-12);
    if (cap <= 0.0) return out;

    double prev = 0.0;
    double fprev = f0;
    double step = kFirstStep;
    while (true) {
        const double t = std::min(step, cap);
        const double ft = f(t);
        const bool at_end = t == cap;
        if (at_end && closed && std::isfinite(end)) out.endpoint_zeta = ft;
        if (at_end && closed && std::isfinite(end) && std::abs(ft) <= kZeroTol) {
            out.root = end;
            out.status = RootStatus::RootAtBoundary;
            out.residual = std::abs(ft);
            return out;
        }
        if (ft > 0.0) {
            auto tol = [](double a, double b) {
                return std::abs(b - a) <= std::max(kRootTol, 4 * std::numeric_limits<double>::epsilon() * std::abs(a));
            };
            std::uintmax_t max_iter = 500;
            double fa = fprev;
            double fb = ft;
            double lo = prev;
            double hi = t;
            if (!std::isfinite(fb)) {
                // pull the right end in until zeta is finite
                while (!std::isfinite(fb) && hi - lo > kRootTol) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = f(mid);
                    if (std::isfinite(fm) && fm > 0.0) {
                        hi = mid;
                        fb = fm;
                    } else if (std::isfinite(fm)) {
                        lo = mid;
                        fa = fm;
                    } else {
                        hi = mid;
                    }
                }
            }
            double root;
            if (std::isfinite(fb)) {
                const auto r = boost::math::tools::toms748_solve(f, lo, hi, fa, fb, tol, max_iter);
                const double f1 = f(r.first);
                const double f2 = f(r.second);
                root = std::abs(f1) <= std::abs(f2) ? r.first : r.second;
                out.residual = std::min(std::abs(f1), std::abs(f2));
            } else {
                root = lo;
                out.residual = std::abs(fa);
            }
            out.root = root;
            out.status = RootStatus::FoundInterior;
            if (out.residual > kZeroTol) {
                std::ostringstream os;
                os << "root of zeta(A(s)) near s = " << sign * root << " has residual " << out.residual;
                throw ConvergenceError(os.str());
            }
            return out;
        }
        if (at_end) return out;
        prev = t;
        fprev = ft;
        step *= 2.0;
    }
}

}  // namespace

std::string to_string(RootStatus s) {
    switch (s) {
        case RootStatus::FoundInterior: return "FoundInterior";
        case RootStatus::NoRootInDomain: return "NoRootInDomain";
        case RootStatus::RootAtBoundary: return "RootAtBoundary";
        case RootStatus::DomainDegenerate: return "DomainDegenerate";
    }
    return "?";
}

std::string to_string(LatticeStatus s) {
    switch (s) {
        case LatticeStatus::NonLattice: return "NonLattice";
        case LatticeStatus::Lattice: return "Lattice";
        case LatticeStatus::DegenerateDrift: return "DegenerateDrift";
        case LatticeStatus::Incommensurable: return "Incommensurable";
        case LatticeStatus::Trivial: return "Trivial";
    }
    return "?";
}

std::string to_string(TailSide s) { return s == TailSide::Upper ? "upper" : "lower"; }

double zeta_of_A(const ModelSpec& spec, double s) { return metzler_abscissa(assemble_A(spec, s)); }

DecayRates find_decay_rates(const ModelSpec& spec) {
    require_valid(spec);
    DecayRates out;
    out.domain = domain_interval(spec);
    if (out.domain.is_singleton()) throw DomainDegenerate("domain of A is {0}; no tail analysis is possible");
    out.zeta_at_zero = zeta_of_A(spec, 0.0);
    out.evaluations = 1;
    if (out.zeta_at_zero >= -kZeroTol) {
        out.alpha_status = RootStatus::DomainDegenerate;
        out.beta_status = RootStatus::DomainDegenerate;
        return out;
    }
    const SideResult up = search_side(spec, out.domain, +1, out.zeta_at_zero, out.evaluations);
    const SideResult down = search_side(spec, out.domain, -1, out.zeta_at_zero, out.evaluations);
    out.alpha = up.root;
    out.alpha_status = up.status;
    out.alpha_residual = up.residual;
    out.zeta_at_hi = up.endpoint_zeta;
    out.beta = down.root;
    out.beta_status = down.status;
    out.beta_residual = down.residual;
    out.zeta_at_lo = down.endpoint_zeta;
    return out;
}

std::vector<std::pair<double, double>> sweep_zeta(const ModelSpec& spec, double from, double to, int points) {
    if (points < 1) throw ValidationError("sweep needs at least one point");
    const DomainInterval dom = domain_interval(spec);
    std::vector<std::pair<double, double>> out;
    out.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double s = points == 1 ? from : from + (to - from) * i / (points - 1);
        const double v = dom.contains(s) ? zeta_of_A(spec, s) : std::numeric_limits<double>::quiet_NaN();
        out.emplace_back(s, v);
    }
    return out;
}

Complex mgf_continuation(const ModelSpec& spec, Complex z) {
    const ComplexMatrix a = assemble_A(spec, z);
    const ComplexVector rhs = (assemble_A(spec, Complex(0.0)) * ComplexVector::Ones(spec.n())).eval();
    const Eigen::PartialPivLU<ComplexMatrix> lu(a);
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot > 1e-14 * norm_inf(a))) throw SingularMatrix("A(z) is numerically singular");
    const ComplexVector u = lu.solve(rhs);
    return spec.varpi.cast<Complex>().dot(u);
}

Complex mgf_stopped(const ModelSpec& spec, Complex z) {
    if (!domain_interval(spec).contains(z.real())) throw DomainError("Re z outside the domain of A");
    const double zeta = zeta_of_A(spec, z.real());
    if (!(zeta < 0.0)) {
        std::ostringstream os;
        os << "zeta(A(" << z.real() << ")) = " << zeta << " is not negative";
        throw DomainError(os.str());
    }
    return mgf_continuation(spec, z);
}

double mgf_stopped(const ModelSpec& spec, double s) { return mgf_stopped(spec, Complex(s)).real(); }

ComplexMatrix conditional_mgf_matrix(const ModelSpec& spec, double t, Complex z, bool with_killing) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    const ComplexMatrix a = with_killing ? assemble_A(spec, z) : assemble_unkilled(spec, z);
    return matrix_exponential(ComplexMatrix(t * a));
}

PoleData pole_residue(const ModelSpec& spec, double s0) {
    if (!is_irreducible(spec.generator.entries)) throw Reducible("generator is reducible");
    const RealMatrix a = assemble_A(spec, s0);
    const SpectralResult sr = spectral_abscissa_metzler(a);
    if (std::abs(sr.zeta) > 1e-8) {
        std::ostringstream os;
        os << "zeta(A(" << s0 << ")) = " << sr.zeta << " is not zero";
        throw DomainError(os.str());
    }
    const RealMatrix da = derivative_A(spec, s0);
    const double q = sr.left.dot(da * sr.right);
    if (std::abs(q) < 1e-12) throw NotSimple("y'A'(s0)x vanishes");
    PoleData p;
    p.location = s0;
    p.c = 1.0 / q;
    p.matrix_residue = p.c * sr.right * sr.left.transpose();
    const RealVector a0_one = assemble_A(spec, 0.0) * RealVector::Ones(spec.n());
    p.mgf_residue = p.c * spec.varpi.dot(sr.right) * sr.left.dot(a0_one);
    p.simple = sr.simple;
    p.right = sr.right;
    p.left = sr.left;
    return p;
}

std::optional<double> common_span(const std::vector<double>& values) {
    std::vector<double> nz;
    for (double v : values)
        if (v != 0.0) nz.push_back(std::abs(v));
    if (nz.empty()) return std::nullopt;
    const double base = *std::min_element(nz.begin(), nz.end());
    std::vector<std::pair<i128, i128>> fracs;
    i128 lcm = 1;
    for (double v : nz) {
        const double r = v / base;
        // continued fraction with denominators up to 1e6
        i128 p0 = 0, q0 = 1, p1 = 1, q1 = 0;
        double x = r;
        bool found = false;
        for (int k = 0; k < 64; ++k) {
            const double a = std::floor(x);
            const i128 ai = static_cast<i128>(a);
            const i128 p2 = ai * p1 + p0;
            const i128 q2 = ai * q1 + q0;
            if (q2 > 1000000) break;
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
            const double approx = static_cast<double>(p1) / static_cast<double>(q1);
            if (std::abs(approx - r) <= 1e-13 * r) {
                found = true;
                break;
            }
            const double frac = x - a;
            if (frac <= 0.0) break;
            x = 1.0 / frac;
        }
        if (!found) return std::nullopt;
        fracs.emplace_back(p1, q1);
        lcm = lcm / gcd128(lcm, q1) * q1;
        if (lcm > static_cast<i128>(1000000000000LL)) return std::nullopt;
    }
    i128 g = 0;
    for (const auto& [p, q] : fracs) g = gcd128(g, p * (lcm / q));
    return base * static_cast<double>(g) / static_cast<double>(lcm);
}

LatticeInfo lattice_info(const ModelSpec& spec) {
    LatticeInfo info;
    std::vector<double> values;
    bool drift = false;
    std::string non_lattice_reason;
    auto mark_non_lattice = [&](const std::string& why) {
        if (non_lattice_reason.empty()) non_lattice_reason = why;
    };
    auto atoms_values = [](const std::vector<Atom>& atoms) {
        std::vector<double> v;
        for (const auto& a : atoms)
            if (a.prob > 0.0) v.push_back(a.value);
        return v;
    };
    for (int n = 0; n < spec.n(); ++n) {
        const std::string who = "state " + std::to_string(n);
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, BrownianDrift>) {
                    if (e.sigma2 > 0.0)
                        mark_non_lattice(who + " has a diffusion component");
                    else if (e.mu != 0.0)
                        drift = true;
                } else if constexpr (std::is_same_v<T, LinearDrift>) {
                    if (e.mu != 0.0) drift = true;
                } else if constexpr (std::is_same_v<T, PoissonJump>) {
                    if (e.gamma > 0.0) values.push_back(e.h);
                } else if constexpr (std::is_same_v<T, CompoundPoissonDiscrete>) {
                    if (e.gamma > 0.0) {
                        const auto v = atoms_values(e.atoms);
                        if (!common_span(v).has_value() &&
                            std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; }))
                            mark_non_lattice(who + " has jump sizes on no common lattice");
                        values.insert(values.end(), v.begin(), v.end());
                    }
                } else if constexpr (std::is_same_v<T, TruncatedParetoExpJump>) {
                    mark_non_lattice(who + " has a continuous jump distribution");
                } else {
                    mark_non_lattice(who + " has a continuous distribution");
                }
            },
            spec.exponents[n]);
    }
    const RealMatrix& pi = spec.generator.entries;
    for (int i = 0; i < spec.n(); ++i) {
        for (int j = 0; j < spec.n(); ++j) {
            if (i == j || pi(i, j) <= 0.0) continue;
            const std::string who = "transition " + std::to_string(i) + "->" + std::to_string(j);
            std::visit(
                [&](const auto& m) {
                    using T = std::decay_t<decltype(m)>;
                    if constexpr (std::is_same_v<T, DegeneratePoint>) {
                        values.push_back(m.a);
                    } else if constexpr (std::is_same_v<T, DiscreteAtoms>) {
                        const auto v = atoms_values(m.atoms);
                        std::vector<double> diffs;
                        for (double x : v) diffs.push_back(x - v.front());
                        if (!common_span(diffs).has_value() &&
                            std::any_of(diffs.begin(), diffs.end(), [](double x) { return x != 0.0; }))
                            mark_non_lattice(who + " has jump sizes on no common lattice");
                        values.insert(values.end(), v.begin(), v.end());
                    } else if constexpr (std::is_same_v<T, GaussianJump>) {
                        if (m.variance > 0.0)
                            mark_non_lattice(who + " has a Gaussian jump");
                        else
                            values.push_back(m.mean);
                    }
                },
                spec.jumps[i][j]);
        }
    }
    if (!non_lattice_reason.empty()) {
        info.non_lattice = true;
        info.status = LatticeStatus::NonLattice;
        info.reason = non_lattice_reason;
        return info;
    }
    if (drift) {
        info.status = LatticeStatus::DegenerateDrift;
        info.reason = "degenerate drift components";
        return info;
    }
    const bool any = std::any_of(values.begin(), values.end(), [](double x) { return x != 0.0; });
    if (!any) {
        info.status = LatticeStatus::Trivial;
        info.reason = "W is identically zero";
        return info;
    }
    info.span = common_span(values);
    if (!info.span) {
        info.status = LatticeStatus::Incommensurable;
        info.reason = "lattice spans are incommensurable";
        return info;
    }
    info.status = LatticeStatus::Lattice;
    std::ostringstream os;
    os << "all components lattice with common span " << *info.span;
    info.reason = os.str();
    return info;
}

NakagawaBounds nakagawa_from(double C, double rate, double B) {
    if (!(C > 0.0) || !(rate > 0.0) || !(B > 0.0)) throw DomainError("bounds need C > 0, rate > 0 and B > 0");
    NakagawaBounds nb;
    nb.rate = rate;
    nb.C = C;
    nb.B = B;
    if (std::isinf(B)) {
        nb.lower = nb.upper = C / rate;
        nb.exact_limit = C / rate;
        return nb;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    const double x = two_pi * rate / B;
    nb.lower = (two_pi * C / B) / std::expm1(x);
    nb.upper = (two_pi * C / B) / -std::expm1(-x);
    return nb;
}

NakagawaBounds nakagawa_bounds(const PoleData& pole, const LatticeInfo& lattice, TailSide side) {
    if (!pole.simple) throw NotSimple("pole is not simple");
    double B;
    if (lattice.non_lattice) {
        B = kInf;
    } else if (lattice.span) {
        B = 2.0 * std::numbers::pi / *lattice.span;
    } else {
        throw BUnknown(lattice.reason);
    }
    const double C = side == TailSide::Upper ? -pole.mgf_residue : pole.mgf_residue;
    if (!(C > 0.0)) throw DomainError("residue has the wrong sign for this tail");
    NakagawaBounds nb = nakagawa_from(C, std::abs(pole.location), B);
    nb.side = side;
    return nb;
}

}  // namespace mmtail
