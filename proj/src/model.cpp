#include "mmtail/model.hpp"

#include <cmath>
#include <sstream>

#include "mmtail/errors.hpp"
#include "mmtail/spectral.hpp"

namespace mmtail {

namespace {

constexpr double kRowTol = 1e-12;

void require_domain(const ModelSpec& spec, double re) {
    if (!domain_interval(spec).contains(re)) {
        std::ostringstream os;
        os << "Re z = " << re << " outside the domain of A";
        throw DomainError(os.str());
    }
}

template <class T, class Mat>
Mat assemble(const ModelSpec& spec, T z, bool killing) {
    const int n = spec.n();
    Mat a = Mat::Zero(n, n);
    const RealMatrix& pi = spec.generator.entries;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (pi(i, j) != 0.0) a(i, j) = pi(i, j) * evaluate_jump_mgf(spec.jumps[i][j], z);
        }
        a(i, i) = evaluate_exponent(spec.exponents[i], z) + pi(i, i) - (killing ? spec.phi(i) : 0.0);
    }
    return a;
}

template <class T, class Mat>
Mat assemble_derivative(const ModelSpec& spec, T z) {
    const int n = spec.n();
    Mat a = Mat::Zero(n, n);
    const RealMatrix& pi = spec.generator.entries;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (pi(i, j) != 0.0) a(i, j) = pi(i, j) * jump_mgf_derivative(spec.jumps[i][j], z);
        }
        a(i, i) = exponent_derivative(spec.exponents[i], z);
    }
    return a;
}

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i];
    }
    return os.str();
}

std::vector<std::string> check_generator(const RealMatrix& pi) {
    std::vector<std::string> out;
    if (pi.rows() != pi.cols()) {
        out.push_back("generator is not square");
        return out;
    }
    if (!pi.allFinite()) {
        out.push_back("generator has non-finite entries");
        return out;
    }
    for (int i = 0; i < pi.rows(); ++i) {
        for (int j = 0; j < pi.cols(); ++j) {
            if (i != j && pi(i, j) < 0.0) {
                std::ostringstream os;
                os << "generator entry (" << i << "," << j << ") is negative";
                out.push_back(os.str());
            }
        }
        const double row = pi.row(i).sum();
        if (std::abs(row) > kRowTol) {
            std::ostringstream os;
            os << "generator row " << i << " sums to " << row;
            out.push_back(os.str());
        }
    }
    return out;
}

ValidationReport validate(const ModelSpec& spec) {
    ValidationReport rep;
    auto& v = rep.violations;
    const int n = spec.n();
    if (n == 0) {
        v.push_back("spec has no states");
        return rep;
    }
    bool shapes_ok = true;
    auto shape = [&](bool ok, const char* msg) {
        if (!ok) {
            v.push_back(msg);
            shapes_ok = false;
        }
    };
    shape(spec.varpi.size() == n, "varpi length differs from the number of states");
    shape(spec.phi.size() == n, "phi length differs from the number of states");
    shape(spec.generator.entries.rows() == n && spec.generator.entries.cols() == n,
          "generator dimension differs from the number of states");
    bool jumps_ok = static_cast<int>(spec.jumps.size()) == n;
    for (const auto& row : spec.jumps) jumps_ok = jumps_ok && static_cast<int>(row.size()) == n;
    shape(jumps_ok, "jumps is not N x N");
    if (!shapes_ok) return rep;

    for (int i = 0; i < n; ++i) {
        for (auto& msg : check_exponent(spec.exponents[i])) v.push_back("state " + std::to_string(i) + ": " + msg);
    }

    bool varpi_ok = true;
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(spec.varpi(i)) || spec.varpi(i) < 0.0) {
            v.push_back("varpi entries must be finite and nonnegative");
            varpi_ok = false;
            break;
        }
    }
    const double total = spec.varpi.sum();
    if (varpi_ok && std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "varpi sums to " << total;
        v.push_back(os.str());
        varpi_ok = false;
    }

    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(spec.phi(i)) || spec.phi(i) < 0.0) {
            v.push_back("phi entries must be finite and nonnegative");
            break;
        }
    }

    const auto gen = check_generator(spec.generator.entries);
    v.insert(v.end(), gen.begin(), gen.end());

    const RealMatrix& pi = spec.generator.entries;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const JumpMgf& m = spec.jumps[i][j];
            const bool zero = std::holds_alternative<DegenerateZero>(m);
            if (i == j && !zero) {
                v.push_back("jumps[" + std::to_string(i) + "][" + std::to_string(i) + "] must be zero");
            } else if (i != j && pi(i, j) == 0.0 && !zero) {
                v.push_back("jumps[" + std::to_string(i) + "][" + std::to_string(j) +
                            "] must be zero since the transition rate is 0");
            }
            for (auto& msg : check_jump_mgf(m))
                v.push_back("jumps[" + std::to_string(i) + "][" + std::to_string(j) + "]: " + msg);
        }
    }

    if (varpi_ok && gen.empty()) {
        std::vector<int> support;
        for (int i = 0; i < n; ++i)
            if (spec.varpi(i) > 0.0) support.push_back(i);
        const auto seen = reachable_from(pi, support);
        for (int i = 0; i < n; ++i) {
            if (!seen[i]) v.push_back("state " + std::to_string(i) + " is unreachable from the initial distribution");
        }
    }

    if (v.empty() && !domain_interval(spec).contains(0.0)) v.push_back("domain does not contain 0");
    return rep;
}

void require_valid(const ModelSpec& spec) {
    const auto rep = validate(spec);
    if (!rep.ok()) throw ValidationError(rep.summary());
}

DomainInterval domain_interval(const ModelSpec& spec) {
    DomainInterval d = DomainInterval::whole_line();
    for (const auto& e : spec.exponents) d = d.intersect(domain(e));
    for (const auto& row : spec.jumps)
        for (const auto& m : row) d = d.intersect(domain(m));
    return d;
}

ComplexMatrix assemble_A(const ModelSpec& spec, Complex z) {
    require_domain(spec, z.real());
    return assemble<Complex, ComplexMatrix>(spec, z, true);
}

RealMatrix assemble_A(const ModelSpec& spec, double s) {
    require_domain(spec, s);
    return assemble<double, RealMatrix>(spec, s, true);
}

ComplexMatrix assemble_unkilled(const ModelSpec& spec, Complex z) {
    require_domain(spec, z.real());
    return assemble<Complex, ComplexMatrix>(spec, z, false);
}

ComplexMatrix derivative_A(const ModelSpec& spec, Complex z) {
    if (!domain_interval(spec).interior(z.real())) throw DomainError("derivative of A requested off the interior of I");
    return assemble_derivative<Complex, ComplexMatrix>(spec, z);
}

RealMatrix derivative_A(const ModelSpec& spec, double s) {
    if (!domain_interval(spec).interior(s)) throw DomainError("derivative of A requested off the interior of I");
    return assemble_derivative<double, RealMatrix>(spec, s);
}

ModelSpec single_state(const LevyExponent& e, double phi) {
    ModelSpec spec;
    spec.varpi = RealVector::Ones(1);
    spec.generator.entries = RealMatrix::Zero(1, 1);
    spec.exponents = {e};
    spec.jumps = {{DegenerateZero{}}};
    spec.phi = RealVector::Constant(1, phi);
    return spec;
}

ModelSpec make_spec(const RealVector& varpi, const RealMatrix& pi, std::vector<LevyExponent> exponents,
                    const RealVector& phi) {
    ModelSpec spec;
    const auto n = static_cast<int>(exponents.size());
    spec.varpi = varpi;
    spec.generator.entries = pi;
    spec.exponents = std::move(exponents);
    spec.jumps.assign(n, std::vector<JumpMgf>(n, DegenerateZero{}));
    spec.phi = phi;
    return spec;
}

}  // namespace mmtail
