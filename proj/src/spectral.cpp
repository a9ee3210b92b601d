#include "mmtail/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "mmtail/errors.hpp"

namespace mmtail {

namespace {

constexpr int kMaxIterations = 10000;

struct PerronPair {
    double zeta = 0.0;
    RealVector x;
    int iterations = 0;
};

// Noda iteration for an irreducible Metzler matrix: inverse iteration whose shift is the
// Collatz-Wielandt upper bound max_i (Ax)_i / x_i. Converges quadratically to the Perron pair.
PerronPair noda(const RealMatrix& a) {
    const Eigen::Index n = a.rows();
    PerronPair out;
    if (n == 1) {
        out.zeta = a(0, 0);
        out.x = RealVector::Ones(1);
        return out;
    }
    const double d = 1.0 + a.diagonal().cwiseAbs().maxCoeff();
    const double scale = 1.0 + norm_inf(a);
    RealVector x = RealVector::Constant(n, 1.0 / static_cast<double>(n));
    const RealMatrix shifted = a + d * RealMatrix::Identity(n, n);
    for (int k = 0; k < 5; ++k) {
        x = shifted * x;
        x /= x.sum();
    }
    double best_gap = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int k = 0; k < kMaxIterations; ++k) {
        out.iterations = k + 1;
        const RealVector ax = a * x;
        double upper = -std::numeric_limits<double>::infinity();
        double lower = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = ax(i) / x(i);
            upper = std::max(upper, r);
            lower = std::min(lower, r);
        }
        const double gap = upper - lower;
        out.zeta = 0.5 * (upper + lower);
        out.x = x;
        if (gap <= 1e-12 * (1.0 + std::abs(upper))) return out;
        if (gap < 0.5 * best_gap) {
            best_gap = gap;
            stalled = 0;
        } else if (++stalled >= 8 && gap <= 1e-9 * scale) {
            // rounding floor reached
            return out;
        }
        const RealMatrix m = upper * RealMatrix::Identity(n, n) - a;
        const Eigen::PartialPivLU<RealMatrix> lu(m);
        RealVector w = lu.solve(x);
        if (!w.allFinite() || (w.array() <= 0.0).any()) {
            // shift coincides with zeta to working precision
            return out;
        }
        x = w / w.sum();
    }
    throw ConvergenceError("Perron iteration did not converge in 10^4 iterations");
}

// Eigenvector for a known abscissa by shifted inverse iteration; used on reducible inputs.
RealVector inverse_vector(const RealMatrix& a, double zeta) {
    const Eigen::Index n = a.rows();
    const double delta = 1e-10 * (1.0 + norm_inf(a));
    const RealMatrix m = (zeta + delta) * RealMatrix::Identity(n, n) - a;
    const Eigen::PartialPivLU<RealMatrix> lu(m);
    RealVector x = RealVector::Constant(n, 1.0 / static_cast<double>(n));
    for (int k = 0; k < 6; ++k) {
        RealVector w = lu.solve(x);
        if (!w.allFinite()) break;
        w = w.cwiseMax(0.0);
        const double s = w.sum();
        if (!(s > 0.0)) break;
        x = w / s;
    }
    return x;
}

double block_abscissa(const RealMatrix& a, const std::vector<std::vector<int>>& comps) {
    double zeta = -std::numeric_limits<double>::infinity();
    for (const auto& c : comps) {
        const auto m = static_cast<Eigen::Index>(c.size());
        RealMatrix block(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) block(i, j) = a(c[i], c[j]);
        zeta = std::max(zeta, noda(block).zeta);
    }
    return zeta;
}

std::vector<std::vector<int>> adjacency(const RealMatrix& a, bool transpose) {
    const auto n = static_cast<int>(a.rows());
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && a(i, j) != 0.0) {
                if (transpose)
                    adj[j].push_back(i);
                else
                    adj[i].push_back(j);
            }
    return adj;
}

std::vector<bool> bfs(const std::vector<std::vector<int>>& adj, std::vector<bool> seen) {
    std::vector<int> stack;
    for (int i = 0; i < static_cast<int>(seen.size()); ++i)
        if (seen[i]) stack.push_back(i);
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
    }
    return seen;
}

}  // namespace

bool is_metzler(const RealMatrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j && !(a(i, j) >= 0.0)) return false;
    return true;
}

std::vector<bool> reachable_from(const RealMatrix& a, const std::vector<int>& sources) {
    std::vector<bool> seen(a.rows(), false);
    for (int s : sources) seen[s] = true;
    return bfs(adjacency(a, false), seen);
}

std::vector<bool> can_reach(const RealMatrix& a, const std::vector<bool>& targets) {
    return bfs(adjacency(a, true), targets);
}

bool is_irreducible(const RealMatrix& a) {
    if (a.rows() <= 1) return true;
    const auto fwd = reachable_from(a, {0});
    const auto bwd = can_reach(a, [&] {
        std::vector<bool> t(a.rows(), false);
        t[0] = true;
        return t;
    }());
    return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
           std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

std::vector<std::vector<int>> strongly_connected_components(const RealMatrix& a) {
    const auto n = static_cast<int>(a.rows());
    const auto adj = adjacency(a, false);
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int counter = 0;
    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (int w : adj[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<int> comp;
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            comps.push_back(std::move(comp));
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);
    return comps;
}

SpectralResult spectral_abscissa_metzler(const RealMatrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw DomainError("spectral abscissa needs a nonempty square matrix");
    if (!is_metzler(a)) throw DomainError("matrix is not Metzler");
    const double scale = 1.0 + norm_inf(a);
    SpectralResult res;
    if (is_irreducible(a)) {
        const PerronPair right = noda(a);
        const PerronPair left = noda(a.transpose());
        res.iterations = right.iterations + left.iterations;
        res.right = right.x / right.x.sum();
        res.left = left.x / left.x.dot(res.right);
        res.zeta = res.left.dot(a * res.right) / res.left.dot(res.right);
        res.simple = true;
    } else {
        res.zeta = block_abscissa(a, strongly_connected_components(a));
        res.right = inverse_vector(a, res.zeta);
        RealVector y = inverse_vector(a.transpose(), res.zeta);
        const double yx = y.dot(res.right);
        if (yx > 1e-14 * y.cwiseAbs().maxCoeff()) {
            res.left = y / yx;
            const RealMatrix deflated =
                a - (res.zeta + 1.0 + 2.0 * norm_inf(a)) * res.right * res.left.transpose();
            res.simple = spectral_abscissa_complex(deflated) < res.zeta - 1e-9 * scale;
        } else {
            res.left = y / y.sum();
            res.simple = false;
        }
    }
    res.right_residual = (a * res.right - res.zeta * res.right).cwiseAbs().maxCoeff();
    res.left_residual = (a.transpose() * res.left - res.zeta * res.left).cwiseAbs().maxCoeff();
    return res;
}

double metzler_abscissa(const RealMatrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw DomainError("spectral abscissa needs a nonempty square matrix");
    if (!is_metzler(a)) throw DomainError("matrix is not Metzler");
    if (!a.allFinite()) return std::numeric_limits<double>::infinity();
    if (is_irreducible(a)) {
        const PerronPair right = noda(a);
        if (a.rows() == 1) return right.zeta;
        const PerronPair left = noda(a.transpose());
        return left.x.dot(a * right.x) / left.x.dot(right.x);
    }
    return block_abscissa(a, strongly_connected_components(a));
}

double spectral_abscissa_complex(const ComplexMatrix& a) {
    if (a.rows() == 0) throw DomainError("empty matrix");
    if (a.rows() == 1) return a(0, 0).real();
    Eigen::ComplexEigenSolver<ComplexMatrix> es(a, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("complex eigensolver did not converge");
    return es.eigenvalues().real().maxCoeff();
}

double spectral_abscissa_complex(const RealMatrix& a) {
    if (a.rows() == 0) throw DomainError("empty matrix");
    if (a.rows() == 1) return a(0, 0);
    Eigen::EigenSolver<RealMatrix> es(a, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("eigensolver did not converge");
    return es.eigenvalues().real().maxCoeff();
}

RealMatrix matrix_exponential(const RealMatrix& a) { return a.exp(); }

ComplexMatrix matrix_exponential(const ComplexMatrix& a) { return a.exp(); }

}  // namespace mmtail
