#pragma once

#include <vector>

#include "mmtail/linalg.hpp"

namespace mmtail {

struct SpectralResult {
    double zeta = 0.0;
    RealVector right;  // x, with ||x||_1 = 1
    RealVector left;   // y, with y'x = 1 when possible
    double right_residual = 0.0;
    double left_residual = 0.0;
    bool simple = false;
    int iterations = 0;
};

/// Spectral abscissa and Perron vectors of a Metzler matrix.
/// Irreducible blocks use Noda's shifted inverse iteration; throws ConvergenceError
/// after 10^4 iterations.
[[nodiscard]] SpectralResult spectral_abscissa_metzler(const RealMatrix& a);

/// Just zeta, for hot loops.
[[nodiscard]] double metzler_abscissa(const RealMatrix& a);

/// max Re(lambda) over the eigenvalues of a general complex matrix.
[[nodiscard]] double spectral_abscissa_complex(const ComplexMatrix& a);
[[nodiscard]] double spectral_abscissa_complex(const RealMatrix& a);

/// Strong connectivity of the graph on nonzero off-diagonal entries.
[[nodiscard]] bool is_irreducible(const RealMatrix& a);

/// Strongly connected components (Tarjan), each a list of indices.
[[nodiscard]] std::vector<std::vector<int>> strongly_connected_components(const RealMatrix& a);

/// States reachable from any source along nonzero off-diagonal entries (sources included).
[[nodiscard]] std::vector<bool> reachable_from(const RealMatrix& a, const std::vector<int>& sources);

/// States from which some target is reachable (targets included).
[[nodiscard]] std::vector<bool> can_reach(const RealMatrix& a, const std::vector<bool>& targets);

[[nodiscard]] bool is_metzler(const RealMatrix& a);

/// exp(A) by scaling and squaring with a Pade approximant.
[[nodiscard]] RealMatrix matrix_exponential(const RealMatrix& a);
[[nodiscard]] ComplexMatrix matrix_exponential(const ComplexMatrix& a);

}  // namespace mmtail
