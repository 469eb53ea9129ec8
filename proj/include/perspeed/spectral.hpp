#pragma once

#include <optional>

#include "perspeed/cyclic.hpp"
#include "perspeed/grid.hpp"

namespace perspeed {

/// Smallest admissible uniform ellipticity bound for diffusion coefficients.
inline constexpr double kMinDiffusion = 1e-8;

/// The mu-conjugated periodic operator
///
///   (A psi)(x) = d psi'' - (2 mu d + g) psi' + (d mu^2 + g mu + m) psi
///
/// on one period with periodic boundary conditions.
struct EigenProblem {
    GridFunction d;  // diffusion, >= kMinDiffusion
    GridFunction g;  // advection
    GridFunction m;  // potential
    double mu = 0.0;

    EigenProblem(GridFunction d_, GridFunction g_, GridFunction m_, double mu_);

    const PeriodicGrid& grid() const { return d.grid; }
};

struct EigenPair {
    double lambda = 0.0;
    GridFunction psi;      // strictly positive, max-normalized to 1
    double residual = 0.0; // ||A psi - lambda psi||_inf
};

/// Second-order central-difference realization of the operator with periodic
/// wraparound. Throws GridRefinementError (reporting the minimal admissible
/// node count) when the grid is too coarse to keep the off-diagonals
/// nonnegative.
CyclicTridiagonal discretize(const EigenProblem& problem);

/// Principal (largest-real-part) eigenpair by Perron power iteration on the
/// nonnegative shifted matrix, finished by inverse-iteration polish using the
/// converged shift. The returned eigenfunction is strictly positive with max
/// node value 1; residual <= tol * max(1, |lambda|).
EigenPair principal_eigenpair(const EigenProblem& problem, double tol = 1e-10);

/// Solve (shift*I - A) phi = rhs. Requires shift strictly above the principal
/// eigenvalue (checked; pass `spectral_bound` to reuse a known value), rhs >= 0
/// and not identically zero. The solution is strictly positive.
GridFunction resolvent_solve(const EigenProblem& problem, double shift,
                             const GridFunction& rhs,
                             std::optional<double> spectral_bound = std::nullopt);

}  // namespace perspeed
