#include "perspeed/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "perspeed/errors.hpp"

namespace perspeed {

namespace {

double rayleigh(const CyclicTridiagonal& A, const Eigen::ArrayXd& psi) {
    const Eigen::ArrayXd Apsi = A.apply(psi);
    return (psi * Apsi).sum() / (psi * psi).sum();
}

}  // namespace

EigenProblem::EigenProblem(GridFunction d_, GridFunction g_, GridFunction m_, double mu_)
    : d(std::move(d_)), g(std::move(g_)), m(std::move(m_)), mu(mu_) {
    if (!(d.grid == g.grid) || !(d.grid == m.grid))
        throw ConfigError("eigenproblem", "coefficients must share one grid");
    if (d.values.minCoeff() < kMinDiffusion)
        throw ConfigError("eigenproblem.d", "diffusion must be uniformly positive");
    if (!std::isfinite(mu)) throw ConfigError("eigenproblem.mu", "non-finite decay rate");
}

CyclicTridiagonal discretize(const EigenProblem& problem) {
    const PeriodicGrid& grid = problem.grid();
    const int n = grid.n_points;
    const double h = grid.spacing();

    const Eigen::ArrayXd& d = problem.d.values;
    const Eigen::ArrayXd& g = problem.g.values;
    const Eigen::ArrayXd& m = problem.m.values;
    const double mu = problem.mu;

    const Eigen::ArrayXd w = 2.0 * mu * d + g;  // first-derivative coefficient
    CyclicTridiagonal A;
    A.lower = d / (h * h) + w / (2.0 * h);
    A.upper = d / (h * h) - w / (2.0 * h);
    A.pot = d * mu * mu + g * mu + m;

    if (A.lower.minCoeff() < 0.0 || A.upper.minCoeff() < 0.0) {
        // need h < 2 d_j / |w_j| at every node
        const double ratio = (w.abs() / (2.0 * d)).maxCoeff();
        const int n_min = static_cast<int>(std::floor(grid.period_L * ratio)) + 1;
        std::ostringstream msg;
        msg << "grid too coarse for mu=" << mu
            << ": off-diagonals change sign; refine to at least n=" << std::max(n_min, 8)
            << " nodes per period (current n=" << n << ")";
        throw GridRefinementError(n, std::max(n_min, 8), msg.str());
    }
    return A;
}

EigenPair principal_eigenpair(const EigenProblem& problem, double tol) {
    if (!(tol > 0.0)) throw ConfigError("tol", "tolerance must be positive");
    const CyclicTridiagonal A = discretize(problem);
    const int n = static_cast<int>(A.size());
    const double h = problem.grid().spacing();

    // Nonnegativity shift with margin: diag + sigma >= 2 d/h^2 + |pot| > 0.
    const double sigma =
        2.0 * (2.0 * problem.d.values / (h * h) + A.pot.abs()).maxCoeff();

    Eigen::ArrayXd psi = Eigen::ArrayXd::Ones(n);
    double lambda = rayleigh(A, psi);

    // Perron phase on B = A + sigma I. The polish phase below closes the
    // last digits, so this only needs to land within the spectral gap.
    const int power_cap = std::min(200 * n, 400);
    double increment = std::numeric_limits<double>::infinity();
    for (int k = 0; k < power_cap; ++k) {
        Eigen::ArrayXd y = A.apply(psi) + sigma * psi;
        const double peak = y.maxCoeff();
        if (!(peak > 0.0) || !y.allFinite())
            throw InternalError("power iteration produced a nonpositive iterate");
        psi = y / peak;
        const double next = rayleigh(A, psi);
        increment = std::abs(next - lambda);
        lambda = next;
        if (increment < tol * (1.0 + std::abs(lambda))) break;
    }

    // Inverse-iteration polish with the converged shift; the shift margin
    // tracks the residual so (theta I - A) stays an M-matrix. A handful of
    // Perron steps after each solve re-damp the solver's roundoff noise in
    // the stiff modes, whose residual contribution scales with ||A||.
    const auto residual_of = [&](const Eigen::ArrayXd& v, double lam) {
        return (A.apply(v) - lam * v).abs().maxCoeff();
    };
    const double opnorm =
        (A.lower.abs() + A.upper.abs() + A.diagonal().abs()).maxCoeff();
    const double eps = std::numeric_limits<double>::epsilon();
    const auto gate = [&](double lam) {
        return tol * (1.0 + std::abs(lam)) + 2.0 * eps * opnorm;
    };
    double res = residual_of(psi, lambda);
    double delta = std::max(4.0 * res, 1e-14 * (1.0 + std::abs(lambda)));
    int bad_solves = 0;
    for (int k = 0; k < 60 && res > gate(lambda); ++k) {
        const CyclicTridiagonal M = A.shifted_identity_minus(lambda + delta);
        Eigen::ArrayXd y;
        try {
            y = M.solve(psi);
        } catch (const std::runtime_error&) {
            delta *= 8.0;
            if (++bad_solves > 20)
                throw ConvergenceError("eigenpair polish: repeated singular solves");
            continue;
        }
        if (!y.allFinite() || y.maxCoeff() <= 0.0 || y.minCoeff() <= 0.0) {
            // shift fell below the principal eigenvalue; back off upward
            delta *= 8.0;
            if (++bad_solves > 20)
                throw ConvergenceError("eigenpair polish: shift cannot be stabilized");
            continue;
        }
        y /= y.maxCoeff();
        for (int s = 0; s < 8; ++s) {
            y = A.apply(y) + sigma * y;
            y /= y.maxCoeff();
        }
        psi = y;
        const double next = rayleigh(A, psi);
        increment = std::abs(next - lambda);
        lambda = next;
        res = residual_of(psi, lambda);
        delta = std::max(4.0 * res, 1e-14 * (1.0 + std::abs(lambda)));
    }

    if (res > gate(lambda)) {
        std::ostringstream msg;
        msg << "principal eigenpair did not converge: residual=" << res
            << " last increment=" << increment << " tol=" << tol;
        throw ConvergenceError(msg.str());
    }
    if (psi.minCoeff() <= 0.0)
        throw InternalError("principal eigenvector has a nonpositive entry");

    EigenPair out;
    out.lambda = lambda;
    out.psi = GridFunction(problem.grid(), psi / psi.maxCoeff());
    out.residual = res;
    return out;
}

GridFunction resolvent_solve(const EigenProblem& problem, double shift,
                             const GridFunction& rhs,
                             std::optional<double> spectral_bound) {
    if (!(rhs.grid == problem.grid()))
        throw ConfigError("resolvent.rhs", "grid mismatch");
    if (rhs.values.minCoeff() < 0.0 || rhs.values.maxCoeff() <= 0.0)
        throw ConfigError("resolvent.rhs", "need rhs >= 0 and not identically 0");

    const double bound =
        spectral_bound ? *spectral_bound : principal_eigenpair(problem).lambda;
    if (!(shift > bound))
        throw SpectralBoundError("resolvent shift below spectral bound");

    const CyclicTridiagonal A = discretize(problem);
    const CyclicTridiagonal M = A.shifted_identity_minus(shift);
    Eigen::ArrayXd phi = M.solve(rhs.values);
    // one step of iterative refinement
    phi += M.solve((rhs.values - M.apply(phi)).eval());

    const double res = (M.apply(phi) - rhs.values).abs().maxCoeff();
    if (res > 1e-10 * rhs.values.abs().maxCoeff())
        throw ConvergenceError("resolvent solve residual above contract");
    if (phi.minCoeff() <= 0.0)
        throw InternalError("resolvent solution not strictly positive");
    return GridFunction(problem.grid(), std::move(phi));
}

}  // namespace perspeed
