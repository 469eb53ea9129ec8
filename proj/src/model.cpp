#include "perspeed/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "perspeed/errors.hpp"

namespace perspeed {

namespace {

bool is_sampled_constant(const GridFunction& f, double rel = 1e-13) {
    const double lo = f.values.minCoeff(), hi = f.values.maxCoeff();
    return hi - lo <= rel * (1.0 + std::max(std::abs(lo), std::abs(hi)));
}

GridFunction zero_like(const PeriodicGrid& grid) {
    return GridFunction(grid, Eigen::ArrayXd::Zero(grid.n_points));
}

// One marching pass of u_t = L u + u (c - e u); returns time used.
double march(const CyclicTridiagonal& A_L, const Eigen::ArrayXd& c,
             const Eigen::ArrayXd& e, Eigen::ArrayXd& u, double tol,
             double t_start, double t_cap) {
    const double u_cap = (c.max(0.0) / e).maxCoeff() + 1.0;
    const double jac_bound = (c.abs() + 2.0 * e * u_cap).maxCoeff();
    const double dt = std::min(0.5, 0.25 / jac_bound);

    CyclicTridiagonal M;  // I - dt A_L
    M.lower = -dt * A_L.lower;
    M.upper = -dt * A_L.upper;
    M.pot = 1.0 - dt * A_L.pot;

    double t = t_start;
    while (t < t_cap) {
        Eigen::ArrayXd un = M.solve((u + dt * u * (c - e * u)).eval());
        const double rate = (un - u).abs().maxCoeff() / dt;
        u = un;
        t += dt;
        if (rate < tol) return t;
    }
    std::ostringstream msg;
    msg << "steady-state marching exceeded the time cap T=" << t_cap;
    throw ConvergenceError(msg.str());
}

}  // namespace

SampledModel sample_model(const CompetitionModel& model) {
    const PeriodicGrid grid = model.grid();
    SampledModel s{grid,
                   sample(model.d1, grid), sample(model.g1, grid), sample(model.b1, grid),
                   sample(model.d2, grid), sample(model.g2, grid), sample(model.b2, grid),
                   sample(model.a11, grid), sample(model.a12, grid),
                   sample(model.a21, grid), sample(model.a22, grid)};
    if (s.d1.values.minCoeff() < kMinDiffusion)
        throw ConfigError("species1.d", "diffusion must be uniformly positive");
    if (s.d2.values.minCoeff() < kMinDiffusion)
        throw ConfigError("species2.d", "diffusion must be uniformly positive");
    const char* names[4] = {"competition.a11", "competition.a12", "competition.a21",
                            "competition.a22"};
    const GridFunction* comp[4] = {&s.a11, &s.a12, &s.a21, &s.a22};
    for (int i = 0; i < 4; ++i)
        if (comp[i]->values.minCoeff() <= 0.0)
            throw ConfigError(names[i], "competition coefficients must be positive");
    return s;
}

GridFunction logistic_steady_state(const GridFunction& d, const GridFunction& g,
                                   const GridFunction& c, const GridFunction& e,
                                   double tol, double* converged_in, double* residual) {
    const PeriodicGrid& grid = d.grid;
    if (e.values.minCoeff() <= 0.0)
        throw ConfigError("logistic.e", "self-limitation must be positive");

    const EigenProblem growth(d, g, c, 0.0);
    const double lam = principal_eigenpair(growth).lambda;
    if (!(lam > 0.0)) {
        std::ostringstream msg;
        msg << "extinction: no positive steady state (lambda(d,g,c)=" << lam << " <= 0)";
        throw HypothesisError(msg.str());
    }

    const CyclicTridiagonal A_L = discretize(EigenProblem(d, g, zero_like(grid), 0.0));
    const auto F = [&](const Eigen::ArrayXd& u) {
        return (A_L.apply(u) + u * (c.values - e.values * u)).eval();
    };

    Eigen::ArrayXd u = Eigen::ArrayXd::Constant(
        grid.n_points,
        1e-3 * std::max((c.values.max(0.0) / e.values).maxCoeff(), 1.0));
    double t_used = march(A_L, c.values, e.values, u, tol, 0.0, 1e4);

    // Newton polish on the steady system; the Jacobian is the linearization
    // A_L + diag(c - 2 e u), a cyclic tridiagonal solve per step.
    double fnorm = F(u).abs().maxCoeff();
    for (int attempt = 0; attempt < 2; ++attempt) {
        bool diverged = false;
        for (int k = 0; k < 12; ++k) {
            CyclicTridiagonal J = A_L;
            J.pot = A_L.pot + c.values - 2.0 * e.values * u;
            Eigen::ArrayXd delta = J.solve((-F(u)).eval());
            Eigen::ArrayXd un = u + delta;
            const double fn = F(un).abs().maxCoeff();
            if (!un.allFinite() || fn > 10.0 * fnorm + 1e-12) {
                diverged = true;
                break;
            }
            u = un;
            if (fn >= 0.5 * fnorm) {
                fnorm = fn;
                break;  // floating-point floor reached
            }
            fnorm = fn;
        }
        if (!diverged) break;
        // fall back to more marching, then retry Newton once
        t_used = march(A_L, c.values, e.values, u, tol * 1e-2, t_used, 1e4);
        fnorm = F(u).abs().maxCoeff();
        if (attempt == 1)
            throw ConvergenceError("steady-state Newton polish diverged");
    }

    if (u.minCoeff() <= 0.0)
        throw InternalError("logistic steady state not strictly positive");
    if (converged_in) *converged_in = t_used;
    if (residual) *residual = fnorm;
    return GridFunction(grid, std::move(u));
}

GridFunction logistic_steady_state(const PeriodicCoefficient& d,
                                   const PeriodicCoefficient& g,
                                   const PeriodicCoefficient& c,
                                   const PeriodicCoefficient& e,
                                   const PeriodicGrid& grid, double tol) {
    return logistic_steady_state(sample(d, grid), sample(g, grid), sample(c, grid),
                                 sample(e, grid), tol);
}

SteadyStates steady_states(const SampledModel& model, double tol) {
    SteadyStates s;
    double t1 = 0, t2 = 0, r1 = 0, r2 = 0;
    s.u1_star = logistic_steady_state(model.d1, model.g1, model.b1, model.a11, tol, &t1, &r1);
    s.u2_star = logistic_steady_state(model.d2, model.g2, model.b2, model.a22, tol, &t2, &r2);
    s.converged_in = std::max(t1, t2);
    s.residuals = {r1, r2};
    return s;
}

CooperativeModel build_cooperative(const SampledModel& model, double tol) {
    const SteadyStates ss = steady_states(model, tol);
    CooperativeModel coop{model.grid,
                          model.d1, model.g1, model.a11, model.a12,
                          model.d2, model.g2, model.a21, model.a22,
                          GridFunction(model.grid,
                                       model.b1.values - model.a12.values * ss.u2_star.values),
                          GridFunction(model.grid,
                                       model.b2.values - 2.0 * model.a22.values * ss.u2_star.values),
                          GridFunction(model.grid, model.a21.values * ss.u2_star.values),
                          ss.u1_star, ss.u2_star};
    return coop;
}

CooperativeModel build_cooperative(const CompetitionModel& model) {
    return build_cooperative(sample_model(model));
}

H12Report hypothesis_h1_h2(const SampledModel& model) {
    H12Report rep;
    rep.lambda_1 =
        principal_eigenpair(EigenProblem(model.d1, model.g1, model.b1, 0.0)).lambda;
    rep.lambda_2 =
        principal_eigenpair(EigenProblem(model.d2, model.g2, model.b2, 0.0)).lambda;
    rep.h1_species1 = rep.lambda_1 > 0.0;
    rep.h1_species2 = rep.lambda_2 > 0.0;
    rep.lambda_h2 = std::numeric_limits<double>::quiet_NaN();
    if (rep.h1_species2) {
        const GridFunction u2s =
            logistic_steady_state(model.d2, model.g2, model.b2, model.a22);
        const GridFunction pot(model.grid,
                               model.b1.values - model.a12.values * u2s.values);
        rep.lambda_h2 =
            principal_eigenpair(EigenProblem(model.d1, model.g1, pot, 0.0)).lambda;
        rep.h2 = rep.lambda_h2 > 0.0;
        rep.h1_species1_implied_by_h2 = rep.h2;
    }
    return rep;
}

H3Report classify_h3(const SampledModel& m) {
    const bool all_const =
        is_sampled_constant(m.d1) && is_sampled_constant(m.g1) &&
        is_sampled_constant(m.b1) && is_sampled_constant(m.d2) &&
        is_sampled_constant(m.g2) && is_sampled_constant(m.b2) &&
        is_sampled_constant(m.a11) && is_sampled_constant(m.a12) &&
        is_sampled_constant(m.a21) && is_sampled_constant(m.a22);
    if (all_const) {
        const double b1 = m.b1.values[0], b2 = m.b2.values[0];
        const double a11 = m.a11.values[0], a12 = m.a12.values[0];
        const double a21 = m.a21.values[0], a22 = m.a22.values[0];
        const double det = a11 * a22 - a12 * a21;
        if (det != 0.0) {
            const double u1 = (b1 * a22 - a12 * b2) / det;
            const double u2 = (a11 * b2 - b1 * a21) / det;
            return {H3Status::VerifiedConstant, !(u1 > 0.0 && u2 > 0.0)};
        }
        return {H3Status::Assumed, true};
    }

    // Single-resource class: zero advection, constant diffusion with d1 < d2,
    // one shared non-constant growth b1 = b2 with nonnegative mean, and
    // competition (a11, a12, a21, a22) = kappa (1, c, 1, 1) with c in [0, 1].
    const bool zero_adv = m.g1.values.abs().maxCoeff() <= 1e-14 &&
                          m.g2.values.abs().maxCoeff() <= 1e-14;
    if (zero_adv && is_sampled_constant(m.d1) && is_sampled_constant(m.d2) &&
        is_sampled_constant(m.a11) && is_sampled_constant(m.a12) &&
        is_sampled_constant(m.a21) && is_sampled_constant(m.a22)) {
        const double kappa = m.a11.values[0];
        const double c = m.a12.values[0] / kappa;
        const bool competition_ok =
            std::abs(m.a21.values[0] - kappa) <= 1e-13 * kappa &&
            std::abs(m.a22.values[0] - kappa) <= 1e-13 * kappa && c >= 0.0 && c <= 1.0;
        const bool growth_ok =
            (m.b1.values - m.b2.values).abs().maxCoeff() <=
                1e-13 * (1.0 + m.b1.values.abs().maxCoeff()) &&
            !is_sampled_constant(m.b1) && periodic_mean(m.b1) >= 0.0;
        if (competition_ok && growth_ok && m.d1.values[0] < m.d2.values[0])
            return {H3Status::VerifiedSingleResource, true};
    }
    return {H3Status::Assumed, true};
}

}  // namespace perspeed
