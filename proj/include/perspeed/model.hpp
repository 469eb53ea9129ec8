#pragma once

#include <utility>

#include "perspeed/grid.hpp"
#include "perspeed/spectral.hpp"

namespace perspeed {

/// Parameter set of the two-species competition system
///
///   u1_t = d1 u1'' - g1 u1' + u1 (b1 - a11 u1 - a12 u2)
///   u2_t = d2 u2'' - g2 u2' + u2 (b2 - a21 u1 - a22 u2)
///
/// with L-periodic coefficients.
struct CompetitionModel {
    double L = 1.0;
    int n = 256;
    PeriodicCoefficient d1, g1, b1;
    PeriodicCoefficient d2, g2, b2;
    PeriodicCoefficient a11, a12, a21, a22;

    PeriodicGrid grid() const { return PeriodicGrid(L, n); }
};

/// All ten coefficients sampled on the model grid, validated
/// (d_i uniformly positive, a_ij positive at every node).
struct SampledModel {
    PeriodicGrid grid;
    GridFunction d1, g1, b1;
    GridFunction d2, g2, b2;
    GridFunction a11, a12, a21, a22;
};

SampledModel sample_model(const CompetitionModel& model);

struct SteadyStates {
    GridFunction u1_star;
    GridFunction u2_star;
    double converged_in = 0.0;  // marching time used (max over the two species)
    std::pair<double, double> residuals{0.0, 0.0};
};

/// Coefficient bundle of the cooperative transform v1 = u1, v2 = u2* - u2.
struct CooperativeModel {
    PeriodicGrid grid;
    GridFunction d1, g1, a11, a12;
    GridFunction d2, g2, a21, a22;
    GridFunction linear1;  // b1 - a12 u2*
    GridFunction linear2;  // b2 - 2 a22 u2*
    GridFunction source;   // a21 u2*, coefficient of v1 in the v2 equation
    GridFunction u1_star;  // beta component 1
    GridFunction u2_star;  // beta component 2

    Eigen::ArrayXd rhs1(const Eigen::ArrayXd& v1, const Eigen::ArrayXd& v2) const {
        return v1 * (linear1.values - a11.values * v1 + a12.values * v2);
    }
    Eigen::ArrayXd rhs2(const Eigen::ArrayXd& v1, const Eigen::ArrayXd& v2) const {
        return source.values * v1 - a21.values * v1 * v2 +
               v2 * (linear2.values + a22.values * v2);
    }
};

/// Unique positive periodic steady state of u_t = d u'' - g u' + u (c - e u),
/// by time-marching (globally attracting) plus Newton polish. Throws
/// HypothesisError ("extinction...") when lambda(d, g, c) <= 0.
GridFunction logistic_steady_state(const PeriodicCoefficient& d,
                                   const PeriodicCoefficient& g,
                                   const PeriodicCoefficient& c,
                                   const PeriodicCoefficient& e,
                                   const PeriodicGrid& grid, double tol = 1e-9);

GridFunction logistic_steady_state(const GridFunction& d, const GridFunction& g,
                                   const GridFunction& c, const GridFunction& e,
                                   double tol = 1e-9, double* converged_in = nullptr,
                                   double* residual = nullptr);

SteadyStates steady_states(const SampledModel& model, double tol = 1e-9);

CooperativeModel build_cooperative(const CompetitionModel& model);
CooperativeModel build_cooperative(const SampledModel& model, double tol = 1e-9);

struct H12Report {
    double lambda_1 = 0.0;   // lambda(d1, g1, b1)
    double lambda_2 = 0.0;   // lambda(d2, g2, b2)
    double lambda_h2 = 0.0;  // lambda(d1, g1, b1 - a12 u2*); NaN if u2* missing
    bool h1_species1 = false;
    bool h1_species2 = false;
    bool h2 = false;
    bool h1_species1_implied_by_h2 = false;
};

H12Report hypothesis_h1_h2(const SampledModel& model);

/// How the absence of coexistence states (H3) is certified. The tool only
/// verifies it where a constructive argument exists: constant coefficients
/// (2x2 equilibrium solve) and the single-resource class with non-constant
/// shared growth, zero advection, d1 < d2 and cross-competition ratio in
/// [0, 1]. Everywhere else it is assumed, not verified.
enum class H3Status { VerifiedConstant, VerifiedSingleResource, Assumed };

struct H3Report {
    H3Status status = H3Status::Assumed;
    bool holds = true;  // meaningful when status != Assumed
};

H3Report classify_h3(const SampledModel& model);

}  // namespace perspeed
