#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "perspeed/model.hpp"
#include "perspeed/spectral.hpp"

namespace perspeed {

/// The four principal-eigenvalue families of the linearized subsystems:
///   Lambda1  - species 1 with its bare growth b1
///   Lambda2  - species 2 with potential b2 - a22 u2* (zero at mu = 0)
///   Lambda0  - species 1 with potential b1 - a12 u2* (the invasion family)
///   LambdaBar- species 2 with potential b2 - 2 a22 u2*
enum class LambdaFamily { Lambda1, Lambda2, Lambda0, LambdaBar };

EigenProblem assemble_family(const CooperativeModel& coop, LambdaFamily family,
                             double mu);

double lambda_of_mu(const CooperativeModel& coop, LambdaFamily family, double mu);

struct SpeedResult {
    double c = 0.0;        // the minimized lambda(mu)/mu
    double mu0 = 0.0;      // minimizing decay rate
    double lambda0 = 0.0;  // lambda at mu0 (c * mu0 exactly)
    std::pair<double, double> bracket{0.0, 0.0};
    int evaluations = 0;
};

/// Minimize mu -> lambda(mu)/mu over mu > 0 by bracket expansion plus
/// golden-section search (valid by convexity of lambda). Requires
/// lambda(0) > 0; throws HypothesisError otherwise and ConvergenceError
/// when no bracket is found below mu = 1e3.
SpeedResult min_speed(const std::function<double(double)>& lambda_fn,
                      double mu_hint = 1.0);

SpeedResult min_speed(const CooperativeModel& coop, LambdaFamily family,
                      double mu_hint = 1.0);

struct H4Report {
    SpeedResult c1_plus;   // rightward speed of the species-1 scalar equation
    SpeedResult c2_minus;  // leftward speed of the species-2 scalar equation
    bool holds = false;    // c1_plus + c2_minus > 0
};

H4Report check_h4(const CooperativeModel& coop);

struct H5Report {
    double lambda2_at_zero = 0.0;
    double slope_at_zero = 0.0;  // lim_{mu->0+} lambda2(mu)/mu, Richardson estimate
    double c1_plus = 0.0;
    bool holds = false;
};

H5Report check_h5(const CooperativeModel& coop);

struct DeterminacyCertificate {
    double c0_plus = 0.0;
    double mu0 = 0.0;
    double lambda0_mu0 = 0.0;
    double lambda_bar_mu0 = 0.0;
    bool d1_holds = false;
    GridFunction phi1_star;                 // max-normalized
    std::optional<GridFunction> phi2_star;  // resolvent scale; absent when D1 fails
    double ratio_min = 0.0;  // min_x [phi1/phi2 - max(a12/a11, a22/a21)]
    bool d2_holds = false;
};

/// Evaluates the linear-determinacy conditions at the minimizing decay rate:
/// D1: lambda0(mu0) > lambda_bar(mu0); D2: the pointwise eigenfunction-ratio
/// inequality for the coupled eigenfunction (phi1*, phi2*). When both hold
/// the spreading speed equals c0_plus.
DeterminacyCertificate determinacy_certificate(const CooperativeModel& coop);

/// c0_plus packaged as the certified lower bound for the slowest spreading speed.
SpeedResult lower_bound_report(const CooperativeModel& coop);

}  // namespace perspeed
