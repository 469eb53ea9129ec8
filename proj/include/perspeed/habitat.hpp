#pragma once

#include <string>

#include "perspeed/model.hpp"

namespace perspeed {

/// Two-patch piecewise-constant habitat: growth 1 on the good patch of
/// length l1, growth a < 1 on the bad patch of length l2, cross-competition
/// c in [0, 1], diffusion normalized to d1 = 1 with d2 > 1.
struct HabitatSpec {
    double l1 = 0.5;
    double l2 = 0.5;
    double a = 0.5;
    double c = 0.5;
    double d2 = 2.0;

    HabitatSpec() = default;
    HabitatSpec(double l1_, double l2_, double a_, double c_, double d2_);

    double period() const { return l1 + l2; }
    double mean_growth() const { return (l1 + a * l2) / (l1 + l2); }
};

struct DispersionResult {
    double lambda0 = 0.0;
    double mu0 = 0.0;
    double c0_plus = 0.0;
    double stationarity_residual = 0.0;
    std::string branch_notes;
};

/// The dispersion function G with cosh(mu l) = G(lambda), evaluated through
/// real trig/hyperbolic rewrites so imaginary patch wavenumbers and the
/// removable q = 0 singularities never leave the real line.
double g_of_lambda(const HabitatSpec& spec, double lambda);

/// Decay rate mu(lambda) = (1/l) log(G + sqrt(G^2 - 1)); NaN where G < 1.
double mu_of_lambda(const HabitatSpec& spec, double lambda);

/// Solve the stationarity condition d(mu)/d(lambda) * lambda/mu = 1 on the
/// physical branch and return c0_plus = lambda0/mu0. Throws ConvergenceError
/// with a diagnostic table when no stationary point is bracketed.
DispersionResult dispersion_speed(const HabitatSpec& spec);

/// Small-period approximation 2 sqrt((1-c) * mean_growth).
double small_period_speed(const HabitatSpec& spec);

/// The competition model this habitat induces (shared piecewise growth,
/// zero advection, unit competition with cross coefficient c), for
/// cross-checking the closed form against the grid pipeline.
CompetitionModel habitat_model(const HabitatSpec& spec, int n);

}  // namespace perspeed
