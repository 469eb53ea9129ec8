#include "perspeed/habitat.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "perspeed/errors.hpp"

namespace perspeed {

namespace {

// cosh(q len) as an entire function of q^2 (= cos for q^2 < 0).
double cosh_q(double q_sq, double len) {
    const double z = q_sq * len * len;
    if (std::abs(z) < 1e-8) return 1.0 + z / 2.0 + z * z / 24.0;
    if (q_sq > 0.0) return std::cosh(std::sqrt(q_sq) * len);
    return std::cos(std::sqrt(-q_sq) * len);
}

// sinh(q len)/q as an entire function of q^2 (= sin(|q| len)/|q| for q^2 < 0).
double sinhc_q(double q_sq, double len) {
    const double z = q_sq * len * len;
    if (std::abs(z) < 1e-8) return len * (1.0 + z / 6.0 + z * z / 120.0);
    if (q_sq > 0.0) {
        const double q = std::sqrt(q_sq);
        return std::sinh(q * len) / q;
    }
    const double q = std::sqrt(-q_sq);
    return std::sin(q * len) / q;
}

}  // namespace

HabitatSpec::HabitatSpec(double l1_, double l2_, double a_, double c_, double d2_)
    : l1(l1_), l2(l2_), a(a_), c(c_), d2(d2_) {
    if (!(l1 > 0.0)) throw ConfigError("habitat.l1", "patch length must be positive");
    if (!(l2 > 0.0)) throw ConfigError("habitat.l2", "patch length must be positive");
    if (!(a < 1.0)) throw ConfigError("habitat.a", "bad-patch growth must satisfy a < 1");
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("habitat.c", "need 0 <= c <= 1");
    if (!(d2 > 1.0)) throw ConfigError("habitat.d2", "need d2 > d1 = 1");
    if (!(mean_growth() > 0.0))
        throw ConfigError("habitat.a", "mean growth (l1 + a l2)/l must be positive");
}

double g_of_lambda(const HabitatSpec& spec, double lambda) {
    const double q1_sq = lambda - (1.0 - spec.c);
    const double q2_sq = lambda - spec.a * (1.0 - spec.c);
    // (q1^2+q2^2)/(2 q1 q2) sinh(q1 l1) sinh(q2 l2) rewritten with sinh(q l)/q
    return cosh_q(q1_sq, spec.l1) * cosh_q(q2_sq, spec.l2) +
           0.5 * (q1_sq + q2_sq) * sinhc_q(q1_sq, spec.l1) * sinhc_q(q2_sq, spec.l2);
}

double mu_of_lambda(const HabitatSpec& spec, double lambda) {
    const double G = g_of_lambda(spec, lambda);
    if (G < 1.0) return std::numeric_limits<double>::quiet_NaN();
    return std::log(G + std::sqrt(G * G - 1.0)) / spec.period();
}

namespace {

// Central-difference derivative of the closed-form mu; falls back to the
// forward difference next to the G = 1 edge where mu(lambda - step) is NaN.
// The step balances truncation against the acosh-edge roundoff in mu, which
// dominates for short periods.
double mu_prime(const HabitatSpec& spec, double lambda) {
    const double step = 1e-5 * std::max(1.0, std::abs(lambda));
    const double back = mu_of_lambda(spec, lambda - step);
    if (std::isnan(back))
        return (mu_of_lambda(spec, lambda + step) - mu_of_lambda(spec, lambda)) / step;
    return (mu_of_lambda(spec, lambda + step) - back) / (2.0 * step);
}

double stationarity(const HabitatSpec& spec, double lambda) {
    return mu_prime(spec, lambda) * lambda / mu_of_lambda(spec, lambda) - 1.0;
}

}  // namespace

DispersionResult dispersion_speed(const HabitatSpec& spec) {
    const double growth1 = 1.0 - spec.c;          // q1^2 sign change
    const double growth2 = spec.a * (1.0 - spec.c);  // q2^2 sign change

    // Rightmost crossing of G = 1 (the mu = 0 point = principal eigenvalue
    // of the unconjugated operator), scanned downward from the first lambda
    // where both patch wavenumbers are real.
    const double lam_start = std::max(growth1, growth2);
    double lam_g1 = lam_start;
    if (g_of_lambda(spec, lam_start) > 1.0) {
        const double lam_floor = std::min(growth1, growth2);
        const double step = std::max((lam_start - lam_floor) / 64.0, 1e-12);
        double hi = lam_start;
        double lo = hi - step;
        while (g_of_lambda(spec, lo) > 1.0 && lo > lam_floor - 10.0 * step) {
            hi = lo;
            lo -= step;
        }
        if (g_of_lambda(spec, lo) > 1.0) {
            lam_g1 = lo;  // no crossing above the oscillatory region
        } else {
            for (int k = 0; k < 200; ++k) {
                const double mid = 0.5 * (lo + hi);
                (g_of_lambda(spec, mid) > 1.0 ? hi : lo) = mid;
            }
            lam_g1 = hi;
        }
    }

    // Bracket the stationary point of lambda/mu above the G = 1 crossing.
    double lo = lam_g1 + 1e-6 * std::max(1.0, std::abs(lam_g1));
    double width = lo - lam_g1;
    double s_lo = stationarity(spec, lo);
    if (!(s_lo > 0.0)) {
        std::ostringstream msg;
        msg << "stationary point not bracketed: s(lambda)=" << s_lo
            << " already nonpositive at lambda=" << lo
            << " (degenerate spectrum edge, e.g. c = 1)";
        throw ConvergenceError(msg.str());
    }
    double hi = lo, s_hi = s_lo;
    while (s_hi > 0.0) {
        width *= 2.0;
        hi = lo + width;
        if (hi > 1e3) {
            std::ostringstream msg;
            msg << "stationary point not bracketed below lambda=1e3; diagnostic table:\n";
            msg << std::setprecision(8) << "lambda G mu s\n";
            for (double lam = lam_g1 + width / 512.0; lam < 1e3; lam *= 2.0)
                msg << lam << " " << g_of_lambda(spec, lam) << " "
                    << mu_of_lambda(spec, lam) << " " << stationarity(spec, lam) << "\n";
            throw ConvergenceError(msg.str());
        }
        s_hi = stationarity(spec, hi);
    }
    for (int k = 0; k < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++k) {
        const double mid = 0.5 * (lo + hi);
        (stationarity(spec, mid) > 0.0 ? lo : hi) = mid;
    }

    DispersionResult out;
    out.lambda0 = 0.5 * (lo + hi);
    out.mu0 = mu_of_lambda(spec, out.lambda0);
    out.c0_plus = out.lambda0 / out.mu0;
    out.stationarity_residual = std::abs(stationarity(spec, out.lambda0));
    {
        std::ostringstream notes;
        const double q1_sq = out.lambda0 - growth1;
        const double q2_sq = out.lambda0 - growth2;
        notes << "good patch " << (q1_sq >= 0.0 ? "hyperbolic" : "oscillatory")
              << ", bad patch " << (q2_sq >= 0.0 ? "hyperbolic" : "oscillatory")
              << " at lambda0";
        out.branch_notes = notes.str();
    }
    if (!(g_of_lambda(spec, out.lambda0) >= 1.0))
        throw InternalError("dispersion stationary point left the physical branch");
    if (!(out.stationarity_residual <= 1e-8))
        throw InternalError("dispersion stationarity residual above 1e-8");
    return out;
}

double small_period_speed(const HabitatSpec& spec) {
    return 2.0 * std::sqrt((1.0 - spec.c) * spec.mean_growth());
}

CompetitionModel habitat_model(const HabitatSpec& spec, int n) {
    CompetitionModel m;
    m.L = spec.period();
    m.n = n;
    const PeriodicCoefficient growth =
        PeriodicCoefficient::piecewise({0.0, spec.l1}, {1.0, spec.a});
    m.d1 = PeriodicCoefficient::constant(1.0);
    m.d2 = PeriodicCoefficient::constant(spec.d2);
    m.g1 = PeriodicCoefficient::constant(0.0);
    m.g2 = PeriodicCoefficient::constant(0.0);
    m.b1 = growth;
    m.b2 = growth;
    m.a11 = PeriodicCoefficient::constant(1.0);
    m.a12 = PeriodicCoefficient::constant(spec.c);
    m.a21 = PeriodicCoefficient::constant(1.0);
    m.a22 = PeriodicCoefficient::constant(1.0);
    return m;
}

}  // namespace perspeed
