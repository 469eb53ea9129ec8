#include <algorithm>
#include "perspeed/speeds.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "perspeed/errors.hpp"

namespace perspeed {

namespace {

constexpr double kMuCap = 1e3;
constexpr double kMuFloor = 1e-8;

struct Evaluator {
    const std::function<double(double)>& lambda_fn;
    int count = 0;
    double operator()(double mu) {
        ++count;
        return lambda_fn(mu) / mu;
    }
};

}  // namespace

EigenProblem assemble_family(const CooperativeModel& coop, LambdaFamily family,
                             double mu) {
    const PeriodicGrid& grid = coop.grid;
    switch (family) {
        case LambdaFamily::Lambda1: {
            GridFunction b1(grid, coop.linear1.values + coop.a12.values * coop.u2_star.values);
            return EigenProblem(coop.d1, coop.g1, std::move(b1), mu);
        }
        case LambdaFamily::Lambda2: {
            GridFunction pot(grid, coop.linear2.values + coop.a22.values * coop.u2_star.values);
            return EigenProblem(coop.d2, coop.g2, std::move(pot), mu);
        }
        case LambdaFamily::Lambda0:
            return EigenProblem(coop.d1, coop.g1, coop.linear1, mu);
        case LambdaFamily::LambdaBar:
            return EigenProblem(coop.d2, coop.g2, coop.linear2, mu);
    }
    throw InternalError("unknown lambda family");
}

double lambda_of_mu(const CooperativeModel& coop, LambdaFamily family, double mu) {
    return principal_eigenpair(assemble_family(coop, family, mu)).lambda;
}

SpeedResult min_speed(const std::function<double(double)>& lambda_fn, double mu_hint) {
    const double lambda_at_zero = lambda_fn(0.0);
    if (!(lambda_at_zero > 0.0)) {
        std::ostringstream msg;
        msg << "no positive speed: principal eigenvalue at mu=0 nonpositive ("
            << lambda_at_zero << ")";
        throw HypothesisError(msg.str());
    }

    Evaluator f{lambda_fn};
    double b = std::max(mu_hint, 2.0 * kMuFloor);
    double fb = f(b);
    double a = b / 2, c = 2 * b;
    double fa = f(a), fc = f(c);

    // Slide the triple until the middle point is the smallest. The objective
    // blows up like lambda(0)/mu as mu -> 0, so the downward slide terminates.
    while (fa < fb) {
        c = b; fc = fb;
        b = a; fb = fa;
        a = b / 2;
        if (a < kMuFloor)
            throw ConvergenceError("speed bracket collapsed toward mu = 0");
        fa = f(a);
    }
    while (fc < fb) {
        a = b; fa = fb;
        b = c; fb = fc;
        c = 2 * b;
        if (c > kMuCap) {
            std::ostringstream msg;
            msg << "objective monotone decreasing in bracket: unconverged infimum"
                << " estimate c~" << fb << " at mu=" << b << " (cap mu=" << kMuCap << ")";
            throw ConvergenceError(msg.str());
        }
        fc = f(c);
    }

    // Golden-section on [a, c] keeping the evaluated midpoint.
    const double inv_phi = 0.6180339887498949;
    double x1 = c - inv_phi * (c - a);
    double x2 = a + inv_phi * (c - a);
    double f1 = f(x1), f2 = f(x2);
    while (c - a > 1e-10 * b) {
        if (f1 <= f2) {
            c = x2; x2 = x1; f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = f(x2);
        }
        b = 0.5 * (a + c);
    }

    // Newton polish on the stationarity of lambda/mu. The golden-section
    // argmin is noise-limited to ~sqrt(eps) through the flat objective; two
    // derivative steps at a noise-balanced FD width recover ~1e-10.
    double mu = (f1 <= f2) ? x1 : x2;
    for (int k = 0; k < 2; ++k) {
        const double hstep = 1e-5 * mu;
        const double fm = f(mu - hstep), f0 = f(mu), fp = f(mu + hstep);
        const double d1 = (fp - fm) / (2.0 * hstep);
        const double d2 = (fp - 2.0 * f0 + fm) / (hstep * hstep);
        if (!(d2 > 0.0)) break;
        const double next = mu - d1 / d2;
        if (!(next > 0.5 * mu && next < 2.0 * mu)) break;
        mu = next;
    }

    SpeedResult out;
    out.mu0 = mu;
    out.lambda0 = lambda_fn(out.mu0);
    out.c = out.lambda0 / out.mu0;
    out.bracket = {std::min(a, mu), std::max(c, mu)};
    out.evaluations = f.count + 1;

    // local-minimality certificate at the final bracket width
    const double delta = c - a;
    const double left = lambda_fn(out.mu0 - delta) / (out.mu0 - delta);
    const double right = lambda_fn(out.mu0 + delta) / (out.mu0 + delta);
    out.evaluations += 2;
    if (left < out.c - 1e-8 || right < out.c - 1e-8)
        throw InternalError("speed minimizer failed the local-minimality certificate");
    return out;
}

SpeedResult min_speed(const CooperativeModel& coop, LambdaFamily family, double mu_hint) {
    return min_speed([&](double mu) { return lambda_of_mu(coop, family, mu); }, mu_hint);
}

H4Report check_h4(const CooperativeModel& coop) {
    H4Report rep;
    rep.c1_plus = min_speed(coop, LambdaFamily::Lambda1);
    // leftward speed of the species-2 scalar equation via the reflection mu -> -mu
    GridFunction b2(coop.grid,
                    coop.linear2.values + 2.0 * coop.a22.values * coop.u2_star.values);
    rep.c2_minus = min_speed([&](double mu) {
        return principal_eigenpair(EigenProblem(coop.d2, coop.g2, b2, -mu)).lambda;
    });
    rep.holds = rep.c1_plus.c + rep.c2_minus.c > 0.0;
    return rep;
}

H5Report check_h5(const CooperativeModel& coop) {
    H5Report rep;
    rep.lambda2_at_zero = lambda_of_mu(coop, LambdaFamily::Lambda2, 0.0);
    if (std::abs(rep.lambda2_at_zero) > 5e-7) {
        std::ostringstream msg;
        msg << "steady-state inconsistency: lambda2(0)=" << rep.lambda2_at_zero
            << " (expected 0 to 5e-7)";
        throw ConvergenceError(msg.str());
    }
    // one-sided Richardson through the origin at mu = 1e-3 and 5e-4
    const double s1 = lambda_of_mu(coop, LambdaFamily::Lambda2, 1e-3) / 1e-3;
    const double s2 = lambda_of_mu(coop, LambdaFamily::Lambda2, 5e-4) / 5e-4;
    rep.slope_at_zero = 2.0 * s2 - s1;
    rep.c1_plus = min_speed(coop, LambdaFamily::Lambda1).c;
    rep.holds = rep.slope_at_zero <= rep.c1_plus + 1e-6;
    return rep;
}

DeterminacyCertificate determinacy_certificate(const CooperativeModel& coop) {
    const SpeedResult sp = min_speed(coop, LambdaFamily::Lambda0);

    DeterminacyCertificate cert;
    cert.c0_plus = sp.c;
    cert.mu0 = sp.mu0;

    const EigenPair pair0 = principal_eigenpair(assemble_family(coop, LambdaFamily::Lambda0, sp.mu0));
    cert.lambda0_mu0 = pair0.lambda;
    cert.phi1_star = pair0.psi;

    const EigenProblem bar = assemble_family(coop, LambdaFamily::LambdaBar, sp.mu0);
    cert.lambda_bar_mu0 = principal_eigenpair(bar).lambda;
    cert.d1_holds = cert.lambda0_mu0 > cert.lambda_bar_mu0;

    cert.ratio_min = std::numeric_limits<double>::quiet_NaN();
    if (cert.d1_holds) {
        const GridFunction rhs(coop.grid, coop.source.values * cert.phi1_star.values);
        cert.phi2_star =
            resolvent_solve(bar, cert.lambda0_mu0, rhs, cert.lambda_bar_mu0);
        const Eigen::ArrayXd bound =
            (coop.a12.values / coop.a11.values).max(coop.a22.values / coop.a21.values);
        cert.ratio_min =
            (cert.phi1_star.values / cert.phi2_star->values - bound).minCoeff();
        cert.d2_holds = cert.ratio_min >= -1e-10;
    }
    return cert;
}

SpeedResult lower_bound_report(const CooperativeModel& coop) {
    return min_speed(coop, LambdaFamily::Lambda0);
}

}  // namespace perspeed
