#include "perspeed/grid.hpp"

#include <cmath>

namespace perspeed {

namespace {

double wrap_to_period(double x, double L) {
    double r = std::fmod(x, L);
    if (r < 0.0) r += L;
    if (r >= L) r = 0.0;  // fmod can round up to L
    return r;
}

}  // namespace

void PeriodicCoefficient::validate(double L, const std::string& field) const {
    if (!(L > 0.0)) throw ConfigError(field, "period must be positive");
    if (const auto* pw = std::get_if<PiecewiseConstant>(&form_)) {
        if (pw->breakpoints.empty())
            throw ConfigError(field + ".breaks", "empty breakpoint list");
        if (pw->breakpoints.size() != pw->values.size())
            throw ConfigError(field + ".values",
                              "need one value per breakpoint interval");
        if (pw->breakpoints.front() != 0.0)
            throw ConfigError(field + ".breaks", "first breakpoint must be 0");
        for (std::size_t i = 0; i < pw->breakpoints.size(); ++i) {
            double b = pw->breakpoints[i];
            if (!(b >= 0.0 && b < L))
                throw ConfigError(field + ".breaks", "breakpoints must lie in [0, L)");
            if (i > 0 && !(b > pw->breakpoints[i - 1]))
                throw ConfigError(field + ".breaks", "breakpoints must be strictly increasing");
        }
        for (double v : pw->values)
            if (!std::isfinite(v)) throw ConfigError(field + ".values", "non-finite value");
    } else if (const auto* sm = std::get_if<Samples>(&form_)) {
        if (sm->values.empty()) throw ConfigError(field + ".values", "empty sample list");
        for (double v : sm->values)
            if (!std::isfinite(v)) throw ConfigError(field + ".values", "non-finite value");
    } else if (const auto* fr = std::get_if<Fourier>(&form_)) {
        if (!std::isfinite(fr->a0)) throw ConfigError(field + ".a0", "non-finite value");
        for (double v : fr->cos_coeffs)
            if (!std::isfinite(v)) throw ConfigError(field + ".cos", "non-finite value");
        for (double v : fr->sin_coeffs)
            if (!std::isfinite(v)) throw ConfigError(field + ".sin", "non-finite value");
    } else {
        if (!std::isfinite(std::get<Constant>(form_).value))
            throw ConfigError(field + ".value", "non-finite value");
    }
}

double PeriodicCoefficient::eval(double x, double L) const {
    if (const auto* c = std::get_if<Constant>(&form_)) return c->value;
    if (const auto* fr = std::get_if<Fourier>(&form_)) {
        const double w = 2.0 * M_PI * x / L;
        double v = fr->a0;
        for (std::size_t k = 0; k < fr->cos_coeffs.size(); ++k)
            v += fr->cos_coeffs[k] * std::cos((k + 1) * w);
        for (std::size_t k = 0; k < fr->sin_coeffs.size(); ++k)
            v += fr->sin_coeffs[k] * std::sin((k + 1) * w);
        return v;
    }
    if (const auto* pw = std::get_if<PiecewiseConstant>(&form_)) {
        const double r = wrap_to_period(x, L);
        // last interval whose breakpoint is <= r; intervals are right-open
        std::size_t idx = pw->breakpoints.size() - 1;
        while (idx > 0 && pw->breakpoints[idx] > r) --idx;
        return pw->values[idx];
    }
    const auto& sm = std::get<Samples>(form_);
    const int m = static_cast<int>(sm.values.size());
    const double r = wrap_to_period(x, L);
    const double s = r * m / L;
    int j = static_cast<int>(std::floor(s));
    if (j >= m) j = m - 1;
    const double t = s - j;
    const double v0 = sm.values[j];
    const double v1 = sm.values[(j + 1) % m];
    return v0 + t * (v1 - v0);
}

PeriodicCoefficient PeriodicCoefficient::mirrored(double L) const {
    if (const auto* c = std::get_if<Constant>(&form_)) return Constant{c->value};
    if (const auto* fr = std::get_if<Fourier>(&form_)) {
        Fourier out = *fr;
        for (double& s : out.sin_coeffs) s = -s;
        return out;
    }
    if (const auto* pw = std::get_if<PiecewiseConstant>(&form_)) {
        // f(-x): interval [b_i, b_{i+1}) maps to (L-b_{i+1}, L-b_i]. Right-open
        // representation keeps interval values exact; breakpoint nodes pick up
        // the adjacent interval's value instead of the mirrored point value.
        const auto& b = pw->breakpoints;
        const auto& v = pw->values;
        const std::size_t m = b.size();
        std::vector<double> nb, nv;
        nb.push_back(0.0);
        nv.push_back(v[m - 1]);
        for (std::size_t i = m - 1; i >= 1; --i) {
            nb.push_back(L - b[i]);
            nv.push_back(v[i - 1]);
        }
        return PiecewiseConstant{std::move(nb), std::move(nv)};
    }
    const auto& sm = std::get<Samples>(form_);
    const int m = static_cast<int>(sm.values.size());
    std::vector<double> out(m);
    out[0] = sm.values[0];
    for (int j = 1; j < m; ++j) out[j] = sm.values[m - j];
    return Samples{std::move(out)};
}

GridFunction::GridFunction(PeriodicGrid g, Eigen::ArrayXd v)
    : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_points)
        throw ConfigError("grid_function.values", "length must equal grid.n_points");
    if (!values.allFinite())
        throw ConfigError("grid_function.values", "non-finite value");
}

GridFunction sample(const PeriodicCoefficient& coeff, const PeriodicGrid& grid) {
    coeff.validate(grid.period_L);
    Eigen::ArrayXd v(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j)
        v[j] = coeff.eval(grid.node(j), grid.period_L);
    return GridFunction(grid, std::move(v));
}

double periodic_mean(const GridFunction& f) { return f.values.mean(); }

}  // namespace perspeed
