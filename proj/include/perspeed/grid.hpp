#pragma once

#include <Eigen/Core>

#include <string>
#include <variant>
#include <vector>

#include "perspeed/errors.hpp"

namespace perspeed {

/// Uniform grid with nodes x_j = j*L/n, j = 0..n-1, on one period [0, L).
struct PeriodicGrid {
    double period_L = 1.0;
    int n_points = 256;

    PeriodicGrid() = default;
    PeriodicGrid(double L, int n) : period_L(L), n_points(n) {
        if (!(L > 0.0)) throw ConfigError("grid.L", "period must be positive");
        if (n < 8) throw ConfigError("grid.n", "need at least 8 nodes per period");
    }

    double spacing() const { return period_L / n_points; }
    double node(int j) const { return (j * period_L) / n_points; }
    Eigen::ArrayXd nodes() const {
        Eigen::ArrayXd x(n_points);
        for (int j = 0; j < n_points; ++j) x[j] = node(j);
        return x;
    }

    friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) {
        return a.period_L == b.period_L && a.n_points == b.n_points;
    }
};

/// One L-periodic scalar coefficient in declarative form. The period is
/// supplied at evaluation time; breakpoints and sample nodes live in [0, L).
class PeriodicCoefficient {
public:
    struct Constant {
        double value = 0.0;
    };
    /// f(x) = a0 + sum_k cos[k]*cos(2*pi*(k+1)*x/L) + sum_k sin[k]*sin(2*pi*(k+1)*x/L)
    struct Fourier {
        double a0 = 0.0;
        std::vector<double> cos_coeffs;
        std::vector<double> sin_coeffs;
    };
    /// Right-open intervals [b_i, b_{i+1}); first breakpoint must be 0.
    struct PiecewiseConstant {
        std::vector<double> breakpoints;
        std::vector<double> values;
    };
    /// Values at uniform nodes j*L/m, linearly interpolated in between.
    struct Samples {
        std::vector<double> values;
    };

    PeriodicCoefficient() : form_(Constant{0.0}) {}
    PeriodicCoefficient(Constant c) : form_(std::move(c)) {}
    PeriodicCoefficient(Fourier f) : form_(std::move(f)) {}
    PeriodicCoefficient(PiecewiseConstant p) : form_(std::move(p)) {}
    PeriodicCoefficient(Samples s) : form_(std::move(s)) {}

    static PeriodicCoefficient constant(double v) { return Constant{v}; }
    static PeriodicCoefficient fourier(double a0, std::vector<double> cosc = {},
                                       std::vector<double> sinc = {}) {
        return Fourier{a0, std::move(cosc), std::move(sinc)};
    }
    static PeriodicCoefficient piecewise(std::vector<double> breaks,
                                         std::vector<double> values) {
        return PiecewiseConstant{std::move(breaks), std::move(values)};
    }
    static PeriodicCoefficient samples(std::vector<double> values) {
        return Samples{std::move(values)};
    }

    /// Throws ConfigError (field paths prefixed with `field`) on malformed data.
    void validate(double L, const std::string& field = "coefficient") const;

    /// Pointwise evaluation of the L-periodic extension. A node exactly on a
    /// piecewise breakpoint takes the right-interval value.
    double eval(double x, double L) const;

    bool is_constant() const { return std::holds_alternative<Constant>(form_); }

    /// x -> f(-x), the habitat mirrored about the origin.
    PeriodicCoefficient mirrored(double L) const;

    const std::variant<Constant, Fourier, PiecewiseConstant, Samples>& form() const {
        return form_;
    }

private:
    std::variant<Constant, Fourier, PiecewiseConstant, Samples> form_;
};

/// Nodal values of a scalar function on one period.
struct GridFunction {
    PeriodicGrid grid;
    Eigen::ArrayXd values;

    GridFunction() = default;
    GridFunction(PeriodicGrid g, Eigen::ArrayXd v);
};

GridFunction sample(const PeriodicCoefficient& coeff, const PeriodicGrid& grid);

/// Node average = periodic trapezoidal approximation of (1/L) * integral over one period.
double periodic_mean(const GridFunction& f);

}  // namespace perspeed
