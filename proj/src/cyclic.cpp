#include "perspeed/cyclic.hpp"

#include <cmath>
#include <stdexcept>

namespace perspeed {

namespace {

// Thomas elimination on (lower, diag, upper); lower[0] and upper[n-1] unused.
Eigen::ArrayXd thomas(const Eigen::ArrayXd& lower, const Eigen::ArrayXd& diag,
                      const Eigen::ArrayXd& upper, const Eigen::ArrayXd& rhs) {
    const Eigen::Index n = diag.size();
    Eigen::ArrayXd c(n), x(n);
    double piv = diag[0];
    if (piv == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot at row 0");
    c[0] = upper[0] / piv;
    x[0] = rhs[0] / piv;
    for (Eigen::Index i = 1; i < n; ++i) {
        piv = diag[i] - lower[i] * c[i - 1];
        if (piv == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
        c[i] = upper[i] / piv;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / piv;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
    return x;
}

}  // namespace

Eigen::ArrayXd CyclicTridiagonal::apply(const Eigen::ArrayXd& x) const {
    const Eigen::Index n = size();
    Eigen::ArrayXd y(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index jm = (j == 0) ? n - 1 : j - 1;
        const Eigen::Index jp = (j == n - 1) ? 0 : j + 1;
        y[j] = lower[j] * (x[jm] - x[j]) + upper[j] * (x[jp] - x[j]) + pot[j] * x[j];
    }
    return y;
}

CyclicTridiagonal CyclicTridiagonal::shifted_identity_minus(double shift) const {
    return CyclicTridiagonal{-lower, -upper, shift - pot};
}

Eigen::ArrayXd CyclicTridiagonal::solve(const Eigen::ArrayXd& rhs) const {
    const Eigen::Index n = size();
    if (n < 3) throw std::runtime_error("cyclic solve: need n >= 3");
    const Eigen::ArrayXd diag = diagonal();

    // A = T + u v^T with u = (gamma, 0, .., 0, upper[n-1])^T,
    // v = (1, 0, .., 0, lower[0]/gamma)^T; T is plain tridiagonal.
    const double gamma = (diag[0] != 0.0) ? -diag[0] : 1.0;
    Eigen::ArrayXd tdiag = diag;
    tdiag[0] -= gamma;
    tdiag[n - 1] -= upper[n - 1] * lower[0] / gamma;

    Eigen::ArrayXd u = Eigen::ArrayXd::Zero(n);
    u[0] = gamma;
    u[n - 1] = upper[n - 1];

    const Eigen::ArrayXd y = thomas(lower, tdiag, upper, rhs);
    const Eigen::ArrayXd z = thomas(lower, tdiag, upper, u);

    const double vy = y[0] + lower[0] / gamma * y[n - 1];
    const double vz = z[0] + lower[0] / gamma * z[n - 1];
    const double denom = 1.0 + vz;
    if (denom == 0.0) throw std::runtime_error("cyclic solve: singular correction");
    return y - (vy / denom) * z;
}

Eigen::MatrixXd CyclicTridiagonal::to_dense() const {
    const Eigen::Index n = size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    const Eigen::ArrayXd diag = diagonal();
    for (Eigen::Index j = 0; j < n; ++j) {
        A(j, j) = diag[j];
        A(j, (j + n - 1) % n) += lower[j];
        A(j, (j + 1) % n) += upper[j];
    }
    return A;
}

Eigen::ArrayXd Tridiagonal::apply(const Eigen::ArrayXd& x) const {
    const Eigen::Index n = size();
    Eigen::ArrayXd y(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double v = pot[j] * x[j] - (lower[j] + upper[j]) * x[j];
        if (j > 0) v += lower[j] * x[j - 1];
        if (j < n - 1) v += upper[j] * x[j + 1];
        y[j] = v;
    }
    return y;
}

Eigen::ArrayXd Tridiagonal::solve(const Eigen::ArrayXd& rhs) const {
    return thomas(lower, pot - lower - upper, upper, rhs);
}

}  // namespace perspeed
