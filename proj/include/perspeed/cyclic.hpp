#pragma once

#include <Eigen/Core>

namespace perspeed {

/// Cyclic tridiagonal operator stored in conservation form. Row j acts as
///
///   (A x)_j = lower_j (x_{j-1} - x_j) + upper_j (x_{j+1} - x_j) + pot_j x_j
///
/// with indices mod n, i.e. the assembled diagonal is pot - lower - upper.
/// The difference form makes apply() annihilate constants exactly in
/// floating point, which the eigenvalue contracts rely on.
struct CyclicTridiagonal {
    Eigen::ArrayXd lower;  // coefficient of x_{j-1}
    Eigen::ArrayXd upper;  // coefficient of x_{j+1}
    Eigen::ArrayXd pot;    // zeroth-order term

    Eigen::Index size() const { return pot.size(); }

    Eigen::ArrayXd diagonal() const { return pot - lower - upper; }

    Eigen::ArrayXd apply(const Eigen::ArrayXd& x) const;

    /// shift*I - A, again in conservation form.
    CyclicTridiagonal shifted_identity_minus(double shift) const;

    /// Solve A x = rhs by Thomas elimination with a Sherman-Morrison
    /// correction for the two wraparound entries. Throws on zero pivot.
    Eigen::ArrayXd solve(const Eigen::ArrayXd& rhs) const;

    Eigen::MatrixXd to_dense() const;
};

/// Plain tridiagonal operator for the truncated-domain solver; rows 0 and
/// n-1 have no wraparound (off coefficients folded by the caller).
struct Tridiagonal {
    Eigen::ArrayXd lower;
    Eigen::ArrayXd upper;
    Eigen::ArrayXd pot;

    Eigen::Index size() const { return pot.size(); }
    Eigen::ArrayXd apply(const Eigen::ArrayXd& x) const;
    Eigen::ArrayXd solve(const Eigen::ArrayXd& rhs) const;
};

}  // namespace perspeed
