#pragma once

#include "resv/types.hpp"

namespace resv {

/// A = Q diag(lambda) Q^T for a symmetric positive-definite A.
///
/// Built once per reservoir; afterwards exp(-A tau) v and shifted solves
/// cost O(N^2).
class SpectralDecomposition {
public:
    /// Throws std::invalid_argument if A is not symmetric (1e-12 relative)
    /// or not positive definite.
    explicit SpectralDecomposition(const Mat& a);

    [[nodiscard]] const Mat& eigenvectors() const noexcept { return q_; }
    [[nodiscard]] const Vec& eigenvalues() const noexcept { return lambda_; }  // ascending
    [[nodiscard]] double sigma_min() const { return lambda_[0]; }
    [[nodiscard]] double sigma_max() const { return lambda_[lambda_.size() - 1]; }

    [[nodiscard]] Mat exp_neg(double tau) const;           // exp(-A tau)
    [[nodiscard]] Vec exp_neg_apply(double tau, const Vec& v) const;
    [[nodiscard]] Mat reconstruct() const;

private:
    Mat q_;
    Vec lambda_;
};

/// Solves A X + X A^T = R for general square A by a complex Schur
/// (Bartels-Stewart) reduction. Requires lambda_i(A) + conj(lambda_j(A)) != 0.
[[nodiscard]] Mat solve_lyapunov(const Mat& a, const Mat& r);

/// Largest singular value.
[[nodiscard]] double spectral_norm(const Mat& m);

/// Eigenvalues of a real square matrix sorted by (real, imag).
[[nodiscard]] CVec sorted_eigenvalues(const Mat& m);

} // namespace resv
