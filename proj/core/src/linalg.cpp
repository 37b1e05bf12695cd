#include "resv/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace resv {

SpectralDecomposition::SpectralDecomposition(const Mat& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw std::invalid_argument("reservoir matrix must be square and non-empty");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("reservoir matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
    lambda_ = es.eigenvalues();
    q_ = es.eigenvectors();
    if (!(lambda_[0] > 0.0)) throw std::invalid_argument("reservoir matrix is not positive definite");
}

Mat SpectralDecomposition::exp_neg(double tau) const {
    const Vec d = (-tau * lambda_).array().exp();
    return q_ * d.asDiagonal() * q_.transpose();
}

Vec SpectralDecomposition::exp_neg_apply(double tau, const Vec& v) const {
    const Vec d = (-tau * lambda_).array().exp();
    return q_ * (d.asDiagonal() * (q_.transpose() * v));
}

Mat SpectralDecomposition::reconstruct() const {
    return q_ * lambda_.asDiagonal() * q_.transpose();
}

Mat solve_lyapunov(const Mat& a, const Mat& r) {
    const auto n = a.rows();
    if (a.cols() != n || r.rows() != n || r.cols() != n)
        throw std::invalid_argument("lyapunov operands must be square and conformant");
    Eigen::ComplexSchur<CMat> schur(a.cast<Complex>());
    const CMat& t = schur.matrixT();
    const CMat& u = schur.matrixU();
    // A = U T U^H, so U^H (A X + X A^H) U = T Y + Y T^H with Y = U^H X U.
    const CMat rt = u.adjoint() * r.cast<Complex>() * u;
    CMat y = CMat::Zero(n, n);
    for (Eigen::Index j = n - 1; j >= 0; --j) {
        CVec rhs = rt.col(j);
        for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
        CMat shifted = t;
        shifted.diagonal().array() += std::conj(t(j, j));
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(shifted(i, i)) == 0.0)
                throw std::runtime_error("lyapunov equation is singular");
        }
        y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    const Mat x = (u * y * u.adjoint()).real();
    if (r.isApprox(r.transpose(), 0.0)) return 0.5 * (x + x.transpose());
    return x;
}

double spectral_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

CVec sorted_eigenvalues(const Mat& m) {
    Eigen::EigenSolver<Mat> es(m, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    const CVec ev = es.eigenvalues();
    std::vector<Complex> v(ev.data(), ev.data() + ev.size());
    std::sort(v.begin(), v.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return Eigen::Map<CVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace resv
