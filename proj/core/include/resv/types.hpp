#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace resv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

} // namespace resv
