#pragma once

#include <complex>

#include <Eigen/Dense>

namespace mmtail {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline double norm_inf(const RealMatrix& a) {
    return a.rows() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double norm_inf(const ComplexMatrix& a) {
    return a.rows() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace mmtail
