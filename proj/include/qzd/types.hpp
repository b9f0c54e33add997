#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qzd {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;
using DenseOperator = Eigen::MatrixXcd;

// Sparse complex operator on a StateSpace. Hamiltonians are Hermitian, jump
// operators are general.
using OperatorMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent scenario description.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Integration left its accuracy envelope (norm or trace drift).
class StepSizeError : public Error {
 public:
  using Error::Error;
};

// Density matrix acquired a negative eigenvalue below tolerance.
class PositivityError : public Error {
 public:
  using Error::Error;
};

// Input operator expected to be Hermitian is not.
class HermiticityError : public Error {
 public:
  using Error::Error;
};

}  // namespace qzd
