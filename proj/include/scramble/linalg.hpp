#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace scramble {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Every stochastic routine takes one of these explicitly; nothing draws from
/// a global generator.
using Rng = std::mt19937_64;

/// Raised when a requested Hilbert space exceeds the configured qubit budget.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a result that must be real (or Hermitian, or unitary) is not,
/// beyond numerical noise.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Upper bound on the number of qubits any dense operator may span. Default 14.
int max_qubits();
void set_max_qubits(int n);

/// Throws ResourceLimitError if `dim` exceeds 2^max_qubits().
void check_dimension(Index dim);

/// log2 of a power-of-two dimension; throws std::invalid_argument otherwise.
int qubit_count(Index dim);

double max_abs(const ComplexMatrix& m);
double hermiticity_residual(const ComplexMatrix& h);
double unitarity_residual(const ComplexMatrix& u);

struct Spectrum {
  RealVector eigenvalues;      // ascending
  ComplexMatrix eigenvectors;  // columns, unitary
};

/// (a ⊗ b)[i·rb + k, j·cb + l] = a[i, j]·b[k, l].
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Dense Hermitian eigendecomposition. Rejects inputs that are not Hermitian
/// within 1e-12 (relative to max(1, ‖h‖_max)).
Spectrum hermitian_eig(const ComplexMatrix& h);

/// Same contract as hermitian_eig for a matrix that is block diagonal with
/// respect to the given partition of basis indices. Each sector is
/// diagonalized on its own; entries coupling different sectors must vanish.
Spectrum hermitian_eig_blocks(const ComplexMatrix& h,
                              std::span<const std::vector<Index>> sectors);

/// exp(-iHt) through the spectral decomposition.
ComplexMatrix propagator(const ComplexMatrix& h, double t);
ComplexMatrix propagator(const Spectrum& spectrum, double t);

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
/// diag(R) moved into Q.
ComplexMatrix haar_unitary(Index dim, Rng& rng);

}  // namespace scramble
