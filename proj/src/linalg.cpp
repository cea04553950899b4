#include "scramble/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <string>

namespace scramble {

namespace {

std::atomic<int> g_max_qubits{14};

constexpr double kHermitianTolerance = 1e-12;

void require_hermitian(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("hermitian_eig: matrix is not square");
  }
  const double scale = std::max(1.0, max_abs(h));
  const double residual = hermiticity_residual(h);
  if (residual > kHermitianTolerance * scale) {
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian (residual " +
                                std::to_string(residual) + ")");
  }
}

}  // namespace

int max_qubits() { return g_max_qubits.load(std::memory_order_relaxed); }

void set_max_qubits(int n) {
  if (n < 1 || n > 30) {
    throw std::invalid_argument("set_max_qubits: expected 1..30");
  }
  g_max_qubits.store(n, std::memory_order_relaxed);
}

void check_dimension(Index dim) {
  const Index limit = Index{1} << max_qubits();
  if (dim > limit) {
    throw ResourceLimitError("dimension " + std::to_string(dim) + " exceeds the " +
                             std::to_string(max_qubits()) + "-qubit limit");
  }
}

int qubit_count(Index dim) {
  if (dim < 1 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
  }
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  return n;
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_residual(const ComplexMatrix& h) { return max_abs(h - h.adjoint()); }

double unitarity_residual(const ComplexMatrix& u) {
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.cols(), u.cols()));
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  check_dimension(std::max(rows, cols));
  ComplexMatrix out(rows, cols);
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Spectrum hermitian_eig(const ComplexMatrix& h) {
  require_hermitian(h);
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Spectrum hermitian_eig_blocks(const ComplexMatrix& h,
                              std::span<const std::vector<Index>> sectors) {
  require_hermitian(h);
  const Index dim = h.rows();

  std::vector<int> owner(static_cast<std::size_t>(dim), -1);
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    for (Index i : sectors[s]) {
      if (i < 0 || i >= dim || owner[static_cast<std::size_t>(i)] != -1) {
        throw std::invalid_argument("hermitian_eig_blocks: sectors must partition the basis");
      }
      owner[static_cast<std::size_t>(i)] = static_cast<int>(s);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
    throw std::invalid_argument("hermitian_eig_blocks: sectors must partition the basis");
  }
  const double scale = std::max(1.0, max_abs(h));
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < dim; ++i) {
      if (owner[static_cast<std::size_t>(i)] != owner[static_cast<std::size_t>(j)] &&
          std::abs(h(i, j)) > kHermitianTolerance * scale) {
        throw std::invalid_argument("hermitian_eig_blocks: matrix couples different sectors");
      }
    }
  }

  RealVector values(dim);
  ComplexMatrix vectors = ComplexMatrix::Zero(dim, dim);
  Index column = 0;
  for (const auto& sector : sectors) {
    const auto n = static_cast<Index>(sector.size());
    if (n == 0) continue;
    ComplexMatrix block(n, n);
    for (Index b = 0; b < n; ++b) {
      for (Index a = 0; a < n; ++a) {
        block(a, b) = 0.5 * (h(sector[a], sector[b]) + std::conj(h(sector[b], sector[a])));
      }
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(block);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("hermitian_eig_blocks: eigensolver did not converge");
    }
    for (Index k = 0; k < n; ++k) {
      values(column + k) = solver.eigenvalues()(k);
      for (Index a = 0; a < n; ++a) {
        vectors(sector[a], column + k) = solver.eigenvectors()(a, k);
      }
    }
    column += n;
  }

  std::vector<Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values(a) < values(b); });
  Spectrum out{RealVector(dim), ComplexMatrix(dim, dim)};
  for (Index k = 0; k < dim; ++k) {
    out.eigenvalues(k) = values(order[k]);
    out.eigenvectors.col(k) = vectors.col(order[k]);
  }
  return out;
}

ComplexMatrix propagator(const Spectrum& spectrum, double t) {
  const auto& v = spectrum.eigenvectors;
  ComplexVector phases(spectrum.eigenvalues.size());
  for (Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::polar(1.0, -spectrum.eigenvalues(k) * t);
  }
  return (v * phases.asDiagonal()) * v.adjoint();
}

ComplexMatrix propagator(const ComplexMatrix& h, double t) {
  return propagator(hermitian_eig(h), t);
}

ComplexMatrix haar_unitary(Index dim, Rng& rng) {
  if (dim < 2) {
    throw std::invalid_argument("haar_unitary: dim must be at least 2");
  }
  check_dimension(dim);
  std::normal_distribution<double> normal(0.0, M_SQRT1_2);
  ComplexMatrix z(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = {re, im};
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (Index k = 0; k < dim; ++k) {
    const Complex d = r(k, k);
    const double mag = std::abs(d);
    q.col(k) *= mag > 0.0 ? d / mag : Complex{1.0, 0.0};
  }
  return q;
}

}  // namespace scramble
