#include "scramble/quantum_state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace scramble {

namespace {

constexpr double kAxisTolerance = 1e-12;
constexpr double kStateTolerance = 1e-10;
constexpr double kPositivityTolerance = 1e-8;
constexpr double kProjectorTolerance = 1e-10;
constexpr double kImaginaryTolerance = 1e-8;
constexpr double kDegenerateBranch = 1e-14;

void require_qubit_op(const ComplexMatrix& op, const char* where) {
  if (op.rows() != 2 || op.cols() != 2) {
    throw std::invalid_argument(std::string(where) + ": expected a 2x2 operator");
  }
}

void require_target(int target, int n, const char* where) {
  if (n < 1 || target < 0 || target >= n) {
    throw std::out_of_range(std::string(where) + ": qubit index " + std::to_string(target) +
                            " out of range for " + std::to_string(n) + " qubits");
  }
}

void require_projector(const ComplexMatrix& p, Index dim) {
  if (p.rows() != dim || p.cols() != dim) {
    throw std::invalid_argument("projector dimension does not match the state");
  }
  if (hermiticity_residual(p) > kProjectorTolerance ||
      max_abs(p * p - p) > kProjectorTolerance) {
    throw std::invalid_argument("operator is not an orthogonal projector");
  }
}

void check_hermitian_unit_trace(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("density matrix must be square");
  }
  const double herm = hermiticity_residual(m);
  if (herm > kStateTolerance) {
    throw std::invalid_argument("density matrix is not Hermitian (residual " +
                                std::to_string(herm) + ")");
  }
  const Complex tr = m.trace();
  if (std::abs(tr.real() - 1.0) > kStateTolerance || std::abs(tr.imag()) > kStateTolerance) {
    throw std::invalid_argument("density matrix trace " + std::to_string(tr.real()) + " != 1");
  }
}

// Full-space index for each assignment of the listed qubits, most significant
// listed qubit first.
std::vector<Index> scatter_indices(std::span<const int> qubits, int n) {
  const std::size_t count = std::size_t{1} << qubits.size();
  std::vector<Index> out(count, 0);
  for (std::size_t a = 0; a < count; ++a) {
    Index full = 0;
    for (std::size_t q = 0; q < qubits.size(); ++q) {
      const bool bit = (a >> (qubits.size() - 1 - q)) & 1U;
      if (bit) full |= Index{1} << (n - 1 - qubits[q]);
    }
    out[a] = full;
  }
  return out;
}

struct KeepSplit {
  std::vector<int> kept;
  std::vector<int> traced;
};

KeepSplit split_qubits(std::span<const int> keep, int n) {
  if (keep.empty()) {
    throw std::invalid_argument("partial_trace: keep set is empty");
  }
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw std::invalid_argument("partial_trace: duplicate qubit in keep set");
  }
  for (int q : kept) require_target(q, n, "partial_trace");
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);
  }
  return {std::move(kept), std::move(traced)};
}

}  // namespace

BlochAxis::BlochAxis(double x, double y, double z) : v_{x, y, z} {
  const double norm2 = x * x + y * y + z * z;
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kAxisTolerance) {
    throw std::invalid_argument("Bloch axis is not normalized (|v|^2 = " + std::to_string(norm2) +
                                ")");
  }
}

BlochAxis BlochAxis::normalized(double x, double y, double z) {
  const double norm = std::sqrt(x * x + y * y + z * z);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite Bloch vector");
  }
  return {x / norm, y / norm, z / norm};
}

BlochAxis BlochAxis::random(Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double z = 2.0 * uniform(rng) - 1.0;
  const double phi = 2.0 * std::numbers::pi * uniform(rng);
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return normalized(rho * std::cos(phi), rho * std::sin(phi), z);
}

double BlochAxis::dot(const BlochAxis& other) const {
  return v_[0] * other.v_[0] + v_[1] * other.v_[1] + v_[2] * other.v_[2];
}

PureState::PureState(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  n_qubits_ = qubit_count(amplitudes_.size());
  if (std::abs(amplitudes_.norm() - 1.0) > kStateTolerance) {
    throw std::invalid_argument("pure state is not normalized");
  }
}

PureState PureState::along(const BlochAxis& axis) {
  ComplexVector psi(2);
  if (axis.z() > -1.0 + 1e-15) {
    const double scale = 1.0 / std::sqrt(2.0 * (1.0 + axis.z()));
    psi << Complex{1.0 + axis.z(), 0.0} * scale, Complex{axis.x(), axis.y()} * scale;
  } else {
    psi << 0.0, 1.0;
  }
  return PureState(psi.normalized());
}

PureState PureState::product(std::span<const BlochAxis> axes) {
  if (axes.empty()) {
    throw std::invalid_argument("product state needs at least one qubit");
  }
  ComplexMatrix psi = along(axes[0]).amplitudes();
  for (std::size_t q = 1; q < axes.size(); ++q) {
    psi = kron(psi, along(axes[q]).amplitudes());
  }
  return PureState(psi.col(0));
}

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix m) {
  DensityMatrix out = from_channel_output(std::move(m));
  const double min_eig = out.min_eigenvalue();
  if (min_eig < -kPositivityTolerance) {
    throw std::invalid_argument("density matrix has negative eigenvalue " +
                                std::to_string(min_eig));
  }
  return out;
}

DensityMatrix DensityMatrix::from_channel_output(ComplexMatrix m) {
  check_hermitian_unit_trace(m);
  const int n = qubit_count(m.rows());
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(n, std::move(m));
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  const auto& a = psi.amplitudes();
  return DensityMatrix(psi.n_qubits(), a * a.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("maximally_mixed: need at least one qubit");
  if (n_qubits > max_qubits()) {
    throw ResourceLimitError("maximally_mixed: " + std::to_string(n_qubits) +
                             " qubits exceeds the configured limit");
  }
  const Index dim = Index{1} << n_qubits;
  return DensityMatrix(n_qubits,
                       ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

ComplexMatrix pauli_along(const BlochAxis& axis) {
  ComplexMatrix s(2, 2);
  s << axis.z(), Complex{axis.x(), -axis.y()}, Complex{axis.x(), axis.y()}, -axis.z();
  return s;
}

ComplexMatrix projector_along(const BlochAxis& axis, int outcome) {
  if (outcome != 1 && outcome != -1) {
    throw std::invalid_argument("projector_along: outcome must be +1 or -1");
  }
  ComplexMatrix plus(2, 2);
  plus << 0.5 * (1.0 + axis.z()), 0.5 * Complex{axis.x(), -axis.y()},
      0.5 * Complex{axis.x(), axis.y()}, 0.5 * (1.0 - axis.z());
  if (outcome == 1) return plus;
  ComplexMatrix minus(2, 2);
  minus << 1.0 - plus(0, 0).real(), -plus(0, 1), -plus(1, 0), 1.0 - plus(1, 1).real();
  return minus;
}

ComplexMatrix embed(const ComplexMatrix& op, int target, int n) {
  require_qubit_op(op, "embed");
  require_target(target, n, "embed");
  const Index left = Index{1} << target;
  const Index right = Index{1} << (n - 1 - target);
  check_dimension(left * 2 * right);
  return kron(kron(ComplexMatrix::Identity(left, left), op),
              ComplexMatrix::Identity(right, right));
}

void apply_local_left(const ComplexMatrix& op, int target, int n, ComplexMatrix& m) {
  require_qubit_op(op, "apply_local_left");
  require_target(target, n, "apply_local_left");
  const Index dim = Index{1} << n;
  if (m.rows() != dim) throw std::invalid_argument("apply_local_left: row count mismatch");
  const Index stride = Index{1} << (n - 1 - target);
  const Complex a = op(0, 0), b = op(0, 1), c = op(1, 0), d = op(1, 1);
  for (Index col = 0; col < m.cols(); ++col) {
    Complex* v = m.col(col).data();
    for (Index base = 0; base < dim; base += 2 * stride) {
      for (Index i = base; i < base + stride; ++i) {
        const Complex x0 = v[i];
        const Complex x1 = v[i + stride];
        v[i] = a * x0 + b * x1;
        v[i + stride] = c * x0 + d * x1;
      }
    }
  }
}

void apply_local_right(const ComplexMatrix& op, int target, int n, ComplexMatrix& m) {
  require_qubit_op(op, "apply_local_right");
  require_target(target, n, "apply_local_right");
  const Index dim = Index{1} << n;
  if (m.cols() != dim) throw std::invalid_argument("apply_local_right: column count mismatch");
  const Index stride = Index{1} << (n - 1 - target);
  const Complex a = op(0, 0), b = op(0, 1), c = op(1, 0), d = op(1, 1);
  for (Index base = 0; base < dim; base += 2 * stride) {
    for (Index j = base; j < base + stride; ++j) {
      ComplexVector c0 = m.col(j);
      ComplexVector c1 = m.col(j + stride);
      m.col(j) = a * c0 + c * c1;
      m.col(j + stride) = b * c0 + d * c1;
    }
  }
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.n_qubits();
  const auto [kept, traced] = split_qubits(keep, n);
  const auto kept_idx = scatter_indices(kept, n);
  const auto traced_idx = scatter_indices(traced, n);
  const auto k = static_cast<Index>(kept_idx.size());
  const auto& m = rho.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(k, k);
  for (Index b = 0; b < k; ++b) {
    for (Index a = 0; a < k; ++a) {
      Complex sum = 0.0;
      for (Index t : traced_idx) sum += m(kept_idx[a] | t, kept_idx[b] | t);
      out(a, b) = sum;
    }
  }
  return DensityMatrix::from_channel_output(std::move(out));
}

ComplexMatrix partial_trace_factor(const ComplexMatrix& w, std::span<const int> keep) {
  const int n = qubit_count(w.rows());
  const auto [kept, traced] = split_qubits(keep, n);
  const auto kept_idx = scatter_indices(kept, n);
  const auto traced_idx = scatter_indices(traced, n);
  const auto k = static_cast<Index>(kept_idx.size());
  ComplexMatrix out = ComplexMatrix::Zero(k, k);
  std::vector<Index> rows(kept_idx.size());
  for (Index t : traced_idx) {
    for (std::size_t a = 0; a < kept_idx.size(); ++a) rows[a] = kept_idx[a] | t;
    const ComplexMatrix g = w(rows, Eigen::all);
    out.noalias() += g * g.adjoint();
  }
  return out;
}

DensityMatrix measure_nonselective(const DensityMatrix& rho, const ComplexMatrix& p) {
  require_projector(p, rho.dim());
  const ComplexMatrix q = ComplexMatrix::Identity(p.rows(), p.cols()) - p;
  const auto& m = rho.matrix();
  return DensityMatrix::from_channel_output(p * m * p + q * m * q);
}

SelectiveOutcome measure_selective(const DensityMatrix& rho, const ComplexMatrix& p) {
  require_projector(p, rho.dim());
  ComplexMatrix branch = p * rho.matrix() * p;
  const double prob = branch.trace().real();
  if (prob < kDegenerateBranch) {
    throw DegenerateBranchError("selective measurement on a zero-probability outcome");
  }
  return {std::min(prob, 1.0), DensityMatrix::from_channel_output(branch / prob)};
}

double expectation(const DensityMatrix& rho, const ComplexMatrix& op) {
  if (op.rows() != rho.dim() || op.cols() != rho.dim()) {
    throw std::invalid_argument("expectation: operator dimension mismatch");
  }
  const Complex value = (rho.matrix().transpose().cwiseProduct(op)).sum();
  if (std::abs(value.imag()) > kImaginaryTolerance) {
    throw NumericalError("expectation has imaginary residual " + std::to_string(value.imag()));
  }
  return value.real();
}

std::array<double, 3> bloch_vector(const DensityMatrix& rho) {
  if (rho.n_qubits() != 1) throw std::invalid_argument("bloch_vector: expected one qubit");
  const auto& m = rho.matrix();
  return {2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real()};
}

DensityMatrix tomography(double ex, double ey, double ez) {
  if (!std::isfinite(ex) || !std::isfinite(ey) || !std::isfinite(ez)) {
    throw std::invalid_argument("tomography: non-finite expectation value");
  }
  const double length = std::sqrt(ex * ex + ey * ey + ez * ez);
  if (length > 1.0) {
    ex /= length;
    ey /= length;
    ez /= length;
  }
  ComplexMatrix m(2, 2);
  m << 0.5 * (1.0 + ez), 0.5 * Complex{ex, -ey}, 0.5 * Complex{ex, ey}, 0.5 * (1.0 - ez);
  return DensityMatrix::from_channel_output(std::move(m));
}

std::array<double, 3> sample_expectations(const DensityMatrix& rho, std::size_t shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("sample_expectations: shots must be >= 1");
  const auto exact = bloch_vector(rho);
  std::array<double, 3> out{};
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const double p = std::clamp(0.5 * (1.0 + exact[axis]), 0.0, 1.0);
    std::binomial_distribution<std::size_t> binomial(shots, p);
    const auto k = binomial(rng);
    out[axis] = 2.0 * static_cast<double>(k) / static_cast<double>(shots) - 1.0;
  }
  return out;
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
  if (rho.n_qubits() != psi.n_qubits()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  const auto& a = psi.amplitudes();
  return (a.adjoint() * rho.matrix() * a)(0, 0).real();
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const ComplexMatrix diff = a - b;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (diff + diff.adjoint()),
                                                      Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace scramble
