#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scramble/linalg.hpp"

namespace scramble {

/// Measuring a zero-probability outcome selectively.
class DegenerateBranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unit 3-vector on the Bloch sphere. Qubit 0 is the central qubit throughout
/// the library; bath qubits follow as 1..N_s, qubit 0 being the leftmost
/// Kronecker factor.
class BlochAxis {
 public:
  /// Throws std::invalid_argument unless x² + y² + z² = 1 within 1e-12.
  BlochAxis(double x, double y, double z);

  /// Rescales any nonzero vector onto the sphere.
  static BlochAxis normalized(double x, double y, double z);
  static BlochAxis X() { return {1.0, 0.0, 0.0}; }
  static BlochAxis Y() { return {0.0, 1.0, 0.0}; }
  static BlochAxis Z() { return {0.0, 0.0, 1.0}; }
  /// Uniform on the sphere.
  static BlochAxis random(Rng& rng);

  double x() const { return v_[0]; }
  double y() const { return v_[1]; }
  double z() const { return v_[2]; }
  const std::array<double, 3>& components() const { return v_; }
  double dot(const BlochAxis& other) const;
  BlochAxis opposite() const { return {-v_[0], -v_[1], -v_[2]}; }

  bool operator==(const BlochAxis&) const = default;

 private:
  std::array<double, 3> v_;
};

class PureState {
 public:
  /// Throws unless the length is a power of two and ‖ψ‖ = 1 within 1e-10.
  explicit PureState(ComplexVector amplitudes);

  /// +1 eigenstate of the Pauli operator along `axis`.
  static PureState along(const BlochAxis& axis);
  /// Tensor product, first factor = qubit 0.
  static PureState product(std::span<const BlochAxis> axes);

  int n_qubits() const { return n_qubits_; }
  const ComplexVector& amplitudes() const { return amplitudes_; }

 private:
  int n_qubits_;
  ComplexVector amplitudes_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity
  /// (eigenvalues ≥ -1e-8).
  static DensityMatrix from_matrix(ComplexMatrix m);
  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }
  double trace() const { return matrix_.trace().real(); }
  double min_eigenvalue() const;

  /// For results of trace-preserving completely positive maps: checks
  /// Hermiticity and trace only.
  static DensityMatrix from_channel_output(ComplexMatrix m);

 private:
  DensityMatrix(int n_qubits, ComplexMatrix m) : n_qubits_(n_qubits), matrix_(std::move(m)) {}
  int n_qubits_;
  ComplexMatrix matrix_;
};

/// x·σx + y·σy + z·σz.
ComplexMatrix pauli_along(const BlochAxis& axis);

/// (I + outcome·σ_axis)/2, outcome = ±1. The −1 projector is built as I − P(+1),
/// so the pair sums to I exactly.
ComplexMatrix projector_along(const BlochAxis& axis, int outcome);

/// I ⊗ … ⊗ op ⊗ … ⊗ I with the 2×2 `op` on qubit `target` of `n`.
ComplexMatrix embed(const ComplexMatrix& op, int target, int n);

/// m ← embed(op, target, n)·m without forming the embedded operator.
void apply_local_left(const ComplexMatrix& op, int target, int n, ComplexMatrix& m);
/// m ← m·embed(op, target, n).
void apply_local_right(const ComplexMatrix& op, int target, int n, ComplexMatrix& m);

/// Reduced state over `keep` (distinct, in range, nonempty). The result is
/// ordered by ascending qubit index.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

/// Reduced matrix of ρ = W·W† over `keep`, computed from the factor W.
ComplexMatrix partial_trace_factor(const ComplexMatrix& w, std::span<const int> keep);

/// PρP + (I−P)ρ(I−P).
DensityMatrix measure_nonselective(const DensityMatrix& rho, const ComplexMatrix& p);

struct SelectiveOutcome {
  double probability;
  DensityMatrix post;
};

/// tr(PρP) and PρP / tr(PρP). Throws DegenerateBranchError below 1e-14.
SelectiveOutcome measure_selective(const DensityMatrix& rho, const ComplexMatrix& p);

/// tr(ρ·op). Throws NumericalError if the imaginary part exceeds 1e-8.
double expectation(const DensityMatrix& rho, const ComplexMatrix& op);

/// Bloch vector (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) of a one-qubit state.
std::array<double, 3> bloch_vector(const DensityMatrix& rho);

/// Linear-inversion tomography: (I + e·σ)/2, with e radially clamped onto
/// the Bloch ball when |e| > 1.
DensityMatrix tomography(double ex, double ey, double ez);

/// Estimates (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) from `shots` projective measurements per
/// axis: 2k/shots − 1 with k ~ Binomial(shots, p_axis).
std::array<double, 3> sample_expectations(const DensityMatrix& rho, std::size_t shots, Rng& rng);

/// ⟨ψ|ρ|ψ⟩.
double fidelity(const DensityMatrix& rho, const PureState& psi);

/// ½‖a − b‖₁.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace scramble
