#pragma once

#include <array>
#include <memory>
#include <variant>
#include <vector>

#include "scramble/linalg.hpp"

namespace scramble {

/// Central spin (qubit 0) coupled to N_s bath spins through
/// H = Σ_i Σ_α J_i^α S^α s_i^α with spin-½ operators S = σ/2.
struct SpinBathModel {
  int n_bath = 0;
  double j_std = 1.0;
  /// couplings[i][α] couples the central spin to bath spin i+1 along α = x, y, z.
  std::vector<std::array<double, 3>> couplings;

  int n_qubits() const { return n_bath + 1; }
};

/// 3·N_s independent N(0, j_std²) couplings.
SpinBathModel sample_spin_bath(int n_bath, double j_std, Rng& rng);

ComplexMatrix build_hamiltonian(const SpinBathModel& model);

/// Parity sectors (even / odd popcount of the basis index). The spin-bath
/// Hamiltonian never couples them.
std::vector<std::vector<Index>> parity_sectors(int n_qubits);

/// Spectrum of build_hamiltonian(model), diagonalized sector by sector.
Spectrum spin_bath_spectrum(const SpinBathModel& model);

/// exp(-iHt).
ComplexMatrix spin_bath_unitary(const SpinBathModel& model, double t);

/// Two-qubit gate. `unitary` is 4×4 in the basis |b_first b_second⟩, the first
/// listed qubit being the more significant factor.
struct Gate {
  int first = 0;
  int second = 1;
  ComplexMatrix unitary;
};

struct LayeredCircuit {
  int n_qubits = 0;
  std::vector<std::vector<Gate>> layers;
};

enum class Pairing {
  /// Even layers pair (0,1),(2,3),…; odd layers (1,2),(3,4),… on an open chain.
  BrickWall,
  /// Each layer is a uniformly random perfect matching (one qubit idles when
  /// n is odd).
  RandomPairs,
};

LayeredCircuit build_random_circuit(int n_qubits, int n_layers, Rng& rng,
                                    Pairing pairing = Pairing::BrickWall);

/// w ← U·w (respectively U†·w) gate by gate, without forming U.
void apply_circuit(const LayeredCircuit& circuit, ComplexMatrix& w);
void apply_circuit_adjoint(const LayeredCircuit& circuit, ComplexMatrix& w);

/// Ordered product of the embedded gates; the first layer acts first.
ComplexMatrix circuit_unitary(const LayeredCircuit& circuit);

/// The three-qubit unitary
///   I⊗|01⟩⟨00| + σx⊗|00⟩⟨01| − iσy⊗|11⟩⟨10| − σz⊗|10⟩⟨11|,
/// central qubit as the left factor.
ComplexMatrix nohiding_unitary();

enum class ScramblerKind { SpinBath, Circuit, NoHiding, Explicit };

/// An immutable scrambling unitary from one of the supported families. Copies
/// share the cached spectrum, so a spin-bath scrambler can be re-timed cheaply
/// with at_time().
class Scrambler {
 public:
  static Scrambler spin_bath(SpinBathModel model, double t);
  static Scrambler circuit(LayeredCircuit circuit);
  static Scrambler no_hiding();
  static Scrambler explicit_unitary(ComplexMatrix u);

  ScramblerKind kind() const;
  int n_qubits() const;
  bool is_continuous_time() const { return kind() == ScramblerKind::SpinBath; }
  /// Spin-bath: the same model at time t. Other families ignore t.
  Scrambler at_time(double t) const;
  double time() const;

  ComplexMatrix unitary() const;
  ComplexMatrix adjoint_unitary() const;

  /// w ← U·w and w ← U†·w.
  void apply(ComplexMatrix& w) const;
  void apply_adjoint(ComplexMatrix& w) const;

  /// Non-null for the spin-bath family.
  const Spectrum* spectrum() const;
  const SpinBathModel* spin_bath_model() const;

 private:
  struct SpinBath {
    std::shared_ptr<const SpinBathModel> model;
    std::shared_ptr<const Spectrum> spectrum;
    double t = 0.0;
  };
  struct Circuit {
    std::shared_ptr<const LayeredCircuit> circuit;
  };
  struct Fixed {
    std::shared_ptr<const ComplexMatrix> u;
    ScramblerKind kind = ScramblerKind::Explicit;
  };

  explicit Scrambler(std::variant<SpinBath, Circuit, Fixed> impl) : impl_(std::move(impl)) {}

  std::variant<SpinBath, Circuit, Fixed> impl_;
};

}  // namespace scramble
