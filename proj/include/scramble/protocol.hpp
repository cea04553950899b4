#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "scramble/quantum_state.hpp"
#include "scramble/scramblers.hpp"

namespace scramble {

// --- Bath states -----------------------------------------------------------

struct MaximallyMixedBath {
  bool operator==(const MaximallyMixedBath&) const = default;
};

/// Pure product state, bath qubit k along axes[k].
struct ProductBath {
  std::vector<BlochAxis> axes;
  bool operator==(const ProductBath&) const = default;
};

using BathState = std::variant<MaximallyMixedBath, ProductBath, DensityMatrix>;

/// ρ_B on n_bath qubits.
ComplexMatrix bath_density(const BathState& bath, int n_bath);

/// W_B with ρ_B = W_B·W_B†.
ComplexMatrix bath_factor(const BathState& bath, int n_bath);

// --- Bob's intermediate measurement -----------------------------------------

/// Uniform sample of `count` axes on the sphere, drawn from `seed`.
struct SphereSample {
  std::size_t count = 1;
  std::uint64_t seed = 0;
};

/// Intermediate setting drawn uniformly from {I, X, Y, Z} (or {X, Y, Z});
/// the identity means no measurement is applied.
struct PauliSet {
  bool include_identity = true;
};

using BobMeasurement = std::variant<BlochAxis, std::vector<BlochAxis>, SphereSample, PauliSet>;

/// Equally weighted settings; std::nullopt stands for "no measurement".
std::vector<std::optional<BlochAxis>> bob_settings(const BobMeasurement& bob);

// --- Protocol ---------------------------------------------------------------

/// One run of scramble → measure → unscramble → read out. For spin-bath
/// scramblers t1 is the forward time and t2 the return time; the other
/// families apply U forward and U† (or U again when reversed = false) back.
struct ProtocolConfig {
  Scrambler scrambler;
  BlochAxis initial = BlochAxis::Z();
  BobMeasurement bob = BlochAxis::Z();
  BlochAxis alice = BlochAxis::Z();
  double t1 = 0.0;
  double t2 = 0.0;
  /// true: U†(t2) after the measurement; false: U(t2) (forward-forward echo).
  bool reversed = true;
  BathState bath = MaximallyMixedBath{};
  std::optional<std::size_t> shots = std::nullopt;
};

struct EchoGrid {
  std::vector<double> t1;
  std::vector<double> t2;
  /// prob[i][j] at (t1[i], t2[j]).
  std::vector<std::vector<double>> prob;
};

struct RecoveryResult {
  DensityMatrix final_state;
  DensityMatrix reconstructed;
  double fidelity = 0.0;
  /// Probability of the +1 outcome along x, y, z on the final central state.
  std::array<double, 3> axis_probabilities{};
};

/// tr(op·(I_central ⊗ ρ_B)). The central identity is not normalized: ⟨I⟩ = 2.
Complex correlator_average(const ComplexMatrix& op, const BathState& bath);

/// ⟨P_r(t1) P_f(t1−t2) P_r(t1) P_i⟩ from Heisenberg-picture operators.
/// Requires a single fixed Bob axis; outcomes select P or I − P.
double joint_probability_heisenberg(const ProtocolConfig& cfg, int bob_outcome = 1,
                                    int alice_outcome = 1);

/// Prob(P_f | P_r)·Prob(P_r) by evolving density matrices. A zero-probability
/// Bob branch contributes 0.
double joint_probability_channel(const ProtocolConfig& cfg, int bob_outcome = 1,
                                 int alice_outcome = 1);

/// Reduced central state after the protocol, averaged over Bob's settings.
DensityMatrix final_central_state(const ProtocolConfig& cfg);

/// Prob(P_f) summed over both Bob outcomes and averaged over his settings.
double final_probability(const ProtocolConfig& cfg, int alice_outcome = 1);

/// ρ_i = 2ρ_f − I/2, clamped onto the Bloch ball.
DensityMatrix reconstruct_initial(const DensityMatrix& final_state);

/// Density-matrix run with exact final state.
RecoveryResult run_protocol_density(const ProtocolConfig& cfg);

/// Same, with the final central state estimated from cfg.shots (required)
/// measurements per Pauli axis.
RecoveryResult recover_with_tomography(const ProtocolConfig& cfg, Rng& rng);

/// Prob(P_f = +1) for Alice along x, y, z with Bob's setting averaged over
/// the Pauli set. Overrides cfg.bob.
std::array<double, 3> pauli_set_averaged_probability(const ProtocolConfig& cfg,
                                                     bool include_identity = true);

/// Final-probability surface for a spin-bath scrambler. Works in the
/// Hamiltonian eigenbasis: the state after Bob's measurement is formed once per
/// t1, after which each t2 costs O(dim²).
class EchoGridEngine {
 public:
  explicit EchoGridEngine(const ProtocolConfig& cfg);

  /// Both grids share the per-t1 work.
  struct Grids {
    EchoGrid reversed;
    EchoGrid forward;
  };
  Grids evaluate(std::span<const double> t1, std::span<const double> t2, unsigned workers = 1) const;

 private:
  ComplexMatrix measured_state(double t1) const;

  ProtocolConfig cfg_;
  const Spectrum* spectrum_;
  ComplexMatrix initial_factor_;  // V†·W0
  ComplexMatrix alice_projector_;  // V†·P_f·V
  std::vector<std::optional<ComplexMatrix>> bob_paulis_;  // V†·σ_r·V per setting
};

EchoGrid echo_grid(const ProtocolConfig& cfg, std::span<const double> t1,
                   std::span<const double> t2, bool reversed, unsigned workers = 1);

}  // namespace scramble
