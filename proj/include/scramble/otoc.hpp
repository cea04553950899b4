#pragma once

#include <array>
#include <span>
#include <vector>

#include "scramble/protocol.hpp"

namespace scramble {

/// F = ⟨W(t) V W(t) V_f⟩ with W(t) = U†WU and ⟨•⟩ = tr(• I⊗ρ_B). For the spin
/// OTOC of the recovery protocol, W = σ_r, V = σ_i and V_f = σ_f.
struct OtocSpec {
  ComplexMatrix w_op;        // 2×2
  ComplexMatrix v_op;        // 2×2
  ComplexMatrix v_final_op;  // 2×2
  int w_target = 0;
  int v_target = 0;
  BathState bath = MaximallyMixedBath{};

  static OtocSpec from_axes(const BlochAxis& r, const BlochAxis& i, const BlochAxis& f,
                            BathState bath = MaximallyMixedBath{});
};

struct HaarEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

double otoc_value(const ComplexMatrix& u, const OtocSpec& spec);

std::vector<double> otoc_time_series(const SpinBathModel& model, const OtocSpec& spec,
                                     std::span<const double> times);

/// Haar average of the OTOC from the second-order twirl
///   E[U†WU·A·U†WU] = a·A + b·tr(A)·I,
///   a = (N (tr W)² − tr W²) / (N(N²−1)),  b = (N tr W² − (tr W)²) / (N(N²−1)).
/// For a Pauli W this gives F̄ = −⟨V V_f⟩ / (N² − 1) + N·tr(V)·⟨V_f⟩ / (N² − 1).
double haar_average_analytic(const OtocSpec& spec, Index dim);

/// Monte Carlo over haar_unitary draws; each sample uses its own derived
/// stream so the estimate does not depend on `workers`.
HaarEstimate haar_average_mc(const OtocSpec& spec, Index dim, std::size_t samples, Rng& rng,
                             unsigned workers = 1);

/// (m1, n1, m1', n1', m2, n2, m2', n2') for E[U_{m1n1} U*_{m1'n1'} U_{m2n2} U*_{m2'n2'}].
using MomentIndices = std::array<Index, 8>;

/// Two-term Weingarten value of the fourth moment.
double weingarten_fourth_moment(Index dim, const MomentIndices& idx);

struct FourthMomentCheck {
  Complex mc;
  /// Standard errors of the real and imaginary parts.
  std::array<double, 2> std_error{};
  double analytic = 0.0;
  std::size_t samples = 0;
};

FourthMomentCheck haar_fourth_moment_check(Index dim, const MomentIndices& idx,
                                           std::size_t samples, Rng& rng);

/// Per-run Alice probabilities (x, y, z) for one sampled circuit.
struct FluctuationRun {
  std::array<double, 3> prob{};
};

struct FluctuationResult {
  int n_qubits = 0;
  std::vector<FluctuationRun> runs;
  /// Sample variance of Prob_U(P_z) across runs (mean subtracted).
  double variance = 0.0;
  /// Bootstrap standard error of `variance`.
  double variance_std_error = 0.0;
};

/// Scramble → measure (random Bob axis per run) → unscramble with brick-wall
/// circuits on |0…0⟩, i = z. Prob_U is recorded for Alice along x, y and z.
FluctuationResult fluctuation_study(int n_qubits, int layers, std::size_t samples, Rng& rng,
                                    unsigned workers = 1, Pairing pairing = Pairing::BrickWall);

/// fluctuation_study(...).variance.
double fluctuation_variance(int n_qubits, int layers, std::size_t samples, Rng& rng,
                            unsigned workers = 1);

/// Bootstrap standard error of the sample variance of `values`.
double bootstrap_variance_error(std::span<const double> values, std::size_t resamples, Rng& rng);

struct VarianceRecord {
  int n_qubits = 0;
  double variance = 0.0;
  std::size_t samples = 0;
};

struct VarianceScaling {
  std::vector<VarianceRecord> records;
  double slope = 0.0;
};

/// Least-squares slope of ln C against n_q; needs at least three records and
/// positive variances.
double scaling_fit(std::span<const VarianceRecord> records);

}  // namespace scramble
