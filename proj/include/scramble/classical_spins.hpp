#pragma once

#include <array>
#include <optional>
#include <vector>

#include "scramble/quantum_state.hpp"
#include "scramble/scramblers.hpp"

namespace scramble {

using Vec3 = std::array<double, 3>;

/// Unit vectors for the central spin and each bath spin.
struct ClassicalSpinState {
  Vec3 central{0.0, 0.0, 1.0};
  std::vector<Vec3> bath;

  /// Largest | |v| − 1 | over all spins.
  double norm_error() const;
};

/// H = sign · Σ_i Σ_α J_i^α S^α s_i^α.
struct ClassicalModel {
  std::vector<Vec3> couplings;
  double sign = 1.0;

  static ClassicalModel from(const SpinBathModel& model);
  ClassicalModel reversed() const;
  int n_bath() const { return static_cast<int>(couplings.size()); }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> central_z;
  std::optional<std::vector<ClassicalSpinState>> states;
};

double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);

/// dS/dt = S × B_S, B_S^α = Σ_i J_i^α s_i^α; ds_i/dt = s_i × b_i, b_i^α = J_i^α S^α.
ClassicalSpinState derivative(const ClassicalSpinState& state, const ClassicalModel& model);

double energy(const ClassicalSpinState& state, const ClassicalModel& model);

struct IntegrateOptions {
  /// Record every `stride`-th step (the final step is always recorded).
  std::size_t stride = 1;
  bool keep_states = false;
  std::size_t max_steps = 1'000'000'000;
};

/// Fixed-step RK4; every spin is renormalized after each step. The trajectory
/// starts with the initial state at t = 0. `state` holds the final state on return.
Trajectory integrate(ClassicalSpinState& state, const ClassicalModel& model, double duration,
                     double dt, const IntegrateOptions& options = {});

/// +axis with probability cos²(θ/2) = (1 + spin·axis)/2, otherwise −axis.
Vec3 invasive_measure(const Vec3& spin, const BlochAxis& axis, Rng& rng);

ClassicalSpinState random_bath_state(int n_bath, Rng& rng);

struct ClassicalProtocolResult {
  Trajectory trajectory;
  /// Largest relative energy drift over the two unbroken segments.
  double energy_drift = 0.0;
};

/// Central spin along +z, bath spins uniform on the sphere (drawn from rng),
/// forward for t1, optional invasive measurement of the central spin along
/// `bob`, then the sign-flipped model for t1. Times in the trajectory run over
/// [0, 2·t1].
ClassicalProtocolResult run_classical_protocol(const ClassicalModel& model, double t1, double dt,
                                               bool measure, const BlochAxis& bob, Rng& rng,
                                               std::size_t stride = 1);

}  // namespace scramble
