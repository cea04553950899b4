#include "scramble/classical_spins.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace scramble {

namespace {

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("classical spin lost its norm");
  return {v[0] / n, v[1] / n, v[2] / n};
}

void axpy(ClassicalSpinState& out, const ClassicalSpinState& base, double h,
          const ClassicalSpinState& k) {
  for (int a = 0; a < 3; ++a) out.central[a] = base.central[a] + h * k.central[a];
  for (std::size_t i = 0; i < base.bath.size(); ++i) {
    for (int a = 0; a < 3; ++a) out.bath[i][a] = base.bath[i][a] + h * k.bath[i][a];
  }
}

void check_model(const ClassicalSpinState& state, const ClassicalModel& model) {
  if (state.bath.size() != model.couplings.size()) {
    throw std::invalid_argument("classical state and model disagree on the bath size");
  }
}

double coupling_scale(const ClassicalModel& model) {
  double s = 0.0;
  for (const auto& j : model.couplings) s += std::abs(j[0]) + std::abs(j[1]) + std::abs(j[2]);
  return s;
}

}  // namespace

double ClassicalSpinState::norm_error() const {
  double worst = std::abs(std::sqrt(dot(central, central)) - 1.0);
  for (const auto& s : bath) worst = std::max(worst, std::abs(std::sqrt(dot(s, s)) - 1.0));
  return worst;
}

ClassicalModel ClassicalModel::from(const SpinBathModel& model) {
  ClassicalModel out;
  out.couplings.assign(model.couplings.begin(), model.couplings.end());
  for (const auto& j : out.couplings) {
    for (double v : j) {
      if (!std::isfinite(v)) throw std::invalid_argument("couplings must be finite");
    }
  }
  return out;
}

ClassicalModel ClassicalModel::reversed() const {
  ClassicalModel out = *this;
  out.sign = -sign;
  return out;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

ClassicalSpinState derivative(const ClassicalSpinState& state, const ClassicalModel& model) {
  check_model(state, model);
  ClassicalSpinState out;
  out.bath.resize(state.bath.size());
  Vec3 field{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < state.bath.size(); ++i) {
    const Vec3& j = model.couplings[i];
    const Vec3& s = state.bath[i];
    for (int a = 0; a < 3; ++a) field[a] += j[a] * s[a];
    const Vec3 b{model.sign * j[0] * state.central[0], model.sign * j[1] * state.central[1],
                 model.sign * j[2] * state.central[2]};
    out.bath[i] = cross(s, b);
  }
  for (double& f : field) f *= model.sign;
  out.central = cross(state.central, field);
  return out;
}

double energy(const ClassicalSpinState& state, const ClassicalModel& model) {
  check_model(state, model);
  double e = 0.0;
  for (std::size_t i = 0; i < state.bath.size(); ++i) {
    for (int a = 0; a < 3; ++a) e += model.couplings[i][a] * state.central[a] * state.bath[i][a];
  }
  return model.sign * e;
}

Trajectory integrate(ClassicalSpinState& state, const ClassicalModel& model, double duration,
                     double dt, const IntegrateOptions& options) {
  check_model(state, model);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("duration must be >= 0");
  }
  if (options.stride == 0) throw std::invalid_argument("stride must be >= 1");
  const double ratio = duration / dt;
  if (ratio > static_cast<double>(options.max_steps)) {
    throw ResourceLimitError("integration needs more than max_steps steps");
  }
  std::size_t steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  const double h = steps > 0 ? duration / static_cast<double>(steps) : 0.0;

  Trajectory traj;
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.central_z.push_back(state.central[2]);
    if (options.keep_states) {
      if (!traj.states) traj.states.emplace();
      traj.states->push_back(state);
    }
  };
  record(0.0);

  ClassicalSpinState tmp = state;
  for (std::size_t step = 1; step <= steps; ++step) {
    const ClassicalSpinState k1 = derivative(state, model);
    axpy(tmp, state, 0.5 * h, k1);
    const ClassicalSpinState k2 = derivative(tmp, model);
    axpy(tmp, state, 0.5 * h, k2);
    const ClassicalSpinState k3 = derivative(tmp, model);
    axpy(tmp, state, h, k3);
    const ClassicalSpinState k4 = derivative(tmp, model);
    for (int a = 0; a < 3; ++a) {
      state.central[a] += h / 6.0 * (k1.central[a] + 2.0 * k2.central[a] + 2.0 * k3.central[a] +
                                     k4.central[a]);
    }
    for (std::size_t i = 0; i < state.bath.size(); ++i) {
      for (int a = 0; a < 3; ++a) {
        state.bath[i][a] += h / 6.0 * (k1.bath[i][a] + 2.0 * k2.bath[i][a] +
                                       2.0 * k3.bath[i][a] + k4.bath[i][a]);
      }
      state.bath[i] = normalized(state.bath[i]);
    }
    state.central = normalized(state.central);
    if (step % options.stride == 0 || step == steps) record(static_cast<double>(step) * h);
  }
  return traj;
}

Vec3 invasive_measure(const Vec3& spin, const BlochAxis& axis, Rng& rng) {
  const Vec3 n = axis.components();
  const double p_plus = std::clamp(0.5 * (1.0 + dot(spin, n)), 0.0, 1.0);
  std::bernoulli_distribution along(p_plus);
  if (along(rng)) return n;
  return {-n[0], -n[1], -n[2]};
}

ClassicalSpinState random_bath_state(int n_bath, Rng& rng) {
  if (n_bath < 0) throw std::invalid_argument("n_bath must be >= 0");
  ClassicalSpinState state;
  state.bath.reserve(static_cast<std::size_t>(n_bath));
  for (int i = 0; i < n_bath; ++i) state.bath.push_back(BlochAxis::random(rng).components());
  return state;
}

ClassicalProtocolResult run_classical_protocol(const ClassicalModel& model, double t1, double dt,
                                               bool measure, const BlochAxis& bob, Rng& rng,
                                               std::size_t stride) {
  if (!(t1 >= 0.0)) throw std::invalid_argument("t1 must be >= 0");
  ClassicalSpinState state = random_bath_state(model.n_bath(), rng);
  state.central = {0.0, 0.0, 1.0};

  const double floor = 1e-3 * coupling_scale(model);
  auto drift = [&](double e0, double e1) {
    const double denom = std::max(std::abs(e0), floor);
    return denom > 0.0 ? std::abs(e1 - e0) / denom : 0.0;
  };

  IntegrateOptions opts;
  opts.stride = stride;
  const double e0 = energy(state, model);
  Trajectory forward = integrate(state, model, t1, dt, opts);
  double worst = drift(e0, energy(state, model));

  if (measure) state.central = invasive_measure(state.central, bob, rng);

  const ClassicalModel back = model.reversed();
  const double e1 = energy(state, back);
  Trajectory backward = integrate(state, back, t1, dt, opts);
  worst = std::max(worst, drift(e1, energy(state, back)));

  ClassicalProtocolResult out;
  out.trajectory = std::move(forward);
  const double offset = out.trajectory.times.back();
  if (measure) {
    // the post-measurement value replaces the pre-measurement sample at t1
    out.trajectory.central_z.back() = backward.central_z.front();
  }
  for (std::size_t k = 1; k < backward.times.size(); ++k) {
    out.trajectory.times.push_back(offset + backward.times[k]);
    out.trajectory.central_z.push_back(backward.central_z[k]);
  }
  out.energy_drift = worst;
  return out;
}

}  // namespace scramble
