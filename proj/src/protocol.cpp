#include "scramble/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scramble/parallel.hpp"

namespace scramble {

namespace {

constexpr double kImaginaryTolerance = 1e-8;
constexpr double kFactorCutoff = 1e-14;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

int bath_qubits_of(const ProtocolConfig& cfg) { return cfg.scrambler.n_qubits() - 1; }

ComplexMatrix initial_factor(const ProtocolConfig& cfg) {
  const ComplexMatrix psi = PureState::along(cfg.initial).amplitudes();
  return kron(psi, bath_factor(cfg.bath, bath_qubits_of(cfg)));
}

// Operator applied after Bob's measurement.
ComplexMatrix backward_unitary(const ProtocolConfig& cfg) {
  const Scrambler back = cfg.scrambler.at_time(cfg.t2);
  return cfg.reversed ? back.adjoint_unitary() : back.unitary();
}

void apply_backward(const ProtocolConfig& cfg, ComplexMatrix& w) {
  const Scrambler back = cfg.scrambler.at_time(cfg.t2);
  if (cfg.reversed) {
    back.apply_adjoint(w);
  } else {
    back.apply(w);
  }
}

const BlochAxis& single_bob_axis(const ProtocolConfig& cfg) {
  const auto* axis = std::get_if<BlochAxis>(&cfg.bob);
  if (axis == nullptr) {
    throw std::invalid_argument("joint probabilities need a single fixed Bob axis");
  }
  return *axis;
}

double real_checked(Complex value, const char* what) {
  if (std::abs(value.imag()) > kImaginaryTolerance) {
    throw NumericalError(std::string(what) + " has imaginary residual " +
                         std::to_string(value.imag()));
  }
  return value.real();
}

void require_times(const ProtocolConfig& cfg) {
  if (!std::isfinite(cfg.t1) || !std::isfinite(cfg.t2) || cfg.t1 < 0.0 || cfg.t2 < 0.0) {
    throw std::invalid_argument("protocol times must be finite and non-negative");
  }
}

}  // namespace

ComplexMatrix bath_density(const BathState& bath, int n_bath) {
  if (n_bath < 1) throw std::invalid_argument("bath needs at least one qubit");
  return std::visit(
      overloaded{
          [&](const MaximallyMixedBath&) -> ComplexMatrix {
            return DensityMatrix::maximally_mixed(n_bath).matrix();
          },
          [&](const ProductBath& p) -> ComplexMatrix {
            if (static_cast<int>(p.axes.size()) != n_bath) {
              throw std::invalid_argument("product bath has " + std::to_string(p.axes.size()) +
                                          " axes, expected " + std::to_string(n_bath));
            }
            const auto psi = PureState::product(p.axes).amplitudes();
            return psi * psi.adjoint();
          },
          [&](const DensityMatrix& rho) -> ComplexMatrix {
            if (rho.n_qubits() != n_bath) {
              throw std::invalid_argument("bath density matrix has the wrong qubit count");
            }
            return rho.matrix();
          }},
      bath);
}

ComplexMatrix bath_factor(const BathState& bath, int n_bath) {
  if (n_bath < 1) throw std::invalid_argument("bath needs at least one qubit");
  return std::visit(
      overloaded{
          [&](const MaximallyMixedBath&) -> ComplexMatrix {
            if (n_bath > max_qubits()) throw ResourceLimitError("bath exceeds the qubit limit");
            const Index dim = Index{1} << n_bath;
            return ComplexMatrix::Identity(dim, dim) / std::sqrt(static_cast<double>(dim));
          },
          [&](const ProductBath& p) -> ComplexMatrix {
            if (static_cast<int>(p.axes.size()) != n_bath) {
              throw std::invalid_argument("product bath has " + std::to_string(p.axes.size()) +
                                          " axes, expected " + std::to_string(n_bath));
            }
            return PureState::product(p.axes).amplitudes();
          },
          [&](const DensityMatrix& rho) -> ComplexMatrix {
            if (rho.n_qubits() != n_bath) {
              throw std::invalid_argument("bath density matrix has the wrong qubit count");
            }
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho.matrix());
            std::vector<Index> keep;
            for (Index k = 0; k < rho.dim(); ++k) {
              if (solver.eigenvalues()(k) > kFactorCutoff) keep.push_back(k);
            }
            ComplexMatrix w(rho.dim(), static_cast<Index>(keep.size()));
            for (std::size_t k = 0; k < keep.size(); ++k) {
              w.col(static_cast<Index>(k)) =
                  solver.eigenvectors().col(keep[k]) * std::sqrt(solver.eigenvalues()(keep[k]));
            }
            return w;
          }},
      bath);
}

std::vector<std::optional<BlochAxis>> bob_settings(const BobMeasurement& bob) {
  return std::visit(
      overloaded{
          [](const BlochAxis& a) -> std::vector<std::optional<BlochAxis>> { return {a}; },
          [](const std::vector<BlochAxis>& axes) -> std::vector<std::optional<BlochAxis>> {
            if (axes.empty()) throw std::invalid_argument("Bob axis list is empty");
            return {axes.begin(), axes.end()};
          },
          [](const SphereSample& s) -> std::vector<std::optional<BlochAxis>> {
            if (s.count < 1) throw std::invalid_argument("sphere sample needs at least one axis");
            Rng rng(s.seed);
            std::vector<std::optional<BlochAxis>> out;
            for (std::size_t k = 0; k < s.count; ++k) out.emplace_back(BlochAxis::random(rng));
            return out;
          },
          [](const PauliSet& p) -> std::vector<std::optional<BlochAxis>> {
            std::vector<std::optional<BlochAxis>> out;
            if (p.include_identity) out.emplace_back(std::nullopt);
            out.emplace_back(BlochAxis::X());
            out.emplace_back(BlochAxis::Y());
            out.emplace_back(BlochAxis::Z());
            return out;
          }},
      bob);
}

Complex correlator_average(const ComplexMatrix& op, const BathState& bath) {
  if (op.rows() != op.cols()) throw std::invalid_argument("correlator_average: non-square op");
  const int n = qubit_count(op.rows());
  if (n < 2) throw std::invalid_argument("correlator_average: need central qubit plus bath");
  const Index d = Index{1} << (n - 1);
  Complex sum = 0.0;
  if (std::holds_alternative<MaximallyMixedBath>(bath)) {
    sum = op.trace() / static_cast<double>(d);
  } else {
    const ComplexMatrix rho_t = bath_density(bath, n - 1).transpose();
    for (Index c = 0; c < 2; ++c) {
      sum += op.block(c * d, c * d, d, d).cwiseProduct(rho_t).sum();
    }
  }
  return sum;
}

double joint_probability_heisenberg(const ProtocolConfig& cfg, int bob_outcome,
                                    int alice_outcome) {
  require_times(cfg);
  const int n = cfg.scrambler.n_qubits();
  const ComplexMatrix u1 = cfg.scrambler.at_time(cfg.t1).unitary();
  const ComplexMatrix back = backward_unitary(cfg);
  const ComplexMatrix pr = embed(projector_along(single_bob_axis(cfg), bob_outcome), 0, n);
  const ComplexMatrix pf = embed(projector_along(cfg.alice, alice_outcome), 0, n);
  const ComplexMatrix pi = embed(projector_along(cfg.initial, 1), 0, n);

  const ComplexMatrix pr_t = u1.adjoint() * pr * u1;
  const ComplexMatrix echo = back * u1;
  const ComplexMatrix pf_t = echo.adjoint() * pf * echo;
  return real_checked(correlator_average(pr_t * pf_t * pr_t * pi, cfg.bath),
                      "Heisenberg joint probability");
}

double joint_probability_channel(const ProtocolConfig& cfg, int bob_outcome, int alice_outcome) {
  require_times(cfg);
  const int n = cfg.scrambler.n_qubits();
  const auto psi = PureState::along(cfg.initial).amplitudes();
  const auto rho0 = DensityMatrix::from_channel_output(
      kron(psi * psi.adjoint(), bath_density(cfg.bath, n - 1)));
  const ComplexMatrix u1 = cfg.scrambler.at_time(cfg.t1).unitary();
  const auto rho1 = DensityMatrix::from_channel_output(u1 * rho0.matrix() * u1.adjoint());
  const ComplexMatrix pr = embed(projector_along(single_bob_axis(cfg), bob_outcome), 0, n);

  std::optional<SelectiveOutcome> branch;
  try {
    branch = measure_selective(rho1, pr);
  } catch (const DegenerateBranchError&) {
    return 0.0;
  }
  const ComplexMatrix back = backward_unitary(cfg);
  const ComplexMatrix rho2 = back * branch->post.matrix() * back.adjoint();
  const ComplexMatrix pf = embed(projector_along(cfg.alice, alice_outcome), 0, n);
  const double conditional = real_checked((pf * rho2 * pf).trace(), "conditional probability");
  return conditional * branch->probability;
}

DensityMatrix final_central_state(const ProtocolConfig& cfg) {
  require_times(cfg);
  const int n = cfg.scrambler.n_qubits();
  ComplexMatrix w1 = initial_factor(cfg);
  cfg.scrambler.at_time(cfg.t1).apply(w1);

  const auto settings = bob_settings(cfg.bob);
  const double weight = 1.0 / static_cast<double>(settings.size());
  const int central[] = {0};
  ComplexMatrix accum = ComplexMatrix::Zero(2, 2);
  for (const auto& setting : settings) {
    ComplexMatrix w;
    if (!setting) {
      w = w1;
    } else {
      w.resize(w1.rows(), 2 * w1.cols());
      ComplexMatrix plus = w1;
      ComplexMatrix minus = w1;
      apply_local_left(projector_along(*setting, 1), 0, n, plus);
      apply_local_left(projector_along(*setting, -1), 0, n, minus);
      w << plus, minus;
    }
    apply_backward(cfg, w);
    accum += weight * partial_trace_factor(w, central);
  }
  return DensityMatrix::from_channel_output(std::move(accum));
}

double final_probability(const ProtocolConfig& cfg, int alice_outcome) {
  return expectation(final_central_state(cfg), projector_along(cfg.alice, alice_outcome));
}

DensityMatrix reconstruct_initial(const DensityMatrix& final_state) {
  const auto b = bloch_vector(final_state);
  return tomography(2.0 * b[0], 2.0 * b[1], 2.0 * b[2]);
}

namespace {

RecoveryResult recovery_from(const ProtocolConfig& cfg, DensityMatrix final_state) {
  const auto b = bloch_vector(final_state);
  DensityMatrix recon = reconstruct_initial(final_state);
  const double fid = fidelity(recon, PureState::along(cfg.initial));
  return {std::move(final_state),
          std::move(recon),
          std::clamp(fid, 0.0, 1.0),
          {0.5 * (1.0 + b[0]), 0.5 * (1.0 + b[1]), 0.5 * (1.0 + b[2])}};
}

}  // namespace

RecoveryResult run_protocol_density(const ProtocolConfig& cfg) {
  return recovery_from(cfg, final_central_state(cfg));
}

RecoveryResult recover_with_tomography(const ProtocolConfig& cfg, Rng& rng) {
  if (!cfg.shots || *cfg.shots < 1) {
    throw std::invalid_argument("recover_with_tomography: shots must be >= 1");
  }
  const DensityMatrix exact = final_central_state(cfg);
  const auto e = sample_expectations(exact, *cfg.shots, rng);
  return recovery_from(cfg, tomography(e[0], e[1], e[2]));
}

std::array<double, 3> pauli_set_averaged_probability(const ProtocolConfig& cfg,
                                                     bool include_identity) {
  ProtocolConfig averaged = cfg;
  averaged.bob = PauliSet{include_identity};
  const auto b = bloch_vector(final_central_state(averaged));
  return {0.5 * (1.0 + b[0]), 0.5 * (1.0 + b[1]), 0.5 * (1.0 + b[2])};
}

// --- Echo grids ---------------------------------------------------------------

EchoGridEngine::EchoGridEngine(const ProtocolConfig& cfg)
    : cfg_(cfg), spectrum_(cfg.scrambler.spectrum()) {
  if (spectrum_ == nullptr) {
    throw std::invalid_argument("echo grids need a continuous-time (spin-bath) scrambler");
  }
  const int n = cfg_.scrambler.n_qubits();
  const ComplexMatrix& v = spectrum_->eigenvectors;
  initial_factor_ = v.adjoint() * initial_factor(cfg_);

  ComplexMatrix pv = v;
  apply_local_left(projector_along(cfg_.alice, 1), 0, n, pv);
  alice_projector_ = v.adjoint() * pv;

  for (const auto& setting : bob_settings(cfg_.bob)) {
    if (!setting) {
      bob_paulis_.emplace_back(std::nullopt);
      continue;
    }
    ComplexMatrix sv = v;
    apply_local_left(pauli_along(*setting), 0, n, sv);
    bob_paulis_.emplace_back(v.adjoint() * sv);
  }
}

ComplexMatrix EchoGridEngine::measured_state(double t1) const {
  const RealVector& energies = spectrum_->eigenvalues;
  ComplexMatrix y = initial_factor_;
  for (Index k = 0; k < y.rows(); ++k) y.row(k) *= std::polar(1.0, -energies(k) * t1);

  // Non-selective measurement along r: ½(ρ + σ_r ρ σ_r).
  const double weight = 1.0 / static_cast<double>(bob_paulis_.size());
  double plain_weight = 0.0;
  const Index dim = y.rows();
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (const auto& sigma : bob_paulis_) {
    if (!sigma) {
      plain_weight += weight;
      continue;
    }
    plain_weight += 0.5 * weight;
    const ComplexMatrix flipped = *sigma * y;
    m.selfadjointView<Eigen::Lower>().rankUpdate(flipped, 0.5 * weight);
  }
  m.selfadjointView<Eigen::Lower>().rankUpdate(y, plain_weight);
  return m.selfadjointView<Eigen::Lower>();
}

EchoGridEngine::Grids EchoGridEngine::evaluate(std::span<const double> t1,
                                               std::span<const double> t2,
                                               unsigned workers) const {
  for (double t : t1) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("echo grid times must be >= 0");
  }
  for (double t : t2) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("echo grid times must be >= 0");
  }
  const RealVector& energies = spectrum_->eigenvalues;
  const Index dim = energies.size();

  Grids out;
  out.reversed = {{t1.begin(), t1.end()}, {t2.begin(), t2.end()}, {}};
  out.forward = out.reversed;
  out.reversed.prob.assign(t1.size(), std::vector<double>(t2.size(), 0.0));
  out.forward.prob = out.reversed.prob;

  // Prob = Σ_ab (P_f')_ba φ_a M'_ab φ̄_b with φ = exp(-iE s): s = −t2 when
  // reversed, +t2 forward.
  parallel_for(t1.size(), workers, [&](std::size_t row) {
    const ComplexMatrix q = alice_projector_.transpose().cwiseProduct(measured_state(t1[row]));
    ComplexVector phase(dim);
    for (std::size_t col = 0; col < t2.size(); ++col) {
      for (int sign : {-1, 1}) {
        for (Index a = 0; a < dim; ++a) phase(a) = std::polar(1.0, -energies(a) * sign * t2[col]);
        const ComplexVector conj_phase = phase.conjugate();
        const Complex value = conj_phase.dot(q * conj_phase);
        const double prob = std::clamp(value.real(), 0.0, 1.0);
        (sign < 0 ? out.reversed : out.forward).prob[row][col] = prob;
      }
    }
  });
  return out;
}

EchoGrid echo_grid(const ProtocolConfig& cfg, std::span<const double> t1,
                   std::span<const double> t2, bool reversed, unsigned workers) {
  auto grids = EchoGridEngine(cfg).evaluate(t1, t2, workers);
  return reversed ? std::move(grids.reversed) : std::move(grids.forward);
}

}  // namespace scramble
