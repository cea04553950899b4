#include "scramble/scramblers.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

namespace scramble {

namespace {

constexpr double kUnitaryTolerance = 1e-10;

void require_finite_model(const SpinBathModel& model) {
  if (model.n_bath < 1) throw std::invalid_argument("spin bath needs at least one bath spin");
  if (static_cast<int>(model.couplings.size()) != model.n_bath) {
    throw std::invalid_argument("spin bath coupling array must hold 3 entries per bath spin");
  }
  for (const auto& j : model.couplings) {
    for (double v : j) {
      if (!std::isfinite(v)) throw std::invalid_argument("spin bath couplings must be finite");
    }
  }
}

void apply_gate(const Gate& gate, int n, ComplexMatrix& w, bool adjoint) {
  const Index s1 = Index{1} << (n - 1 - gate.first);
  const Index s2 = Index{1} << (n - 1 - gate.second);
  const Index mask = s1 | s2;
  const Index dim = Index{1} << n;
  const Eigen::Matrix4cd g = adjoint ? Eigen::Matrix4cd(gate.unitary.adjoint())
                                     : Eigen::Matrix4cd(gate.unitary);
  for (Index col = 0; col < w.cols(); ++col) {
    Complex* v = w.col(col).data();
    for (Index base = 0; base < dim; ++base) {
      if (base & mask) continue;
      const Index idx[4] = {base, base | s2, base | s1, base | s1 | s2};
      const Eigen::Vector4cd in(v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]);
      const Eigen::Vector4cd out = g * in;
      for (int k = 0; k < 4; ++k) v[idx[k]] = out(k);
    }
  }
}

void validate_circuit(const LayeredCircuit& c) {
  if (c.n_qubits < 2) throw std::invalid_argument("circuit needs at least two qubits");
  check_dimension(Index{1} << c.n_qubits);
  for (const auto& layer : c.layers) {
    std::vector<bool> used(static_cast<std::size_t>(c.n_qubits), false);
    for (const auto& g : layer) {
      if (g.first < 0 || g.second < 0 || g.first >= c.n_qubits || g.second >= c.n_qubits ||
          g.first == g.second) {
        throw std::invalid_argument("circuit gate acts on an invalid qubit pair");
      }
      if (used[static_cast<std::size_t>(g.first)] || used[static_cast<std::size_t>(g.second)]) {
        throw std::invalid_argument("gates within one layer must act on disjoint pairs");
      }
      used[static_cast<std::size_t>(g.first)] = used[static_cast<std::size_t>(g.second)] = true;
      if (g.unitary.rows() != 4 || g.unitary.cols() != 4) {
        throw std::invalid_argument("circuit gates must be 4x4");
      }
    }
  }
}

}  // namespace

SpinBathModel sample_spin_bath(int n_bath, double j_std, Rng& rng) {
  if (n_bath < 1) throw std::invalid_argument("sample_spin_bath: n_bath must be >= 1");
  if (!(j_std > 0.0)) throw std::invalid_argument("sample_spin_bath: j_std must be > 0");
  std::normal_distribution<double> normal(0.0, j_std);
  SpinBathModel model{n_bath, j_std, {}};
  model.couplings.resize(static_cast<std::size_t>(n_bath));
  for (auto& j : model.couplings) {
    for (double& v : j) v = normal(rng);
  }
  return model;
}

ComplexMatrix build_hamiltonian(const SpinBathModel& model) {
  require_finite_model(model);
  const int n = model.n_qubits();
  check_dimension(Index{1} << n);
  const Index dim = Index{1} << n;
  const Index central = Index{1} << (n - 1);
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < model.n_bath; ++i) {
    const Index bath = Index{1} << (n - 2 - i);
    const auto& j = model.couplings[static_cast<std::size_t>(i)];
    for (Index c = 0; c < dim; ++c) {
      const bool bc = c & central;
      const bool bb = c & bath;
      const double zz = (bc == bb) ? 1.0 : -1.0;
      const Index flipped = c ^ central ^ bath;
      // S^α s^α = σ_α⊗σ_α / 4.
      h(flipped, c) += 0.25 * j[0];
      h(flipped, c) += -0.25 * j[1] * zz;
      h(c, c) += 0.25 * j[2] * zz;
    }
  }
  return h;
}

std::vector<std::vector<Index>> parity_sectors(int n_qubits) {
  const Index dim = Index{1} << n_qubits;
  std::vector<std::vector<Index>> sectors(2);
  for (Index i = 0; i < dim; ++i) {
    sectors[std::popcount(static_cast<std::uint64_t>(i)) & 1U].push_back(i);
  }
  return sectors;
}

Spectrum spin_bath_spectrum(const SpinBathModel& model) {
  const ComplexMatrix h = build_hamiltonian(model);
  const auto sectors = parity_sectors(model.n_qubits());
  return hermitian_eig_blocks(h, sectors);
}

ComplexMatrix spin_bath_unitary(const SpinBathModel& model, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("spin_bath_unitary: time must be finite");
  return propagator(spin_bath_spectrum(model), t);
}

LayeredCircuit build_random_circuit(int n_qubits, int n_layers, Rng& rng, Pairing pairing) {
  if (n_qubits < 2) throw std::invalid_argument("build_random_circuit: n_qubits must be >= 2");
  if (n_layers < 1) throw std::invalid_argument("build_random_circuit: n_layers must be >= 1");
  check_dimension(Index{1} << n_qubits);
  LayeredCircuit circuit{n_qubits, {}};
  circuit.layers.reserve(static_cast<std::size_t>(n_layers));
  std::vector<int> order(static_cast<std::size_t>(n_qubits));
  for (int layer = 0; layer < n_layers; ++layer) {
    std::vector<std::pair<int, int>> pairs;
    if (pairing == Pairing::BrickWall) {
      int offset = layer % 2;
      if (offset + 1 >= n_qubits) offset = 0;
      for (int q = offset; q + 1 < n_qubits; q += 2) pairs.emplace_back(q, q + 1);
    } else {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t k = 0; k + 1 < order.size(); k += 2) pairs.emplace_back(order[k], order[k + 1]);
    }
    std::vector<Gate> gates;
    gates.reserve(pairs.size());
    for (const auto& [a, b] : pairs) gates.push_back({a, b, haar_unitary(4, rng)});
    circuit.layers.push_back(std::move(gates));
  }
  return circuit;
}

void apply_circuit(const LayeredCircuit& circuit, ComplexMatrix& w) {
  validate_circuit(circuit);
  if (w.rows() != (Index{1} << circuit.n_qubits)) {
    throw std::invalid_argument("apply_circuit: dimension mismatch");
  }
  for (const auto& layer : circuit.layers) {
    for (const auto& gate : layer) apply_gate(gate, circuit.n_qubits, w, false);
  }
}

void apply_circuit_adjoint(const LayeredCircuit& circuit, ComplexMatrix& w) {
  validate_circuit(circuit);
  if (w.rows() != (Index{1} << circuit.n_qubits)) {
    throw std::invalid_argument("apply_circuit_adjoint: dimension mismatch");
  }
  for (auto layer = circuit.layers.rbegin(); layer != circuit.layers.rend(); ++layer) {
    for (auto gate = layer->rbegin(); gate != layer->rend(); ++gate) {
      apply_gate(*gate, circuit.n_qubits, w, true);
    }
  }
}

ComplexMatrix circuit_unitary(const LayeredCircuit& circuit) {
  validate_circuit(circuit);
  const Index dim = Index{1} << circuit.n_qubits;
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  apply_circuit(circuit, u);
  return u;
}

ComplexMatrix nohiding_unitary() {
  using namespace std::complex_literals;
  ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -1i, 1i, 0;
  sz << 1, 0, 0, -1;
  // |ab⟩⟨cd| on the two bath qubits.
  auto outer = [](int ket, int bra) {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(ket, bra) = 1.0;
    return m;
  };
  return kron(id, outer(0b01, 0b00)) + kron(sx, outer(0b00, 0b01)) -
         1i * kron(sy, outer(0b11, 0b10)) - kron(sz, outer(0b10, 0b11));
}

Scrambler Scrambler::spin_bath(SpinBathModel model, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("spin-bath scrambler: time must be finite");
  auto spectrum = std::make_shared<const Spectrum>(spin_bath_spectrum(model));
  return Scrambler(SpinBath{std::make_shared<const SpinBathModel>(std::move(model)),
                            std::move(spectrum), t});
}

Scrambler Scrambler::circuit(LayeredCircuit circuit) {
  validate_circuit(circuit);
  return Scrambler(Circuit{std::make_shared<const LayeredCircuit>(std::move(circuit))});
}

Scrambler Scrambler::no_hiding() {
  return Scrambler(
      Fixed{std::make_shared<const ComplexMatrix>(nohiding_unitary()), ScramblerKind::NoHiding});
}

Scrambler Scrambler::explicit_unitary(ComplexMatrix u) {
  if (u.rows() != u.cols()) throw std::invalid_argument("explicit scrambler must be square");
  qubit_count(u.rows());
  check_dimension(u.rows());
  if (unitarity_residual(u) > kUnitaryTolerance) {
    throw std::invalid_argument("explicit scrambler is not unitary");
  }
  return Scrambler(
      Fixed{std::make_shared<const ComplexMatrix>(std::move(u)), ScramblerKind::Explicit});
}

ScramblerKind Scrambler::kind() const {
  if (std::holds_alternative<SpinBath>(impl_)) return ScramblerKind::SpinBath;
  if (std::holds_alternative<Circuit>(impl_)) return ScramblerKind::Circuit;
  return std::get<Fixed>(impl_).kind;
}

int Scrambler::n_qubits() const {
  if (const auto* s = std::get_if<SpinBath>(&impl_)) return s->model->n_qubits();
  if (const auto* c = std::get_if<Circuit>(&impl_)) return c->circuit->n_qubits;
  return qubit_count(std::get<Fixed>(impl_).u->rows());
}

Scrambler Scrambler::at_time(double t) const {
  if (!std::isfinite(t)) throw std::invalid_argument("Scrambler::at_time: time must be finite");
  Scrambler out = *this;
  if (auto* s = std::get_if<SpinBath>(&out.impl_)) s->t = t;
  return out;
}

double Scrambler::time() const {
  if (const auto* s = std::get_if<SpinBath>(&impl_)) return s->t;
  return 0.0;
}

ComplexMatrix Scrambler::unitary() const {
  if (const auto* s = std::get_if<SpinBath>(&impl_)) return propagator(*s->spectrum, s->t);
  if (const auto* c = std::get_if<Circuit>(&impl_)) return circuit_unitary(*c->circuit);
  return *std::get<Fixed>(impl_).u;
}

ComplexMatrix Scrambler::adjoint_unitary() const {
  if (const auto* s = std::get_if<SpinBath>(&impl_)) return propagator(*s->spectrum, -s->t);
  return unitary().adjoint();
}

void Scrambler::apply(ComplexMatrix& w) const {
  if (const auto* s = std::get_if<SpinBath>(&impl_)) {
    const auto& v = s->spectrum->eigenvectors;
    ComplexMatrix coeffs = v.adjoint() * w;
    for (Index k = 0; k < coeffs.rows(); ++k) {
      coeffs.row(k) *= std::polar(1.0, -s->spectrum->eigenvalues(k) * s->t);
    }
    w.noalias() = v * coeffs;
  } else if (const auto* c = std::get_if<Circuit>(&impl_)) {
    apply_circuit(*c->circuit, w);
  } else {
    w = (*std::get<Fixed>(impl_).u * w).eval();
  }
}

void Scrambler::apply_adjoint(ComplexMatrix& w) const {
  if (std::holds_alternative<SpinBath>(impl_)) {
    at_time(-time()).apply(w);
  } else if (const auto* c = std::get_if<Circuit>(&impl_)) {
    apply_circuit_adjoint(*c->circuit, w);
  } else {
    w = (std::get<Fixed>(impl_).u->adjoint() * w).eval();
  }
}

const Spectrum* Scrambler::spectrum() const {
  if (const auto* s = std::get_if<SpinBath>(&impl_)) return s->spectrum.get();
  return nullptr;
}

const SpinBathModel* Scrambler::spin_bath_model() const {
  if (const auto* s = std::get_if<SpinBath>(&impl_)) return s->model.get();
  return nullptr;
}

}  // namespace scramble
