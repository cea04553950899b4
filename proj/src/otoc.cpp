#include "scramble/otoc.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "scramble/parallel.hpp"
#include "scramble/seeding.hpp"

namespace scramble {

namespace {

constexpr double kImaginaryTolerance = 1e-8;

void require_spec(const OtocSpec& spec, int n) {
  for (const ComplexMatrix* op : {&spec.w_op, &spec.v_op, &spec.v_final_op}) {
    if (op->rows() != 2 || op->cols() != 2) {
      throw std::invalid_argument("OTOC operators must be 2x2");
    }
  }
  if (spec.w_target < 0 || spec.w_target >= n || spec.v_target < 0 || spec.v_target >= n) {
    throw std::out_of_range("OTOC target qubit out of range");
  }
}

struct MeanAndError {
  double mean;
  double std_error;
};

MeanAndError mean_and_error(std::span<const double> values) {
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double n = static_cast<double>(values.size());
  const double mean = sum.value() / n;
  CompensatedSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  const double var = values.size() > 1 ? sq.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double mean = sum.value() / static_cast<double>(values.size());
  CompensatedSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  return sq.value() / static_cast<double>(values.size() - 1);
}

}  // namespace

OtocSpec OtocSpec::from_axes(const BlochAxis& r, const BlochAxis& i, const BlochAxis& f,
                             BathState bath) {
  return {pauli_along(r), pauli_along(i), pauli_along(f), 0, 0, std::move(bath)};
}

double otoc_value(const ComplexMatrix& u, const OtocSpec& spec) {
  if (u.rows() != u.cols()) throw std::invalid_argument("otoc_value: unitary must be square");
  const int n = qubit_count(u.rows());
  require_spec(spec, n);

  ComplexMatrix wu = u;
  apply_local_left(spec.w_op, spec.w_target, n, wu);
  const ComplexMatrix w_t = u.adjoint() * wu;

  ComplexMatrix x = w_t;
  apply_local_right(spec.v_op, spec.v_target, n, x);
  ComplexMatrix y = x * w_t;
  apply_local_right(spec.v_final_op, spec.v_target, n, y);

  const Complex value = correlator_average(y, spec.bath);
  if (std::abs(value.imag()) > kImaginaryTolerance) {
    throw NumericalError("OTOC has imaginary residual " + std::to_string(value.imag()));
  }
  return value.real();
}

std::vector<double> otoc_time_series(const SpinBathModel& model, const OtocSpec& spec,
                                     std::span<const double> times) {
  const Spectrum spectrum = spin_bath_spectrum(model);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("OTOC times must be >= 0");
    out.push_back(otoc_value(propagator(spectrum, t), spec));
  }
  return out;
}

double haar_average_analytic(const OtocSpec& spec, Index dim) {
  const int n = qubit_count(dim);
  if (n < 2) throw std::invalid_argument("haar_average_analytic: need central qubit plus bath");
  require_spec(spec, n);
  const double big_n = static_cast<double>(dim);
  const double rest = big_n / 2.0;  // the other qubits contribute a trace factor of 2^(n-1)
  const double tr_w = spec.w_op.trace().real() * rest;
  const double tr_w2 = (spec.w_op * spec.w_op).trace().real() * rest;
  const double denom = big_n * (big_n * big_n - 1.0);
  const double a = (big_n * tr_w * tr_w - tr_w2) / denom;
  const double b = (big_n * tr_w2 - tr_w * tr_w) / denom;

  ComplexMatrix vvf = embed(spec.v_op, spec.v_target, n);
  apply_local_right(spec.v_final_op, spec.v_target, n, vvf);
  const Complex tr_v = spec.v_op.trace() * rest;
  const Complex avg_vvf = correlator_average(vvf, spec.bath);
  const Complex avg_vf = correlator_average(embed(spec.v_final_op, spec.v_target, n), spec.bath);
  return (a * avg_vvf + b * tr_v * avg_vf).real();
}

HaarEstimate haar_average_mc(const OtocSpec& spec, Index dim, std::size_t samples, Rng& rng,
                             unsigned workers) {
  if (samples < 100) throw std::invalid_argument("haar_average_mc: need at least 100 samples");
  const std::uint64_t master = rng();
  std::vector<double> values(samples);
  parallel_for(samples, workers, [&](std::size_t k) {
    Rng local(derive_seed(master, {k}));
    values[k] = otoc_value(haar_unitary(dim, local), spec);
  });
  const auto [mean, se] = mean_and_error(values);
  return {mean, se, samples};
}

double weingarten_fourth_moment(Index dim, const MomentIndices& idx) {
  for (Index i : idx) {
    if (i < 0 || i >= dim) throw std::out_of_range("moment index out of range");
  }
  const auto [m1, n1, m1p, n1p, m2, n2, m2p, n2p] = idx;
  auto d = [](Index a, Index b) { return a == b ? 1.0 : 0.0; };
  const double direct = d(m1, m1p) * d(m2, m2p) * d(n1, n1p) * d(n2, n2p) +
                        d(m1, m2p) * d(m2, m1p) * d(n1, n2p) * d(n2, n1p);
  const double crossed = d(m1, m1p) * d(m2, m2p) * d(n1, n2p) * d(n2, n1p) +
                         d(m1, m2p) * d(m2, m1p) * d(n1, n1p) * d(n2, n2p);
  const double n = static_cast<double>(dim);
  return direct / (n * n - 1.0) - crossed / (n * (n * n - 1.0));
}

FourthMomentCheck haar_fourth_moment_check(Index dim, const MomentIndices& idx,
                                           std::size_t samples, Rng& rng) {
  if (samples < 2) throw std::invalid_argument("haar_fourth_moment_check: need samples >= 2");
  const double analytic = weingarten_fourth_moment(dim, idx);
  const auto [m1, n1, m1p, n1p, m2, n2, m2p, n2p] = idx;
  std::vector<double> re(samples), im(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const ComplexMatrix u = haar_unitary(dim, rng);
    const Complex z = u(m1, n1) * std::conj(u(m1p, n1p)) * u(m2, n2) * std::conj(u(m2p, n2p));
    re[k] = z.real();
    im[k] = z.imag();
  }
  const auto r = mean_and_error(re);
  const auto i = mean_and_error(im);
  return {{r.mean, i.mean}, {r.std_error, i.std_error}, analytic, samples};
}

FluctuationResult fluctuation_study(int n_qubits, int layers, std::size_t samples, Rng& rng,
                                    unsigned workers, Pairing pairing) {
  if (samples < 2) throw std::invalid_argument("fluctuation_study: need at least two samples");
  const std::uint64_t master = rng();
  FluctuationResult out;
  out.n_qubits = n_qubits;
  out.runs.resize(samples);
  parallel_for(samples, workers, [&](std::size_t k) {
    Rng local(derive_seed(master, {k}));
    LayeredCircuit circuit = build_random_circuit(n_qubits, layers, local, pairing);
    const BlochAxis bob = BlochAxis::random(local);
    ProtocolConfig cfg{
        .scrambler = Scrambler::circuit(std::move(circuit)),
        .initial = BlochAxis::Z(),
        .bob = bob,
        .bath = ProductBath{std::vector<BlochAxis>(static_cast<std::size_t>(n_qubits - 1),
                                                   BlochAxis::Z())},
    };
    const auto b = bloch_vector(final_central_state(cfg));
    out.runs[k].prob = {0.5 * (1.0 + b[0]), 0.5 * (1.0 + b[1]), 0.5 * (1.0 + b[2])};
  });
  std::vector<double> z(samples);
  for (std::size_t k = 0; k < samples; ++k) z[k] = out.runs[k].prob[2];
  out.variance = sample_variance(z);
  Rng boot(derive_seed(master, {stream_tag("bootstrap")}));
  out.variance_std_error = bootstrap_variance_error(z, 400, boot);
  return out;
}

double fluctuation_variance(int n_qubits, int layers, std::size_t samples, Rng& rng,
                            unsigned workers) {
  if (samples < 30) throw std::invalid_argument("fluctuation_variance: need at least 30 samples");
  return fluctuation_study(n_qubits, layers, samples, rng, workers).variance;
}

double bootstrap_variance_error(std::span<const double> values, std::size_t resamples, Rng& rng) {
  if (values.size() < 2 || resamples < 2) return 0.0;
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> estimates(resamples);
  std::vector<double> draw(values.size());
  for (auto& e : estimates) {
    for (auto& d : draw) d = values[pick(rng)];
    e = sample_variance(draw);
  }
  return std::sqrt(sample_variance(estimates));
}

double scaling_fit(std::span<const VarianceRecord> records) {
  if (records.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 qubit counts");
  double mx = 0.0, my = 0.0;
  for (const auto& r : records) {
    if (!(r.variance > 0.0)) throw std::invalid_argument("scaling_fit: variances must be > 0");
    mx += r.n_qubits;
    my += std::log(r.variance);
  }
  mx /= static_cast<double>(records.size());
  my /= static_cast<double>(records.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& r : records) {
    const double dx = r.n_qubits - mx;
    sxy += dx * (std::log(r.variance) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("scaling_fit: qubit counts must differ");
  return sxy / sxx;
}

}  // namespace scramble
