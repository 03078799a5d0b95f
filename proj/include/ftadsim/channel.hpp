// Finite-temperature amplitude damping (FTAD) channel on a qubit: the four
// Kraus operators, the partial-swap dilation with a thermal single-qubit
// environment, the time-reversed channel, and the per-jump entropy fluxes.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ftadsim/linalg.hpp"

namespace ftadsim {

// Channel parameters. p is the thermal occupation probability of the
// environment, eta the coupling strength. The optical realization sets them
// with wave-plate angles, p = sin^2(phi) and eta = cos^2(theta); both forms
// are accepted and kept consistent.
struct FtadParams {
  double p = 0.0;
  double eta = 1.0;
  std::optional<double> phi;
  std::optional<double> theta;

  static FtadParams from_probabilities(double p, double eta) {
    FtadParams params;
    params.p = p;
    params.eta = eta;
    params.validate();
    return params;
  }

  static FtadParams from_angles(double phi, double theta) {
    FtadParams params;
    const double sp = std::sin(phi);
    const double ct = std::cos(theta);
    params.p = sp * sp;
    params.eta = ct * ct;
    params.phi = phi;
    params.theta = theta;
    params.validate();
    return params;
  }

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("FtadParams: p must be in [0,1]");
    }
    if (!(eta >= 0.0 && eta <= 1.0)) {
      throw std::invalid_argument("FtadParams: eta must be in [0,1]");
    }
    if (phi) {
      const double sp = std::sin(*phi);
      if (std::abs(p - sp * sp) > 1e-12) {
        throw std::invalid_argument("FtadParams: p and phi are inconsistent");
      }
    }
    if (theta) {
      const double ct = std::cos(*theta);
      if (std::abs(eta - ct * ct) > 1e-12) {
        throw std::invalid_argument("FtadParams: eta and theta are inconsistent");
      }
    }
  }

  // Principal-angle trigonometric values, computed directly from (p, eta) so
  // that the interferometer and the Kraus matrices share identical entries.
  double sin_phi() const { return std::sqrt(p); }
  double cos_phi() const { return std::sqrt(1.0 - p); }
  double cos_theta() const { return std::sqrt(eta); }
  double sin_theta() const { return std::sqrt(1.0 - eta); }
};

// An ordered list of Kraus operators with their 1-based jump labels
// (stored 0-based internally; operator j lives at operators()[j-1]).
class KrausChannel {
 public:
  KrausChannel(std::size_t dim, std::vector<ComplexMatrix> operators, std::vector<int> labels)
      : dim_(dim), operators_(std::move(operators)), labels_(std::move(labels)) {
    if (operators_.empty() || labels_.size() != operators_.size()) {
      throw std::invalid_argument("KrausChannel: operators/labels mismatch");
    }
    for (const ComplexMatrix& e : operators_) {
      if (e.rows() != dim_ || e.cols() != dim_) {
        throw std::invalid_argument("KrausChannel: operator dimension mismatch");
      }
    }
    ComplexMatrix sum(dim_, dim_);
    for (const ComplexMatrix& e : operators_) sum += dagger(e) * e;
    if (!approx_equal(sum, ComplexMatrix::identity(dim_), 1e-12)) {
      throw std::invalid_argument("KrausChannel: completeness sum E^dag E != I");
    }
  }

  std::size_t dim() const { return dim_; }
  const std::vector<ComplexMatrix>& operators() const { return operators_; }
  const std::vector<int>& labels() const { return labels_; }
  const ComplexMatrix& op(int label) const { return operators_.at(static_cast<std::size_t>(label - 1)); }

 private:
  std::size_t dim_;
  std::vector<ComplexMatrix> operators_;
  std::vector<int> labels_;
};

// Partial-swap dilation: a 4x4 unitary on system (x) environment together
// with the thermal environment state diag(p, 1-p).
struct DilationUnitary {
  ComplexMatrix matrix;
  DensityMatrix env_state;

  double occupation() const { return env_state.matrix()(0, 0).real(); }
};

// Entropy flux per jump label, in nats. When p is 0 or 1 the fluxes on the
// jump labels diverge; that case is reported through `finite` rather than
// fed into arithmetic. The stored phi values then carry the limiting signs
// (+/- infinity) for consumers that only need the direction.
struct FluxTable {
  std::array<double, 4> phi{0.0, 0.0, 0.0, 0.0};
  bool finite = true;

  double of(int label) const { return phi.at(static_cast<std::size_t>(label - 1)); }
};

inline KrausChannel build_ftad(const FtadParams& params) {
  params.validate();
  const double sp = std::sqrt(params.p);
  const double sq = std::sqrt(1.0 - params.p);
  const double se = std::sqrt(params.eta);
  const double sj = std::sqrt(1.0 - params.eta);

  ComplexMatrix e1(2, 2), e2(2, 2), e3(2, 2), e4(2, 2);
  e1(0, 0) = sp;
  e1(1, 1) = sp * se;
  e2(0, 1) = sp * sj;
  e3(0, 0) = sq * se;
  e3(1, 1) = sq;
  e4(1, 0) = sq * sj;
  return KrausChannel(2, {e1, e2, e3, e4}, {1, 2, 3, 4});
}

inline DensityMatrix apply(const KrausChannel& channel, const DensityMatrix& rho) {
  if (rho.dim() != channel.dim()) {
    throw std::invalid_argument("apply: state dimension does not match channel");
  }
  ComplexMatrix out(channel.dim(), channel.dim());
  for (const ComplexMatrix& e : channel.operators()) {
    out += e * rho.matrix() * dagger(e);
  }
  return DensityMatrix(std::move(out));
}

inline DilationUnitary build_dilation(const FtadParams& params) {
  params.validate();
  const double se = std::sqrt(params.eta);
  const double sj = std::sqrt(1.0 - params.eta);

  // Partial swap on the one-excitation sector, system slow / environment
  // fast: basis order |00>, |01>, |10>, |11>.
  ComplexMatrix u = ComplexMatrix::identity(4);
  u(1, 1) = se;
  u(1, 2) = -sj;
  u(2, 1) = sj;
  u(2, 2) = se;

  if (!is_unitary(u, 1e-12)) {
    throw std::runtime_error("build_dilation: constructed matrix is not unitary");
  }

  // Total excitation number n (x) I + I (x) n must be conserved.
  const std::array<double, 2> n{0.0, 1.0};
  const ComplexMatrix number_op =
      tensor(ComplexMatrix::diagonal(n), ComplexMatrix::identity(2)) +
      tensor(ComplexMatrix::identity(2), ComplexMatrix::diagonal(n));
  if (max_abs_diff(u * number_op, number_op * u) > 1e-12) {
    throw std::runtime_error("build_dilation: unitary does not conserve excitation number");
  }

  const std::array<double, 2> thermal{params.p, 1.0 - params.p};
  return DilationUnitary{u, DensityMatrix::diagonal(thermal)};
}

// Extracts the four Kraus operators E_j = sqrt(w) <e_out| U |e_in> from the
// dilation (environment bra/kets, weights from the thermal occupation).
// Each operator is phase-normalized so its largest entry is real positive:
// the raw blocks of a real partial swap necessarily carry one opposite sign
// between the two jump operators, which is an unobservable per-operator
// phase, and normalizing pins the same convention as build_ftad.
inline KrausChannel kraus_from_dilation(const DilationUnitary& dilation) {
  const double p = dilation.occupation();
  const double sp = std::sqrt(p);
  const double sq = std::sqrt(1.0 - p);

  const auto block = [&dilation](std::size_t e_out, std::size_t e_in) {
    ComplexMatrix b(2, 2);
    for (std::size_t sr = 0; sr < 2; ++sr) {
      for (std::size_t sc = 0; sc < 2; ++sc) {
        b(sr, sc) = dilation.matrix(2 * sr + e_out, 2 * sc + e_in);
      }
    }
    return b;
  };

  std::vector<ComplexMatrix> ops;
  ops.push_back(phase_normalized(block(0, 0) * Complex(sp)));
  ops.push_back(phase_normalized(block(1, 0) * Complex(sp)));
  ops.push_back(phase_normalized(block(1, 1) * Complex(sq)));
  ops.push_back(phase_normalized(block(0, 1) * Complex(sq)));
  return KrausChannel(2, std::move(ops), {1, 2, 3, 4});
}

// Entropy fluxes fixed by the time-reversal condition E~_j = e^{-Phi_j/2}
// E_j^dag with the no-jump gauge Phi_1 = Phi_3 = 0; the jump fluxes are
// Phi_2 = -Phi_4 = ln(p/(1-p)). The closed form is cross-checked against
// the reversal identity sum_j e^{-Phi_j} E_j E_j^dag = I.
inline FluxTable entropy_flux(const FtadParams& params) {
  params.validate();
  if (params.p <= 0.0 || params.p >= 1.0) {
    FluxTable t;
    t.finite = false;
    const double inf = std::numeric_limits<double>::infinity();
    t.phi = {0.0, params.p <= 0.0 ? -inf : inf, 0.0, params.p <= 0.0 ? inf : -inf};
    return t;
  }

  FluxTable t;
  t.phi = {0.0, std::log(params.p / (1.0 - params.p)), 0.0,
           -std::log(params.p / (1.0 - params.p))};

  const KrausChannel channel = build_ftad(params);
  ComplexMatrix check(2, 2);
  for (int j = 1; j <= 4; ++j) {
    const ComplexMatrix& e = channel.op(j);
    check += std::exp(-t.of(j)) * (e * dagger(e));
  }
  if (!approx_equal(check, ComplexMatrix::identity(2), 1e-12)) {
    throw std::runtime_error("entropy_flux: reversal identity violated");
  }
  return t;
}

inline KrausChannel reversed_channel(const KrausChannel& channel, const FluxTable& flux) {
  if (!flux.finite) {
    throw std::invalid_argument("reversed_channel: flux is infinite (p is 0 or 1)");
  }
  std::vector<ComplexMatrix> ops;
  ops.reserve(channel.operators().size());
  for (int j : channel.labels()) {
    ops.push_back(std::exp(-flux.of(j) / 2.0) * dagger(channel.op(j)));
  }
  return KrausChannel(channel.dim(), std::move(ops), channel.labels());
}

}  // namespace ftadsim
