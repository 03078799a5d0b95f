// Exact two-point-measurement statistics for the FTAD channel fed by the
// polarization-entangled source: the joint trajectory distribution
// P(gamma, gamma', j) = p_gamma |<gamma'|E_j|gamma>|^2, per-trajectory
// stochastic entropy production sigma = ln(p_gamma / ptilde_gamma') + Phi_j,
// and the fluctuation-theorem functionals <sigma> and <e^{-sigma}>.
// All entropic quantities are in nats.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "ftadsim/channel.hpp"
#include "ftadsim/linalg.hpp"

namespace ftadsim {

// The entangled pair sqrt(delta)|00> + sqrt(1-delta)|11> reduces on the
// system side to the thermal state diag(delta, 1-delta); detecting the
// partner photon fixes the initial TPM outcome gamma with p_gamma =
// (delta, 1-delta).
struct SourceParams {
  double delta = 0.5;

  static SourceParams with_occupation(double delta) {
    SourceParams s{delta};
    s.validate();
    return s;
  }

  void validate() const {
    if (!(delta >= 0.0 && delta <= 1.0)) {
      throw std::invalid_argument("SourceParams: delta must be in [0,1]");
    }
  }
};

struct Outcome {
  int gamma = 0;        // initial outcome, from the partner photon
  int gamma_prime = 0;  // final outcome, on the system photon
  int j = 1;            // Kraus / path index, 1-based

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

// Canonical ordering of the 16 outcomes: gamma, then gamma', then j.
inline std::size_t outcome_index(int gamma, int gamma_prime, int j) {
  if (gamma < 0 || gamma > 1 || gamma_prime < 0 || gamma_prime > 1 || j < 1 || j > 4) {
    throw std::invalid_argument("outcome_index: outcome out of range");
  }
  return static_cast<std::size_t>((gamma * 2 + gamma_prime) * 4 + (j - 1));
}

inline std::array<Outcome, 16> all_outcomes() {
  std::array<Outcome, 16> out{};
  for (int g = 0; g < 2; ++g) {
    for (int gp = 0; gp < 2; ++gp) {
      for (int j = 1; j <= 4; ++j) {
        out[outcome_index(g, gp, j)] = Outcome{g, gp, j};
      }
    }
  }
  return out;
}

class TpmDistribution {
 public:
  TpmDistribution(std::array<double, 16> probs, SourceParams src, FtadParams ch)
      : probs_(probs), src_(src), ch_(ch) {
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) {
        throw std::invalid_argument("TpmDistribution: negative probability");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("TpmDistribution: probabilities must sum to 1");
    }
    // Excitation conservation restricts the support to six trajectories:
    // the no-jump operators keep gamma' = gamma and the jump operators force
    // 1 -> 0 (j = 2) or 0 -> 1 (j = 4).
    for (const Outcome& o : all_outcomes()) {
      const bool allowed = (o.j == 1 || o.j == 3) ? o.gamma == o.gamma_prime
                                                  : (o.j == 2 ? o.gamma == 1 && o.gamma_prime == 0
                                                              : o.gamma == 0 && o.gamma_prime == 1);
      if (!allowed && probs_[outcome_index(o.gamma, o.gamma_prime, o.j)] != 0.0) {
        throw std::invalid_argument("TpmDistribution: excitation-violating trajectory populated");
      }
    }
    p_initial_ = {src.delta, 1.0 - src.delta};
    p_final_ = {0.0, 0.0};
    for (int g = 0; g < 2; ++g) {
      for (int gp = 0; gp < 2; ++gp) {
        for (int j = 1; j <= 4; ++j) {
          p_final_[static_cast<std::size_t>(gp)] += prob(g, gp, j);
        }
      }
    }
  }

  double prob(int gamma, int gamma_prime, int j) const {
    return probs_[outcome_index(gamma, gamma_prime, j)];
  }
  const std::array<double, 16>& probs() const { return probs_; }

  double path_probability(int j) const {
    double s = 0.0;
    for (int g = 0; g < 2; ++g) {
      for (int gp = 0; gp < 2; ++gp) s += prob(g, gp, j);
    }
    return s;
  }

  const std::array<double, 2>& p_initial() const { return p_initial_; }
  const std::array<double, 2>& p_final() const { return p_final_; }
  const SourceParams& source() const { return src_; }
  const FtadParams& channel_params() const { return ch_; }

 private:
  std::array<double, 16> probs_;
  std::array<double, 2> p_initial_;
  std::array<double, 2> p_final_;
  SourceParams src_;
  FtadParams ch_;
};

enum class SigmaStatus { finite, plus_infinite, minus_infinite, undefined };

struct TrajectoryRecord {
  Outcome outcome;
  double probability = 0.0;
  double sigma = 0.0;
  SigmaStatus status = SigmaStatus::finite;
};

inline TpmDistribution joint_distribution(const SourceParams& src, const FtadParams& ch) {
  src.validate();
  const KrausChannel channel = build_ftad(ch);
  const std::array<double, 2> p_gamma{src.delta, 1.0 - src.delta};

  std::array<double, 16> probs{};
  for (int g = 0; g < 2; ++g) {
    for (int gp = 0; gp < 2; ++gp) {
      for (int j = 1; j <= 4; ++j) {
        const Complex amp = channel.op(j)(static_cast<std::size_t>(gp), static_cast<std::size_t>(g));
        probs[outcome_index(g, gp, j)] = p_gamma[static_cast<std::size_t>(g)] * std::norm(amp);
      }
    }
  }
  return TpmDistribution(probs, src, ch);
}

// Entropy production for all 16 trajectories, including zero-probability
// ones (the final marginal averages over all paths, so sigma is well
// defined on unsupported trajectories too). Degenerate parameters are
// flagged per record instead of failing the whole table:
//   ptilde_gamma' = 0        -> undefined
//   p_gamma = 0, ptilde > 0  -> minus_infinite
//   infinite flux on j=2,4   -> sign of the flux, or undefined if the
//                               ln-term is itself infinite the other way.
inline std::vector<TrajectoryRecord> entropy_production(const TpmDistribution& dist,
                                                        const FluxTable& flux) {
  std::vector<TrajectoryRecord> records;
  records.reserve(16);
  const double inf = std::numeric_limits<double>::infinity();

  for (const Outcome& o : all_outcomes()) {
    TrajectoryRecord rec;
    rec.outcome = o;
    rec.probability = dist.prob(o.gamma, o.gamma_prime, o.j);

    const double pg = dist.p_initial()[static_cast<std::size_t>(o.gamma)];
    const double pt = dist.p_final()[static_cast<std::size_t>(o.gamma_prime)];
    const bool flux_infinite = !flux.finite && (o.j == 2 || o.j == 4);

    if (pt <= 0.0) {
      rec.status = SigmaStatus::undefined;
    } else if (pg <= 0.0) {
      if (flux_infinite && flux.of(o.j) > 0.0) {
        rec.status = SigmaStatus::undefined;  // -inf + inf
      } else {
        rec.status = SigmaStatus::minus_infinite;
        rec.sigma = -inf;
      }
    } else if (flux_infinite) {
      rec.status = flux.of(o.j) > 0.0 ? SigmaStatus::plus_infinite : SigmaStatus::minus_infinite;
      rec.sigma = flux.of(o.j);
    } else {
      rec.sigma = std::log(pg / pt) + flux.of(o.j);
      rec.status = SigmaStatus::finite;
    }
    records.push_back(rec);
  }
  return records;
}

// <sigma> over the distribution. Zero-probability records contribute
// nothing regardless of their sigma status; a supported record with
// undefined sigma is an error. Supported infinite sigma propagates as the
// IEEE limit (only reachable at p in {0,1}).
inline double average_sigma(std::span<const TrajectoryRecord> records) {
  double avg = 0.0;
  for (const TrajectoryRecord& r : records) {
    if (r.probability <= 0.0) continue;
    if (r.status == SigmaStatus::undefined) {
      throw std::domain_error("average_sigma: supported trajectory has undefined sigma");
    }
    avg += r.probability * r.sigma;
  }
  return avg;
}

// <e^{-sigma}>, the integral-fluctuation-theorem functional; equals 1
// wherever the flux is finite. Supported +infinite sigma contributes 0
// (its e^{-sigma} limit), which is how the identity degrades at p in {0,1}.
inline double ft_functional(std::span<const TrajectoryRecord> records) {
  double avg = 0.0;
  for (const TrajectoryRecord& r : records) {
    if (r.probability <= 0.0) continue;
    if (r.status == SigmaStatus::undefined) {
      throw std::domain_error("ft_functional: supported trajectory has undefined sigma");
    }
    if (r.status == SigmaStatus::plus_infinite) continue;
    avg += r.probability * std::exp(-r.sigma);
  }
  return avg;
}

// Both sides of <ln(p_gamma/ptilde_gamma')> = S(Lambda[rho]) - S(rho).
struct EntropyChange {
  double trajectory_average = 0.0;  // left side, from the TPM distribution
  double state_delta = 0.0;         // right side, from von Neumann entropies
};

inline EntropyChange system_entropy_change(const SourceParams& src, const FtadParams& ch) {
  const TpmDistribution dist = joint_distribution(src, ch);

  EntropyChange out;
  for (const Outcome& o : all_outcomes()) {
    const double p = dist.prob(o.gamma, o.gamma_prime, o.j);
    if (p <= 0.0) continue;
    const double pg = dist.p_initial()[static_cast<std::size_t>(o.gamma)];
    const double pt = dist.p_final()[static_cast<std::size_t>(o.gamma_prime)];
    out.trajectory_average += p * std::log(pg / pt);
  }

  const std::array<double, 2> initial{src.delta, 1.0 - src.delta};
  const DensityMatrix rho = DensityMatrix::diagonal(initial);
  const DensityMatrix rho_out = apply(build_ftad(ch), rho);
  out.state_delta = von_neumann_entropy(rho_out) - von_neumann_entropy(rho);
  return out;
}

}  // namespace ftadsim
