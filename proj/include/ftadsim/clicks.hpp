// Monte Carlo emulation of the counting experiment. Each blocked-path
// configuration j is a separate acquisition whose coincidence counts follow
// Poisson statistics; the default noise model draws every outcome cell
// (gamma, gamma', j) as an independent Poisson variate with mean
// N * P(gamma, gamma', j), which is exactly the law of "N_j ~ Poisson(N P(j))
// split multinomially over (gamma, gamma')". The alternative multinomial
// model draws one joint acquisition of exactly N coincidences.
//
// Estimators reconstruct sigma from the counted marginals,
// sigma_hat = ln(N_gamma / Ntilde_gamma') + Phi_j, and propagate Poisson
// count variances (Var n = n, with the sqrt(1) convention for empty bins)
// to sigma, <sigma> and <e^{-sigma}> by the first-order delta method; the
// propagated errors are approximate by construction.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ftadsim/channel.hpp"
#include "ftadsim/rng.hpp"
#include "ftadsim/tpm.hpp"

namespace ftadsim {

enum class NoiseModel { multinomial, poisson_per_outcome };

struct RunConfig {
  SourceParams src;
  FtadParams ch;
  std::uint64_t counts_per_setting = 10000;  // expected coincidences per blocked-path setting
  std::uint64_t seed = 0;
  NoiseModel noise_model = NoiseModel::poisson_per_outcome;

  void validate() const {
    src.validate();
    ch.validate();
    if (counts_per_setting < 1) {
      throw std::invalid_argument("RunConfig: counts_per_setting must be >= 1");
    }
  }
};

struct ClickRecord {
  Outcome outcome;
  std::uint64_t count = 0;
  double estimated_prob = 0.0;
  double std_err = 0.0;  // Poissonian, sqrt(max(count,1)) / total

  friend bool operator==(const ClickRecord&, const ClickRecord&) = default;
};

struct SigmaEstimate {
  Outcome outcome;
  double sigma = 0.0;
  double std_err = 0.0;
  SigmaStatus status = SigmaStatus::finite;
};

struct ValueWithError {
  double value = 0.0;
  double std_err = 0.0;
};

struct EstimateReport {
  double eta = 0.0;
  std::vector<ClickRecord> records;           // 16, canonical outcome order
  std::vector<SigmaEstimate> sigma_estimates; // 16, from estimated marginals
  std::array<double, 2> p_initial_est{0.0, 0.0};
  std::array<double, 2> p_final_est{0.0, 0.0};
  std::array<double, 2> p_final_theory{0.0, 0.0};
  std::vector<double> prob_theory;            // 16
  std::vector<TrajectoryRecord> sigma_theory; // 16
  ValueWithError avg_sigma;
  ValueWithError ft_value;
  double fidelity = 0.0;  // Bhattacharyya coefficient vs theory
};

inline std::vector<ClickRecord> simulate(const RunConfig& cfg, const TpmDistribution& dist) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  const double n = static_cast<double>(cfg.counts_per_setting);

  std::array<std::uint64_t, 16> counts{};
  if (cfg.noise_model == NoiseModel::poisson_per_outcome) {
    for (std::size_t i = 0; i < 16; ++i) {
      counts[i] = sample_poisson(rng, n * dist.probs()[i]);
    }
  } else {
    const std::vector<std::uint64_t> drawn =
        sample_multinomial(rng, cfg.counts_per_setting, dist.probs());
    for (std::size_t i = 0; i < 16; ++i) counts[i] = drawn[i];
  }

  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;

  std::vector<ClickRecord> records;
  records.reserve(16);
  for (const Outcome& o : all_outcomes()) {
    const std::size_t i = outcome_index(o.gamma, o.gamma_prime, o.j);
    ClickRecord rec;
    rec.outcome = o;
    rec.count = counts[i];
    if (total > 0) {
      rec.estimated_prob = static_cast<double>(counts[i]) / static_cast<double>(total);
      rec.std_err = std::sqrt(static_cast<double>(std::max<std::uint64_t>(counts[i], 1))) /
                    static_cast<double>(total);
    }
    records.push_back(rec);
  }
  return records;
}

namespace detail {

// Variance of a count under the Poisson model, with empty bins assigned
// variance 1 (the sqrt(1) convention).
inline double count_variance(std::uint64_t count) {
  return static_cast<double>(std::max<std::uint64_t>(count, 1));
}

}  // namespace detail

inline EstimateReport estimate(const std::vector<ClickRecord>& records,
                               const TpmDistribution& theory, const FluxTable& flux) {
  if (records.size() != 16) {
    throw std::invalid_argument("estimate: expected 16 click records");
  }
  double total = 0.0;
  std::array<double, 2> row{0.0, 0.0};  // N_gamma
  std::array<double, 2> col{0.0, 0.0};  // Ntilde_gamma'
  for (const ClickRecord& r : records) {
    total += static_cast<double>(r.count);
    row[static_cast<std::size_t>(r.outcome.gamma)] += static_cast<double>(r.count);
    col[static_cast<std::size_t>(r.outcome.gamma_prime)] += static_cast<double>(r.count);
  }
  if (total <= 0.0) {
    throw std::invalid_argument("estimate: total count is zero");
  }

  EstimateReport report;
  report.eta = theory.channel_params().eta;
  report.records = records;
  report.p_initial_est = {row[0] / total, row[1] / total};
  report.p_final_est = {col[0] / total, col[1] / total};
  report.p_final_theory = theory.p_final();
  report.prob_theory.assign(theory.probs().begin(), theory.probs().end());
  report.sigma_theory = entropy_production(theory, flux);

  const double inf = std::numeric_limits<double>::infinity();

  // Per-trajectory sigma from counted marginals.
  for (const ClickRecord& r : records) {
    SigmaEstimate est;
    est.outcome = r.outcome;
    const double ng = row[static_cast<std::size_t>(r.outcome.gamma)];
    const double nt = col[static_cast<std::size_t>(r.outcome.gamma_prime)];
    const bool flux_infinite = !flux.finite && (r.outcome.j == 2 || r.outcome.j == 4);

    if (nt <= 0.0) {
      est.status = SigmaStatus::undefined;
    } else if (ng <= 0.0) {
      if (flux_infinite && flux.of(r.outcome.j) > 0.0) {
        est.status = SigmaStatus::undefined;
      } else {
        est.status = SigmaStatus::minus_infinite;
        est.sigma = -inf;
      }
    } else if (flux_infinite) {
      est.status = flux.of(r.outcome.j) > 0.0 ? SigmaStatus::plus_infinite
                                              : SigmaStatus::minus_infinite;
      est.sigma = flux.of(r.outcome.j);
    } else {
      est.sigma = std::log(ng / nt) + flux.of(r.outcome.j);
      est.status = SigmaStatus::finite;
      // Delta method over the independent counts entering the marginals.
      double var = 0.0;
      for (const ClickRecord& c : records) {
        const double dg =
            (c.outcome.gamma == r.outcome.gamma ? 1.0 / ng : 0.0) -
            (c.outcome.gamma_prime == r.outcome.gamma_prime ? 1.0 / nt : 0.0);
        var += dg * dg * detail::count_variance(c.count);
      }
      est.std_err = std::sqrt(var);
    }
    report.sigma_estimates.push_back(est);
  }

  // <sigma> and <e^{-sigma}> from estimated probabilities. Supported cells
  // always have both marginals positive, so their sigma is finite whenever
  // the flux is; infinite flux propagates as in the exact module.
  double avg = 0.0;
  double ft = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    const ClickRecord& r = records[i];
    if (r.count == 0) continue;
    const SigmaEstimate& est = report.sigma_estimates[i];
    if (est.status == SigmaStatus::undefined) {
      throw std::domain_error("estimate: supported trajectory has undefined sigma");
    }
    avg += r.estimated_prob * est.sigma;
    if (est.status != SigmaStatus::plus_infinite) {
      ft += r.estimated_prob * std::exp(-est.sigma);
    }
  }
  report.avg_sigma.value = avg;
  report.ft_value.value = ft;

  if (std::isfinite(avg)) {
    // d<sigma>/dn_c = (sigma_c - <sigma>)/T: the marginal corrections cancel
    // against the weight corrections when summed over a full row or column.
    double var = 0.0;
    for (std::size_t c = 0; c < 16; ++c) {
      const SigmaEstimate& est = report.sigma_estimates[c];
      if (est.status != SigmaStatus::finite) continue;
      const double g = (est.sigma - avg) / total;
      var += g * g * detail::count_variance(records[c].count);
    }
    report.avg_sigma.std_err = std::sqrt(var);
  }

  if (std::isfinite(ft) && flux.finite) {
    // ft = (1/T) sum_i n_i r_i with r_i = e^{-Phi_j(i)} Ntilde_{g'(i)} / N_{g(i)}.
    std::array<double, 16> ratio{};
    for (std::size_t i = 0; i < 16; ++i) {
      const Outcome& o = records[i].outcome;
      const double ng = row[static_cast<std::size_t>(o.gamma)];
      const double nt = col[static_cast<std::size_t>(o.gamma_prime)];
      ratio[i] = ng > 0.0 ? std::exp(-flux.of(o.j)) * nt / ng : 0.0;
    }
    double var = 0.0;
    for (std::size_t c = 0; c < 16; ++c) {
      const Outcome& oc = records[c].outcome;
      if (row[static_cast<std::size_t>(oc.gamma)] <= 0.0 ||
          col[static_cast<std::size_t>(oc.gamma_prime)] <= 0.0) {
        continue;
      }
      double g = (ratio[c] - ft) / total;
      for (std::size_t i = 0; i < 16; ++i) {
        if (records[i].count == 0) continue;
        const Outcome& oi = records[i].outcome;
        const double ng = row[static_cast<std::size_t>(oi.gamma)];
        const double nt = col[static_cast<std::size_t>(oi.gamma_prime)];
        const double ni = static_cast<double>(records[i].count);
        double dr = 0.0;
        if (oi.gamma_prime == oc.gamma_prime) dr += 1.0 / ng;
        if (oi.gamma == oc.gamma) dr -= nt / (ng * ng);
        g += ni * std::exp(-flux.of(oi.j)) * dr / total;
      }
      var += g * g * detail::count_variance(records[c].count);
    }
    report.ft_value.std_err = std::sqrt(var);
  }

  // Bhattacharyya coefficient between estimated and exact distributions.
  double fid = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    fid += std::sqrt(records[i].estimated_prob * theory.probs()[i]);
  }
  report.fidelity = fid;
  return report;
}

inline EstimateReport simulate_and_estimate(const RunConfig& cfg) {
  const TpmDistribution dist = joint_distribution(cfg.src, cfg.ch);
  return estimate(simulate(cfg, dist), dist, entropy_flux(cfg.ch));
}

// One report per eta value. Every point owns an independent stream derived
// from (seed, index), so parallel and serial evaluation orders produce
// byte-identical results when merged by index.
inline std::vector<EstimateReport> sweep(const RunConfig& base, const std::vector<double>& etas) {
  base.validate();
  std::vector<EstimateReport> reports;
  reports.reserve(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) {
    RunConfig cfg = base;
    cfg.ch = FtadParams::from_probabilities(base.ch.p, etas[i]);
    cfg.seed = derive_seed(base.seed, i);
    reports.push_back(simulate_and_estimate(cfg));
  }
  return reports;
}

}  // namespace ftadsim
