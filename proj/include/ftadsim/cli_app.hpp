// Command-line front end. Subcommands:
//
//   exact     exact TPM trajectory table, marginals, <sigma>, <e^{-sigma}>
//   simulate  one Monte Carlo coincidence run at fixed parameters
//   sweep     Monte Carlo runs over an eta grid plus combined plot data
//   verify    full invariant grid, pass/fail per invariant
//   trace     per-stage interferometer amplitude dump (JSON)
//
// Channel parameters are accepted either as probabilities (--p, --eta) or as
// wave-plate angles (--phi, --theta with p = sin^2 phi, eta = cos^2 theta);
// giving both forms at the same precedence level is an error. Values come
// from, in decreasing precedence: command-line flags, the --config JSON
// file, the FTADSIM_SEED environment variable (seed only), built-in
// defaults. Exit codes: 0 success, 1 invalid configuration or I/O error,
// 2 invariant failure.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ftadsim/channel.hpp"
#include "ftadsim/clicks.hpp"
#include "ftadsim/interferometer.hpp"
#include "ftadsim/linalg.hpp"
#include "ftadsim/serialize.hpp"
#include "ftadsim/tpm.hpp"

namespace ftadsim::cli {

struct RawOptions {
  std::optional<double> delta, p, eta, phi, theta;
  std::optional<std::uint64_t> counts, seed;
  std::optional<double> eta_start, eta_stop;
  std::optional<int> eta_steps;
  std::optional<std::string> output, format, noise_model;
};

struct ResolvedOptions {
  SourceParams src;
  FtadParams ch;
  std::uint64_t counts = 10000;
  std::uint64_t seed = 12345;
  double eta_start = 0.0;
  double eta_stop = 1.0;
  int eta_steps = 21;
  std::string output;  // empty: derive from command name
  std::string format = "csv";
  NoiseModel noise_model = NoiseModel::poisson_per_outcome;
};

inline void add_common_options(CLI::App* cmd, RawOptions& raw) {
  cmd->add_option("--delta", raw.delta, "source thermal occupation delta in [0,1]");
  cmd->add_option("--p", raw.p, "channel thermal occupation p in [0,1]");
  cmd->add_option("--eta", raw.eta, "channel coupling strength eta in [0,1]");
  cmd->add_option("--phi", raw.phi, "wave-plate angle phi in radians (p = sin^2 phi)");
  cmd->add_option("--theta", raw.theta, "wave-plate angle theta in radians (eta = cos^2 theta)");
  cmd->add_option("--counts", raw.counts, "expected coincidences per blocked-path setting");
  cmd->add_option("--seed", raw.seed, "random seed (default from FTADSIM_SEED if set)");
  cmd->add_option("--eta-start", raw.eta_start, "sweep grid start");
  cmd->add_option("--eta-stop", raw.eta_stop, "sweep grid stop");
  cmd->add_option("--eta-steps", raw.eta_steps, "sweep grid point count");
  cmd->add_option("--output,-o", raw.output, "output file path");
  cmd->add_option("--format", raw.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--noise-model", raw.noise_model,
                  "noise model: poisson_per_outcome or multinomial")
      ->check(CLI::IsMember({"poisson_per_outcome", "multinomial"}));
}

inline RawOptions raw_from_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot read config file: " + path);
  }
  Json j = Json::parse(in);
  RawOptions raw;
  for (const auto& [key, value] : j.items()) {
    if (key == "delta") raw.delta = value.get<double>();
    else if (key == "p") raw.p = value.get<double>();
    else if (key == "eta") raw.eta = value.get<double>();
    else if (key == "phi") raw.phi = value.get<double>();
    else if (key == "theta") raw.theta = value.get<double>();
    else if (key == "counts") raw.counts = value.get<std::uint64_t>();
    else if (key == "seed") raw.seed = value.get<std::uint64_t>();
    else if (key == "eta_start") raw.eta_start = value.get<double>();
    else if (key == "eta_stop") raw.eta_stop = value.get<double>();
    else if (key == "eta_steps") raw.eta_steps = value.get<int>();
    else if (key == "output") raw.output = value.get<std::string>();
    else if (key == "format") raw.format = value.get<std::string>();
    else if (key == "noise_model") raw.noise_model = value.get<std::string>();
    else throw std::invalid_argument("unknown config file key: " + key);
  }
  return raw;
}

// Channel parameters from one precedence level. Returns nothing when the
// level does not mention them, throws when both forms are mixed.
inline std::optional<FtadParams> channel_params_from(const RawOptions& raw,
                                                     const FtadParams& fallback) {
  const bool prob_form = raw.p.has_value() || raw.eta.has_value();
  const bool angle_form = raw.phi.has_value() || raw.theta.has_value();
  if (prob_form && angle_form) {
    throw std::invalid_argument(
        "conflicting parameterization: give either --p/--eta or --phi/--theta, not both");
  }
  if (angle_form) {
    const double phi = raw.phi.value_or(std::asin(std::sqrt(fallback.p)));
    const double theta = raw.theta.value_or(std::acos(std::sqrt(fallback.eta)));
    return FtadParams::from_angles(phi, theta);
  }
  if (prob_form) {
    return FtadParams::from_probabilities(raw.p.value_or(fallback.p),
                                          raw.eta.value_or(fallback.eta));
  }
  return std::nullopt;
}

inline ResolvedOptions resolve(const RawOptions& cli, const std::optional<std::string>& config) {
  ResolvedOptions opt;
  opt.src = SourceParams::with_occupation(0.77);
  opt.ch = FtadParams::from_probabilities(0.19, 0.7);

  if (const char* env_seed = std::getenv("FTADSIM_SEED")) {
    opt.seed = std::strtoull(env_seed, nullptr, 10);
  }

  const RawOptions file = config ? raw_from_config_file(*config) : RawOptions{};

  for (const RawOptions* level : {&file, &cli}) {
    if (auto ch = channel_params_from(*level, opt.ch)) opt.ch = *ch;
    if (level->delta) opt.src = SourceParams::with_occupation(*level->delta);
    if (level->counts) opt.counts = *level->counts;
    if (level->seed) opt.seed = *level->seed;
    if (level->eta_start) opt.eta_start = *level->eta_start;
    if (level->eta_stop) opt.eta_stop = *level->eta_stop;
    if (level->eta_steps) opt.eta_steps = *level->eta_steps;
    if (level->output) opt.output = *level->output;
    if (level->format) opt.format = *level->format;
    if (level->noise_model) opt.noise_model = noise_model_from_string(*level->noise_model);
  }

  if (opt.counts < 1) throw std::invalid_argument("--counts must be >= 1");
  if (opt.eta_steps < 1) throw std::invalid_argument("--eta-steps must be >= 1");
  if (opt.eta_start < 0.0 || opt.eta_stop > 1.0 || opt.eta_start > opt.eta_stop) {
    throw std::invalid_argument("eta grid must satisfy 0 <= start <= stop <= 1");
  }
  return opt;
}

inline std::vector<double> eta_grid(const ResolvedOptions& opt) {
  std::vector<double> etas;
  etas.reserve(static_cast<std::size_t>(opt.eta_steps));
  if (opt.eta_steps == 1) {
    etas.push_back(opt.eta_start);
    return etas;
  }
  for (int i = 0; i < opt.eta_steps; ++i) {
    etas.push_back(opt.eta_start +
                   (opt.eta_stop - opt.eta_start) * static_cast<double>(i) /
                       static_cast<double>(opt.eta_steps - 1));
  }
  return etas;
}

inline std::filesystem::path output_path(const ResolvedOptions& opt, const std::string& command) {
  if (!opt.output.empty()) return opt.output;
  return command + (opt.format == "json" ? ".json" : ".csv");
}

inline std::filesystem::path sibling_path(const std::filesystem::path& base,
                                          const std::string& suffix) {
  std::filesystem::path p = base;
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + suffix + ext;
}

inline std::string key_value_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out = "key,value\n";
  for (const auto& [k, v] : rows) out += k + "," + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------

inline int cmd_exact(const ResolvedOptions& opt) {
  const TpmDistribution dist = joint_distribution(opt.src, opt.ch);
  const FluxTable flux = entropy_flux(opt.ch);
  const std::vector<TrajectoryRecord> records = entropy_production(dist, flux);
  const double avg = average_sigma(records);
  const double ft = ft_functional(records);
  const EntropyChange change = system_entropy_change(opt.src, opt.ch);

  const std::filesystem::path out = output_path(opt, "exact");
  if (opt.format == "json") {
    atomic_write_text(out,
                      exact_result_to_json(dist, records, flux, avg, ft, change).dump(2) + "\n");
  } else {
    atomic_write_text(out, trajectories_to_csv(records));
    std::vector<std::pair<std::string, std::string>> summary{
        {"delta", format_double(opt.src.delta)},
        {"p", format_double(opt.ch.p)},
        {"eta", format_double(opt.ch.eta)},
        {"p_initial_0", format_double(dist.p_initial()[0])},
        {"p_initial_1", format_double(dist.p_initial()[1])},
        {"p_final_0", format_double(dist.p_final()[0])},
        {"p_final_1", format_double(dist.p_final()[1])},
        {"avg_sigma", std::isfinite(avg) ? format_double(avg) : std::string(avg > 0 ? "inf" : "-inf")},
        {"ft_value", format_double(ft)},
        {"entropy_change_trajectory", format_double(change.trajectory_average)},
        {"entropy_change_state", format_double(change.state_delta)},
        {"flux_finite", flux.finite ? "true" : "false"},
    };
    for (int j = 1; j <= 4; ++j) {
      summary.emplace_back("phi_" + std::to_string(j),
                           flux.finite ? format_double(flux.of(j))
                                       : (j == 1 || j == 3 ? format_double(0.0)
                                                           : (flux.of(j) > 0 ? "inf" : "-inf")));
    }
    atomic_write_text(sibling_path(out, "_summary"), key_value_csv(summary));
    std::cout << "wrote " << sibling_path(out, "_summary").string() << "\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  std::cout << "avg_sigma " << (std::isfinite(avg) ? format_double(avg) : "inf") << "  ft_value "
            << format_double(ft) << "  entropy_change " << format_double(change.trajectory_average)
            << " (identity residual "
            << format_double(std::abs(change.trajectory_average - change.state_delta)) << ")\n";
  return 0;
}

inline int cmd_simulate(const ResolvedOptions& opt) {
  RunConfig cfg{opt.src, opt.ch, opt.counts, opt.seed, opt.noise_model};
  const TpmDistribution dist = joint_distribution(cfg.src, cfg.ch);
  const EstimateReport report = estimate(simulate(cfg, dist), dist, entropy_flux(cfg.ch));

  const std::filesystem::path out = output_path(opt, "simulate");
  if (opt.format == "json") {
    atomic_write_text(out, report_to_json(report, cfg).dump(2) + "\n");
  } else {
    atomic_write_text(out, report_to_csv(report));
    std::vector<std::pair<std::string, std::string>> summary{
        {"avg_sigma", format_double(report.avg_sigma.value)},
        {"avg_sigma_err", format_double(report.avg_sigma.std_err)},
        {"ft_value", format_double(report.ft_value.value)},
        {"ft_err", format_double(report.ft_value.std_err)},
        {"fidelity", format_double(report.fidelity)},
        {"p_initial_est_0", format_double(report.p_initial_est[0])},
        {"p_initial_est_1", format_double(report.p_initial_est[1])},
        {"p_final_est_0", format_double(report.p_final_est[0])},
        {"p_final_est_1", format_double(report.p_final_est[1])},
        {"p_final_theory_0", format_double(report.p_final_theory[0])},
        {"p_final_theory_1", format_double(report.p_final_theory[1])},
    };
    atomic_write_text(sibling_path(out, "_summary"), key_value_csv(summary));
    std::cout << "wrote " << sibling_path(out, "_summary").string() << "\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  std::cout << "avg_sigma " << format_double(report.avg_sigma.value) << " +- "
            << format_double(report.avg_sigma.std_err) << "  ft_value "
            << format_double(report.ft_value.value) << " +- "
            << format_double(report.ft_value.std_err) << "  fidelity "
            << format_double(report.fidelity) << "\n";
  return 0;
}

inline int cmd_sweep(const ResolvedOptions& opt) {
  RunConfig base{opt.src, opt.ch, opt.counts, opt.seed, opt.noise_model};
  const std::vector<double> etas = eta_grid(opt);
  const std::vector<EstimateReport> reports = sweep(base, etas);

  const std::filesystem::path out = output_path(opt, "sweep");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), "_eta_%03zu", i);
    const std::filesystem::path point = sibling_path(out, tag);
    if (opt.format == "json") {
      RunConfig cfg = base;
      cfg.ch = FtadParams::from_probabilities(base.ch.p, etas[i]);
      cfg.seed = derive_seed(base.seed, i);
      atomic_write_text(point, report_to_json(reports[i], cfg).dump(2) + "\n");
    } else {
      atomic_write_text(point, report_to_csv(reports[i]));
    }
  }
  if (opt.format == "json") {
    Json combined;
    combined["p"] = base.ch.p;
    combined["delta"] = base.src.delta;
    combined["counts_per_setting"] = base.counts_per_setting;
    combined["seed"] = base.seed;
    combined["noise_model"] = to_string(base.noise_model);
    Json points = Json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      RunConfig cfg = base;
      cfg.ch = FtadParams::from_probabilities(base.ch.p, etas[i]);
      cfg.seed = derive_seed(base.seed, i);
      points.push_back(report_to_json(reports[i], cfg));
    }
    combined["points"] = points;
    atomic_write_text(out, combined.dump(2) + "\n");
  } else {
    atomic_write_text(out, sweep_to_csv(reports));
    atomic_write_text(sibling_path(out, "_summary"), sweep_summary_to_csv(reports));
    std::cout << "wrote " << sibling_path(out, "_summary").string() << "\n";
  }
  std::cout << "wrote " << out.string() << " (" << reports.size() << " eta points)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifyOptions {
  int grid_points = 11;
  int random_inputs = 5;
  std::uint64_t seed = 12345;
  std::optional<std::string> channel_file;
};

inline int cmd_verify(const VerifyOptions& vopt) {
  bool all_pass = true;
  const auto report = [&all_pass](const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << name;
    for (std::size_t i = name.size(); i < 32; ++i) std::cout << ' ';
    std::cout << detail << "\n";
    if (!pass) all_pass = false;
  };

  if (vopt.channel_file) {
    try {
      std::ifstream in(*vopt.channel_file);
      if (!in) throw std::invalid_argument("cannot read " + *vopt.channel_file);
      const ChannelFile file = channel_from_json(Json::parse(in));
      ComplexMatrix sum(file.channel.dim(), file.channel.dim());
      for (const ComplexMatrix& e : file.channel.operators()) sum += dagger(e) * e;
      const double res = max_abs_diff(sum, ComplexMatrix::identity(file.channel.dim()));
      report("channel_file_completeness", res <= 1e-12, "max_residual " + format_double(res));
    } catch (const std::exception& ex) {
      report("channel_file_completeness", false, std::string("error: ") + ex.what());
    }
  }

  const int n = vopt.grid_points;
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) {
    grid.push_back(n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1));
  }

  const ComplexMatrix x = pauli_x();

  double completeness_res = 0.0;
  double dilation_unitary_res = 0.0;
  double dilation_commute_res = 0.0;
  double dilation_match_res = 0.0;
  double path_kraus_res = 0.0;
  double oracle_res = 0.0;
  double flux_res = 0.0;

  SplitMix64 rng(vopt.seed);
  std::vector<PureState> inputs;
  for (int i = 0; i < vopt.random_inputs; ++i) {
    const double u = rng.next_double() * 2.0 * 3.14159265358979323846;
    const double v = rng.next_double() * 2.0 * 3.14159265358979323846;
    const double w = rng.next_double();
    const double c = std::sqrt(w);
    const double s = std::sqrt(1.0 - w);
    inputs.emplace_back(2, std::vector<Complex>{Complex(c * std::cos(u), c * std::sin(u)),
                                                Complex(s * std::cos(v), s * std::sin(v))});
  }

  const std::array<double, 2> n_diag{0.0, 1.0};
  const ComplexMatrix number_op =
      tensor(ComplexMatrix::diagonal(n_diag), ComplexMatrix::identity(2)) +
      tensor(ComplexMatrix::identity(2), ComplexMatrix::diagonal(n_diag));

  int flux_skipped = 0;
  for (double p : grid) {
    for (double eta : grid) {
      const FtadParams params = FtadParams::from_probabilities(p, eta);
      const KrausChannel channel = build_ftad(params);

      ComplexMatrix sum(2, 2);
      for (const ComplexMatrix& e : channel.operators()) sum += dagger(e) * e;
      completeness_res =
          std::max(completeness_res, max_abs_diff(sum, ComplexMatrix::identity(2)));

      const DilationUnitary dilation = build_dilation(params);
      dilation_unitary_res = std::max(
          dilation_unitary_res,
          max_abs_diff(dagger(dilation.matrix) * dilation.matrix, ComplexMatrix::identity(4)));
      dilation_commute_res =
          std::max(dilation_commute_res,
                   max_abs_diff(dilation.matrix * number_op, number_op * dilation.matrix));
      const KrausChannel extracted = kraus_from_dilation(dilation);
      for (int j = 1; j <= 4; ++j) {
        dilation_match_res =
            std::max(dilation_match_res, max_abs_diff(extracted.op(j), channel.op(j)));
      }

      for (const Path& path : all_paths()) {
        const int j = kraus_index(path);
        const ComplexMatrix lifted = x * effective_operator(params, path);
        const double direct = max_abs_diff(lifted, channel.op(j));
        const double flipped = max_abs_diff(Complex(-1.0) * lifted, channel.op(j));
        path_kraus_res = std::max(path_kraus_res, std::min(direct, flipped));
      }

      for (const PureState& input : inputs) {
        const DensityMatrix via_channel = apply(channel, DensityMatrix::from_pure(input));
        const ComplexMatrix expected = x * via_channel.matrix() * x;
        oracle_res =
            std::max(oracle_res, max_abs_diff(final_state(input, params).matrix(), expected));
      }

      if (p > 0.0 && p < 1.0) {
        const FluxTable flux = entropy_flux(params);
        ComplexMatrix rev(2, 2);
        for (int j = 1; j <= 4; ++j) {
          const ComplexMatrix& e = channel.op(j);
          rev += std::exp(-flux.of(j)) * (e * dagger(e));
        }
        flux_res = std::max(flux_res, max_abs_diff(rev, ComplexMatrix::identity(2)));
      } else {
        ++flux_skipped;
      }
    }
  }

  report("kraus_completeness", completeness_res <= 1e-10,
         "max_residual " + format_double(completeness_res));
  report("dilation_unitarity", dilation_unitary_res <= 1e-10,
         "max_residual " + format_double(dilation_unitary_res));
  report("dilation_excitation_conserved", dilation_commute_res <= 1e-10,
         "max_residual " + format_double(dilation_commute_res));
  report("dilation_kraus_match", dilation_match_res <= 1e-10,
         "max_residual " + format_double(dilation_match_res));
  report("path_kraus_identification", path_kraus_res <= 1e-10,
         "max_residual " + format_double(path_kraus_res));
  report("interferometer_oracle", oracle_res <= 1e-10, "max_residual " + format_double(oracle_res));
  report("flux_reversal_identity", flux_res <= 1e-10, "max_residual " + format_double(flux_res));
  if (flux_skipped > 0) {
    std::cout << "NOTE flux infinite at p in {0,1}: reversal and fluctuation-theorem checks "
                 "skipped at "
              << flux_skipped << " grid points\n";
  }

  double ft_res = 0.0;
  double min_avg = 0.0;
  double decomposition_res = 0.0;
  double normalization_res = 0.0;
  int ft_skipped = 0;
  for (double delta : grid) {
    for (double p : grid) {
      if (p <= 0.0 || p >= 1.0) continue;
      for (double eta : grid) {
        const SourceParams src = SourceParams::with_occupation(delta);
        const FtadParams params = FtadParams::from_probabilities(p, eta);
        const TpmDistribution dist = joint_distribution(src, params);
        const FluxTable flux = entropy_flux(params);
        const std::vector<TrajectoryRecord> records = entropy_production(dist, flux);

        double total = 0.0;
        for (double q : dist.probs()) total += q;
        normalization_res = std::max(normalization_res, std::abs(total - 1.0));

        const double avg = average_sigma(records);
        min_avg = std::min(min_avg, avg);

        // The integral FT needs a full-rank initial occupation: at delta in
        // {0,1} the diverging-sigma trajectories carry zero probability and
        // their mass is lost to the 0 * exp(inf) = 0 convention.
        if (delta > 0.0 && delta < 1.0) {
          ft_res = std::max(ft_res, std::abs(ft_functional(records) - 1.0));
        } else {
          ++ft_skipped;
        }

        double flux_avg = 0.0;
        for (int j = 1; j <= 4; ++j) flux_avg += flux.of(j) * dist.path_probability(j);
        const EntropyChange change = system_entropy_change(src, params);
        decomposition_res =
            std::max(decomposition_res, std::abs(avg - change.state_delta - flux_avg));
      }
    }
  }

  if (ft_skipped > 0) {
    std::cout << "NOTE degenerate source occupation (delta in {0,1}): fluctuation-theorem "
                 "check skipped at "
              << ft_skipped << " grid points\n";
  }
  report("integral_ft", ft_res <= 1e-10, "max_residual " + format_double(ft_res));
  report("second_law", min_avg >= -1e-12, "min_avg_sigma " + format_double(min_avg));
  report("entropy_decomposition", decomposition_res <= 1e-10,
         "max_residual " + format_double(decomposition_res));
  report("distribution_normalization", normalization_res <= 1e-12,
         "max_residual " + format_double(normalization_res));

  return all_pass ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct TraceOptions {
  double a_re = 1.0, a_im = 0.0, b_re = 0.0, b_im = 0.0;
  bool subnormalized = false;
  std::vector<std::string> paths;  // empty: all open
};

inline int cmd_trace(const ResolvedOptions& opt, const TraceOptions& topt) {
  const PureState input(2,
                        {Complex(topt.a_re, topt.a_im), Complex(topt.b_re, topt.b_im)},
                        topt.subnormalized);
  BlockMask mask = BlockMask::all();
  if (!topt.paths.empty()) {
    std::vector<Path> allowed;
    for (const std::string& text : topt.paths) allowed.push_back(parse_path(text));
    mask = BlockMask::from_paths(allowed);
  }
  const std::vector<PathState> stages = evolve_stages(input, opt.ch, mask);

  std::filesystem::path out = opt.output.empty() ? "trace.json" : opt.output;
  atomic_write_text(out, trace_to_json(input, opt.ch, stages).dump(2) + "\n");
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"FTAD channel / two-point-measurement entropy production simulator"};
  app.require_subcommand(1);

  RawOptions raw_exact, raw_simulate, raw_sweep, raw_trace;
  std::optional<std::string> config_exact, config_simulate, config_sweep, config_trace;

  CLI::App* exact = app.add_subcommand("exact", "exact TPM trajectory table and functionals");
  add_common_options(exact, raw_exact);
  exact->add_option("--config", config_exact, "JSON config file");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo coincidence counting run");
  add_common_options(simulate, raw_simulate);
  simulate->add_option("--config", config_simulate, "JSON config file");

  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo runs over an eta grid");
  add_common_options(sweep, raw_sweep);
  sweep->add_option("--config", config_sweep, "JSON config file");

  VerifyOptions vopt;
  CLI::App* verify = app.add_subcommand("verify", "run the invariant grid");
  verify->add_option("--grid-points", vopt.grid_points, "grid points per parameter axis")
      ->check(CLI::PositiveNumber);
  verify->add_option("--random-inputs", vopt.random_inputs, "random input states per grid point")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", vopt.seed, "seed for the random input states");
  verify->add_option("--channel-file", vopt.channel_file,
                     "also check completeness of a serialized channel JSON file");

  TraceOptions topt;
  CLI::App* trace = app.add_subcommand("trace", "per-stage interferometer amplitudes (JSON)");
  add_common_options(trace, raw_trace);
  trace->add_option("--config", config_trace, "JSON config file");
  trace->add_option("--a-re", topt.a_re, "Re a of the input a|0> + b|1>");
  trace->add_option("--a-im", topt.a_im, "Im a");
  trace->add_option("--b-re", topt.b_re, "Re b");
  trace->add_option("--b-im", topt.b_im, "Im b");
  trace->add_flag("--subnormalized", topt.subnormalized, "accept an unnormalized input state");
  trace->add_option("--paths", topt.paths,
                    "open paths, e.g. l_i:l_f,s_i:s_f (default: all four open)")
      ->delimiter(',');

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);  // CLI11's vector overload expects reversed args
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (exact->parsed()) return cmd_exact(resolve(raw_exact, config_exact));
    if (simulate->parsed()) return cmd_simulate(resolve(raw_simulate, config_simulate));
    if (sweep->parsed()) return cmd_sweep(resolve(raw_sweep, config_sweep));
    if (verify->parsed()) return cmd_verify(vopt);
    if (trace->parsed()) return cmd_trace(resolve(raw_trace, config_trace), topt);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace ftadsim::cli
