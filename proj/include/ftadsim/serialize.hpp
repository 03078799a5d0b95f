// File formats. JSON uses nlohmann::json, whose double formatting is
// shortest-round-trip exact; CSV numbers are written with 17 significant
// digits so a re-parse recovers the identical double. Non-finite sigma
// values are encoded as the strings "inf", "-inf" and "undefined". All file
// writes go through a temp-file-then-rename so readers never observe a
// partial file.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftadsim/channel.hpp"
#include "ftadsim/clicks.hpp"
#include "ftadsim/interferometer.hpp"
#include "ftadsim/tpm.hpp"

namespace ftadsim {

using Json = nlohmann::json;

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string to_string(SigmaStatus status) {
  switch (status) {
    case SigmaStatus::finite: return "finite";
    case SigmaStatus::plus_infinite: return "inf";
    case SigmaStatus::minus_infinite: return "-inf";
    case SigmaStatus::undefined: return "undefined";
  }
  return "?";
}

inline SigmaStatus sigma_status_from_string(const std::string& s) {
  if (s == "finite") return SigmaStatus::finite;
  if (s == "inf") return SigmaStatus::plus_infinite;
  if (s == "-inf") return SigmaStatus::minus_infinite;
  if (s == "undefined") return SigmaStatus::undefined;
  throw std::invalid_argument("unknown sigma status: " + s);
}

// Sigma cell for CSV: a full-precision number when finite, else the status word.
inline std::string format_sigma(double sigma, SigmaStatus status) {
  return status == SigmaStatus::finite ? format_double(sigma) : to_string(status);
}

inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open for writing: " + tmp.string());
    }
    out << content;
    if (!out.flush()) {
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Channel <-> JSON. Operators are nested [re, im] arrays, row-major.

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  const std::size_t rows = j.size();
  if (rows == 0) throw std::invalid_argument("matrix_from_json: empty matrix");
  const std::size_t cols = j.at(0).size();
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& cell = j.at(r).at(c);
      m(r, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
    }
  }
  return m;
}

inline Json channel_to_json(const FtadParams& params, const KrausChannel& channel) {
  Json j;
  j["p"] = params.p;
  j["eta"] = params.eta;
  j["dim"] = channel.dim();
  j["labels"] = channel.labels();
  Json ops = Json::array();
  for (const ComplexMatrix& e : channel.operators()) ops.push_back(matrix_to_json(e));
  j["operators"] = ops;
  return j;
}

struct ChannelFile {
  FtadParams params;
  KrausChannel channel;
};

// Throws if the operators fail the completeness sum (the KrausChannel
// constructor revalidates), which is how corrupted files are detected.
inline ChannelFile channel_from_json(const Json& j) {
  FtadParams params = FtadParams::from_probabilities(j.at("p").get<double>(),
                                                     j.at("eta").get<double>());
  std::vector<ComplexMatrix> ops;
  for (const Json& op : j.at("operators")) ops.push_back(matrix_from_json(op));
  std::vector<int> labels = j.at("labels").get<std::vector<int>>();
  return ChannelFile{params, KrausChannel(j.at("dim").get<std::size_t>(), std::move(ops),
                                          std::move(labels))};
}

// ---------------------------------------------------------------------------
// Exact TPM results.

inline Json exact_result_to_json(const TpmDistribution& dist,
                                 const std::vector<TrajectoryRecord>& records,
                                 const FluxTable& flux, double avg_sigma_value, double ft_value,
                                 const EntropyChange& entropy_change) {
  Json j;
  j["delta"] = dist.source().delta;
  j["p"] = dist.channel_params().p;
  j["eta"] = dist.channel_params().eta;
  j["p_initial"] = dist.p_initial();
  j["p_final"] = dist.p_final();
  j["flux_finite"] = flux.finite;
  if (flux.finite) j["phi"] = flux.phi;
  Json rows = Json::array();
  for (const TrajectoryRecord& r : records) {
    Json row;
    row["gamma"] = r.outcome.gamma;
    row["gamma_prime"] = r.outcome.gamma_prime;
    row["j"] = r.outcome.j;
    row["probability"] = r.probability;
    row["sigma_status"] = to_string(r.status);
    if (r.status == SigmaStatus::finite) row["sigma"] = r.sigma;
    rows.push_back(row);
  }
  j["trajectories"] = rows;
  if (std::isfinite(avg_sigma_value)) {
    j["avg_sigma"] = avg_sigma_value;
  } else {
    j["avg_sigma"] = avg_sigma_value > 0 ? "inf" : "-inf";  // only at p in {0,1}
  }
  j["ft_value"] = ft_value;
  j["entropy_change"] = {{"trajectory_average", entropy_change.trajectory_average},
                         {"state_delta", entropy_change.state_delta}};
  return j;
}

struct ExactResult {
  SourceParams src;
  FtadParams ch;
  std::array<double, 2> p_initial{};
  std::array<double, 2> p_final{};
  FluxTable flux;
  std::vector<TrajectoryRecord> trajectories;
  double avg_sigma = 0.0;
  double ft_value = 0.0;
  EntropyChange entropy_change;
};

inline ExactResult exact_result_from_json(const Json& j) {
  ExactResult result;
  result.src = SourceParams::with_occupation(j.at("delta").get<double>());
  result.ch = FtadParams::from_probabilities(j.at("p").get<double>(), j.at("eta").get<double>());
  result.p_initial = j.at("p_initial").get<std::array<double, 2>>();
  result.p_final = j.at("p_final").get<std::array<double, 2>>();
  result.flux.finite = j.at("flux_finite").get<bool>();
  if (result.flux.finite) {
    result.flux.phi = j.at("phi").get<std::array<double, 4>>();
  } else {
    result.flux = entropy_flux(result.ch);
  }
  for (const Json& row : j.at("trajectories")) {
    TrajectoryRecord rec;
    rec.outcome = Outcome{row.at("gamma").get<int>(), row.at("gamma_prime").get<int>(),
                          row.at("j").get<int>()};
    rec.probability = row.at("probability").get<double>();
    rec.status = sigma_status_from_string(row.at("sigma_status").get<std::string>());
    if (rec.status == SigmaStatus::finite) rec.sigma = row.at("sigma").get<double>();
    result.trajectories.push_back(rec);
  }
  if (j.at("avg_sigma").is_string()) {
    result.avg_sigma = j.at("avg_sigma").get<std::string>() == "inf"
                           ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
  } else {
    result.avg_sigma = j.at("avg_sigma").get<double>();
  }
  result.ft_value = j.at("ft_value").get<double>();
  result.entropy_change = {j.at("entropy_change").at("trajectory_average").get<double>(),
                           j.at("entropy_change").at("state_delta").get<double>()};
  return result;
}

inline constexpr const char* kTrajectoryCsvHeader = "gamma,gamma_prime,j,probability,sigma";

inline std::string trajectories_to_csv(const std::vector<TrajectoryRecord>& records) {
  std::ostringstream out;
  out << kTrajectoryCsvHeader << "\n";
  for (const TrajectoryRecord& r : records) {
    out << r.outcome.gamma << ',' << r.outcome.gamma_prime << ',' << r.outcome.j << ','
        << format_double(r.probability) << ',' << format_sigma(r.sigma, r.status) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Monte Carlo estimate reports.

inline const char* to_string(NoiseModel model) {
  return model == NoiseModel::multinomial ? "multinomial" : "poisson_per_outcome";
}

inline NoiseModel noise_model_from_string(const std::string& s) {
  if (s == "multinomial") return NoiseModel::multinomial;
  if (s == "poisson_per_outcome") return NoiseModel::poisson_per_outcome;
  throw std::invalid_argument("unknown noise model: " + s);
}

inline Json report_to_json(const EstimateReport& report, const RunConfig& cfg) {
  Json j;
  j["delta"] = cfg.src.delta;
  j["p"] = cfg.ch.p;
  j["eta"] = report.eta;
  j["counts_per_setting"] = cfg.counts_per_setting;
  j["seed"] = cfg.seed;
  j["noise_model"] = to_string(cfg.noise_model);
  Json rows = Json::array();
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const ClickRecord& r = report.records[i];
    const SigmaEstimate& s = report.sigma_estimates[i];
    const TrajectoryRecord& t = report.sigma_theory[i];
    Json row;
    row["gamma"] = r.outcome.gamma;
    row["gamma_prime"] = r.outcome.gamma_prime;
    row["j"] = r.outcome.j;
    row["count"] = r.count;
    row["est_prob"] = r.estimated_prob;
    row["std_err"] = r.std_err;
    row["sigma_status"] = to_string(s.status);
    if (s.status == SigmaStatus::finite) {
      row["sigma"] = s.sigma;
      row["sigma_err"] = s.std_err;
    }
    row["prob_theory"] = report.prob_theory[i];
    row["sigma_theory_status"] = to_string(t.status);
    if (t.status == SigmaStatus::finite) row["sigma_theory"] = t.sigma;
    rows.push_back(row);
  }
  j["records"] = rows;
  j["p_initial_est"] = report.p_initial_est;
  j["p_final_est"] = report.p_final_est;
  j["p_final_theory"] = report.p_final_theory;
  j["avg_sigma"] = {{"value", report.avg_sigma.value}, {"std_err", report.avg_sigma.std_err}};
  j["ft_value"] = {{"value", report.ft_value.value}, {"std_err", report.ft_value.std_err}};
  j["fidelity"] = report.fidelity;
  return j;
}

inline EstimateReport report_from_json(const Json& j) {
  EstimateReport report;
  report.eta = j.at("eta").get<double>();
  for (const Json& row : j.at("records")) {
    ClickRecord rec;
    rec.outcome = Outcome{row.at("gamma").get<int>(), row.at("gamma_prime").get<int>(),
                          row.at("j").get<int>()};
    rec.count = row.at("count").get<std::uint64_t>();
    rec.estimated_prob = row.at("est_prob").get<double>();
    rec.std_err = row.at("std_err").get<double>();
    report.records.push_back(rec);

    SigmaEstimate est;
    est.outcome = rec.outcome;
    est.status = sigma_status_from_string(row.at("sigma_status").get<std::string>());
    if (est.status == SigmaStatus::finite) {
      est.sigma = row.at("sigma").get<double>();
      est.std_err = row.at("sigma_err").get<double>();
    }
    report.sigma_estimates.push_back(est);

    TrajectoryRecord theo;
    theo.outcome = rec.outcome;
    theo.probability = row.at("prob_theory").get<double>();
    theo.status = sigma_status_from_string(row.at("sigma_theory_status").get<std::string>());
    if (theo.status == SigmaStatus::finite) theo.sigma = row.at("sigma_theory").get<double>();
    report.sigma_theory.push_back(theo);
    report.prob_theory.push_back(theo.probability);
  }
  report.p_initial_est = j.at("p_initial_est").get<std::array<double, 2>>();
  report.p_final_est = j.at("p_final_est").get<std::array<double, 2>>();
  report.p_final_theory = j.at("p_final_theory").get<std::array<double, 2>>();
  report.avg_sigma = {j.at("avg_sigma").at("value").get<double>(),
                      j.at("avg_sigma").at("std_err").get<double>()};
  report.ft_value = {j.at("ft_value").at("value").get<double>(),
                     j.at("ft_value").at("std_err").get<double>()};
  report.fidelity = j.at("fidelity").get<double>();
  return report;
}

inline constexpr const char* kReportCsvHeader =
    "eta,gamma,gamma_prime,j,count,est_prob,std_err,sigma,sigma_err";

inline std::string report_to_csv(const EstimateReport& report) {
  std::ostringstream out;
  out << kReportCsvHeader << "\n";
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const ClickRecord& r = report.records[i];
    const SigmaEstimate& s = report.sigma_estimates[i];
    out << format_double(report.eta) << ',' << r.outcome.gamma << ',' << r.outcome.gamma_prime
        << ',' << r.outcome.j << ',' << r.count << ',' << format_double(r.estimated_prob) << ','
        << format_double(r.std_err) << ',' << format_sigma(s.sigma, s.status) << ','
        << (s.status == SigmaStatus::finite ? format_double(s.std_err) : std::string("undefined"))
        << "\n";
  }
  return out.str();
}

inline constexpr const char* kSweepCsvHeader =
    "eta,gamma,gamma_prime,j,count,est_prob,std_err,sigma,sigma_err,prob_theory,sigma_theory";

inline std::string sweep_to_csv(const std::vector<EstimateReport>& reports) {
  std::ostringstream out;
  out << kSweepCsvHeader << "\n";
  for (const EstimateReport& report : reports) {
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      const ClickRecord& r = report.records[i];
      const SigmaEstimate& s = report.sigma_estimates[i];
      const TrajectoryRecord& t = report.sigma_theory[i];
      out << format_double(report.eta) << ',' << r.outcome.gamma << ',' << r.outcome.gamma_prime
          << ',' << r.outcome.j << ',' << r.count << ',' << format_double(r.estimated_prob) << ','
          << format_double(r.std_err) << ',' << format_sigma(s.sigma, s.status) << ','
          << (s.status == SigmaStatus::finite ? format_double(s.std_err) : std::string("undefined"))
          << ',' << format_double(t.probability) << ',' << format_sigma(t.sigma, t.status) << "\n";
    }
  }
  return out.str();
}

inline constexpr const char* kSweepSummaryCsvHeader =
    "eta,avg_sigma,avg_sigma_err,ft_value,ft_err,fidelity,avg_sigma_theory,ft_theory";

inline std::string sweep_summary_to_csv(const std::vector<EstimateReport>& reports) {
  std::ostringstream out;
  out << kSweepSummaryCsvHeader << "\n";
  for (const EstimateReport& report : reports) {
    const double avg_theory = [&report] {
      double a = 0.0;
      for (const TrajectoryRecord& t : report.sigma_theory) {
        if (t.probability > 0.0) a += t.probability * t.sigma;
      }
      return a;
    }();
    const double ft_theory = [&report] {
      double a = 0.0;
      for (const TrajectoryRecord& t : report.sigma_theory) {
        if (t.probability > 0.0 && t.status != SigmaStatus::plus_infinite) {
          a += t.probability * std::exp(-t.sigma);
        }
      }
      return a;
    }();
    out << format_double(report.eta) << ',' << format_double(report.avg_sigma.value) << ','
        << format_double(report.avg_sigma.std_err) << ',' << format_double(report.ft_value.value)
        << ',' << format_double(report.ft_value.std_err) << ',' << format_double(report.fidelity)
        << ',' << format_double(avg_theory) << ',' << format_double(ft_theory) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Interferometer trace dump: stage name -> list of terms.

inline Json trace_to_json(const PureState& input, const FtadParams& params,
                          const std::vector<PathState>& stages) {
  Json j;
  j["a"] = Json::array({input.amplitude(0).real(), input.amplitude(0).imag()});
  j["b"] = Json::array({input.amplitude(1).real(), input.amplitude(1).imag()});
  j["subnormalized"] = input.subnormalized();
  j["p"] = params.p;
  j["eta"] = params.eta;
  Json stage_map;
  for (const PathState& state : stages) {
    Json terms = Json::array();
    for (const PathTerm& t : state.terms) {
      Json term;
      term["pol"] = Json::array({Json::array({t.amp0.real(), t.amp0.imag()}),
                                 Json::array({t.amp1.real(), t.amp1.imag()})});
      term["tm"] = to_string(t.label.tm);
      term["lm_i"] = to_string(t.label.lm_initial);
      term["lm_f"] = to_string(t.label.lm_final);
      terms.push_back(term);
    }
    stage_map[to_string(state.stage)] = terms;
  }
  j["stages"] = stage_map;
  return j;
}

struct TraceDump {
  PureState input;
  FtadParams params;
  std::vector<PathState> stages;
};

inline TraceDump trace_from_json(const Json& j) {
  const Complex a(j.at("a").at(0).get<double>(), j.at("a").at(1).get<double>());
  const Complex b(j.at("b").at(0).get<double>(), j.at("b").at(1).get<double>());
  PureState input(2, {a, b}, j.at("subnormalized").get<bool>());
  FtadParams params =
      FtadParams::from_probabilities(j.at("p").get<double>(), j.at("eta").get<double>());

  const auto tm_from = [](const std::string& s) {
    if (s == "u") return TransverseMode::u;
    if (s == "d") return TransverseMode::d;
    return TransverseMode::unset;
  };
  const auto lmi_from = [](const std::string& s) {
    if (s == "s_i") return InitialMode::s_i;
    if (s == "l_i") return InitialMode::l_i;
    return InitialMode::unset;
  };
  const auto lmf_from = [](const std::string& s) {
    if (s == "s_f") return FinalMode::s_f;
    if (s == "l_f") return FinalMode::l_f;
    return FinalMode::unset;
  };

  std::vector<PathState> stages;
  const std::array<Stage, 7> order{Stage::psi0, Stage::psi1, Stage::psi2, Stage::psi3,
                                   Stage::psi4, Stage::psi5, Stage::psi6};
  for (Stage stage : order) {
    const Json& terms = j.at("stages").at(to_string(stage));
    PathState state{stage, {}};
    for (const Json& term : terms) {
      PathTerm t;
      t.amp0 = Complex(term.at("pol").at(0).at(0).get<double>(),
                       term.at("pol").at(0).at(1).get<double>());
      t.amp1 = Complex(term.at("pol").at(1).at(0).get<double>(),
                       term.at("pol").at(1).at(1).get<double>());
      t.label.tm = tm_from(term.at("tm").get<std::string>());
      t.label.lm_initial = lmi_from(term.at("lm_i").get<std::string>());
      t.label.lm_final = lmf_from(term.at("lm_f").get<std::string>());
      state.terms.push_back(t);
    }
    stages.push_back(std::move(state));
  }
  return TraceDump{std::move(input), params, std::move(stages)};
}

}  // namespace ftadsim
