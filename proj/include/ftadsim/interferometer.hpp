// Stepwise simulation of the FTAD interferometer. The photon state is
// tracked as a ledger of terms (polarization amplitude pair, transverse
// mode, longitudinal modes) through the stages
//
//   psi0  input polarization a|0> + b|1>
//   psi1  BD1 maps |0> -> rail u, |1> -> rail d
//   psi2  HWP at 45 deg in rail d (TM-controlled Pauli X)
//   psi3  HWP at phi/2 in both rails
//   psi4  PBS1 routes |0> -> s_i, |1> -> l_i
//   psi5  per-arm wave plates (theta plate on the interacting rail,
//         0 deg compensation plate on the other; the l_i arm adds 45 deg
//         plates in both rails)
//   psi6  PBS2 routes into s_f/l_f, then BD2/BD3 coherently fold the rails
//         back into polarization (rail u picks up an X)
//
// Longitudinal modes are treated as perfectly incoherent at recombination:
// cross terms between distinct (lm_i, lm_f) labels are never formed, so the
// final density matrix is the incoherent sum over the four paths. Each path
// acts on the polarization as one Kraus operator of the FTAD channel up to
// a final Pauli-X relabeling, which is kept explicit and never absorbed.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftadsim/channel.hpp"
#include "ftadsim/linalg.hpp"

namespace ftadsim {

enum class TransverseMode { unset, u, d };
enum class InitialMode { unset, s_i, l_i };
enum class FinalMode { unset, s_f, l_f };

enum class Stage { psi0, psi1, psi2, psi3, psi4, psi5, psi6 };

struct PathLabel {
  TransverseMode tm = TransverseMode::unset;
  InitialMode lm_initial = InitialMode::unset;
  FinalMode lm_final = FinalMode::unset;
};

struct PathTerm {
  Complex amp0;  // |0> (horizontal) amplitude
  Complex amp1;  // |1> (vertical) amplitude
  PathLabel label;

  double squared_norm() const { return std::norm(amp0) + std::norm(amp1); }
};

struct PathState {
  Stage stage = Stage::psi0;
  std::vector<PathTerm> terms;

  double squared_norm() const {
    double n = 0.0;
    for (const PathTerm& t : terms) n += t.squared_norm();
    return n;
  }
};

// A full trajectory through the longitudinal modes, in the Kraus order
// j = 1..4: (l_i,l_f), (l_i,s_f), (s_i,s_f), (s_i,l_f).
struct Path {
  InitialMode lm_initial;
  FinalMode lm_final;

  friend bool operator==(const Path&, const Path&) = default;
};

inline constexpr std::array<Path, 4> all_paths() {
  return {Path{InitialMode::l_i, FinalMode::l_f}, Path{InitialMode::l_i, FinalMode::s_f},
          Path{InitialMode::s_i, FinalMode::s_f}, Path{InitialMode::s_i, FinalMode::l_f}};
}

inline int kraus_index(const Path& path) {
  const auto paths = all_paths();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i] == path) return static_cast<int>(i) + 1;
  }
  throw std::invalid_argument("kraus_index: path labels are unset");
}

class BlockMask {
 public:
  static BlockMask all() {
    BlockMask m;
    m.allowed_ = {true, true, true, true};
    return m;
  }

  static BlockMask only(const Path& path) {
    BlockMask m;
    m.allowed_ = {false, false, false, false};
    m.allowed_[static_cast<std::size_t>(kraus_index(path) - 1)] = true;
    return m;
  }

  static BlockMask from_paths(const std::vector<Path>& paths) {
    if (paths.empty()) {
      throw std::invalid_argument("BlockMask: at least one path must stay open");
    }
    BlockMask m;
    m.allowed_ = {false, false, false, false};
    for (const Path& p : paths) {
      m.allowed_[static_cast<std::size_t>(kraus_index(p) - 1)] = true;
    }
    return m;
  }

  bool allows(const Path& path) const {
    return allowed_[static_cast<std::size_t>(kraus_index(path) - 1)];
  }

 private:
  std::array<bool, 4> allowed_{true, true, true, true};
};

namespace detail {

struct Amp2 {
  Complex a0;
  Complex a1;
};

// Half-wave plate Jones matrix [[c, s], [s, -c]] for (c, s) = (cos 2a,
// sin 2a) at plate angle a. Values are passed in directly so the stage
// amplitudes reproduce sqrt(p)/sqrt(eta) entries exactly.
inline Amp2 hwp(double c, double s, const Amp2& in) {
  return {c * in.a0 + s * in.a1, s * in.a0 - c * in.a1};
}

inline Amp2 pauli_x(const Amp2& in) { return {in.a1, in.a0}; }

}  // namespace detail

// Evolves a polarization qubit through every stage of the interferometer.
// The mask removes blocked (lm_i, lm_f) paths from the final stage; earlier
// stages are reported unblocked.
inline std::vector<PathState> evolve_stages(const PureState& input, const FtadParams& params,
                                            const BlockMask& mask) {
  if (input.dim() != 2) {
    throw std::invalid_argument("evolve_stages: input must be a qubit state");
  }
  params.validate();
  using detail::Amp2;

  const Complex a = input.amplitude(0);
  const Complex b = input.amplitude(1);
  const double cp = params.cos_phi();
  const double sp = params.sin_phi();
  const double ct = params.cos_theta();
  const double st = params.sin_theta();

  std::vector<PathState> stages;
  stages.reserve(7);

  // psi0: a|0> + b|1>, no spatial labels yet.
  stages.push_back({Stage::psi0, {PathTerm{a, b, {}}}});

  // psi1: BD1, |0> -> u, |1> -> d.
  stages.push_back({Stage::psi1,
                    {PathTerm{a, 0.0, {TransverseMode::u, InitialMode::unset, FinalMode::unset}},
                     PathTerm{0.0, b, {TransverseMode::d, InitialMode::unset, FinalMode::unset}}}});

  // psi2: HWP at 45 deg in rail d only.
  stages.push_back({Stage::psi2,
                    {PathTerm{a, 0.0, {TransverseMode::u, InitialMode::unset, FinalMode::unset}},
                     PathTerm{b, 0.0, {TransverseMode::d, InitialMode::unset, FinalMode::unset}}}});

  // psi3: HWP at phi/2 in both rails.
  {
    PathState s{Stage::psi3, {}};
    for (const PathTerm& t : stages.back().terms) {
      const Amp2 out = detail::hwp(cp, sp, {t.amp0, t.amp1});
      s.terms.push_back({out.a0, out.a1, t.label});
    }
    stages.push_back(std::move(s));
  }

  // psi4: PBS1 transmits |0> into s_i and reflects |1> into l_i.
  {
    PathState s{Stage::psi4, {}};
    for (const PathTerm& t : stages.back().terms) {
      PathLabel short_label = t.label;
      short_label.lm_initial = InitialMode::s_i;
      PathLabel long_label = t.label;
      long_label.lm_initial = InitialMode::l_i;
      s.terms.push_back({t.amp0, 0.0, short_label});
      s.terms.push_back({0.0, t.amp1, long_label});
    }
    stages.push_back(std::move(s));
  }

  // psi5: per-arm plates. In the s_i arm the theta plate sits in rail u and
  // rail d has a 0 deg compensation plate. In the l_i arm the theta plate
  // sits in rail d, rail u has the 0 deg plate, and both rails then pass a
  // 45 deg plate.
  {
    PathState s{Stage::psi5, {}};
    for (const PathTerm& t : stages.back().terms) {
      Amp2 amp{t.amp0, t.amp1};
      const bool rail_u = t.label.tm == TransverseMode::u;
      if (t.label.lm_initial == InitialMode::s_i) {
        amp = rail_u ? detail::hwp(ct, st, amp) : detail::hwp(1.0, 0.0, amp);
      } else {
        amp = rail_u ? detail::hwp(1.0, 0.0, amp) : detail::hwp(ct, st, amp);
        amp = detail::hwp(0.0, 1.0, amp);
      }
      s.terms.push_back({amp.a0, amp.a1, t.label});
    }
    stages.push_back(std::move(s));
  }

  // psi6: PBS2 assigns the final longitudinal mode (from l_i the vertical
  // component exits into s_f and the horizontal into l_f; from s_i it is
  // the other way around), then BD2/BD3 fold the rails back onto the
  // polarization, applying X to rail u. Each surviving path exits in a
  // single transverse mode: d for l_i, u for s_i.
  {
    PathState s{Stage::psi6, {}};
    for (const Path& path : all_paths()) {
      if (!mask.allows(path)) continue;
      Amp2 sum{0.0, 0.0};
      for (const PathTerm& t : stages.back().terms) {
        if (t.label.lm_initial != path.lm_initial) continue;
        const bool vertical_to_sf = path.lm_initial == InitialMode::l_i;
        Amp2 component{0.0, 0.0};
        if ((path.lm_final == FinalMode::s_f) == vertical_to_sf) {
          component = {0.0, t.amp1};
        } else {
          component = {t.amp0, 0.0};
        }
        if (t.label.tm == TransverseMode::u) component = detail::pauli_x(component);
        sum.a0 += component.a0;
        sum.a1 += component.a1;
      }
      const TransverseMode exit_tm =
          path.lm_initial == InitialMode::l_i ? TransverseMode::d : TransverseMode::u;
      s.terms.push_back({sum.a0, sum.a1, {exit_tm, path.lm_initial, path.lm_final}});
    }
    stages.push_back(std::move(s));
  }

  return stages;
}

inline PathState evolve(const PureState& input, const FtadParams& params, const BlockMask& mask) {
  return evolve_stages(input, params, mask).back();
}

// The 2x2 linear map taking input polarization amplitudes to the surviving
// amplitudes of one path. Equals the Kraus operator E_j of the path's index
// up to the Pauli-X relabeling and a global sign: X * M = -E_1 for
// (l_i,l_f) and X * M = +E_j for the other three paths.
inline ComplexMatrix effective_operator(const FtadParams& params, const Path& path) {
  ComplexMatrix m(2, 2);
  for (std::size_t col = 0; col < 2; ++col) {
    const PathState out = evolve(PureState::basis(2, col), params, BlockMask::only(path));
    m(0, col) = out.terms.at(0).amp0;
    m(1, col) = out.terms.at(0).amp1;
  }
  return m;
}

inline double path_probability(const PureState& input, const FtadParams& params,
                               const Path& path) {
  const PathState out = evolve(input, params, BlockMask::only(path));
  return out.terms.at(0).squared_norm();
}

// Polarization state after incoherently recombining all longitudinal and
// transverse modes: the sum of |psi6_path><psi6_path| over the four paths.
// Equals X * Lambda[|psi0><psi0|] * X with Lambda the FTAD channel.
inline DensityMatrix final_state(const PureState& input, const FtadParams& params) {
  const PathState out = evolve(input, params, BlockMask::all());
  ComplexMatrix rho(2, 2);
  for (const PathTerm& t : out.terms) {
    const std::array<Complex, 2> v{t.amp0, t.amp1};
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 2; ++c) {
        rho(r, c) += v[r] * std::conj(v[c]);
      }
    }
  }
  return DensityMatrix(std::move(rho));
}

inline std::string to_string(TransverseMode tm) {
  switch (tm) {
    case TransverseMode::u: return "u";
    case TransverseMode::d: return "d";
    default: return "-";
  }
}

inline std::string to_string(InitialMode lm) {
  switch (lm) {
    case InitialMode::s_i: return "s_i";
    case InitialMode::l_i: return "l_i";
    default: return "-";
  }
}

inline std::string to_string(FinalMode lm) {
  switch (lm) {
    case FinalMode::s_f: return "s_f";
    case FinalMode::l_f: return "l_f";
    default: return "-";
  }
}

inline std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::psi0: return "psi0";
    case Stage::psi1: return "psi1";
    case Stage::psi2: return "psi2";
    case Stage::psi3: return "psi3";
    case Stage::psi4: return "psi4";
    case Stage::psi5: return "psi5";
    case Stage::psi6: return "psi6";
  }
  return "?";
}

inline Path parse_path(const std::string& text) {
  for (const Path& p : all_paths()) {
    if (text == to_string(p.lm_initial) + ":" + to_string(p.lm_final)) return p;
  }
  throw std::invalid_argument("parse_path: expected one of l_i:l_f, l_i:s_f, s_i:s_f, s_i:l_f");
}

}  // namespace ftadsim
