// spin_snr: steady-state SNR synthesis from the command line.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spinsnr/spinsnr.hpp"

namespace {

using namespace spinsnr;
using nlohmann::json;

enum Exit { kOk = 0, kVerifyFailed = 1, kBadInput = 2, kIoError = 3 };

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamOptions {
  std::optional<double> Gamma, gamma, T1, T2, Td;
  bool allow_unphysical = false;

  void attach(CLI::App* app) {
    auto* g = app->add_option("--Gamma", Gamma, "normalized transverse rate 2 pi Td/T2");
    auto* gg = app->add_option("--gamma", gamma, "normalized longitudinal rate 2 pi Td/T1");
    auto* t1 = app->add_option("--T1", T1, "longitudinal relaxation time");
    auto* t2 = app->add_option("--T2", T2, "transverse relaxation time");
    auto* td = app->add_option("--Td", Td, "detection time");
    for (auto* o : {t1, t2, td}) {
      o->excludes(g);
      o->excludes(gg);
    }
    app->add_flag("--allow-unphysical", allow_unphysical, "accept 2 Gamma < gamma");
  }

  RelaxationPair resolve() const {
    const bool normalized = Gamma || gamma;
    const bool physical = T1 || T2 || Td;
    if (normalized && !(Gamma && gamma)) throw DomainError("--Gamma and --gamma must be given together");
    if (physical && !(T1 && T2 && Td)) throw DomainError("--T1, --T2 and --Td must be given together");
    if (normalized) return RelaxationPair::make(*Gamma, *gamma, allow_unphysical);
    if (physical) return normalize_params(*T1, *T2, *Td, allow_unphysical);
    throw DomainError("relaxation parameters required: --Gamma/--gamma or --T1/--T2/--Td");
  }
};

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out, const std::function<void(std::ostream&)>& write) {
  if (out.empty() || out == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoFailure("cannot open output file: " + out);
  write(f);
  f.flush();
  if (!f) throw IoFailure("write failed: " + out);
}

std::string sidecar_path(const std::string& out) {
  std::filesystem::path p(out);
  if (p.extension() == ".json") return out + ".sidecar.json";
  return p.replace_extension(".json").string();
}

BlochState parse_point(const std::vector<double>& v) {
  if (v.size() != 2) throw DomainError("--point needs two values: y z");
  return {v[0], v[1]};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state SNR per unit time for a spin-1/2 ensemble"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "spin_snr 1.0.0");

  ParamOptions params;
  std::string out;
  std::string format;
  int grid_ny = 512, grid_nz = 512;
  std::vector<double> point;
  std::vector<double> range_gamma{0.1, 3.0}, range_Gamma{0.1, 4.0};
  int n_gamma = 60, n_Gamma = 80;
  unsigned long long seed = 42;
  double perturb_q = 0.0;
  int trajectories = 200;
  int points_per_segment = 32;

  auto* ernst = app.add_subcommand("ernst", "Ernst point, flip angle and Q");
  auto* qsurf = app.add_subcommand("qsurface", "Q over a (y, z) grid of the half-disk");
  auto* cls = app.add_subcommand("classify", "control structure and optimal trajectory for one M");
  auto* phase = app.add_subcommand("phase-diagram", "Ernst Q and synthesis regime over (gamma, Gamma)");
  auto* ver = app.add_subcommand("verify", "run the numerical verification suite");
  auto* traj = app.add_subcommand("trajectory", "optimal trajectory polyline for one M");

  for (auto* sc : {ernst, qsurf, cls, ver, traj}) params.attach(sc);
  phase->add_flag("--allow-unphysical", params.allow_unphysical, "accepted for symmetry; cells are masked");
  for (auto* sc : {ernst, qsurf, cls, phase, ver, traj}) {
    sc->add_option("--out", out, "output path (default stdout)");
  }
  ernst->add_option("--format", format, "text|json")->check(CLI::IsMember({"text", "json"}));
  cls->add_option("--format", format, "text|json|csv")->check(CLI::IsMember({"text", "json", "csv"}));
  traj->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  qsurf->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  phase->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  ver->add_option("--format", format, "json|text")->check(CLI::IsMember({"json", "text"}));

  qsurf->add_option("--grid-ny", grid_ny, "samples along y")->check(CLI::Range(2, 1 << 14));
  qsurf->add_option("--grid-nz", grid_nz, "samples along z")->check(CLI::Range(2, 1 << 14));
  for (auto* sc : {cls, traj}) {
    sc->add_option("--point", point, "magnetization before detection: y z")->expected(2)->required();
    sc->add_option("--points-per-segment", points_per_segment, "polyline density")
        ->check(CLI::Range(2, 100000));
  }
  phase->add_option("--range-gamma", range_gamma, "gamma range: a b")->expected(2);
  phase->add_option("--range-Gamma", range_Gamma, "Gamma range: a b")->expected(2);
  phase->add_option("--n-gamma", n_gamma, "lattice points along gamma")->check(CLI::Range(1, 1 << 14));
  phase->add_option("--n-Gamma", n_Gamma, "lattice points along Gamma")->check(CLI::Range(1, 1 << 14));
  ver->add_option("--seed", seed, "random seed");
  ver->add_option("--trajectories", trajectories, "random M points per simulation check")
      ->check(CLI::Range(1, 100000));
  ver->add_option("--perturb-q", perturb_q, "offset added to analytic Q (negative control)")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (ernst->parsed()) {
      const auto p = params.resolve();
      const auto e = ernst_solution(p);
      emit(out, [&](std::ostream& os) {
        if (format == "json") {
          os << io::ernst_json(p, e).dump(2) << '\n';
        } else {
          io::write_ernst_text(os, p, e);
        }
      });
    } else if (qsurf->parsed()) {
      const auto p = params.resolve();
      const auto grid = q_grid(p, grid_ny, grid_nz);
      const auto curves = boundary_curves(p, 400);
      if (format == "json") {
        emit(out, [&](std::ostream& os) { os << io::qgrid_json(grid, curves).dump() << '\n'; });
      } else {
        emit(out, [&](std::ostream& os) { io::write_qgrid_csv(os, grid); });
        if (!out.empty() && out != "-") {
          emit(sidecar_path(out),
               [&](std::ostream& os) { os << io::qgrid_sidecar_json(grid, curves).dump(2) << '\n'; });
        }
      }
    } else if (cls->parsed() || traj->parsed()) {
      const auto p = params.resolve();
      const auto m = parse_point(point);
      require_half_disk(m);
      const std::string fmt = !format.empty() ? format : (traj->parsed() ? "csv" : "text");
      emit(out, [&](std::ostream& os) {
        if (fmt == "json") {
          auto j = io::classify_json(p, m);
          if (traj->parsed()) j = j["trajectory"];
          os << j.dump(2) << '\n';
        } else if (fmt == "csv") {
          io::write_trajectory_csv(os, p, m, points_per_segment);
        } else {
          io::write_classify_text(os, p, m);
        }
      });
    } else if (phase->parsed()) {
      if (range_gamma.size() != 2 || range_Gamma.size() != 2) throw DomainError("ranges need two values");
      const auto d = q_max_surface({range_gamma[0], range_gamma[1]}, {range_Gamma[0], range_Gamma[1]},
                                   n_gamma, n_Gamma);
      if (format == "json") {
        emit(out, [&](std::ostream& os) { os << io::phase_diagram_json(d).dump() << '\n'; });
      } else {
        emit(out, [&](std::ostream& os) { io::write_phase_diagram_csv(os, d); });
        if (!out.empty() && out != "-") {
          emit(sidecar_path(out), [&](std::ostream& os) { os << io::phase_boundaries_json(d).dump(2) << '\n'; });
        }
      }
    } else if (ver->parsed()) {
      const auto p = params.resolve();
      VerifyOptions opt;
      opt.seed = seed;
      opt.n_trajectories = trajectories;
      opt.q_perturbation = perturb_q;
      const auto rep = run_verification(p, opt);
      emit(out, [&](std::ostream& os) {
        if (format == "text") {
          for (const auto& c : rep.checks) {
            os << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured " << io::format_number(c.measured)
               << "  tol " << io::format_number(c.tolerance);
            if (!c.detail.empty()) os << "  [" << c.detail << ']';
            os << '\n';
          }
        } else {
          os << to_json(rep).dump(2) << '\n';
        }
      });
      for (const auto& c : rep.checks) {
        if (!c.passed) std::cerr << "verification failed: " << c.name << '\n';
      }
      std::fprintf(stderr, "verify: %s in %.1f s\n", rep.passed() ? "all checks passed" : "FAILED",
                   rep.seconds);
      return rep.passed() ? kOk : kVerifyFailed;
    }
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::range_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerifyFailed;
  }
  return kOk;
}
