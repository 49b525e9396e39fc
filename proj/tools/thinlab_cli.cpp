// thinlab command-line front end.
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "thinlab/cli_io.hpp"
#include "thinlab/errors.hpp"
#include "thinlab/exact.hpp"
#include "thinlab/quadrature.hpp"
#include "thinlab/symmetry.hpp"

using namespace thinlab;
namespace fs = std::filesystem;

namespace {

struct Globals {
  bool json = false;
  bool deterministic = false;
  std::vector<std::string> overrides;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int emit(const Globals& g, Json report, int code, const std::string& summary) {
  if (!g.deterministic) report["generated_at"] = utc_now();
  report["exit_code"] = code;
  if (g.json) std::cout << dump_json(report);
  else if (!summary.empty()) std::cout << summary << "\n";
  return code;
}

int fail(const Globals& g, const std::string& command, int code, const std::string& message) {
  Json r;
  r["schema_version"] = kSchemaVersion;
  r["command"] = command;
  r["error"] = message;
  if (!g.json) std::cerr << "error: " << message << "\n";
  return emit(g, r, code, "");
}

RunConfig load_config(const std::string& path, const Globals& g) {
  RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::load(path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Config, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::string out_dir(const RunConfig& cfg, const std::string& flag) {
  const std::string dir = !flag.empty() ? flag : cfg.get("output.dir", ".");
  fs::create_directories(dir);
  return dir;
}

// Coefficients for a field read from disk: the config when given, else identity.
// Accepts a thin vector of length n-1 or a full vector with zero normal part.
Vec thin_vector(const std::string& s, int n) {
  const auto v = parse_list(s);
  if (static_cast<int>(v.size()) == n) {
    if (v.back() != 0.0) throw Error(ErrorKind::Config, "--nu must be tangent to the thin plane");
    return parse_vec(s, n).head(n - 1);
  }
  return parse_vec(s, n - 1);
}

// Translates library errors into exit codes: configuration-like errors -> 1,
// everything else is an invariant failure -> 3.
int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::UnknownKind:
    case ErrorKind::InvalidArgument:
    case ErrorKind::NonSymmetric:
    case ErrorKind::NotSPD:
    case ErrorKind::EllipticityViolated:
      return 1;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thinlab: thin-obstacle laboratory"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Print the machine-readable report on stdout");
  app.add_flag("--deterministic", g.deterministic, "Omit timestamps from reports");
  app.add_option("--set", g.overrides, "Override a config key (key=value), repeatable");

  // solve
  std::string solve_cfg, solve_out;
  bool solve_thin = false;
  auto* solve = app.add_subcommand("solve", "Solve the discrete Signorini problem of a config");
  solve->add_option("config", solve_cfg, "Config file")->required();
  solve->add_option("--out", solve_out, "Output directory (default output.dir)");
  solve->add_flag("--thin", solve_thin, "Include per-node complementarity data");

  // exact
  std::string ex_kind, ex_nu, ex_center, ex_out = "exact.sgf1";
  double ex_a = 1.0, ex_lo = -1.0, ex_hi = 1.0;
  int ex_m = 65, ex_n = 2, ex_degree = 2;
  auto* exact = app.add_subcommand("exact", "Sample a closed-form solution onto a grid");
  exact->add_option("kind", ex_kind, "regular | polynomial | regular72")->required();
  exact->add_option("--nu", ex_nu, "Unit thin direction");
  exact->add_option("--a", ex_a, "Amplitude");
  exact->add_option("--m", ex_m, "Nodes per axis (odd)");
  exact->add_option("--n", ex_n, "Dimension (2 or 3)");
  exact->add_option("--center", ex_center, "Center on the thin plane");
  exact->add_option("--degree", ex_degree, "Degree 2m of the polynomial kind");
  exact->add_option("--lo", ex_lo, "Box lower corner");
  exact->add_option("--hi", ex_hi, "Box upper corner");
  exact->add_option("--out", ex_out, "Output SGF1 path");

  // audit
  std::string au_field, au_cfg;
  auto* audit = app.add_subcommand("audit", "Integral identity and minimality audits of a field");
  audit->add_option("field", au_field, "SGF1 field")->required();
  audit->add_option("config", au_cfg, "Config file")->required();

  // frequency
  std::string fr_field, fr_at, fr_cfg, fr_csv = "frequency_profile.csv";
  double fr_kappa0 = 4.0;
  auto* freq = app.add_subcommand("frequency", "Frequency profile and estimate at a thin point");
  freq->add_option("field", fr_field, "SGF1 field")->required();
  freq->add_option("--at", fr_at, "Point on the thin plane")->required();
  freq->add_option("--kappa0", fr_kappa0, "Truncation cap (>= 2)");
  freq->add_option("--config", fr_cfg, "Config with coefficients and analysis keys");
  freq->add_option("--csv", fr_csv, "Profile CSV path");

  // classify
  std::string cl_field, cl_cfg, cl_out;
  auto* cls = app.add_subcommand("classify", "Free-boundary classification report");
  cls->add_option("field", cl_field, "SGF1 field")->required();
  cls->add_option("config", cl_cfg, "Config file")->required();
  cls->add_option("--out", cl_out, "Output directory (default output.dir)");

  // blowup
  std::string bl_field, bl_at, bl_model, bl_cfg;
  double bl_t = 0.1;
  auto* blow = app.add_subcommand("blowup", "Fit a blowup model at one scale");
  blow->add_option("field", bl_field, "SGF1 field")->required();
  blow->add_option("--at", bl_at, "Point on the thin plane")->required();
  blow->add_option("--t", bl_t, "Rescaling radius")->required();
  blow->add_option("--model", bl_model, "regular | singular:m")->required();
  blow->add_option("--config", bl_cfg, "Config with coefficients and analysis keys");

  auto* self = app.add_subcommand("selftest", "Brute-force oracle and exact-solution invariants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fail(g, "parse", 1, e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*solve) {
      const RunConfig cfg = load_config(solve_cfg, g);
      const SignoriniProblem p = problem_from_config(cfg);
      const Solution sol = solve_psor(p, solver_from_config(cfg));
      const std::string dir = out_dir(cfg, solve_out);
      const std::string field_path = (fs::path(dir) / "field.sgf1").string();
      write_sgf1(field_path, sol.U);
      Json r;
      r["schema_version"] = kSchemaVersion;
      r["command"] = "solve";
      r["field_path"] = field_path;
      r["grid"] = {{"n", p.grid.dim()}, {"m", p.grid.nodes_per_axis()}, {"h", p.grid.spacing(0)}};
      r["solver"] = solution_json(sol, solve_thin);
      const int code = sol.converged ? 0 : 2;
      Json stored = r;
      if (!g.deterministic) stored["generated_at"] = utc_now();
      stored["exit_code"] = code;
      write_text((fs::path(dir) / "solve_report.json").string(), dump_json(stored));
      std::ostringstream s;
      s << (sol.converged ? "converged" : "NOT converged") << " after " << sol.iterations
        << " sweeps, last update " << sol.final_update << "; field written to " << field_path;
      return emit(g, r, code, s.str());
    }
    if (*exact) {
      ExactParams ep;
      if (ex_n != 2 && ex_n != 3) throw Error(ErrorKind::Config, "--n must be 2 or 3");
      if (!ex_nu.empty()) ep.nu = thin_vector(ex_nu, ex_n);
      if (!ex_center.empty()) ep.center = parse_vec(ex_center, ex_n);
      ep.amplitude = ex_a;
      ep.degree = ex_degree;
      if (ex_m < 3 || ex_m % 2 == 0) throw Error(ErrorKind::Config, "--m must be odd and >= 3");
      const ExactKind kind = exact_kind_from_string(ex_kind);
      const ScalarField f = exact_solution_field(Grid(ex_n, ex_m, ex_lo, ex_hi), kind, ep);
      write_sgf1(ex_out, f);
      Json r;
      r["schema_version"] = kSchemaVersion;
      r["command"] = "exact";
      r["kind"] = to_string(kind);
      r["homogeneity"] = exact_homogeneity(kind, ep);
      r["field_path"] = ex_out;
      return emit(g, r, 0, "wrote " + ex_out);
    }
    if (*audit) {
      const RunConfig cfg = load_config(au_cfg, g);
      const ScalarField U = read_sgf1(au_field);
      const AuditRun run = run_audit(U, cfg);
      std::ostringstream s;
      s << "audit " << (run.exit_code == 0 ? "passed" : "FAILED") << ": change of variables "
        << run.report["change_of_variables"]["worst"].get<double>() << ", decomposition "
        << run.report["decomposition"]["worst"].get<double>() << ", Q >= "
        << run.report["quasisymmetry"]["Q_estimate"].get<double>();
      return emit(g, run.report, run.exit_code, s.str());
    }
    if (*freq) {
      RunConfig cfg = load_config(fr_cfg, g);
      if (fr_kappa0 < 2.0) throw Error(ErrorKind::Config, "--kappa0 must be >= 2");
      cfg.set("analysis.kappa0", std::to_string(fr_kappa0));
      const ScalarField U = read_sgf1(fr_field);
      FrequencyRun run = run_frequency(U, cfg, parse_vec(fr_at, U.dim()));
      write_text(fr_csv, profile_csv(run.profile));
      Json& r = run.report;
      r["profile_csv_path"] = fr_csv;
      std::ostringstream s;
      s << "kappa = " << r["kappa"].get<double>() << " (fit rms " << r["confidence"].get<double>() << "), profile in " << fr_csv;
      return emit(g, r, 0, s.str());
    }
    if (*cls) {
      const RunConfig cfg = load_config(cl_cfg, g);
      const ScalarField U = read_sgf1(cl_field);
      if (cfg.get_int("problem.n", U.dim()) != U.dim())
        throw Error(ErrorKind::Config, "problem.n does not match the field dimension");
      ClassifyRun run = run_classify(U, cfg);
      const std::string dir = out_dir(cfg, cl_out);
      for (const auto& [name, text] : run.csv_files) write_text((fs::path(dir) / name).string(), text);
      Json stored = run.report;
      if (!g.deterministic) stored["generated_at"] = utc_now();
      write_text((fs::path(dir) / "classify_report.json").string(), dump_json(stored));
      const auto& sm = run.report["summary"];
      std::ostringstream s;
      s << run.report["sampled_points"].get<std::size_t>() << " points: " << sm["regular"].get<int>() << " regular, "
        << sm["singular"].get<int>() << " singular, " << sm["undetermined"].get<int>()
        << " undetermined; report in " << dir;
      return emit(g, run.report, run.exit_code, s.str());
    }
    if (*blow) {
      RunConfig cfg = load_config(bl_cfg, g);
      const ScalarField U = read_sgf1(bl_field);
      const int n = U.dim();
      if (!cfg.has("problem.n")) cfg.set("problem.n", std::to_string(n));
      if (!cfg.has("analysis.gauge_M")) cfg.set("analysis.gauge_M", "0");
      const CoefficientField A = coefficients_for(U, cfg);
      const ClassifyConfig cc = classify_from_config(cfg, n, U.max_abs());
      Vec x0 = parse_vec(bl_at, n);
      if (x0(n - 1) != 0.0) throw Error(ErrorKind::Config, "--at must lie on the thin plane");
      if (!(bl_t > 0.0)) throw Error(ErrorKind::Config, "--t must be positive");
      const auto field = std::make_shared<ScalarField>(U);
      const Frame frame = deskew_frame(A, x0);
      const SymmetrizedPair pair = symmetrize(field, frame);
      const FieldPtr deskewed = std::make_shared<DeskewedField>(pair.even, frame);
      Json r;
      r["schema_version"] = kSchemaVersion;
      r["command"] = "blowup";
      r["x0"] = to_json(x0);
      r["t"] = bl_t;
      std::ostringstream s;
      if (bl_model == "regular") {
        const auto resc = phi_rescale(deskewed, cc.constants.with_kappa(1.5), bl_t, 1.5);
        const RegularFit fit = fit_regular_blowup(*resc);
        r["model"] = "regular";
        r["amplitude"] = fit.amplitude;
        r["nu"] = to_json(fit.nu);
        r["nu_A"] = to_json(conormal_normal(frame, fit.nu));
        r["relative_residual"] = fit.residual / fit.field_norm;
        s << "regular fit: amplitude " << fit.amplitude << ", relative residual " << fit.residual / fit.field_norm;
      } else if (bl_model.rfind("singular:", 0) == 0) {
        int m = 0;
        try {
          m = std::stoi(bl_model.substr(9));
        } catch (const std::exception&) {
          throw Error(ErrorKind::Config, "--model singular:m needs an integer m");
        }
        if (m < 1) throw Error(ErrorKind::Config, "--model singular:m needs m >= 1");
        const auto resc = phi_rescale(deskewed, cc.constants.with_kappa(2.0 * m), bl_t, 2.0 * m);
        const SingularFit fit = fit_singular_blowup(*resc, m, default_sphere_rule(n), cc.stratum_tol);
        Json mons = Json::array();
        for (const auto& e : fit.monomials) mons.push_back({e[0], e[1], e[2]});
        r["model"] = "singular";
        r["m"] = m;
        r["monomials"] = mons;
        r["coefficients"] = fit.coefficients;
        r["stratum_dim"] = fit.stratum_dim;
        r["min_on_plane"] = fit.min_on_plane;
        r["relative_residual"] = fit.residual / fit.field_norm;
        s << "singular fit (m = " << m << "): stratum dimension " << fit.stratum_dim << ", relative residual "
          << fit.residual / fit.field_norm;
      } else {
        throw Error(ErrorKind::Config, "--model must be regular or singular:m");
      }
      return emit(g, r, 0, s.str());
    }
    if (*self) {
      const AuditRun run = run_selftest();
      std::ostringstream s;
      for (const auto& c : run.report["checks"])
        s << (c["passed"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>() << "\n";
      s << (run.exit_code == 0 ? "selftest passed" : "selftest FAILED");
      return emit(g, run.report, run.exit_code, s.str());
    }
  } catch (const Error& e) {
    return fail(g, command, exit_code_for(e), e.what());
  } catch (const std::exception& e) {
    return fail(g, command, 3, e.what());
  }
  return 1;
}
