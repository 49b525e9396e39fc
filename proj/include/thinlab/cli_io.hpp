#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "thinlab/coeff_geometry.hpp"
#include "thinlab/fb_analysis.hpp"
#include "thinlab/functionals.hpp"
#include "thinlab/vi_solver.hpp"

namespace thinlab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Flat key=value configuration with dotted keys. '#' starts a comment.
/// Unknown keys and malformed values throw Config errors.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Checks presets, m odd, kappa0 >= 2 and so on.
  void validate() const;

 private:
  std::map<std::string, std::string> values_;
};

/// "1,0,0" -> vector. Throws Config.
std::vector<double> parse_list(const std::string& s);
Vec parse_vec(const std::string& s, int n);

CoefficientField coefficient_from_config(const RunConfig& cfg);
SignoriniProblem problem_from_config(const RunConfig& cfg);
SolverConfig solver_from_config(const RunConfig& cfg);
ClassifyConfig classify_from_config(const RunConfig& cfg, int n, double field_scale);

Json to_json(const Vec& v);
Json solution_json(const Solution& sol, bool include_thin = false);
Json classification_json(const PointClassification& pc);

struct ClassifyRun {
  Json report;
  std::vector<std::pair<std::string, std::string>> csv_files;  // name, content
  int exit_code = 0;
};

/// Coincidence set, free boundary, classification of the sampled points and
/// the regular-set graph when enough regular points exist.
ClassifyRun run_classify(const ScalarField& U, const RunConfig& cfg);

/// Coefficients of the config when it names any, identity otherwise.
CoefficientField coefficients_for(const ScalarField& U, const RunConfig& cfg);

struct FrequencyRun {
  Json report;
  ProfileResult profile;
};

/// Symmetrized frequency profile and estimate at a thin point. The gauge
/// defaults to M = 0 unless the config sets analysis.gauge_M.
FrequencyRun run_frequency(const ScalarField& U, RunConfig cfg, const Vec& x0);

/// Change-of-variables, decomposition, quasisymmetry and almost-minimality
/// audits; exit_code 3 when a tolerance is exceeded.
struct AuditRun {
  Json report;
  int exit_code = 0;
};
AuditRun run_audit(const ScalarField& U, const RunConfig& cfg);

/// Brute-force oracle and exact-solution invariants; exit 0 when all pass.
AuditRun run_selftest();

/// Writes the JSON with stable formatting; numbers use the shortest
/// round-trip representation (at most 17 significant digits).
std::string dump_json(const Json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace thinlab
