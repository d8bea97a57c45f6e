#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stosym/integrator.hpp"

namespace stosym::cli {

/// Invalid or inconsistent configuration; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CustomPotential {
  std::string psi = "0";
  std::string psi_prime = "0";
  std::string psi_double_prime = "0";
};

struct ProblemConfig {
  double half_width = 1.0;
  int n_cells = 64;
  double final_time = 0.25;
  double epsilon = 0.0;
  std::string nonlinearity = "cubic";  // cubic | linear | custom
  CustomPotential custom;
  std::string initial = "sin_pi";  // sin_pi | expression
  std::string initial_real = "0";
  std::string initial_imag = "0";
};

struct NoiseConfig {
  std::string kind = "sine";  // sine | constant
  int modes = 0;
  double decay_p = 1.0;
  double amplitude = 1.0;
  int truncate_k = 2;
  bool truncate = true;
};

struct SchemeConfig {
  std::string name = "midpoint";  // midpoint | srk | nonsymplectic | both
  std::optional<Tableau> tableau;
  std::string comparison_noise = "additive";  // additive | multiplicative
};

struct CheckConfig {
  double tableau_tol = kDefaultTableauTolerance;
  double jacobian_tol = 1e-8;
};

struct RunSection {
  std::optional<double> dt;
  std::vector<double> dt_list;
  double dt_ref = 0x1p-14;
  long n_paths = 1;
  std::uint64_t master_seed = 0;
  long record_every = 1;
  std::string output_dir = "out";
  bool oracle = false;
};

struct RunConfig {
  ProblemConfig problem;
  NoiseConfig noise;
  SchemeConfig scheme;
  SolverParams solver;
  CheckConfig check;
  RunSection run;
};

/// Parses and validates a config document. Unknown keys are errors. Numeric
/// values may be written as constant expressions in strings, e.g. "sqrt(2)".
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Effective config as a document that parse_config accepts.
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Pieces of the simulation assembled from a validated config.
struct Problem {
  Grid grid;
  ComplexField initial;
  Nonlinearity nl;
  NoiseModel noise;
};

Problem build_problem(const RunConfig& cfg);
/// Scheme for `name`, which is the config scheme unless it is "both".
SchemeSpec build_scheme(const RunConfig& cfg, const std::string& name);

}  // namespace stosym::cli
