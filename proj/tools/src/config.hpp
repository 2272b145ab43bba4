// Experiment configuration: JSON file -> validated structs, with line-anchored errors.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "parahom/ensemble.hpp"
#include "parahom/macro.hpp"

namespace parahom::cli {

// schema violation; what() is "file:line: message"
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LatticeConfig {
  int d = 2;
  int n = 32;
  int n_t = 32;
  double L = 1.0;
  std::optional<double> tau;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int samples = 1;
  std::vector<double> betas{1.0, 0.1, 0.01};
  std::vector<double> eps{0.125, 0.0625};
  double theta = 0.1;
  std::vector<int> p{1};
  int max_p = 4;
  double tol = 1e-10;
  std::string out = "parahom_out";
  int workers = 1;
  std::string method = "space_time";
};

struct TwoScaleConfig {
  std::string geometry = "torus";
  double box = 1.0;
  double horizon = 0.03125;
  double h_micro = 0.125;
  std::optional<double> tau_micro;  // default h_micro^2
  bool locked_period = true;
  double micro_length = 4.0;
  double micro_period = 4.0;
  std::string source = "sine";
  int rve_samples = 4;
  double rve_length = 16.0;
  double rve_period = 16.0;
  bool with_expansion = false;
  std::vector<double> h_micro_list;  // residual: refinement study
  std::optional<double> abar;        // skip the reference Monte Carlo (isotropic value)
};

struct DumpConfig {
  std::string field = "coefficient";  // coefficient | phi | sigma
  int j = 0;
  int k = 0;
  int i = 1;
};

struct Config {
  std::string path;
  LatticeConfig lattice;
  EnsembleSpec ensemble;
  RunConfig run;
  TwoScaleConfig twoscale;
  DumpConfig dump;
  // json pointer -> 1-based line of its key in the source text
  std::map<std::string, int> lines;
};

// Throws SchemaError for unreadable, malformed or invalid files.
Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::string& path);
// line-anchored message for an error detected after parsing
std::string anchor(const Config& c, const std::string& pointer, const std::string& message);

nlohmann::ordered_json to_json(const Config& c);
Lattice make_run_lattice(const Config& c);
MacroGeometry geometry_from_string(const std::string& s);
SourceFunction make_source(const std::string& name, MacroGeometry g, double box);

// locate keys: json pointer -> line, for a syntactically valid document
std::map<std::string, int> index_key_lines(const std::string& text);

}  // namespace parahom::cli
