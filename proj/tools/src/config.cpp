#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace parahom::cli {

using json = nlohmann::json;

std::map<std::string, int> index_key_lines(const std::string& text) {
  // walk the text keeping a stack of containers; only keys need positions
  struct Frame {
    bool object = false;
    std::string pointer;
    int index = 0;
    std::string key;
  };
  std::map<std::string, int> lines;
  std::vector<Frame> stack;
  int line = 1;
  bool expect_key = false;
  auto child_pointer = [&]() {
    const Frame& f = stack.back();
    return f.object ? f.pointer + "/" + f.key : f.pointer + "/" + std::to_string(f.index);
  };
  for (std::size_t p = 0; p < text.size(); ++p) {
    const char ch = text[p];
    if (ch == '\n') {
      ++line;
    } else if (ch == '"') {
      std::string s;
      for (++p; p < text.size() && text[p] != '"'; ++p) {
        if (text[p] == '\\' && p + 1 < text.size()) ++p;
        s += text[p];
      }
      if (expect_key && !stack.empty() && stack.back().object) {
        stack.back().key = s;
        lines[child_pointer()] = line;
        expect_key = false;
      }
    } else if (ch == '{' || ch == '[') {
      Frame f;
      f.object = ch == '{';
      f.pointer = stack.empty() ? "" : child_pointer();
      stack.push_back(f);
      expect_key = f.object;
    } else if (ch == '}' || ch == ']') {
      if (!stack.empty()) stack.pop_back();
      expect_key = false;
    } else if (ch == ',') {
      if (!stack.empty()) {
        ++stack.back().index;
        expect_key = stack.back().object;
      }
    }
  }
  return lines;
}

std::string anchor(const Config& c, const std::string& pointer, const std::string& message) {
  // nearest enclosing key with a known line
  std::string p = pointer;
  int line = 1;
  while (true) {
    auto it = c.lines.find(p);
    if (it != c.lines.end()) {
      line = it->second;
      break;
    }
    const auto cut = p.rfind('/');
    if (cut == std::string::npos || p.empty()) break;
    p = p.substr(0, cut);
  }
  return c.path + ":" + std::to_string(line) + ": " + (pointer.empty() ? "/" : pointer) + ": " + message;
}

namespace {

class Block {
 public:
  Block(const Config& c, const json& j, std::string pointer) : c_(c), j_(j), pointer_(std::move(pointer)) {
    if (!j_.is_object()) fail(pointer_, "expected an object");
  }

  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) fail(pointer_ + "/" + it.key(), "unknown key '" + it.key() + "'");
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return pointer_ + "/" + key; }

  void get(const char* key, int& out, int lo, int hi) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) fail(at(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    out = static_cast<int>(x);
  }
  void get(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(at(key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void get(const char* key, double& out, bool positive = true) const {
    if (!has(key)) return;
    out = number(j_.at(key), at(key), positive);
  }
  void get(const char* key, std::optional<double>& out) const {
    if (!has(key)) return;
    out = number(j_.at(key), at(key), true);
  }
  void get(const char* key, bool& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out, std::initializer_list<const char*> choices = {}) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    out = v.get<std::string>();
    if (choices.size() == 0) return;
    std::string list;
    for (const char* c : choices) {
      if (out == c) return;
      list += std::string(list.empty() ? "" : ", ") + c;
    }
    fail(at(key), "expected one of: " + list);
  }
  void get(const char* key, std::vector<double>& out, bool positive = true) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) fail(at(key), "expected a non-empty array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at(key) + "/" + std::to_string(i), positive));
  }
  void get(const char* key, std::vector<int>& out, int lo, int hi) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) fail(at(key), "expected a non-empty array of integers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = at(key) + "/" + std::to_string(i);
      if (!v[i].is_number_integer()) fail(p, "expected an integer");
      const long long x = v[i].get<long long>();
      if (x < lo || x > hi) fail(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      out.push_back(static_cast<int>(x));
    }
  }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    throw SchemaError(anchor(c_, pointer, message));
  }

 private:
  double number(const json& v, const std::string& pointer, bool positive) const {
    if (!v.is_number()) fail(pointer, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(pointer, "must be finite");
    if (positive && !(x > 0.0)) fail(pointer, "must be positive");
    return x;
  }

  const Config& c_;
  const json& j_;
  std::string pointer_;
};

}  // namespace

Config parse_config(const std::string& text, const std::string& path) {
  Config c;
  c.path = path;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "... at line L, column C: ..."
    throw SchemaError(path + ": " + e.what());
  }
  c.lines = index_key_lines(text);
  const Block top(c, root, "");
  top.only({"lattice", "ensemble", "run", "twoscale", "dump"});

  if (root.contains("lattice")) {
    const Block b(c, root["lattice"], "/lattice");
    b.only({"d", "n", "n_t", "L", "tau"});
    b.get("d", c.lattice.d, 1, 3);
    b.get("n", c.lattice.n, 2, 1 << 16);
    b.get("n_t", c.lattice.n_t, 2, 1 << 20);
    b.get("L", c.lattice.L);
    b.get("tau", c.lattice.tau);
  }
  if (root.contains("ensemble")) {
    const Block b(c, root["ensemble"], "/ensemble");
    b.only({"kind", "mu", "corr_length", "phases", "value", "isotropic", "random", "random_offset", "time_dependent",
            "periods"});
    std::string kind = to_string(c.ensemble.kind);
    b.get("kind", kind, {"constant", "laminate_space", "laminate_time", "checkerboard", "gaussian"});
    c.ensemble.kind = ensemble_kind_from_string(kind);
    b.get("mu", c.ensemble.mu);
    b.get("corr_length", c.ensemble.corr_length);
    b.get("phases", c.ensemble.phases);
    b.get("value", c.ensemble.value);
    b.get("isotropic", c.ensemble.isotropic);
    b.get("random", c.ensemble.random);
    b.get("random_offset", c.ensemble.random_offset);
    b.get("time_dependent", c.ensemble.time_dependent);
    b.get("periods", c.ensemble.periods, 1, 1 << 16);
    try {
      validate(c.ensemble);
    } catch (const ConfigError& e) {
      b.fail("/ensemble", e.what());
    }
  }
  if (root.contains("run")) {
    const Block b(c, root["run"], "/run");
    b.only({"seed", "samples", "betas", "eps", "theta", "p", "max_p", "tol", "out", "workers", "method"});
    b.get("seed", c.run.seed);
    b.get("samples", c.run.samples, 1, 1 << 20);
    b.get("betas", c.run.betas);
    b.get("eps", c.run.eps);
    b.get("theta", c.run.theta);
    b.get("max_p", c.run.max_p, 1, 64);
    b.get("p", c.run.p, 1, c.run.max_p);
    b.get("tol", c.run.tol);
    b.get("out", c.run.out);
    b.get("workers", c.run.workers, 1, 1024);
    b.get("method", c.run.method, {"space_time", "time_marching"});
    for (double e : c.run.eps)
      if (e > 1.0) b.fail("/run/eps", "eps values must lie in (0, 1]");
  }
  if (root.contains("twoscale")) {
    const Block b(c, root["twoscale"], "/twoscale");
    b.only({"geometry", "box", "horizon", "h_micro", "tau_micro", "locked_period", "micro_length", "micro_period",
            "source", "rve_samples", "rve_length", "rve_period", "with_expansion", "h_micro_list", "abar"});
    b.get("geometry", c.twoscale.geometry, {"torus", "dirichlet_box"});
    b.get("box", c.twoscale.box);
    b.get("horizon", c.twoscale.horizon);
    b.get("h_micro", c.twoscale.h_micro);
    b.get("tau_micro", c.twoscale.tau_micro);
    b.get("locked_period", c.twoscale.locked_period);
    b.get("micro_length", c.twoscale.micro_length);
    b.get("micro_period", c.twoscale.micro_period);
    b.get("source", c.twoscale.source, {"sine", "one", "zero"});
    b.get("rve_samples", c.twoscale.rve_samples, 1, 1 << 16);
    b.get("rve_length", c.twoscale.rve_length);
    b.get("rve_period", c.twoscale.rve_period);
    b.get("with_expansion", c.twoscale.with_expansion);
    b.get("h_micro_list", c.twoscale.h_micro_list);
    b.get("abar", c.twoscale.abar);
  }
  if (root.contains("dump")) {
    const Block b(c, root["dump"], "/dump");
    b.only({"field", "j", "k", "i"});
    b.get("field", c.dump.field, {"coefficient", "phi", "sigma"});
    b.get("j", c.dump.j, 0, 2);
    b.get("k", c.dump.k, 0, 3);
    b.get("i", c.dump.i, 0, 3);
  }
  try {
    (void)make_run_lattice(c);
  } catch (const ConfigError& e) {
    throw SchemaError(anchor(c, "/lattice", e.what()));
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path + ":0: cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

Lattice make_run_lattice(const Config& c) {
  return make_lattice(c.lattice.d, c.lattice.n, c.lattice.n_t, c.lattice.L, c.lattice.tau);
}

MacroGeometry geometry_from_string(const std::string& s) {
  return s == "torus" ? MacroGeometry::torus : MacroGeometry::dirichlet_box;
}

SourceFunction make_source(const std::string& name, MacroGeometry g, double box) {
  if (name == "zero") return {};
  if (name == "one") return [](const std::array<double, kMaxDim>&, double) { return 1.0; };
  // one full period on the torus, the first Dirichlet eigenfunction on the box
  const double k = (g == MacroGeometry::torus ? 2.0 : 1.0) * std::numbers::pi / box;
  return [k](const std::array<double, kMaxDim>& x, double) {
    return std::sin(k * x[0]) * std::sin(k * x[1]);
  };
}

nlohmann::ordered_json to_json(const Config& c) {
  nlohmann::ordered_json j;
  j["lattice"] = {{"d", c.lattice.d}, {"n", c.lattice.n}, {"n_t", c.lattice.n_t}, {"L", c.lattice.L}};
  j["lattice"]["tau"] = c.lattice.tau ? *c.lattice.tau : make_run_lattice(c).tau;
  const EnsembleSpec& e = c.ensemble;
  j["ensemble"] = {{"kind", to_string(e.kind)},       {"mu", e.mu},
                   {"corr_length", e.corr_length},    {"phases", e.phases},
                   {"value", e.value},                {"isotropic", e.isotropic},
                   {"random", e.random},              {"random_offset", e.random_offset},
                   {"time_dependent", e.time_dependent}, {"periods", e.periods}};
  const RunConfig& r = c.run;
  j["run"] = {{"seed", r.seed},   {"samples", r.samples}, {"betas", r.betas},     {"eps", r.eps},
              {"theta", r.theta}, {"p", r.p},             {"max_p", r.max_p},     {"tol", r.tol},
              {"out", r.out},     {"workers", r.workers}, {"method", r.method}};
  const TwoScaleConfig& t = c.twoscale;
  j["twoscale"] = {{"geometry", t.geometry},
                   {"box", t.box},
                   {"horizon", t.horizon},
                   {"h_micro", t.h_micro},
                   {"tau_micro", t.tau_micro ? *t.tau_micro : t.h_micro * t.h_micro},
                   {"locked_period", t.locked_period},
                   {"micro_length", t.micro_length},
                   {"micro_period", t.micro_period},
                   {"source", t.source},
                   {"rve_samples", t.rve_samples},
                   {"rve_length", t.rve_length},
                   {"rve_period", t.rve_period},
                   {"with_expansion", t.with_expansion}};
  if (!t.h_micro_list.empty()) j["twoscale"]["h_micro_list"] = t.h_micro_list;
  if (t.abar) j["twoscale"]["abar"] = *t.abar;
  j["dump"] = {{"field", c.dump.field}, {"j", c.dump.j}, {"k", c.dump.k}, {"i", c.dump.i}};
  return j;
}

}  // namespace parahom::cli
