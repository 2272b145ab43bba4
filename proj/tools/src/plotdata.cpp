#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "commands.hpp"

namespace parahom::cli {

namespace {

using json = nlohmann::json;

struct Series {
  Csv csv{{"x", "y", "series", "stderr"}};
  int rows = 0;
  void add(double x, double y, const std::string& name, double err) {
    csv.row() << x << y << name << err;
    ++rows;
  }
};

json load_json(const std::filesystem::path& p) { return json::parse(read_file(p.string())); }

// minimal reader for our own CSV output (no quoting)
std::vector<std::map<std::string, std::string>> load_csv(const std::filesystem::path& p) {
  std::istringstream in(read_file(p.string()));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> out;
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    return f;
  };
  if (std::getline(in, line)) header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t k = 0; k < header.size() && k < f.size(); ++k) row[header[k]] = f[k];
    out.push_back(std::move(row));
  }
  return out;
}

// bootstrap 95% half width -> approximate standard error
double se_from_half_width(double hw) { return hw / 1.96; }

void rate_series(const std::filesystem::path& dir, Series& s) {
  const json j = load_json(dir / "rate_summary.json");
  for (const json& r : j.at("per_eps")) {
    const double m = r.at("mean_err").get<double>();
    if (!(m > 0.0)) continue;
    s.add(std::log(r.at("eps").get<double>()), std::log(m), "log_err", r.at("stderr").get<double>() / m);
  }
}

void growth_series(const std::filesystem::path& dir, Series& s) {
  const json j = load_json(dir / "fluxcor_summary.json");
  for (const json& r : j.at("growth")) {
    const double x = r.at("r").get<double>();
    s.add(x, r.at("rms").get<double>(), "rms", 0.0);
    s.add(x, r.at("mu_d").get<double>(), "mu_d", 0.0);
  }
}

void effective_series(const std::filesystem::path& dir, Series& s) {
  for (const auto& row : load_csv(dir / "effective.csv"))
    for (const auto& [k, v] : row)
      if (k.size() == 3 && k[0] == 'a') s.add(std::stod(row.at("sample")), std::stod(v), k, 0.0);
}

void beta_series(const std::filesystem::path& dir, Series& s) {
  for (const auto& row : load_csv(dir / "beta_sweep.csv")) {
    const std::string tag = "_sample" + row.at("sample");
    const double b = std::stod(row.at("beta"));
    for (const auto& [k, v] : row)
      if (k.size() == 3 && k[0] == 'a') s.add(b, std::stod(v), k + tag, 0.0);
    s.add(b, std::stod(row.at("grad_norm")), "grad_norm" + tag, 0.0);
  }
}

void residual_series(const std::filesystem::path& dir, Series& s) {
  const json j = load_json(dir / "residual_summary.json");
  for (const json& r : j.at("rows")) {
    const double h = r.at("h_micro").get<double>();
    s.add(h, r.at("residual").get<double>(), "residual", 0.0);
    s.add(h, r.at("residual_without_sigma").get<double>(), "residual_without_sigma", 0.0);
  }
}

void fluct_series(const std::filesystem::path& dir, Series& s) {
  for (const auto& row : load_csv(dir / "fluct.csv"))
    s.add(std::stod(row.at("p")), std::stod(row.at("estimate")), row.at("label"),
          se_from_half_width(std::stod(row.at("half_width"))));
}

void minrad_series(const std::filesystem::path& dir, Series& s) {
  std::map<double, int> hist;
  int censored = 0;
  for (const auto& row : load_csv(dir / "minrad.csv")) {
    if (row.at("censored") == "true")
      ++censored;
    else
      ++hist[std::stod(row.at("chi"))];
  }
  for (auto& [chi, count] : hist) s.add(chi, count, "chi_histogram", 0.0);
  s.add(0.0, censored, "censored_count", 0.0);
}

void commutator_series(const std::filesystem::path& dir, Series& s) {
  const json j = load_json(dir / "commutator_summary.json");
  for (const json& r : j.at("rows"))
    s.add(std::log(r.at("eps").get<double>()), r.at("rescaled_sd").get<double>(), "rescaled_sd",
          se_from_half_width(r.at("rescaled_half_width").get<double>()));
}

}  // namespace

int emit_plotdata(const std::string& run_dir, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(run_dir);
  std::error_code ec;
  if (!fs::is_directory(dir, ec) || fs::is_empty(dir, ec)) {
    std::cerr << "error: " << run_dir << ": not a run directory or empty\n";
    return kExitIo;
  }
  if (!fs::exists(dir / "manifest.json")) {
    std::cerr << "error: " << run_dir << ": no manifest.json, run incomplete\n";
    return kExitIo;
  }
  try {
    const json manifest = load_json(dir / "manifest.json");
    const std::string command = manifest.at("command").get<std::string>();
    if (manifest.at("status").get<std::string>() != "complete")
      std::cerr << "warning: run status is '" << manifest.at("status").get<std::string>() << "'\n";
    static const std::map<std::string, void (*)(const fs::path&, Series&)> table = {
        {"rate", rate_series},       {"fluxcor-verify", growth_series}, {"effective", effective_series},
        {"beta-sweep", beta_series}, {"residual", residual_series},     {"fluct", fluct_series},
        {"minrad", minrad_series},   {"commutator", commutator_series}};
    Series s;
    auto it = table.find(command);
    if (it == table.end()) {
      std::cerr << "error: command '" << command << "' has no plottable series\n";
      return kExitIo;
    }
    it->second(dir, s);
    RunWriter w(out_dir, "plotdata");
    w.write("plotdata.csv", s.csv.str());
    w.finish(manifest.value("config_sha256", ""), manifest.value("seed", std::uint64_t{0}), "complete");
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << run_dir << ": malformed run output: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace parahom::cli
