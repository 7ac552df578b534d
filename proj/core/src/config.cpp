/// @file config.cpp
#include "fsi/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "fsi/diagnostics.hpp"
#include "fsi/errors.hpp"

namespace fsi {

namespace {

struct KeyDef {
  const char* key;
  const char* def;
};

// canonical key order; every key has a default so a bare `run` works
const std::vector<KeyDef>& key_defs() {
  static const std::vector<KeyDef> defs = {
      {"scheme.name", "monolithic"},
      {"scheme.extrapolation", "1"},
      {"scheme.tau", "0.05"},
      {"scheme.t_end", "1.0"},
      {"scheme.gamma", "0.05"},
      {"fluid.rho_f", "1.0"},
      {"fluid.mu", "0.1"},
      {"solid.rho_s", "1.0"},
      {"solid.eps", "0.1"},
      {"solid.kind", "string"},
      {"solid.lambda0", "1.0"},
      {"solid.lambda1", "10.0"},
      {"solid.k_coef", "10.0"},
      {"scenario.name", "ellipse_relax"},
      {"scenario.center_x", "0.5"},
      {"scenario.center_y", "0.5"},
      {"scenario.a", "0.25"},
      {"scenario.b", "0.125"},
      {"scenario.radius", "0.2"},
      {"scenario.rest_radius", "0"},
      {"scenario.n", "16"},
      {"scenario.m", "0"},
      {"study.kind", "time"},
      {"study.taus", "0.064,0.032,0.016,0.008"},
      {"study.ns", "8,16,32"},
      {"study.ref_n", "64"},
      {"study.ref_tau", "0.001"},
      {"study.t_eval", "0.064"},
      {"study.ref_scheme", "monolithic"},
      {"sweep.taus", "1.28,0.64,0.32,0.16,0.08,0.04"},
      {"mms.ns", "8,16,32"},
      {"output.dir", "out"},
      {"output.snapshot_interval", "0"},
      {"output.threads", "0"},
  };
  return defs;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
  char* end = nullptr;
  const std::string t = trim(v);
  double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError(key + ": expected a number, got '" + v + "'", line);
  return x;
}

int parse_int(const std::string& v, const std::string& key, int line) {
  char* end = nullptr;
  const std::string t = trim(v);
  long x = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'", line);
  return static_cast<int>(x);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(v);
  while (std::getline(is, cur, ',')) out.push_back(trim(cur));
  return out;
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_double(item, key, line));
  return out;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key, int line) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(parse_int(item, key, line));
  return out;
}

Scheme scheme_from_name(const std::string& name, const std::string& key, int line) {
  if (name == "monolithic") return Scheme::Monolithic;
  if (name == "monolithic_linearized") return Scheme::MonolithicLinearized;
  if (name == "alg2") return Scheme::Alg2;
  if (name == "alg3") return Scheme::Alg3;
  throw ConfigError(key + ": unknown scheme '" + name + "'", line);
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& d : key_defs()) out.emplace_back(d.key);
  return out;
}

RunConfig parse_config(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::map<std::string, std::string> values;
  std::map<std::string, int> source_line;
  std::map<std::string, bool> user_set;
  for (const auto& d : key_defs()) {
    values[d.key] = d.def;
    source_line[d.key] = 0;
    user_set[d.key] = false;
  }

  auto assign = [&](const std::string& key, const std::string& value, int line) {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("unknown key '" + key + "'", line);
    it->second = value;
    source_line[key] = line;
    user_set[key] = true;
  };

  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'", 0);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      size_t hash_pos = line.find('#');
      if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
      line = trim(line);
      if (line.empty()) continue;
      size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("missing key before '='", lineno);
      if (value.empty()) throw ConfigError("missing value for key '" + key + "'", lineno);
      assign(key, value, lineno);
    }
  }
  for (const auto& [key, value] : overrides) assign(key, value, 0);

  RunConfig cfg;
  auto at = [&](const char* key) -> const std::string& { return values.at(key); };
  auto line_of = [&](const char* key) { return source_line.at(key); };

  cfg.scheme.scheme = scheme_from_name(at("scheme.name"), "scheme.name", line_of("scheme.name"));
  cfg.scheme.extrapolation =
      parse_int(at("scheme.extrapolation"), "scheme.extrapolation", line_of("scheme.extrapolation"));
  cfg.scheme.tau = parse_double(at("scheme.tau"), "scheme.tau", line_of("scheme.tau"));
  cfg.t_end = parse_double(at("scheme.t_end"), "scheme.t_end", line_of("scheme.t_end"));
  cfg.scheme.gamma = parse_double(at("scheme.gamma"), "scheme.gamma", line_of("scheme.gamma"));
  cfg.scheme.fluid.rho_f = parse_double(at("fluid.rho_f"), "fluid.rho_f", line_of("fluid.rho_f"));
  cfg.scheme.fluid.mu = parse_double(at("fluid.mu"), "fluid.mu", line_of("fluid.mu"));
  cfg.scheme.solid.rho_s = parse_double(at("solid.rho_s"), "solid.rho_s", line_of("solid.rho_s"));
  cfg.scheme.solid.eps = parse_double(at("solid.eps"), "solid.eps", line_of("solid.eps"));
  {
    const std::string kind = at("solid.kind");
    if (kind == "string")
      cfg.scheme.solid.kind = SolidKind::GeneralizedString;
    else if (kind == "membrane")
      cfg.scheme.solid.kind = SolidKind::Membrane;
    else
      throw ConfigError("solid.kind: unknown model '" + kind + "'", line_of("solid.kind"));
  }
  cfg.scheme.solid.lambda0 =
      parse_double(at("solid.lambda0"), "solid.lambda0", line_of("solid.lambda0"));
  cfg.scheme.solid.lambda1 =
      parse_double(at("solid.lambda1"), "solid.lambda1", line_of("solid.lambda1"));
  cfg.scheme.solid.k_coef =
      parse_double(at("solid.k_coef"), "solid.k_coef", line_of("solid.k_coef"));

  {
    const std::string name = at("scenario.name");
    try {
      cfg.scenario.kind = scenario_kind_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("scenario.name: ") + e.what(), line_of("scenario.name"));
    }
  }
  cfg.scenario.center.x =
      parse_double(at("scenario.center_x"), "scenario.center_x", line_of("scenario.center_x"));
  cfg.scenario.center.y =
      parse_double(at("scenario.center_y"), "scenario.center_y", line_of("scenario.center_y"));
  cfg.scenario.a = parse_double(at("scenario.a"), "scenario.a", line_of("scenario.a"));
  cfg.scenario.b = parse_double(at("scenario.b"), "scenario.b", line_of("scenario.b"));
  cfg.scenario.radius =
      parse_double(at("scenario.radius"), "scenario.radius", line_of("scenario.radius"));
  cfg.scenario.rest_radius = parse_double(at("scenario.rest_radius"), "scenario.rest_radius",
                                          line_of("scenario.rest_radius"));
  cfg.scenario.n = parse_int(at("scenario.n"), "scenario.n", line_of("scenario.n"));
  cfg.scenario.m = parse_int(at("scenario.m"), "scenario.m", line_of("scenario.m"));

  {
    const std::string kind = at("study.kind");
    try {
      cfg.study.kind = study_kind_from_name(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("study.kind: ") + e.what(), line_of("study.kind"));
    }
  }
  cfg.study.taus = parse_double_list(at("study.taus"), "study.taus", line_of("study.taus"));
  cfg.study.ns = parse_int_list(at("study.ns"), "study.ns", line_of("study.ns"));
  cfg.study.ref_n = parse_int(at("study.ref_n"), "study.ref_n", line_of("study.ref_n"));
  cfg.study.ref_tau =
      parse_double(at("study.ref_tau"), "study.ref_tau", line_of("study.ref_tau"));
  cfg.study.t_eval =
      parse_double(at("study.t_eval"), "study.t_eval", line_of("study.t_eval"));
  cfg.study.ref_scheme =
      scheme_from_name(at("study.ref_scheme"), "study.ref_scheme", line_of("study.ref_scheme"));

  cfg.sweep_taus = parse_double_list(at("sweep.taus"), "sweep.taus", line_of("sweep.taus"));
  cfg.mms_ns = parse_int_list(at("mms.ns"), "mms.ns", line_of("mms.ns"));
  cfg.output_dir = at("output.dir");
  cfg.snapshot_interval = parse_int(at("output.snapshot_interval"), "output.snapshot_interval",
                                    line_of("output.snapshot_interval"));
  cfg.threads = parse_int(at("output.threads"), "output.threads", line_of("output.threads"));

  std::ostringstream eff;
  eff << "# effective configuration (keys at built-in defaults marked)\n";
  for (const auto& d : key_defs()) {
    eff << d.key << " = " << values[d.key];
    if (!user_set[d.key]) {
      eff << "   # default";
      ++cfg.defaulted_keys;
    }
    eff << '\n';
  }
  cfg.effective_text = eff.str();
  cfg.hash = fnv1a(cfg.effective_text);
  return cfg;
}

namespace {

std::string fmtg(double v) {
  char b[40];
  std::snprintf(b, sizeof(b), "%.10g", v);
  return b;
}

int do_run(const RunConfig& cfg, OutputSink& sink, std::ostream& out, std::ostream& err) {
  RunOptions opts;
  opts.t_end = cfg.t_end;
  opts.snapshot_interval = cfg.snapshot_interval;
  opts.config_hash = cfg.hash;
  RunResult res = run_scenario(cfg.scenario, cfg.scheme, opts, &sink);
  out << "scheme " << scheme_name(cfg.scheme.scheme) << " scenario "
      << scenario_kind_name(cfg.scenario.kind) << " steps " << res.records.back().step << "\n";
  out << "initial energy " << fmtg(res.initial_energy) << " final energy "
      << fmtg(res.records.back().energy) << " max balance defect "
      << fmtg(res.max_balance_defect) << "\n";
  if (!res.completed) {
    err << "error: run aborted at t=" << fmtg(res.final_state.t) << ": " << res.abort_reason
        << "\n";
    return 1;
  }
  return 0;
}

int do_sweep(const RunConfig& cfg, OutputSink& sink, std::ostream& out) {
  RunOptions opts;
  opts.t_end = cfg.t_end;
  opts.config_hash = cfg.hash;
  auto rows = stability_sweep(cfg.scenario, cfg.scheme, cfg.sweep_taus, opts, &sink,
                              cfg.threads);
  out << "tau       stable  max_energy/initial\n";
  for (const auto& r : rows)
    out << fmtg(r.tau) << "  " << (r.stable ? "yes" : "no ") << "  "
        << fmtg(r.max_energy / std::max(r.initial_energy, 1e-30)) << "\n";
  return 0;
}

int do_converge(const RunConfig& cfg, OutputSink& sink, std::ostream& out) {
  RunOptions opts;
  opts.config_hash = cfg.hash;
  auto rows =
      convergence_study(cfg.study, cfg.scenario, cfg.scheme, opts, &sink, cfg.threads);
  out << "n     tau          err_total      rate\n";
  for (const auto& r : rows)
    out << r.n << "  " << fmtg(r.tau) << "  " << fmtg(r.err.total) << "  "
        << fmtg(r.rate_total) << "\n";
  return 0;
}

int do_mms(const RunConfig& cfg, OutputSink& sink, std::ostream& out) {
  auto rows = stokes_mms(cfg.mms_ns, cfg.scheme.fluid.mu, cfg.scheme.gamma, cfg.hash, &sink,
                         cfg.threads);
  out << "n     err_u_l2       rate   err_u_h1       rate   err_p_l2       rate\n";
  for (const auto& r : rows)
    out << r.n << "  " << fmtg(r.err_u_l2) << "  " << fmtg(r.rate_u_l2) << "  "
        << fmtg(r.err_u_h1) << "  " << fmtg(r.rate_u_h1) << "  " << fmtg(r.err_p_l2) << "  "
        << fmtg(r.rate_p_l2) << "\n";
  return 0;
}

int do_check(const RunConfig& cfg, std::ostream& out) {
  SolidMesh smesh = cfg.scenario.make_solid();
  SolidBlocks blocks = assemble_solid_blocks(smesh, cfg.scheme.solid);
  CflReport rep = cfl_check(cfg.scheme, blocks.M_s, blocks.K_s);
  out << "structure spectrum: lambda_max = " << fmtg(rep.lambda_max) << "\n";
  out << "explicit-force step bound: tau^2 lambda_max < rho_s eps -> "
      << (rep.alg2_ok ? "satisfied" : "violated") << " (margin " << fmtg(rep.alg2_margin)
      << ")\n";
  out << "two-stage second-order-prediction bound: 2 tau^6 lambda_max^3 < (rho_s eps)^3 -> "
      << (rep.alg3_r2_ok ? "satisfied" : "violated") << " (margin " << fmtg(rep.alg3_r2_margin)
      << ")\n";
  out << "configured scheme " << scheme_name(cfg.scheme.scheme) << " (prediction order "
      << cfg.scheme.extrapolation << "): "
      << (rep.unconditional ? "no step restriction"
                            : "subject to the bounds above")
      << "\n";
  return 0;
}

}  // namespace

int dispatch(const std::string& subcommand, const RunConfig& cfg, std::ostream& out,
             std::ostream& err) {
  try {
    DirectorySink sink(cfg.output_dir);
    sink.write_file("effective_config.txt", cfg.effective_text);
    if (cfg.defaulted_keys > 0)
      err << "notice: " << cfg.defaulted_keys
          << " keys at built-in defaults; see effective_config.txt\n";
    if (subcommand == "run") return do_run(cfg, sink, out, err);
    if (subcommand == "sweep") return do_sweep(cfg, sink, out);
    if (subcommand == "converge") return do_converge(cfg, sink, out);
    if (subcommand == "stokes-mms") return do_mms(cfg, sink, out);
    if (subcommand == "check") return do_check(cfg, out);
    err << "error: unknown subcommand '" << subcommand << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fsi
