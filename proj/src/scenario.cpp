#include "beltrami/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>

#include "beltrami/analysis.hpp"
#include "beltrami/coefficients.hpp"
#include "beltrami/dilatation.hpp"
#include "beltrami/errors.hpp"
#include "beltrami/io.hpp"
#include "beltrami/oracle.hpp"

namespace beltrami {
namespace {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- parsing --

std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_num(const std::string& tok, int line) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw parse_error(line, "expected a number, got '" + tok + "'");
  }
}

long long parse_int(const std::string& tok, int line) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw parse_error(line, "expected an integer, got '" + tok + "'");
  }
  return v;
}

bool parse_bool(const std::string& tok, int line) {
  if (tok == "on" || tok == "true" || tok == "1") return true;
  if (tok == "off" || tok == "false" || tok == "0") return false;
  throw parse_error(line, "expected on/off, got '" + tok + "'");
}

std::vector<double> parse_nums(const std::vector<std::string>& toks, int line) {
  std::vector<double> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(parse_num(t, line));
  return out;
}

void expect_count(const std::vector<std::string>& toks, size_t n, int line) {
  if (toks.size() != n) {
    throw parse_error(line, "expected " + std::to_string(n) + " value(s), got " +
                                std::to_string(toks.size()));
  }
}

std::vector<cd> to_pairs(const std::vector<double>& flat, int line, const char* what) {
  if (flat.empty() || flat.size() % 2 != 0) {
    throw parse_error(line, std::string(what) + " needs re/im pairs");
  }
  std::vector<cd> out;
  for (size_t i = 0; i < flat.size(); i += 2) out.emplace_back(flat[i], flat[i + 1]);
  return out;
}

// ------------------------------------------------------------------- json --

ojson jnum(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json_round(v);
}

ojson jnums(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

ojson jcomplex(cd z) { return ojson::array({jnum(z.real()), jnum(z.imag())}); }

ojson config_json(const ScenarioConfig& cfg, const GridSpec& spec) {
  ojson grid;
  grid["center"] = jcomplex(spec.center);
  grid["halfwidth"] = jnum(spec.halfwidth);
  grid["resolution"] = spec.resolution;
  ojson c;
  c["grid"] = grid;
  if (cfg.source == ScenarioConfig::Source::example1) {
    c["source"] = "example1";
    c["alpha"] = jnum(cfg.alpha);
  } else {
    c["source"] = "file";
    c["path"] = cfg.coeff_path;
  }
  c["levels"] = cfg.levels;
  c["solver"] = ojson{{"tol", jnum(cfg.solver.tol)}, {"max_iter", cfg.solver.max_iter}};
  c["p"] = jnum(cfg.p);
  c["gap_radius"] = jnum(cfg.gap_radius);
  c["seed"] = cfg.seed;
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot write " + path);
  out << text;
  if (!out) throw io_error("write failed for " + path);
}

void write_json(const std::string& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());
}

// --------------------------------------------------------------- plumbing --

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const parse_error& e) {
    log << "error: line " << e.line << ": " << e.what() << "\n";
    return 2;
  } catch (const solver_error& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const sampling_error& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const support_overflow_error& e) {
    log << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    log << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    log << "configuration error: " << e.what() << "\n";
    return 2;
  }
}

// Coefficient pair plus the grid it lives on. A file source brings its own
// window, which then overrides the configured one.
struct LoadedCoefficient {
  CoefficientField coeff;
  GridSpec spec;
};

LoadedCoefficient load_coefficient(const ScenarioConfig& cfg) {
  if (cfg.source == ScenarioConfig::Source::file) {
    CoefficientField c = read_coefficient_csv(cfg.coeff_path);
    const GridSpec spec = c.mu.spec;
    return {std::move(c), spec};
  }
  const GridSpec spec = make_grid(cfg.center, cfg.halfwidth, cfg.resolution);
  const double alpha = cfg.alpha;
  ComplexField mu = sample([alpha](cd z) { return oracle::mu(z, alpha); }, spec,
                           Meaning::coefficient);
  ComplexField nu = make_field(spec, Meaning::coefficient);
  return {make_coefficient(std::move(mu), std::move(nu)), spec};
}

double sup_ladder_gap(const SampledMap& a, const SampledMap& b, double radius) {
  double gap = 0.0;
  const int n = a.spec.resolution;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(a.spec.node(i, j)) > radius) continue;
      gap = std::max(gap, std::abs(a.displacement.at(i, j) - b.displacement.at(i, j)));
    }
  }
  return gap;
}

struct SolvedLadder {
  std::vector<PrincipalSolution> levels;
  std::vector<double> gaps;
};

// Same loop as run_ladder, kept inline so callers can hold on to every level
// and report partial progress when a level fails.
SolvedLadder solve_ladder(const CoefficientField& coeff, const ScenarioConfig& cfg,
                          const TransformPlan& plan, std::ostream& log) {
  SolvedLadder out;
  for (int n : cfg.levels) {
    const CoefficientField cut = truncate(coeff, truncation_level(n));
    PrincipalSolution sol;
    try {
      sol = solve_principal(cut, plan, cfg.solver);
    } catch (const solver_error& e) {
      throw solver_error(e.kind, n, e.iterations, e.residual, e.what());
    }
    sol.map.level = n;
    log << "level " << n << ": " << sol.diagnostics.iterations << " iterations, relative residual "
        << sol.diagnostics.relative_residual << "\n";
    if (!out.levels.empty()) {
      out.gaps.push_back(sup_ladder_gap(sol.map, out.levels.back().map, cfg.gap_radius));
    }
    out.levels.push_back(std::move(sol));
  }
  return out;
}

ojson level_json(const PrincipalSolution& sol) {
  const auto& d = sol.diagnostics;
  ojson j;
  j["level"] = sol.map.level.value_or(0);
  j["bound"] = jnum(truncation_level(sol.map.level.value_or(1)).bound);
  j["iterations"] = d.iterations;
  j["residual"] = jnum(d.residual);
  j["relative_residual"] = jnum(d.relative_residual);
  j["contraction_bound"] = jnum(d.contraction_bound);
  return j;
}

void write_far_field_csv(const FarFieldProfile& prof, const std::string& path) {
  std::ostringstream out;
  out << "radius,deviation\n";
  char buf[80];
  for (size_t i = 0; i < prof.radii.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", prof.radii[i], prof.deviation[i]);
    out << buf;
  }
  write_text(path, out.str());
}

// Weight the classifier and the modulus inequality run against: the radial
// majorant for the example family, the joint dilatation field otherwise.
Weight scenario_weight(const ScenarioConfig& cfg, const CoefficientField& coeff) {
  if (cfg.source == ScenarioConfig::Source::example1) {
    const double alpha = cfg.alpha;
    return make_weight([alpha](cd y) { return oracle::majorant(y, alpha); });
  }
  return make_weight(joint_dilatation(coeff).field);
}

const char* fmo_name(FmoReport::Outcome o) {
  switch (o) {
    case FmoReport::Outcome::pass: return "pass";
    case FmoReport::Outcome::fail: return "fail";
    default: return "undetermined";
  }
}

ojson probe_findings_json(const ProbeFindings& pf) {
  ojson j;
  j["probe"] = jcomplex(pf.probe);
  j["usable"] = pf.usable;
  if (!pf.usable) return j;
  j["integrability"] = ojson{{"pass", pf.integrability.pass},
                             {"scanned", pf.integrability.scanned},
                             {"witnesses", pf.integrability.witness_radii.size()}};
  j["fmo"] = ojson{{"outcome", fmo_name(pf.fmo.outcome)},
                   {"eps", jnums(pf.fmo.eps)},
                   {"oscillation", jnums(pf.fmo.oscillation)},
                   {"dropped", pf.fmo.dropped}};
  j["divergence"] = ojson{{"divergent", pf.divergence.divergent},
                          {"zero_average", pf.divergence.zero_average},
                          {"value", jnum(pf.divergence.value)},
                          {"tail_ratio", jnum(pf.divergence.tail_ratio)}};
  return j;
}

ojson classification_json(const ClassificationVerdict& v) {
  ojson j;
  j["verdict"] = verdict_name(v.verdict);
  j["circle_integrability"] = v.circle_integrability;
  j["fmo"] = fmo_name(v.fmo);
  j["divergence"] = v.divergence;
  ojson probes = ojson::array();
  for (const auto& pf : v.probes) probes.push_back(probe_findings_json(pf));
  j["probes"] = probes;
  return j;
}

// verify-oracle helpers ------------------------------------------------------

struct BandStat {
  double sup = 0.0;
  std::vector<double> all;
  long long skipped = 0;

  void add(double err) {
    sup = std::max(sup, err);
    all.push_back(err);
  }
  double median() {
    if (all.empty()) return std::numeric_limits<double>::quiet_NaN();
    auto mid = all.begin() + static_cast<long>(all.size() / 2);
    std::nth_element(all.begin(), mid, all.end());
    return *mid;
  }
};

double piecewise_inverse_dilatation(double r, double alpha, double tau) {
  if (r <= tau) return 1.0;  // conformal core: the truncation zeroed the coefficient
  return (std::pow(r, alpha) + 1.0) / (alpha * std::pow(r, alpha));
}

}  // namespace

// ------------------------------------------------------------------ config --

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  bool schema_ok = false;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw parse_error(lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw parse_error(lineno, "empty key");
    if (!seen.insert(key).second) throw parse_error(lineno, "duplicate key '" + key + "'");
    const auto toks = split_ws(value);

    if (key == "schema") {
      expect_count(toks, 1, lineno);
      if (parse_int(toks[0], lineno) != 1) throw parse_error(lineno, "unsupported schema");
      schema_ok = true;
    } else if (key == "grid.center") {
      expect_count(toks, 2, lineno);
      cfg.center = cd(parse_num(toks[0], lineno), parse_num(toks[1], lineno));
    } else if (key == "grid.halfwidth") {
      expect_count(toks, 1, lineno);
      cfg.halfwidth = parse_num(toks[0], lineno);
    } else if (key == "grid.resolution") {
      expect_count(toks, 1, lineno);
      cfg.resolution = static_cast<int>(parse_int(toks[0], lineno));
    } else if (key == "coeff.source") {
      expect_count(toks, 1, lineno);
      if (toks[0] == "example1") {
        cfg.source = ScenarioConfig::Source::example1;
      } else if (toks[0] == "file") {
        cfg.source = ScenarioConfig::Source::file;
      } else {
        throw parse_error(lineno, "coeff.source must be example1 or file");
      }
    } else if (key == "coeff.alpha") {
      expect_count(toks, 1, lineno);
      cfg.alpha = parse_num(toks[0], lineno);
    } else if (key == "coeff.path") {
      if (value.empty()) throw parse_error(lineno, "coeff.path needs a value");
      cfg.coeff_path = value;
    } else if (key == "levels") {
      if (toks.empty()) throw parse_error(lineno, "levels needs values");
      cfg.levels.clear();
      for (const auto& t : toks) cfg.levels.push_back(static_cast<int>(parse_int(t, lineno)));
    } else if (key == "solver.tol") {
      expect_count(toks, 1, lineno);
      cfg.solver.tol = parse_num(toks[0], lineno);
    } else if (key == "solver.max_iter") {
      expect_count(toks, 1, lineno);
      cfg.solver.max_iter = static_cast<int>(parse_int(toks[0], lineno));
    } else if (key == "p") {
      expect_count(toks, 1, lineno);
      cfg.p = parse_num(toks[0], lineno);
    } else if (key == "gap_radius") {
      expect_count(toks, 1, lineno);
      cfg.gap_radius = parse_num(toks[0], lineno);
    } else if (key == "analysis.poletsky") {
      expect_count(toks, 1, lineno);
      cfg.poletsky = parse_bool(toks[0], lineno);
    } else if (key == "analysis.equicontinuity") {
      expect_count(toks, 1, lineno);
      cfg.equicontinuity = parse_bool(toks[0], lineno);
    } else if (key == "analysis.classify") {
      expect_count(toks, 1, lineno);
      cfg.classifier = parse_bool(toks[0], lineno);
    } else if (key == "analysis.far_field") {
      cfg.far_field = parse_nums(toks, lineno);
    } else if (key == "classify.domain_radius") {
      expect_count(toks, 1, lineno);
      cfg.domain_radius = parse_num(toks[0], lineno);
    } else if (key == "classify.probes") {
      cfg.probes = to_pairs(parse_nums(toks, lineno), lineno, "classify.probes");
    } else if (key == "diag.inner") {
      expect_count(toks, 1, lineno);
      cfg.diag_inner = parse_num(toks[0], lineno);
    } else if (key == "diag.outer") {
      expect_count(toks, 1, lineno);
      cfg.diag_outer = parse_num(toks[0], lineno);
    } else if (key == "diag.pairs") {
      expect_count(toks, 1, lineno);
      cfg.diag_pairs = static_cast<int>(parse_int(toks[0], lineno));
    } else if (key == "diag.annuli") {
      cfg.diag_annuli = parse_nums(toks, lineno);
      if (cfg.diag_annuli.empty() || cfg.diag_annuli.size() % 2 != 0) {
        throw parse_error(lineno, "diag.annuli needs r1/r2 pairs");
      }
    } else if (key == "verify.sup") {
      expect_count(toks, 1, lineno);
      cfg.verify_sup = parse_num(toks[0], lineno);
    } else if (key == "verify.median") {
      expect_count(toks, 1, lineno);
      cfg.verify_median = parse_num(toks[0], lineno);
    } else if (key == "verify.inverse_abs") {
      expect_count(toks, 1, lineno);
      cfg.verify_inverse_abs = parse_num(toks[0], lineno);
    } else if (key == "verify.inverse_rel") {
      expect_count(toks, 1, lineno);
      cfg.verify_inverse_rel = parse_num(toks[0], lineno);
    } else if (key == "verify.window") {
      expect_count(toks, 1, lineno);
      cfg.verify_window = parse_num(toks[0], lineno);
    } else if (key == "seed") {
      expect_count(toks, 1, lineno);
      const long long s = parse_int(toks[0], lineno);
      if (s < 0) throw parse_error(lineno, "seed must be nonnegative");
      cfg.seed = static_cast<unsigned long long>(s);
    } else if (key == "out") {
      if (value.empty()) throw parse_error(lineno, "out needs a value");
      cfg.out_dir = value;
    } else {
      throw parse_error(lineno, "unknown key '" + key + "'");
    }
  }
  if (!schema_ok) throw parse_error(lineno, "missing 'schema = 1'");
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config " + path);
  return parse_config(in);
}

void validate_config(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(cfg.halfwidth > 0.0) || !std::isfinite(cfg.halfwidth)) fail("grid.halfwidth must be positive");
  if (cfg.resolution < 8 || (cfg.resolution & (cfg.resolution - 1)) != 0) {
    fail("grid.resolution must be a power of two, at least 8");
  }
  if (cfg.source == ScenarioConfig::Source::example1) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 2.0)) fail("coeff.alpha must lie in (0, 2)");
  } else if (cfg.coeff_path.empty()) {
    fail("coeff.source = file requires coeff.path");
  }
  if (cfg.levels.empty()) fail("levels must not be empty");
  for (size_t i = 0; i < cfg.levels.size(); ++i) {
    if (cfg.levels[i] < 1) fail("levels must be >= 1");
    if (i > 0 && cfg.levels[i] <= cfg.levels[i - 1]) fail("levels must be strictly increasing");
  }
  if (!(cfg.solver.tol > 0.0)) fail("solver.tol must be positive");
  if (cfg.solver.max_iter < 1) fail("solver.max_iter must be >= 1");
  if (!(cfg.p > 1.0 && cfg.p <= 2.0)) fail("p must lie in (1, 2]");
  if (!(cfg.gap_radius > 0.0)) fail("gap_radius must be positive");
  for (size_t i = 0; i < cfg.far_field.size(); ++i) {
    if (!(cfg.far_field[i] > 0.0)) fail("far-field radii must be positive");
    if (i > 0 && cfg.far_field[i] <= cfg.far_field[i - 1]) {
      fail("far-field radii must be strictly increasing");
    }
  }
  if (!(cfg.domain_radius > 0.0)) fail("classify.domain_radius must be positive");
  if (cfg.probes.empty()) fail("classify.probes must not be empty");
  if (!(cfg.diag_inner > 0.0 && cfg.diag_inner < cfg.diag_outer)) {
    fail("diag.inner must lie in (0, diag.outer)");
  }
  if (cfg.diag_pairs < 1) fail("diag.pairs must be >= 1");
  for (size_t i = 0; i + 1 < cfg.diag_annuli.size(); i += 2) {
    if (!(cfg.diag_annuli[i] > 0.0 && cfg.diag_annuli[i] < cfg.diag_annuli[i + 1])) {
      fail("diag.annuli pairs must satisfy 0 < r1 < r2");
    }
  }
  if (!(cfg.verify_sup > 0.0) || !(cfg.verify_median > 0.0) || !(cfg.verify_inverse_abs > 0.0) ||
      !(cfg.verify_inverse_rel > 0.0) || !(cfg.verify_window > 0.0)) {
    fail("verify tolerances must be positive");
  }
  if (cfg.out_dir.empty()) fail("output directory must not be empty");
}

// Far-field circles must stay inside the sampled window: beyond it the
// displacement clamps to the edge and the decay fit measures nothing. Checked
// against the effective grid, which a file source may have overridden.
static void require_far_field_inside(const std::vector<double>& radii, const GridSpec& spec) {
  for (double r : radii) {
    if (r > spec.halfwidth) {
      throw std::invalid_argument("far-field radius " + std::to_string(r) +
                                  " exceeds the grid halfwidth " +
                                  std::to_string(spec.halfwidth));
    }
  }
}

// ------------------------------------------------------------------- solve --

int cmd_solve(const ScenarioConfig& cfg, std::ostream& log) {
  return guarded(log, [&]() -> int {
    validate_config(cfg);
    ensure_out_dir(cfg.out_dir);
    const auto loaded = load_coefficient(cfg);
    require_far_field_inside(cfg.far_field, loaded.spec);
    TransformPlan plan(loaded.spec);

    ojson report;
    report["schema"] = 1;
    report["command"] = "solve";
    report["config"] = config_json(cfg, loaded.spec);
    ojson levels = ojson::array();
    std::vector<double> gaps;
    std::vector<int> completed;
    std::vector<PrincipalSolution> solved;

    for (int n : cfg.levels) {
      const CoefficientField cut = truncate(loaded.coeff, truncation_level(n));
      PrincipalSolution sol;
      try {
        sol = solve_principal(cut, plan, cfg.solver);
      } catch (const solver_error& e) {
        // keep what finished and describe what did not
        ojson manifest;
        manifest["schema"] = 1;
        manifest["command"] = "solve";
        manifest["error"] =
            ojson{{"kind", e.kind == solver_error::Kind::divergence ? "divergence" : "no_convergence"},
                  {"level", n},
                  {"iterations", e.iterations},
                  {"residual", jnum(e.residual)},
                  {"message", e.what()}};
        manifest["completed_levels"] = completed;
        write_json(join_path(cfg.out_dir, "failure.json"), manifest);
        log << "numerical failure at level " << n << ": " << e.what() << "\n";
        return 3;
      }
      sol.map.level = n;
      log << "level " << n << ": " << sol.diagnostics.iterations
          << " iterations, relative residual " << sol.diagnostics.relative_residual << "\n";

      const std::string csv = "solution_level_" + std::to_string(n) + ".csv";
      write_field_csv(sol.map.displacement, join_path(cfg.out_dir, csv));
      if (!solved.empty()) {
        gaps.push_back(sup_ladder_gap(sol.map, solved.back().map, cfg.gap_radius));
      }
      ojson lj = level_json(sol);
      lj["csv"] = csv;
      levels.push_back(lj);
      completed.push_back(n);
      solved.push_back(std::move(sol));
    }

    report["levels"] = levels;
    report["cauchy_gaps"] = jnums(gaps);

    if (!cfg.far_field.empty()) {
      const auto prof = far_field_profile(solved.back().map, cfg.far_field);
      write_far_field_csv(prof, join_path(cfg.out_dir, "far_field.csv"));
      report["far_field"] = ojson{{"radii", jnums(prof.radii)},
                                  {"deviation", jnums(prof.deviation)},
                                  {"exponent", jnum(prof.exponent)},
                                  {"csv", "far_field.csv"}};
      log << "far-field decay exponent " << prof.exponent << "\n";
    }

    write_json(join_path(cfg.out_dir, "ladder.json"), report);
    log << "wrote " << join_path(cfg.out_dir, "ladder.json") << "\n";
    return 0;
  });
}

// ----------------------------------------------------------- verify-oracle --

int cmd_verify_oracle(const ScenarioConfig& cfg, std::ostream& log) {
  return guarded(log, [&]() -> int {
    validate_config(cfg);
    if (cfg.source != ScenarioConfig::Source::example1) {
      throw std::invalid_argument("verify-oracle needs coeff.source = example1");
    }
    for (int k : cfg.levels) {
      if (!(k > 1.0 / cfg.alpha)) {
        throw std::invalid_argument("levels must exceed 1/alpha = " +
                                    std::to_string(1.0 / cfg.alpha));
      }
    }
    ensure_out_dir(cfg.out_dir);
    const auto loaded = load_coefficient(cfg);
    TransformPlan plan(loaded.spec);

    ojson report;
    report["schema"] = 1;
    report["command"] = "verify-oracle";
    report["config"] = config_json(cfg, loaded.spec);
    report["thresholds"] = ojson{{"sup", jnum(cfg.verify_sup)},
                                 {"median", jnum(cfg.verify_median)},
                                 {"inverse_abs", jnum(cfg.verify_inverse_abs)},
                                 {"inverse_rel", jnum(cfg.verify_inverse_rel)},
                                 {"window", jnum(cfg.verify_window)}};
    ojson levels = ojson::array();
    bool all_pass = true;
    const double fwd_radius = std::min(cfg.verify_window, loaded.spec.halfwidth);

    for (int k : cfg.levels) {
      ojson lj;
      lj["level"] = k;
      const bool trivial = oracle::truncation_trivial(cfg.alpha, k);
      lj["trivial"] = trivial;

      const CoefficientField cut = truncate(loaded.coeff, truncation_level(k));
      const PrincipalSolution sol = solve_principal(cut, plan, cfg.solver);
      const SampledMap& f = sol.map;

      oracle::ExampleParams prm;
      if (!trivial) prm = oracle::example_params(cfg.alpha, k);
      auto truth_fwd = [&](cd z) { return trivial ? z : oracle::truncated_map(z, prm); };

      // forward map against the closed form
      BandStat fwd;
      const int N = loaded.spec.resolution;
      for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
          const cd z = loaded.spec.node(i, j);
          if (std::abs(z) > fwd_radius) continue;
          fwd.add(std::abs(z + f.displacement.at(i, j) - truth_fwd(z)));
        }
      }
      const double fwd_median = fwd.median();
      const bool fwd_pass = fwd.sup <= cfg.verify_sup && fwd_median <= cfg.verify_median;
      lj["forward"] = ojson{{"sup", jnum(fwd.sup)},
                            {"median", jnum(fwd_median)},
                            {"nodes", static_cast<long long>(fwd.all.size())},
                            {"pass", fwd_pass}};
      bool level_pass = fwd_pass;

      if (!trivial) {
        // inverse map on its own grid, compared in two bands off the branch circle
        const GridSpec ygrid = make_grid(cd(0.0, 0.0), 0.95, cfg.resolution);
        const SampledMap g = sample_inverse(f, ygrid);
        const double ring = std::max(0.03, 3.0 * ygrid.spacing());
        BandStat inner, outer;
        long long skipped = 0;
        for (int i = 0; i < N; ++i) {
          for (int j = 0; j < N; ++j) {
            if (g.flagged(i, j)) {
              ++skipped;
              continue;
            }
            const cd y = ygrid.node(i, j);
            const double r = std::abs(y);
            if (std::abs(r - prm.tau) < ring) continue;
            const cd err = g.displacement.at(i, j) + y - oracle::inverse_map(y, prm);
            if (r <= 0.45) {
              inner.add(std::abs(err));
            } else if (r >= 0.55 && r <= 0.9) {
              outer.add(std::abs(err) / std::abs(oracle::inverse_map(y, prm)));
            }
          }
        }
        const bool inv_pass =
            inner.sup <= cfg.verify_inverse_abs && outer.sup <= cfg.verify_inverse_rel;
        lj["inverse"] = ojson{{"inner_sup", jnum(inner.sup)},
                              {"outer_rel_sup", jnum(outer.sup)},
                              {"flagged", skipped},
                              {"pass", inv_pass}};

        // difference-stencil dilatation of the closed-form inverse
        const SampledMap g_oracle = SampledMap::from_function(
            [&](cd y) { return oracle::inverse_map(y, prm); }, ygrid);
        const double guard = std::max(0.05, 3.0 * ygrid.spacing());
        BandStat dil;
        for (int i = 0; i < N; ++i) {
          for (int j = 0; j < N; ++j) {
            const cd y = ygrid.node(i, j);
            const double r = std::abs(y);
            if (r < 0.1 || r > 0.92) continue;
            if (std::abs(r - prm.tau) < guard) continue;
            const double got =
                dilatation_from_derivatives(g_oracle.f_z.at(i, j), g_oracle.f_zbar.at(i, j));
            const double want = piecewise_inverse_dilatation(r, cfg.alpha, prm.tau);
            dil.add(std::abs(got - want) / want);
          }
        }
        const cd yprobe(0.8, 0.0);
        const double probe_got =
            dilatation_from_derivatives(g_oracle.deriv_z(yprobe), g_oracle.deriv_zbar(yprobe));
        const double probe_want = piecewise_inverse_dilatation(0.8, cfg.alpha, prm.tau);
        const bool dil_pass = dil.sup <= cfg.verify_sup;
        lj["dilatation"] = ojson{{"rel_sup", jnum(dil.sup)},
                                 {"probe_y", jnum(0.8)},
                                 {"probe_value", jnum(probe_got)},
                                 {"probe_truth", jnum(probe_want)},
                                 {"pass", dil_pass}};
        level_pass = level_pass && inv_pass && dil_pass;
      }

      lj["pass"] = level_pass;
      all_pass = all_pass && level_pass;
      log << "level " << k << ": forward sup " << fwd.sup << (level_pass ? " ok" : " FAILED")
          << "\n";
      levels.push_back(lj);
    }

    report["levels"] = levels;
    report["pass"] = all_pass;
    write_json(join_path(cfg.out_dir, "oracle_report.json"), report);
    log << "wrote " << join_path(cfg.out_dir, "oracle_report.json") << "\n";
    return all_pass ? 0 : 3;
  });
}

// ---------------------------------------------------------------- classify --

int cmd_classify(const ScenarioConfig& cfg, std::ostream& log) {
  return guarded(log, [&]() -> int {
    validate_config(cfg);
    ensure_out_dir(cfg.out_dir);

    Weight q = [&] {
      if (cfg.source == ScenarioConfig::Source::example1) {
        const double alpha = cfg.alpha;
        return make_weight([alpha](cd y) { return oracle::majorant(y, alpha); });
      }
      return make_weight(read_field_csv(cfg.coeff_path));
    }();

    const Region domain{Region::Shape::disk, cd(0.0, 0.0), cfg.domain_radius};
    const auto verdict = classify(q, domain, cfg.probes);

    ojson report;
    report["schema"] = 1;
    report["command"] = "classify";
    ojson src;
    if (cfg.source == ScenarioConfig::Source::example1) {
      src = ojson{{"source", "example1"}, {"alpha", jnum(cfg.alpha)}};
    } else {
      src = ojson{{"source", "file"}, {"path", cfg.coeff_path}};
    }
    src["domain_radius"] = jnum(cfg.domain_radius);
    report["config"] = src;
    report["classification"] = classification_json(verdict);
    write_json(join_path(cfg.out_dir, "classification.json"), report);
    log << "verdict: " << verdict_name(verdict.verdict) << "\n";
    return 0;
  });
}

// ---------------------------------------------------------------- diagnose --

int cmd_diagnose(const ScenarioConfig& cfg, std::ostream& log) {
  return guarded(log, [&]() -> int {
    validate_config(cfg);
    ensure_out_dir(cfg.out_dir);
    const auto loaded = load_coefficient(cfg);
    require_far_field_inside(cfg.far_field, loaded.spec);
    TransformPlan plan(loaded.spec);
    const SolvedLadder ladder = solve_ladder(loaded.coeff, cfg, plan, log);
    const SampledMap& top = ladder.levels.back().map;

    ojson report;
    report["schema"] = 1;
    report["command"] = "diagnose";
    report["config"] = config_json(cfg, loaded.spec);
    ojson levels = ojson::array();
    for (const auto& sol : ladder.levels) levels.push_back(level_json(sol));
    report["levels"] = levels;
    report["cauchy_gaps"] = jnums(ladder.gaps);

    if (!cfg.far_field.empty()) {
      const auto prof = far_field_profile(top, cfg.far_field);
      report["far_field"] = ojson{{"radii", jnums(prof.radii)},
                                  {"deviation", jnums(prof.deviation)},
                                  {"exponent", jnum(prof.exponent)}};
      log << "far-field decay exponent " << prof.exponent << "\n";
    }

    if (cfg.equicontinuity) {
      std::vector<const SampledMap*> maps;
      for (const auto& sol : ladder.levels) maps.push_back(&sol.map);
      const Region K{Region::Shape::disk, cd(0.0, 0.0), cfg.diag_inner};
      const Region G{Region::Shape::disk, cd(0.0, 0.0), cfg.diag_outer};
      const auto eq = equicontinuity_bound(maps, K, G, cfg.diag_pairs,
                                           static_cast<uint64_t>(cfg.seed));
      report["equicontinuity"] =
          ojson{{"c_hat", jnum(eq.c_hat)},
                {"x", jcomplex(eq.x)},
                {"y", jcomplex(eq.y)},
                {"level", ladder.levels[static_cast<size_t>(eq.map_index)].map.level.value_or(0)},
                {"gap", jnum(eq.gap)}};
      log << "equicontinuity constant " << eq.c_hat << "\n";
    }

    if (cfg.poletsky) {
      double r2max = 0.0;
      for (size_t i = 1; i < cfg.diag_annuli.size(); i += 2) {
        r2max = std::max(r2max, cfg.diag_annuli[i]);
      }
      const GridSpec ygrid = make_grid(cd(0.0, 0.0), 1.1 * r2max, cfg.resolution);
      const SampledMap g = sample_inverse(top, ygrid);
      const Weight q = scenario_weight(cfg, loaded.coeff);
      ojson checks = ojson::array();
      for (size_t i = 0; i + 1 < cfg.diag_annuli.size(); i += 2) {
        const Annulus ann{cd(0.0, 0.0), cfg.diag_annuli[i], cfg.diag_annuli[i + 1]};
        for (EtaKind ek : {EtaKind::uniform, EtaKind::log_ring}) {
          const auto rep = inverse_poletsky_check(top, g, q, ann, ek);
          checks.push_back(ojson{{"r1", jnum(ann.r1)},
                                 {"r2", jnum(ann.r2)},
                                 {"eta", ek == EtaKind::uniform ? "uniform" : "log_ring"},
                                 {"lhs", jnum(rep.lhs)},
                                 {"rhs", jnum(rep.rhs)},
                                 {"holds", rep.holds}});
          log << "modulus check (" << ann.r1 << ", " << ann.r2 << ") "
              << (ek == EtaKind::uniform ? "uniform" : "log") << ": "
              << (rep.holds ? "holds" : "VIOLATED") << "\n";
        }
      }
      report["poletsky"] = checks;

      const auto dil = integral_inner_p(g, Region{Region::Shape::disk, cd(0.0, 0.0), r2max},
                                        cfg.p);
      report["inner_dilatation"] = ojson{{"p", jnum(dil.p)},
                                         {"integral", jnum(dil.integral)},
                                         {"max", jnum(dil.max_value)},
                                         {"flagged", dil.flagged}};
    }

    if (cfg.classifier) {
      const Weight q = scenario_weight(cfg, loaded.coeff);
      const Region domain{Region::Shape::disk, cd(0.0, 0.0), cfg.domain_radius};
      const auto verdict = classify(q, domain, cfg.probes);
      report["classification"] = classification_json(verdict);
      log << "verdict: " << verdict_name(verdict.verdict) << "\n";
    }

    write_json(join_path(cfg.out_dir, "diagnostics.json"), report);
    log << "wrote " << join_path(cfg.out_dir, "diagnostics.json") << "\n";
    return 0;
  });
}

int run_command(const std::string& name, const ScenarioConfig& cfg, std::ostream& log) {
  if (name == "solve") return cmd_solve(cfg, log);
  if (name == "verify-oracle") return cmd_verify_oracle(cfg, log);
  if (name == "classify") return cmd_classify(cfg, log);
  if (name == "diagnose") return cmd_diagnose(cfg, log);
  log << "unknown command '" << name << "'\n";
  return 2;
}

}  // namespace beltrami
