#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "martenscale/compatibility.hpp"
#include "martenscale/parallel.hpp"
#include "martenscale/scaling.hpp"
#include "martenscale/scenario.hpp"
#include "martenscale/selftest.hpp"

#ifndef MARTENSCALE_SCENARIO_DIR
#define MARTENSCALE_SCENARIO_DIR ""
#endif

namespace ms = martenscale;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string scenario;
  double eps_min = 0.0, eps_max = 0.0;
  int eps_count = 0;
  std::vector<double> eps;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  // wells override
  std::string wells;
  int ngon = 4;
  double a = 1.1;
  std::string branch = "plus";
  // relax
  int grid = 0, restarts = -1, max_iters = -1;
  bool relaxed = false;
  // fit
  std::string input, source = "construction";
  // flatten
  double radius = 0.0;
  // selftest
  std::string filter;
  bool quick = false;
};

void setup_logging() {
  auto logger = spdlog::stderr_logger_mt("martenscale");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("MARTENSCALE_LOG");
  const std::string lvl = env ? env : "error";
  if (lvl == "debug") spdlog::set_level(spdlog::level::debug);
  else if (lvl == "info") spdlog::set_level(spdlog::level::info);
  else spdlog::set_level(spdlog::level::err);
  if (lvl != "debug" && lvl != "info" && lvl != "error")
    spdlog::error("MARTENSCALE_LOG must be error, info or debug; using error");
}

std::string resolve_scenario_path(const std::string& p) {
  if (fs::exists(p)) return p;
  const fs::path dir = std::getenv("MARTENSCALE_SCENARIO_DIR") ? std::getenv("MARTENSCALE_SCENARIO_DIR")
                                                               : MARTENSCALE_SCENARIO_DIR;
  for (const fs::path& cand : {dir / p, dir / (p + ".json")})
    if (!dir.empty() && fs::exists(cand)) return cand.string();
  return p;
}

ms::Scenario load(const Options& o, const std::string& fallback_preset) {
  ms::Scenario s;
  if (!o.scenario.empty()) {
    const std::string path = resolve_scenario_path(o.scenario);
    spdlog::info("scenario {}", path);
    s = ms::load_scenario(path);
  } else {
    s = ms::preset_scenario(fallback_preset);
  }
  if (!o.wells.empty()) {
    s.wells.kind = o.wells;
    s.wells.ngon = o.ngon;
    s.wells.a = o.a;
    if (o.branch != "plus" && o.branch != "minus") throw ms::Error("branch must be plus or minus");
    s.wells.branch = o.branch == "plus" ? ms::Branch::Plus : ms::Branch::Minus;
  }
  if (!o.eps.empty()) {
    s.eps = o.eps;
  } else if (o.eps_count > 0 || o.eps_min > 0.0 || o.eps_max > 0.0) {
    const double lo = o.eps_min > 0.0 ? o.eps_min : std::ldexp(1.0, -14);
    const double hi = o.eps_max > 0.0 ? o.eps_max : std::ldexp(1.0, -4);
    s.eps = ms::log_spaced_eps(lo, hi, o.eps_count > 0 ? o.eps_count : 11);
  }
  if (o.seed) s.relax.seed = *o.seed;
  if (o.grid > 0) s.grid = o.grid;
  if (o.restarts >= 0) s.relax.restarts = o.restarts;
  if (o.max_iters >= 0) s.relax.max_iters = o.max_iters;
  if (o.relaxed) s.relaxed = true;
  return s;
}

void emit(const Options& o, const std::string& body) {
  if (o.out.empty()) {
    std::cout << body;
    if (!body.empty() && body.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f || !(f << body)) throw ms::Error("cannot write '" + o.out + "'");
  spdlog::info("wrote {}", o.out);
}

json vec(const ms::Vec2& v) { return {v.x, v.y}; }
json mat(const ms::Mat2& m) { return {{m.a11, m.a12}, {m.a21, m.a22}}; }

json wells_json(const ms::WellSet& w) {
  json j = {{"name", w.name}, {"mode", ms::to_string(w.mode)}, {"count", w.size()}};
  json list = json::array();
  for (std::size_t k = 0; k < w.size(); ++k)
    list.push_back(w.mode == ms::WellMode::Linear ? mat(w.strains[k].full()) : mat(w.well(k)));
  j["wells"] = list;
  if (w.mode == ms::WellMode::Nonlinear) {
    j["a"] = w.a;
    j["ngon"] = w.ngon;
    j["det_u1"] = w.base.det();
    j["degenerate"] = w.degenerate;
  }
  return j;
}

int cmd_wells(const Options& o) {
  const ms::Scenario s = load(o, "unit_square");
  json j = wells_json(s.wells.build());
  j["seed"] = s.relax.seed;
  emit(o, j.dump(2));
  return 0;
}

int cmd_normals(const Options& o) {
  const ms::Scenario s = load(o, "unit_square");
  const ms::WellSet w = s.wells.build();
  const ms::NormalSet n = w.mode == ms::WellMode::Linear
                              ? (s.wells.kind == "hex_rhombic" ? ms::hex_rhombic_normal_set() : ms::NormalSet{})
                              : ms::nonlinear_normal_set(w);
  json dirs = json::array();
  for (const auto& d : n.directions()) dirs.push_back({{"x", d.x}, {"y", d.y}, {"angle_deg", ms::angle_mod_pi(d) * 180.0 / ms::kPi}});
  json j = {{"wells", s.wells.describe()},
            {"mode", ms::to_string(w.mode)},
            {"provenance", ms::to_string(n.provenance())},
            {"count", n.size()},
            {"directions", dirs},
            {"seed", s.relax.seed}};
  emit(o, j.dump(2));
  return 0;
}

int cmd_dcheck(const Options& o) {
  const ms::Scenario s = load(o, "unit_square");
  const ms::WellSet w = s.wells.build();
  const ms::NormalSet n = w.mode == ms::WellMode::Linear ? ms::hex_rhombic_normal_set() : ms::nonlinear_normal_set(w);
  const auto cls = ms::classify_polygon(s.domain, n, s.boundary_edges);
  json edges = json::array();
  double dmin = 1e300;
  for (std::size_t k = 0; k < s.domain.size(); ++k) {
    const auto patch = ms::BoundaryPatch::polygon_edge(s.domain, k);
    const auto r = ms::incompatibility_constant(patch, w);
    const bool selected =
        s.boundary_edges.empty() || std::find(s.boundary_edges.begin(), s.boundary_edges.end(), k) != s.boundary_edges.end();
    if (selected) dmin = std::min(dmin, r.d);
    const auto th = ms::oscillation_thresholds(r.d, patch.length());
    edges.push_back({{"edge", k},
                     {"start", vec(s.domain.edge_start(k))},
                     {"end", vec(s.domain.edge_end(k))},
                     {"selected", selected},
                     {"d", r.d},
                     {"d_reduced", r.d_reduced},
                     {"well", r.argmin_well_index},
                     {"class", cls.edges[k] == ms::EdgeClass::Compatible ? "compatible" : "generic"},
                     {"thresholds",
                      {{"nonlinear_general", th.nonlinear_general},
                       {"linear_general", th.linear_general},
                       {"square_nonlinear", th.square_nonlinear},
                       {"square_linear", th.square_linear}}}});
  }
  json j = {{"scenario", s.name},
            {"wells", s.wells.describe()},
            {"edges", edges},
            {"d", dmin},
            {"domain", cls.generic ? "generic" : "compatible"},
            {"seed", s.relax.seed}};
  emit(o, j.dump(2));
  return 0;
}

int cmd_construct(const Options& o) {
  ms::Scenario s = load(o, "unit_square");
  if (s.experiment != "construct" && s.experiment != "sweep") s.experiment = "construct";
  s.validate();
  json rows = json::array();
  for (double e : s.eps) {
    const ms::SweepRow r = ms::construction_row(s, e);
    spdlog::debug("eps {} depth {} total {}", e, r.depth, r.total_construction);
    rows.push_back({{"eps", e},
                    {"depth", r.depth},
                    {"elastic", r.elastic_construction},
                    {"surface", r.surface_construction},
                    {"total", r.total_construction}});
  }
  json j = {{"scenario", s.name},
            {"construction", s.construction == ms::Construction::Star ? "star" : "cover"},
            {"rows", rows},
            {"seed", s.relax.seed}};
  emit(o, j.dump(2));
  return 0;
}

int cmd_relax(const Options& o) {
  const ms::Scenario s = load(o, "unit_square");
  const ms::WellSet w = s.wells.build();
  const ms::FieldMode mode = w.mode == ms::WellMode::Linear ? ms::FieldMode::Displacement : ms::FieldMode::Deformation;
  const double eps = s.eps.empty() ? 1.0 / 64 : s.eps.front();
  auto g = std::make_shared<const ms::Grid>(ms::make_grid(s.domain, s.grid));
  std::vector<ms::DiscreteField> warm;
  if (w.mode == ms::WellMode::Linear && s.boundary_edges.empty())
    warm.push_back(ms::interpolate(ms::construction_sampler(s, eps), g, mode));
  ms::RelaxConfig cfg = s.relax;
  cfg.threads = o.threads;
  spdlog::info("relax eps {} grid {} restarts {} seed {}", eps, s.grid, cfg.restarts, cfg.seed);
  const ms::RelaxResult r = ms::minimize(g, ms::austenite_data(mode), w, eps, cfg, warm);
  json j = {{"scenario", s.name},
            {"eps", eps},
            {"grid", s.grid},
            {"elastic", r.energy.elastic},
            {"surface", r.energy.surface},
            {"total", r.total},
            {"converged", r.converged},
            {"iterations", r.trace.size()},
            {"best_restart", r.best_restart},
            {"best_seed", r.best_seed},
            {"restart_totals", r.restart_totals},
            {"warm_totals", r.warm_totals},
            {"seed", cfg.seed}};
  emit(o, j.dump(2));
  return 0;
}

int cmd_sweep(const Options& o) {
  ms::SweepSpec spec;
  spec.scenario = load(o, "unit_square");
  spec.threads = o.threads;
  spec.progress = [](std::size_t k, double e) { spdlog::info("row {} eps {} done", k, e); };
  spdlog::info("sweep {} over {} eps values, seed {}", spec.scenario.name, spec.scenario.eps.size(),
               spec.scenario.relax.seed);
  const ms::SweepReport rep = ms::run_sweep(spec);
  const ms::FitResult fit = ms::fit_dichotomy(rep, ms::Source::Construction);
  const ms::ReportFormat fmt = ms::parse_format(o.format);
  if (o.out.empty()) {
    std::cout << (fmt == ms::ReportFormat::Csv    ? ms::report_csv(rep)
                  : fmt == ms::ReportFormat::Json ? ms::report_json(rep, fit) + "\n"
                                                  : ms::report_svg(rep, fit));
  } else {
    ms::emit_report(rep, fit, fmt, o.out);
  }
  json summary = {{"scenario", rep.scenario},
                  {"rows", rep.rows.size()},
                  {"verdict", ms::to_string(fit.verdict)},
                  {"c_lin", fit.c_lin},
                  {"c_log", fit.c_log},
                  {"rms_lin", fit.rms_lin},
                  {"rms_log", fit.rms_log},
                  {"seed", rep.seed}};
  if (spec.scenario.relaxed) {
    try {
      summary["verdict_relaxed"] = ms::to_string(ms::fit_dichotomy(rep, ms::Source::Relaxed).verdict);
    } catch (const ms::Error& e) {
      summary["verdict_relaxed"] = std::string("unavailable: ") + e.what();
    }
  }
  (o.out.empty() ? std::cerr : std::cout) << summary.dump() << "\n";
  return 0;
}

int cmd_fit(const Options& o) {
  std::ifstream in(o.input);
  if (!in) throw ms::Error("cannot open '" + o.input + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const ms::SweepReport rep = ms::parse_csv(ss.str());
  const ms::Source src = o.source == "relaxed" ? ms::Source::Relaxed : ms::Source::Construction;
  const ms::FitResult f = ms::fit_dichotomy(rep, src);
  json j = {{"scenario", rep.scenario},
            {"source", o.source},
            {"rows", f.rows},
            {"c_lin", f.c_lin},
            {"c_log", f.c_log},
            {"rms_lin", f.rms_lin},
            {"rms_log", f.rms_log},
            {"verdict", ms::to_string(f.verdict)},
            {"seed", rep.seed}};
  emit(o, j.dump(2));
  return 0;
}

int cmd_flatten(const Options& o) {
  ms::PatchSpec ps;
  std::uint64_t seed = o.seed.value_or(0);
  if (!o.scenario.empty()) {
    const ms::Scenario s = load(o, "unit_square");
    if (!s.patch) throw ms::Error("scenario has no patch");
    ps = *s.patch;
    seed = s.relax.seed;
  }
  if (o.radius > 0.0) ps.r = o.radius;
  const ms::GraphPatch patch = ps.build();
  const double limit = ms::flatten_radius_limit(patch);
  const double r = ps.r > 0.0 ? ps.r : 0.5 * limit;
  json levels = json::array();
  double lo = 1e300, hi = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double rk = std::ldexp(r, -k);
    const ms::DiffeoBounds b = ms::flatten_patch(patch, rk).bounds();
    lo = std::min(lo, b.grad_const);
    hi = std::max(hi, b.grad_const);
    levels.push_back({{"r", rk},
                      {"grad_dev", b.grad_dev},
                      {"det_dev", b.det_dev},
                      {"c_dev", b.c_dev},
                      {"grad_const", b.grad_const},
                      {"c_const", b.c_const}});
  }
  json j = {{"profile", ps.profile},
            {"r0", limit},
            {"levels", levels},
            {"grad_const_spread", lo > 0.0 ? hi / lo : 0.0},
            {"seed", seed}};
  emit(o, j.dump(2));
  return 0;
}

int cmd_selftest(const Options& o) {
  ms::SelfTestOptions opt;
  opt.filter = o.filter;
  opt.quick = o.quick;
  const auto res = ms::run_selftest(opt);
  std::size_t width = 4;
  for (const auto& r : res) width = std::max(width, r.name.size());
  std::printf("%-*s  %-6s %8s  %s\n", static_cast<int>(width), "check", "status", "seconds", "detail");
  std::size_t fails = 0, xfails = 0;
  for (const auto& r : res) {
    std::printf("%-*s  %-6s %8.3f  %s\n", static_cast<int>(width), r.name.c_str(), ms::to_string(r.status).c_str(),
                r.seconds, r.detail.c_str());
    fails += r.status == ms::CheckStatus::Fail;
    xfails += r.status == ms::CheckStatus::KnownFail;
  }
  std::printf("%zu checks, %zu failed, %zu known failures, seed %llu\n", res.size(), fails, xfails,
              static_cast<unsigned long long>(o.seed.value_or(0)));
  return ms::selftest_ok(res) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"martenscale: martensite microstructure energies and scaling sweeps"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* c, bool scenario = true) {
    if (scenario) c->add_option("--scenario", o.scenario, "Scenario JSON file or preset name");
    c->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    c->add_option("--seed", o.seed, "Random seed (default 0)");
    c->add_option("--out", o.out, "Output file (default stdout)");
  };
  auto eps_flags = [&o](CLI::App* c) {
    c->add_option("--eps", o.eps, "Explicit eps values, decreasing");
    c->add_option("--eps-min", o.eps_min, "Smallest eps")->check(CLI::PositiveNumber);
    c->add_option("--eps-max", o.eps_max, "Largest eps")->check(CLI::PositiveNumber);
    c->add_option("--eps-count", o.eps_count, "Number of log-spaced eps values")->check(CLI::PositiveNumber);
  };
  auto wells_flags = [&o](CLI::App* c) {
    c->add_option("--wells", o.wells, "Well set")->check(CLI::IsMember({"hex_rhombic", "oblique"}));
    c->add_option("--n", o.ngon, "Polygon order of the oblique wells");
    c->add_option("--a", o.a, "Stretch parameter of the oblique wells");
    c->add_option("--branch", o.branch, "Rotation branch")->check(CLI::IsMember({"plus", "minus"}));
  };
  auto relax_flags = [&o](CLI::App* c) {
    c->add_option("--grid", o.grid, "Cells along the longer side");
    c->add_option("--restarts", o.restarts, "Minimizer restarts");
    c->add_option("--max-iters", o.max_iters, "Iterations per restart");
  };

  auto* wells = app.add_subcommand("wells", "Print a well set");
  common(wells);
  wells_flags(wells);
  auto* normals = app.add_subcommand("normals", "Austenite interface normals of a well set");
  common(normals);
  wells_flags(normals);
  auto* dcheck = app.add_subcommand("dcheck", "Incompatibility constants of the domain edges");
  common(dcheck);
  wells_flags(dcheck);
  auto* construct = app.add_subcommand("construct", "Exact energy of the explicit construction");
  common(construct);
  eps_flags(construct);
  auto* relax = app.add_subcommand("relax", "Grid minimization at one eps");
  common(relax);
  eps_flags(relax);
  wells_flags(relax);
  relax_flags(relax);
  auto* sweep = app.add_subcommand("sweep", "eps sweep with fit and report");
  common(sweep);
  eps_flags(sweep);
  relax_flags(sweep);
  sweep->add_flag("--relaxed", o.relaxed, "Also relax every row on the grid");
  sweep->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json", "svg"}));
  auto* fit = app.add_subcommand("fit", "Fit a CSV report");
  common(fit, false);
  fit->add_option("--input", o.input, "CSV report")->required();
  fit->add_option("--source", o.source, "Energy column")->check(CLI::IsMember({"construction", "relaxed"}));
  auto* flatten = app.add_subcommand("flatten", "Boundary flattening bounds");
  common(flatten);
  flatten->add_option("--r", o.radius, "Patch radius");
  auto* selftest = app.add_subcommand("selftest", "Run the built-in check suite");
  common(selftest, false);
  selftest->add_option("--filter", o.filter, "Only checks whose name contains this");
  selftest->add_flag("--quick", o.quick, "Skip minimizer and sweep checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  if (o.threads > 0) ms::set_default_threads(o.threads);

  try {
    if (*wells) return cmd_wells(o);
    if (*normals) return cmd_normals(o);
    if (*dcheck) return cmd_dcheck(o);
    if (*construct) return cmd_construct(o);
    if (*relax) return cmd_relax(o);
    if (*sweep) return cmd_sweep(o);
    if (*fit) return cmd_fit(o);
    if (*flatten) return cmd_flatten(o);
    if (*selftest) return cmd_selftest(o);
  } catch (const ms::ScenarioParseError& e) {
    std::cerr << json{{"error", "scenario"}, {"message", e.what()}, {"line", e.line()}, {"column", e.column()}}.dump()
              << "\n";
    std::cerr << o.scenario << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "runtime"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 1;
}
