#include "martenscale/scaling.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "martenscale/parallel.hpp"

#ifndef MARTENSCALE_VERSION
#define MARTENSCALE_VERSION "0.0.0"
#endif

namespace martenscale {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Linear: return "linear";
    case Verdict::Logarithmic: return "logarithmic";
    default: return "inconclusive";
  }
}

namespace {

Triangle domain_triangle(const Scenario& s) {
  if (s.domain.size() != 3) throw Error("star construction needs a triangular domain");
  return {s.domain[0], s.domain[1], s.domain[2]};
}

int max_depth_for(const std::vector<double>& eps) {
  int m = 0;
  for (double e : eps) {
    if (!(e > 0.0 && e < 1.0)) throw Error("cover construction needs eps in (0, 1)");
    m = std::max(m, static_cast<int>(std::ceil(std::log2(1.0 / e) - 1e-12)) + 2);
  }
  return m;
}

// Star block or dyadic cover, built once per sweep.
class Context {
public:
  Context(const Scenario& s, const std::vector<double>& eps) : s_(s), w_(s.wells.build()) {
    if (s.construction == Construction::Cover) {
      const int m = s.cover_depth >= 0 ? std::max(s.cover_depth, max_depth_for(eps)) : max_depth_for(eps);
      cover_ = std::make_shared<DyadicCover>(s.domain, m, w_);
    } else {
      tri_ = domain_triangle(s);
      std::string why;
      if (!admissible_star_triangle(tri_, w_, &why)) throw Error(why);
      side_ = (tri_[1] - tri_[0]).norm();
      profile_ = star_profile(w_);
    }
  }

  const WellSet& wells() const { return w_; }

  SweepRow row(double eps) const {
    SweepRow r;
    r.eps = eps;
    EnergyBreakdown e;
    if (cover_) {
      r.depth = s_.cover_depth >= 0 ? s_.cover_depth : cover_->optimal_depth(eps);
      e = cover_->energy(r.depth, eps);
    } else {
      r.depth = profile_.depth_for(eps, side_);
      e = exact_energy(star_block(tri_, r.depth, w_).field, w_, eps);
    }
    r.elastic_construction = e.elastic;
    r.surface_construction = e.surface;
    r.total_construction = e.total(eps);
    return r;
  }

  std::function<Vec2(const Vec2&)> sampler(double eps) const {
    if (cover_) {
      const int m = s_.cover_depth >= 0 ? s_.cover_depth : cover_->optimal_depth(eps);
      auto cover = cover_;
      return [cover, m, eps](const Vec2& p) { return cover->value(p, m, eps); };
    }
    auto sb = std::make_shared<StarBlock>(star_block(tri_, profile_.depth_for(eps, side_), w_));
    return [sb](const Vec2& p) {
      const int c = sb->field.complex.locate(p, 1e-12);
      return c < 0 ? Vec2{0.0, 0.0} : sb->field.value(static_cast<std::size_t>(c), p);
    };
  }

private:
  Scenario s_;
  WellSet w_;
  std::shared_ptr<DyadicCover> cover_;
  Triangle tri_{};
  double side_ = 1.0;
  StarProfile profile_;
};

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string stable_hash(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return hex16(h);
}

SweepRow construction_row(const Scenario& s, double eps) { return Context(s, {eps}).row(eps); }

std::function<Vec2(const Vec2&)> construction_sampler(const Scenario& s, double eps) {
  return Context(s, {eps}).sampler(eps);
}

SweepReport run_sweep(const SweepSpec& spec) {
  const Scenario& s = spec.scenario;
  if (s.eps.empty()) throw Error("empty eps list");
  s.validate();
  const Context ctx(s, s.eps);

  SweepReport rep;
  rep.scenario = s.name;
  {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& p : s.domain.vertices()) os << p.x << ',' << p.y << ';';
    rep.domain_hash = stable_hash(os.str());
  }
  {
    const WellSet& w = ctx.wells();
    std::ostringstream os;
    os << std::setprecision(17) << s.wells.describe() << ';';
    for (const auto& e : w.strains) os << e.a11 << ',' << e.a12 << ',' << e.a22 << ';';
    for (std::size_t j = 0; j < w.variants.size(); ++j) {
      const Mat2 u = w.well(j);
      os << u.a11 << ',' << u.a12 << ',' << u.a21 << ',' << u.a22 << ';';
    }
    rep.wells_hash = stable_hash(os.str());
  }
  rep.version = MARTENSCALE_VERSION;
  rep.seed = s.relax.seed;
  rep.rows.resize(s.eps.size());

  std::mutex mu;
  std::shared_ptr<const Grid> grid;
  if (s.relaxed) grid = std::make_shared<const Grid>(make_grid(s.domain, s.grid));
  parallel_for(
      s.eps.size(),
      [&](std::size_t k) {
        const double eps = s.eps[k];
        SweepRow row;
        try {
          row = ctx.row(eps);
          if (s.relaxed) {
            RelaxConfig cfg = s.relax;
            cfg.threads = 1;
            const DiscreteField warm = interpolate(ctx.sampler(eps), grid, FieldMode::Displacement);
            const RelaxResult rr = minimize(grid, austenite_data(FieldMode::Displacement), ctx.wells(), eps, cfg, {warm});
            row.total_relaxed = rr.total;
            row.total_warm = rr.warm_totals.at(0);
            row.unconverged = !rr.converged;
          }
        } catch (const Error& e) {
          std::ostringstream os;
          os << "sweep failed at eps = " << eps << ": " << e.what();
          throw Error(os.str());
        }
        std::lock_guard<std::mutex> lock(mu);
        rep.rows[k] = std::move(row);
        if (spec.progress) spec.progress(k, eps);
      },
      spec.threads);

  std::vector<double> e, t;
  for (auto& row : rep.rows) {
    e.push_back(row.eps);
    t.push_back(row.total_construction);
    try {
      row.verdict_running = to_string(fit_dichotomy(e, t).verdict);
    } catch (const Error&) {
      row.verdict_running = "insufficient";
    }
  }
  return rep;
}

FitResult fit_dichotomy(const std::vector<double>& eps, const std::vector<double>& energy) {
  if (eps.size() != energy.size()) throw Error("eps and energy lengths differ");
  const double cut = std::ldexp(1.0, -4) * (1.0 + 1e-12);
  std::vector<double> rl, rg;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || eps[i] > cut) continue;
    if (!(energy[i] > 0.0) || !std::isfinite(energy[i])) throw Error("fit needs positive finite energies");
    rl.push_back(lower_envelope(eps[i], EnvelopeKind::Linear) / energy[i]);
    rg.push_back(lower_envelope(eps[i], EnvelopeKind::Log) / energy[i]);
  }
  if (rl.size() < 5) throw Error("insufficient rows: need at least 5 with eps <= 2^-4");
  auto fit = [](const std::vector<double>& r, double& c, double& rms) {
    double s1 = 0.0, s2 = 0.0;
    for (double v : r) {
      s1 += v;
      s2 += v * v;
    }
    c = s1 / s2;
    double acc = 0.0;
    for (double v : r) acc += (c * v - 1.0) * (c * v - 1.0);
    rms = std::sqrt(acc / static_cast<double>(r.size()));
  };
  FitResult f;
  f.rows = rl.size();
  fit(rl, f.c_lin, f.rms_lin);
  fit(rg, f.c_log, f.rms_log);
  if (f.rms_lin <= 0.5 * f.rms_log) f.verdict = Verdict::Linear;
  else if (f.rms_log <= 0.5 * f.rms_lin) f.verdict = Verdict::Logarithmic;
  else f.verdict = Verdict::Inconclusive;
  return f;
}

FitResult fit_dichotomy(const SweepReport& report, Source source) {
  std::vector<double> e, t;
  for (const auto& r : report.rows) {
    const double v = source == Source::Construction ? r.total_construction : r.total_relaxed;
    if (std::isnan(v)) {
      if (source == Source::Relaxed) throw Error("report has no relaxed totals");
      continue;
    }
    e.push_back(r.eps);
    t.push_back(v);
  }
  return fit_dichotomy(e, t);
}

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "svg") return ReportFormat::Svg;
  throw Error("unknown format '" + s + "'");
}

std::string report_csv(const SweepReport& r) {
  std::ostringstream os;
  os << "# scenario=" << r.scenario << "\n# domain_hash=" << r.domain_hash << "\n# wells_hash=" << r.wells_hash
     << "\n# version=" << r.version << "\n# seed=" << r.seed << "\n";
  os << "eps,elastic_construction,surface_construction,total_construction,total_relaxed,verdict_running\n";
  for (const auto& row : r.rows)
    os << num(row.eps) << ',' << num(row.elastic_construction) << ',' << num(row.surface_construction) << ','
       << num(row.total_construction) << ',' << num(row.total_relaxed) << ',' << row.verdict_running << '\n';
  return os.str();
}

SweepReport parse_csv(const std::string& text) {
  SweepReport r;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  int lineno = 0;
  auto field = [](const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error("bad number '" + s + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string val = line.substr(eq + 1);
      if (key == "scenario") r.scenario = val;
      else if (key == "domain_hash") r.domain_hash = val;
      else if (key == "wells_hash") r.wells_hash = val;
      else if (key == "version") r.version = val;
      else if (key == "seed") r.seed = std::stoull(val);
      continue;
    }
    if (!header) {
      if (line != "eps,elastic_construction,surface_construction,total_construction,total_relaxed,verdict_running")
        throw Error("unexpected CSV header");
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    if (!line.empty() && line.back() == ',') cols.emplace_back();
    if (cols.size() != 6) throw Error("CSV line " + std::to_string(lineno) + ": expected 6 columns");
    SweepRow row;
    try {
      row.eps = field(cols[0]);
      row.elastic_construction = field(cols[1]);
      row.surface_construction = field(cols[2]);
      row.total_construction = field(cols[3]);
      row.total_relaxed = field(cols[4]);
    } catch (const std::exception& e) {
      throw Error("CSV line " + std::to_string(lineno) + ": " + e.what());
    }
    row.verdict_running = cols[5];
    r.rows.push_back(row);
  }
  if (!header) throw Error("missing CSV header");
  return r;
}

std::string report_json(const SweepReport& r, const FitResult& fit) {
  using nlohmann::json;
  auto opt = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"eps", row.eps},
                    {"elastic_construction", row.elastic_construction},
                    {"surface_construction", row.surface_construction},
                    {"total_construction", row.total_construction},
                    {"total_relaxed", opt(row.total_relaxed)},
                    {"total_warm", opt(row.total_warm)},
                    {"unconverged", row.unconverged},
                    {"depth", row.depth},
                    {"verdict_running", row.verdict_running}});
  json doc = {{"metadata",
               {{"scenario", r.scenario},
                {"domain_hash", r.domain_hash},
                {"wells_hash", r.wells_hash},
                {"version", r.version},
                {"seed", r.seed}}},
              {"rows", rows},
              {"fit",
               {{"c_lin", fit.c_lin},
                {"c_log", fit.c_log},
                {"rms_lin", fit.rms_lin},
                {"rms_log", fit.rms_log},
                {"rows", fit.rows},
                {"verdict", to_string(fit.verdict)}}}};
  return doc.dump(2);
}

std::string report_svg(const SweepReport& r, const FitResult& fit) {
  if (r.rows.empty()) throw Error("empty report");
  const double W = 800, H = 600, L = 80, R = 30, T = 40, B = 60;
  std::vector<double> xs, ys;
  for (const auto& row : r.rows) {
    xs.push_back(std::log2(row.eps));
    for (double v : {row.total_construction, row.total_relaxed, fit.c_lin * lower_envelope(row.eps, EnvelopeKind::Linear),
                     fit.c_log * lower_envelope(row.eps, EnvelopeKind::Log)})
      if (v > 0.0 && std::isfinite(v)) ys.push_back(std::log2(v));
  }
  double x0 = *std::min_element(xs.begin(), xs.end()), x1 = *std::max_element(xs.begin(), xs.end());
  double y0 = ys.empty() ? -1.0 : *std::min_element(ys.begin(), ys.end());
  double y1 = ys.empty() ? 1.0 : *std::max_element(ys.begin(), ys.end());
  if (x1 - x0 < 1e-9) { x0 -= 1.0; x1 += 1.0; }
  if (y1 - y0 < 1e-9) { y0 -= 1.0; y1 += 1.0; }
  auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = static_cast<int>(std::ceil(x0)); k <= static_cast<int>(std::floor(x1)); ++k)
    os << "<text x=\"" << px(k) << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"middle\">" << k
       << "</text>\n";
  const int ystep = std::max(1, static_cast<int>(std::ceil((y1 - y0) / 10.0)));
  for (int k = static_cast<int>(std::ceil(y0)); k <= static_cast<int>(std::floor(y1)); k += ystep)
    os << "<text x=\"" << L - 8 << "\" y=\"" << py(k) + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << k
       << "</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" font-size=\"13\" text-anchor=\"middle\">log2 eps</text>\n";
  os << "<text x=\"20\" y=\"" << (T + H - B) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << (T + H - B) / 2 << ")\">log2 energy</text>\n";
  os << "<text x=\"" << L << "\" y=\"24\" font-size=\"13\">" << r.scenario << ": verdict " << to_string(fit.verdict)
     << "</text>\n";

  auto polyline = [&](const char* cls, const char* color, const char* dash, const std::function<double(const SweepRow&)>& f) {
    os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (dash) os << " stroke-dasharray=\"" << dash << "\"";
    os << " points=\"";
    bool first = true;
    for (const auto& row : r.rows) {
      const double v = f(row);
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      os << (first ? "" : " ") << px(std::log2(row.eps)) << ',' << py(std::log2(v));
      first = false;
    }
    os << "\"/>\n";
  };
  polyline("envelope-linear", "#1f77b4", "6,4", [&](const SweepRow& row) { return fit.c_lin * lower_envelope(row.eps, EnvelopeKind::Linear); });
  polyline("envelope-log", "#d62728", "6,4", [&](const SweepRow& row) { return fit.c_log * lower_envelope(row.eps, EnvelopeKind::Log); });
  polyline("data-construction", "black", nullptr, [](const SweepRow& row) { return row.total_construction; });
  bool relaxed = false;
  for (const auto& row : r.rows) relaxed = relaxed || !std::isnan(row.total_relaxed);
  if (relaxed) polyline("data-relaxed", "#2ca02c", nullptr, [](const SweepRow& row) { return row.total_relaxed; });
  os << "</svg>\n";
  return os.str();
}

void emit_report(const SweepReport& r, const FitResult& fit, ReportFormat fmt, const std::string& path) {
  if (r.rows.empty()) throw Error("empty report");
  std::string body;
  switch (fmt) {
    case ReportFormat::Csv: body = report_csv(r); break;
    case ReportFormat::Json: body = report_json(r, fit); break;
    case ReportFormat::Svg: body = report_svg(r, fit); break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << body;
  if (!out) throw Error("cannot write '" + path + "'");
}

}  // namespace martenscale
