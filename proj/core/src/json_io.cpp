#include <fstream>
#include <sstream>

#include <json.hpp>

#include "martenscale/scenario.hpp"

namespace martenscale {

using nlohmann::json;

namespace {

std::pair<int, int> line_col(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Semantic errors point at the first occurrence of the offending key.
class Reader {
public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const std::size_t pos = key.empty() ? std::string::npos : text_.find("\"" + key + "\"");
    const auto [l, c] = pos == std::string::npos ? std::pair<int, int>{1, 1} : line_col(text_, pos);
    throw ScenarioParseError(msg, l, c);
  }

  double number(const json& j, const std::string& key) const {
    if (!j.is_number()) fail(key, "'" + key + "' must be a number");
    return j.get<double>();
  }
  int integer(const json& j, const std::string& key) const {
    if (!j.is_number_integer()) fail(key, "'" + key + "' must be an integer");
    return j.get<int>();
  }
  std::string string(const json& j, const std::string& key) const {
    if (!j.is_string()) fail(key, "'" + key + "' must be a string");
    return j.get<std::string>();
  }
  std::vector<double> numbers(const json& j, const std::string& key) const {
    if (!j.is_array()) fail(key, "'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(number(v, key));
    return out;
  }

private:
  const std::string& text_;
};

void check_keys(const Reader& rd, const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) rd.fail(it.key(), "unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [l, c] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    throw ScenarioParseError("malformed JSON: " + msg, l, c);
  }
  const Reader rd(text);
  if (!doc.is_object()) rd.fail("", "scenario must be a JSON object");
  check_keys(rd, doc, {"name", "domain", "wells", "boundary", "experiment", "patch"}, "scenario");

  Scenario s;
  const json dom = doc.value("domain", json{{"preset", "unit_square"}});
  if (!dom.is_object()) rd.fail("domain", "'domain' must be an object");
  check_keys(rd, dom, {"preset", "polygon", "construction"}, "domain");
  try {
    if (dom.contains("preset")) {
      const std::string p = rd.string(dom["preset"], "preset");
      if (p != "unit_square" && p != "compatible_triangle") rd.fail("preset", "unknown preset '" + p + "'");
      s = preset_scenario(p);
    } else if (dom.contains("polygon")) {
      const json& poly = dom["polygon"];
      if (!poly.is_array()) rd.fail("polygon", "'polygon' must be an array of [x, y] pairs");
      std::vector<Vec2> pts;
      for (const auto& p : poly) {
        if (!p.is_array() || p.size() != 2) rd.fail("polygon", "'polygon' must be an array of [x, y] pairs");
        pts.push_back({rd.number(p[0], "polygon"), rd.number(p[1], "polygon")});
      }
      s.domain = Polygon(pts);
      s.eps = dyadic_eps();
    } else {
      rd.fail("domain", "'domain' needs 'preset' or 'polygon'");
    }
  } catch (const ScenarioParseError&) {
    throw;
  } catch (const Error& e) {
    rd.fail("domain", e.what());
  }
  if (dom.contains("construction")) {
    const std::string c = rd.string(dom["construction"], "construction");
    if (c == "star") s.construction = Construction::Star;
    else if (c == "cover") s.construction = Construction::Cover;
    else rd.fail("construction", "unknown construction '" + c + "'");
  }
  if (doc.contains("name")) s.name = rd.string(doc["name"], "name");

  if (doc.contains("wells")) {
    const json& w = doc["wells"];
    if (w.is_string()) {
      s.wells.kind = w.get<std::string>();
    } else if (w.is_object()) {
      check_keys(rd, w, {"type", "n", "a", "branch"}, "wells");
      s.wells.kind = rd.string(w.value("type", json("hex_rhombic")), "type");
      if (w.contains("n")) s.wells.ngon = rd.integer(w["n"], "n");
      if (w.contains("a")) s.wells.a = rd.number(w["a"], "a");
      if (w.contains("branch")) {
        const std::string b = rd.string(w["branch"], "branch");
        if (b != "plus" && b != "minus") rd.fail("branch", "branch must be 'plus' or 'minus'");
        s.wells.branch = b == "plus" ? Branch::Plus : Branch::Minus;
      }
    } else {
      rd.fail("wells", "'wells' must be a string or an object");
    }
    if (s.wells.kind != "hex_rhombic" && s.wells.kind != "oblique")
      rd.fail("wells", "unknown well set '" + s.wells.kind + "'");
  }

  if (doc.contains("boundary")) {
    const json& b = doc["boundary"];
    if (b.is_string()) {
      if (b.get<std::string>() != "all") rd.fail("boundary", "'boundary' must be \"all\" or {\"edges\": [...]}");
    } else if (b.is_object()) {
      check_keys(rd, b, {"edges"}, "boundary");
      if (!b.contains("edges") || !b["edges"].is_array()) rd.fail("edges", "'edges' must be an array");
      for (const auto& e : b["edges"]) {
        const int k = rd.integer(e, "edges");
        if (k < 0) rd.fail("edges", "edge indices must be nonnegative");
        s.boundary_edges.push_back(static_cast<std::size_t>(k));
      }
    } else {
      rd.fail("boundary", "'boundary' must be \"all\" or {\"edges\": [...]}");
    }
  }

  if (doc.contains("experiment")) {
    const json& x = doc["experiment"];
    if (x.is_string()) {
      s.experiment = x.get<std::string>();
    } else if (x.is_object()) {
      check_keys(rd, x, {"type", "eps", "sources", "grid", "relax", "seed", "depth"}, "experiment");
      s.experiment = rd.string(x.value("type", json("sweep")), "type");
      if (x.contains("eps")) {
        const json& e = x["eps"];
        if (e.is_array()) {
          s.eps = rd.numbers(e, "eps");
        } else if (e.is_object()) {
          check_keys(rd, e, {"min", "max", "count"}, "eps");
          s.eps = log_spaced_eps(rd.number(e.value("min", json(std::ldexp(1.0, -14))), "min"),
                                 rd.number(e.value("max", json(std::ldexp(1.0, -4))), "max"),
                                 rd.integer(e.value("count", json(11)), "count"));
        } else {
          rd.fail("eps", "'eps' must be an array or {min, max, count}");
        }
      }
      if (x.contains("sources")) {
        if (!x["sources"].is_array()) rd.fail("sources", "'sources' must be an array");
        s.relaxed = false;
        for (const auto& v : x["sources"]) {
          const std::string src = rd.string(v, "sources");
          if (src == "relaxed") s.relaxed = true;
          else if (src != "construction") rd.fail("sources", "unknown source '" + src + "'");
        }
      }
      if (x.contains("grid")) s.grid = rd.integer(x["grid"], "grid");
      if (x.contains("seed")) s.relax.seed = static_cast<std::uint64_t>(rd.integer(x["seed"], "seed"));
      if (x.contains("depth")) s.cover_depth = rd.integer(x["depth"], "depth");
      if (x.contains("relax")) {
        const json& r = x["relax"];
        if (!r.is_object()) rd.fail("relax", "'relax' must be an object");
        check_keys(rd, r, {"huber_delta", "max_iters", "tol", "restarts", "perturbation"}, "relax");
        if (r.contains("huber_delta")) s.relax.huber_delta = rd.number(r["huber_delta"], "huber_delta");
        if (r.contains("max_iters")) s.relax.max_iters = rd.integer(r["max_iters"], "max_iters");
        if (r.contains("tol")) s.relax.tol = rd.number(r["tol"], "tol");
        if (r.contains("restarts")) s.relax.restarts = rd.integer(r["restarts"], "restarts");
        if (r.contains("perturbation")) s.relax.perturbation = rd.number(r["perturbation"], "perturbation");
      }
    } else {
      rd.fail("experiment", "'experiment' must be a string or an object");
    }
  }

  if (doc.contains("patch")) {
    const json& p = doc["patch"];
    if (!p.is_object()) rd.fail("patch", "'patch' must be an object");
    check_keys(rd, p, {"profile", "radius", "coeffs", "knots", "values", "rho", "r"}, "patch");
    PatchSpec ps;
    if (p.contains("profile")) ps.profile = rd.string(p["profile"], "profile");
    if (p.contains("radius")) ps.radius = rd.number(p["radius"], "radius");
    if (p.contains("coeffs")) ps.coeffs = rd.numbers(p["coeffs"], "coeffs");
    if (p.contains("knots")) ps.knots = rd.numbers(p["knots"], "knots");
    if (p.contains("values")) ps.values = rd.numbers(p["values"], "values");
    if (p.contains("rho")) ps.rho = rd.number(p["rho"], "rho");
    if (p.contains("r")) ps.r = rd.number(p["r"], "r");
    s.patch = ps;
  }

  try {
    s.validate();
  } catch (const Error& e) {
    rd.fail("experiment", e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  if (!s.preset.empty()) {
    doc["domain"] = {{"preset", s.preset}};
  } else {
    json poly = json::array();
    for (const auto& p : s.domain.vertices()) poly.push_back({p.x, p.y});
    doc["domain"] = {{"polygon", poly}};
  }
  doc["domain"]["construction"] = s.construction == Construction::Star ? "star" : "cover";
  if (s.wells.kind == "oblique")
    doc["wells"] = {{"type", "oblique"},
                    {"n", s.wells.ngon},
                    {"a", s.wells.a},
                    {"branch", s.wells.branch == Branch::Plus ? "plus" : "minus"}};
  else
    doc["wells"] = s.wells.kind;
  if (s.boundary_edges.empty()) doc["boundary"] = "all";
  else doc["boundary"] = {{"edges", s.boundary_edges}};
  json x;
  x["type"] = s.experiment;
  x["eps"] = s.eps;
  x["sources"] = s.relaxed ? json{"construction", "relaxed"} : json{"construction"};
  x["grid"] = s.grid;
  x["seed"] = s.relax.seed;
  if (s.cover_depth >= 0) x["depth"] = s.cover_depth;
  x["relax"] = {{"huber_delta", s.relax.huber_delta},
                {"max_iters", s.relax.max_iters},
                {"tol", s.relax.tol},
                {"restarts", s.relax.restarts},
                {"perturbation", s.relax.perturbation}};
  doc["experiment"] = x;
  if (s.patch) {
    const PatchSpec& p = *s.patch;
    json pj = {{"profile", p.profile}, {"rho", p.rho}, {"r", p.r}};
    if (p.profile == "circle") pj["radius"] = p.radius;
    if (p.profile == "poly") pj["coeffs"] = p.coeffs;
    if (p.profile == "spline") {
      pj["knots"] = p.knots;
      pj["values"] = p.values;
    }
    doc["patch"] = pj;
  }
  return doc.dump(2);
}

}  // namespace martenscale
