#include <doctest.h>

#include <random>

#include "martenscale/compatibility.hpp"
#include "martenscale/scaling.hpp"

using namespace martenscale;

namespace {
std::vector<double> synth(const std::vector<double>& eps, EnvelopeKind k, double c, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, noise);
  std::vector<double> e;
  for (double x : eps) e.push_back(c * lower_envelope(x, k) * (1 + n(rng)));
  return e;
}

SweepReport sample_report() {
  SweepReport r;
  r.scenario = "sample";
  r.domain_hash = stable_hash("d");
  r.wells_hash = stable_hash("w");
  r.version = "0.0.0";
  r.seed = 42;
  for (double e : dyadic_eps()) {
    SweepRow row;
    row.eps = e;
    row.elastic_construction = 0.1 * e;
    row.surface_construction = 3.0 + 0.1 / 3;
    row.total_construction = row.elastic_construction + e * row.surface_construction;
    row.verdict_running = "insufficient";
    r.rows.push_back(row);
  }
  r.rows[2].total_relaxed = 0.5 * r.rows[2].total_construction;
  return r;
}
}  // namespace

TEST_CASE("fits recover synthetic scalings") {
  std::mt19937_64 rng(0);
  const auto eps = dyadic_eps();
  const FitResult lin = fit_dichotomy(eps, synth(eps, EnvelopeKind::Linear, 2.5, 0.0, rng));
  CHECK(lin.verdict == Verdict::Linear);
  CHECK(lin.c_lin == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(lin.rms_lin <= 1e-12);
  const FitResult lg = fit_dichotomy(eps, synth(eps, EnvelopeKind::Log, 0.7, 0.0, rng));
  CHECK(lg.verdict == Verdict::Logarithmic);
  CHECK(lg.c_log == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(to_string(Verdict::Inconclusive) == "inconclusive");
}

TEST_CASE("fits tolerate five percent noise") {
  std::mt19937_64 rng(1234);
  const auto eps = dyadic_eps();
  int lin_ok = 0, log_ok = 0;
  for (int t = 0; t < 100; ++t) {
    lin_ok += fit_dichotomy(eps, synth(eps, EnvelopeKind::Linear, 4.0, 0.05, rng)).verdict == Verdict::Linear;
    log_ok += fit_dichotomy(eps, synth(eps, EnvelopeKind::Log, 4.0, 0.05, rng)).verdict == Verdict::Logarithmic;
  }
  CHECK(lin_ok >= 95);
  CHECK(log_ok >= 95);
}

TEST_CASE("fits need enough small-eps rows") {
  const std::vector<double> eps{0.5, 0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> e;
  for (double x : eps) e.push_back(x);
  CHECK_THROWS_AS(fit_dichotomy(eps, e), Error);
}

TEST_CASE("csv round trip") {
  const SweepReport r = sample_report();
  const SweepReport back = parse_csv(report_csv(r));
  REQUIRE(back.rows.size() == r.rows.size());
  CHECK(back.scenario == r.scenario);
  CHECK(back.seed == r.seed);
  CHECK(back.domain_hash == r.domain_hash);
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    CHECK(back.rows[k].eps == r.rows[k].eps);
    CHECK(back.rows[k].total_construction == r.rows[k].total_construction);
    CHECK(back.rows[k].elastic_construction == r.rows[k].elastic_construction);
    CHECK(std::isnan(back.rows[k].total_relaxed) == std::isnan(r.rows[k].total_relaxed));
  }
  CHECK(back.rows[2].total_relaxed == r.rows[2].total_relaxed);
  CHECK_THROWS_AS(parse_csv("eps,a\n1,2\n"), Error);
}

TEST_CASE("svg and json reports") {
  const SweepReport r = sample_report();
  const FitResult fit = fit_dichotomy(r, Source::Construction);
  CHECK(fit.verdict == Verdict::Linear);
  const std::string svg = report_svg(r, fit);
  CHECK(svg.rfind("<svg", 0) == 0);
  for (const char* s : {"envelope-linear", "envelope-log", "data-construction", "data-relaxed", "log2 eps", "log2 energy"})
    CHECK(svg.find(s) != std::string::npos);
  const std::string js = report_json(r, fit);
  CHECK(js.find("\"verdict\": \"linear\"") != std::string::npos);
  CHECK(parse_format("svg") == ReportFormat::Svg);
  CHECK_THROWS_AS(parse_format("xml"), Error);
  CHECK_THROWS_AS(emit_report(SweepReport{}, fit, ReportFormat::Csv, ""), Error);
}

TEST_CASE("sweeps do not depend on the thread count") {
  SweepSpec s;
  s.scenario = preset_scenario("compatible_triangle");
  s.threads = 1;
  const SweepReport a = run_sweep(s);
  s.threads = 4;
  const SweepReport b = run_sweep(s);
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(report_csv(a) == report_csv(b));
  for (const auto& row : a.rows) CHECK(row.elastic_construction <= row.eps);
  CHECK(fit_dichotomy(a, Source::Construction).verdict == Verdict::Linear);
}

TEST_CASE("empty eps list is rejected") {
  SweepSpec s;
  s.scenario = preset_scenario("unit_square");
  s.scenario.eps.clear();
  CHECK_THROWS_AS(run_sweep(s), Error);
}

TEST_CASE("stable hash") {
  CHECK(stable_hash("abc") == stable_hash("abc"));
  CHECK(stable_hash("abc") != stable_hash("abd"));
}
