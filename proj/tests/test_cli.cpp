#include <catch2/catch_amalgamated.hpp>

#include <heis/experiments.hpp>
#include <heis/parallel.hpp>

#include <sstream>
#include <string>
#include <vector>

using namespace heis;
using Catch::Matchers::ContainsSubstring;

namespace {

Json base_config() {
  return Json{{"n", 1}, {"kind", "ccdist"}, {"seed", 7},
              {"budgets", Json{{"cc_segments", 12}, {"cc_restarts", 2}, {"cc_outer_rounds", 3},
                               {"cc_inner_iters", 80}}},
              {"pair", Json{{"p", {0.0, 0.0, 0.0}}, {"q", {0.6, 0.0, 0.0}}}}};
}

Json small_bmo_config(std::uint64_t seed) {
  return Json{{"n", 1},
              {"kind", "bmo"},
              {"seed", seed},
              {"budgets", Json{{"samples", 2000}}},
              {"function", Json{{"id", "log-koranyi"}}},
              {"family", Json{{"extent", 1.0}, {"per_axis", 2}, {"r_min", 0.5}, {"r_max", 2.0},
                              {"r_ratio", 2.0}}}};
}

}  // namespace

TEST_CASE("kind names round-trip through the parser", "[cli]") {
  const std::vector<ExperimentKind> kinds = {
      ExperimentKind::Distortion, ExperimentKind::Bmo,       ExperimentKind::JnTail,
      ExperimentKind::Transfer,   ExperimentKind::Gotoh,     ExperimentKind::Necessity,
      ExperimentKind::Roundness,  ExperimentKind::Pansu,     ExperimentKind::CcDist};
  REQUIRE(kinds.size() == kind_table().size());
  for (ExperimentKind k : kinds) {
    const std::string name = kind_name(k);
    CHECK(name != "?");
    CHECK(parse_kind(name, "kind") == k);
  }
  CHECK_THROWS_WITH(parse_kind("qc", "kind"),
                    ContainsSubstring("unknown kind 'qc'") && ContainsSubstring("distortion") &&
                        ContainsSubstring("ccdist"));
}

TEST_CASE("config errors carry the offending field path", "[cli]") {
  CHECK_THROWS_WITH(parse_config(Json::array()), ContainsSubstring("top level must be an object"));
  CHECK_THROWS_WITH(parse_config(Json{{"kind", "bmo"}}),
                    ContainsSubstring("config field 'seed': mandatory"));
  CHECK_THROWS_WITH(parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"functon", Json::object()}}),
                    ContainsSubstring("config field 'functon': unknown key"));
  CHECK_THROWS_WITH(parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"n", 3}}),
                    ContainsSubstring("config field 'n': this build supports n in {1, 2}"));
  CHECK_THROWS_WITH(parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"metric", "euclidean"}}),
                    ContainsSubstring("config field 'metric': expected 'koranyi' or 'cc'"));
  CHECK_THROWS_WITH(parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"budgets", Json{{"samplez", 3}}}}),
                    ContainsSubstring("config field 'budgets.samplez': unknown key"));
  CHECK_THROWS_WITH(parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"budgets", Json{{"samples", 0}}}}),
                    ContainsSubstring("sample budgets must be positive"));
  CHECK_THROWS_WITH(
      parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"budgets", Json{{"sphere_samples", -1}}}}),
      ContainsSubstring("budgets must be non-negative"));
  CHECK_THROWS_WITH(parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"budgets", Json{{"samples", 1.5}}}}),
                    ContainsSubstring("config field 'budgets.samples': expected a non-negative integer"));
  CHECK_THROWS_WITH(parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"expect", 3}}),
                    ContainsSubstring("config field 'expect': expected an object"));
  CHECK_THROWS_WITH(
      parse_config(Json{{"kind", "bmo"}, {"seed", 1}, {"expect", Json{{"converged", "yes"}}}}),
      ContainsSubstring("config field 'expect.converged': expected a boolean"));

  const ConfigError err("family.r_min", "need 0 < r_min <= r_max");
  CHECK(err.path == "family.r_min");
  CHECK_THAT(err.what(), ContainsSubstring("config field 'family.r_min'"));
}

TEST_CASE("map and function specs validate recursively with paths", "[cli]") {
  CHECK_THROWS_WITH(make_field<1>(Json{{"id", "log-koranyi"}, {"centre", {0, 0, 0}}}, "function"),
                    ContainsSubstring("config field 'function.centre': unknown key"));
  CHECK_THROWS_WITH(make_field<1>(Json{{"id", "gauss"}}, "function"),
                    ContainsSubstring("unknown function 'gauss'") && ContainsSubstring("log-koranyi") &&
                        ContainsSubstring("affine"));
  CHECK_THROWS_WITH(make_field<1>(Json{{"c", 1.0}}, "function"),
                    ContainsSubstring("config field 'function': expected an object with an 'id'"));

  CHECK_THROWS_WITH(make_map<1>(Json{{"id", "moebius"}}, "map"),
                    ContainsSubstring("unknown map 'moebius'") && ContainsSubstring("planar-shear"));
  CHECK_THROWS_WITH(make_map<1>(Json{{"id", "rotation"}}, "map"),
                    ContainsSubstring("config field 'map.theta': missing required field"));
  CHECK_THROWS_WITH(make_map<1>(Json{{"id", "dilation"}, {"lambda", "2"}}, "map"),
                    ContainsSubstring("config field 'map.lambda': expected a number"));
  CHECK_THROWS_WITH(make_map<1>(Json{{"id", "left-translation"}, {"l", {1.0, 2.0}}}, "map"),
                    ContainsSubstring("config field 'map.l': expected an array of 3 coordinates"));
  CHECK_THROWS_WITH(make_map<2>(Json{{"id", "left-translation"}, {"l", {1.0, 2.0, 0.0}}}, "map"),
                    ContainsSubstring("expected an array of 5 coordinates"));

  const MapDescriptor<1> rot = make_map<1>(Json{{"id", "rotation"}, {"theta", 0.5}}, "map");
  CHECK(rot.id == "rotation");
  CHECK(rot.isometry);
  CHECK_THROWS_WITH(make_family<1>(Json{{"r_ratio", 1.0}}, "family", Metric::Koranyi),
                    ContainsSubstring("config field 'family.r_ratio': must be > 1"));
  CHECK_THROWS_WITH(make_family<1>(Json{{"per_axis", 0}}, "family", Metric::Koranyi),
                    ContainsSubstring("config field 'family.per_axis': must be >= 1"));
}

TEST_CASE("affine fields combine catalog entries", "[cli]") {
  const Json j{{"id", "affine"},
               {"offset", 2.0},
               {"terms",
                {Json{{"function", Json{{"id", "constant"}, {"c", 3.0}}}, {"weight", 2.0}},
                 Json{{"function", Json{{"id", "bounded-sinusoid"}, {"freq", 0.5}, {"axis", 1}}},
                      {"weight", -1.0}}}}};
  const ScalarField<1> u = make_field<1>(j, "function");
  CHECK(u.bounded);
  CHECK(u.sup_abs == Catch::Approx(2.0 + 2.0 * 3.0 + 1.0).margin(1e-12));
  const HPoint<1> p{{cplx(0.3, 1.2)}, -0.4};
  CHECK(u(p) == Catch::Approx(2.0 + 2.0 * 3.0 - std::sin(0.5 * 1.2)).margin(1e-12));

  const Json unbounded{{"id", "affine"},
                       {"terms", {Json{{"function", Json{{"id", "log-koranyi"}}}, {"weight", 1.0}}}}};
  CHECK_FALSE(make_field<1>(unbounded, "function").bounded);

  CHECK_THROWS_WITH(make_field<1>(Json{{"id", "affine"}}, "function"),
                    ContainsSubstring("config field 'function.terms': missing required field"));
  CHECK_THROWS_WITH(make_field<1>(Json{{"id", "affine"}, {"terms", Json::array()}}, "function"),
                    ContainsSubstring("config field 'function.terms': expected a non-empty array"));
  const Json bad_nested{{"id", "affine"},
                        {"terms", {Json{{"function", Json{{"id", "gauss"}}}, {"weight", 1.0}}}}};
  CHECK_THROWS_WITH(make_field<1>(bad_nested, "function"),
                    ContainsSubstring("config field 'function.terms[0].function.id': unknown function"));
  const Json bad_key{{"id", "affine"}, {"terms", {Json{{"fn", Json{{"id", "constant"}}}}}}};
  CHECK_THROWS_WITH(make_field<1>(bad_key, "function"),
                    ContainsSubstring("config field 'function.terms[0].fn': unknown key"));
}

TEST_CASE("hom specs validate shape and algebra", "[cli]") {
  const HomogeneousHom<1> L = parse_hom<1>(Json{{"a", {2.0, 0.0, 0.0, 2.0}}}, "hom");
  CHECK(L.mu == Catch::Approx(4.0).margin(1e-12));  // forced to det A on H^1

  CHECK_THROWS_WITH(parse_hom<1>(Json{{"a", {1.0, 0.0, 0.0}}}, "hom"),
                    ContainsSubstring("config field 'hom.a': expected 4 row-major entries"));
  CHECK_THROWS_WITH(parse_hom<1>(Json::array(), "hom"),
                    ContainsSubstring("config field 'hom': expected an object"));
  CHECK_THROWS_WITH(parse_hom<1>(Json{{"a", {1.0, 0.0, 0.0, 1.0}}, {"b", 1}}, "hom"),
                    ContainsSubstring("config field 'hom.b': unknown key"));

  Json id2{{"a", Json::array()}, {"mu", 1.0}};
  for (int i = 0; i < 16; ++i) id2["a"].push_back(i % 5 == 0 ? 1.0 : 0.0);
  const HomogeneousHom<2> I2 = parse_hom<2>(id2, "hom");
  CHECK(I2.mu == 1.0);

  Json no_mu = id2;
  no_mu.erase("mu");
  CHECK_THROWS_WITH(parse_hom<2>(no_mu, "hom"),
                    ContainsSubstring("config field 'hom.mu': required for n > 1"));
  Json bad_mu = id2;
  bad_mu["mu"] = 2.0;  // A = I forces mu = 1; anything else breaks the group law
  CHECK_THROWS_WITH(parse_hom<2>(bad_mu, "hom"),
                    ContainsSubstring("config field 'hom': not a homomorphism"));
}

TEST_CASE("reports are canonical, versioned, and round-trip through their own dump", "[cli]") {
  const RunResult r = run_experiment_dispatch(parse_config(base_config()));
  CHECK(r.pass);
  CHECK(r.report.at("version").get<std::string>() == kVersionTag);
  CHECK(r.report.at("kind") == "ccdist");
  CHECK(r.report.at("wall_clock_ms") == 0);
  CHECK(r.report.at("verdicts").at("converged") == true);
  CHECK(r.report.at("expected").at("converged") == true);
  CHECK(r.report.at("config").at("budgets").at("cc_segments") == 12);
  CHECK(r.report.at("config").contains("pair"));
  CHECK_FALSE(r.report.at("config").contains("map"));  // null sections are omitted from the echo

  CHECK(r.report.at("results").at("koranyi_distance") == 0.6);
  CHECK(r.report.at("results").at("distance").get<double>() ==
        Catch::Approx(0.6).epsilon(0.05));  // horizontal pair: d_cc = |z|

  const std::string bytes = canonical_dump(r.report);
  REQUIRE(!bytes.empty());
  CHECK(bytes.back() == '\n');
  CHECK(Json::parse(bytes) == r.report);
}

TEST_CASE("report bytes are independent of the worker thread count", "[cli]") {
  const ExperimentConfig cfg = parse_config(small_bmo_config(11));
  const int saved = thread_count();
  set_thread_count(1);
  const std::string solo = canonical_dump(run_experiment_dispatch(cfg).report);
  set_thread_count(3);
  const std::string pooled = canonical_dump(run_experiment_dispatch(cfg).report);
  const std::string again = canonical_dump(run_experiment_dispatch(cfg).report);
  set_thread_count(saved);
  CHECK(solo == pooled);
  CHECK(pooled == again);
}

TEST_CASE("seeds are echoed and move the Monte Carlo output", "[cli]") {
  const RunResult a = run_experiment_dispatch(parse_config(small_bmo_config(11)));
  const RunResult b = run_experiment_dispatch(parse_config(small_bmo_config(12)));
  CHECK(a.report.at("config").at("seed") == 11);
  CHECK(b.report.at("config").at("seed") == 12);
  CHECK(a.report.at("results").at("value").get<double>() !=
        b.report.at("results").at("value").get<double>());
  CHECK(canonical_dump(a.report) != canonical_dump(b.report));
}

TEST_CASE("expect overrides flip the pass verdict", "[cli]") {
  Json j = base_config();
  j["expect"] = Json{{"converged", false}};
  const RunResult r = run_experiment_dispatch(parse_config(j));
  CHECK_FALSE(r.pass);
  CHECK(r.report.at("verdicts").at("converged") == true);
  CHECK(r.report.at("expected").at("converged") == false);
  CHECK(r.report.at("pass") == false);

  j["expect"] = Json{{"bogus", true}};
  CHECK_THROWS_WITH(run_experiment_dispatch(parse_config(j)),
                    ContainsSubstring("config field 'expect.bogus': unknown verdict") &&
                        ContainsSubstring("converged"));
}

TEST_CASE("kind-specific input checks fire before any sampling", "[cli]") {
  Json no_pair = base_config();
  no_pair.erase("pair");
  CHECK_THROWS_WITH(run_experiment_dispatch(parse_config(no_pair)),
                    ContainsSubstring("config field 'pair': ccdist needs"));

  const Json nec2{{"n", 2}, {"kind", "necessity"}, {"seed", 0}};
  CHECK_THROWS_WITH(run_experiment_dispatch(parse_config(nec2)),
                    ContainsSubstring("config field 'hom': required for n > 1"));

  Json bad_radii = small_bmo_config(1);
  bad_radii["kind"] = "roundness";
  bad_radii["map"] = Json{{"id", "identity"}};
  bad_radii["radii"] = {1.0, -2.0};
  CHECK_THROWS_WITH(run_experiment_dispatch(parse_config(bad_radii)),
                    ContainsSubstring("config field 'radii[1]': radii must be positive"));
}

TEST_CASE("render_table flattens reports into aligned rows", "[cli]") {
  const Json j{{"alpha", 1.5},
               {"nested", Json{{"flag", true}}},
               {"rows", {Json{{"x", 1}}, Json{{"x", 2}}}},
               {"scalars", {1.0, 2.5}}};
  const std::string table = render_table(j);
  CHECK_THAT(table, ContainsSubstring("alpha") && ContainsSubstring("nested.flag") &&
                        ContainsSubstring("rows[0].x") && ContainsSubstring("rows[1].x"));

  std::istringstream in(table);
  std::string line;
  std::vector<std::string> keys;
  std::size_t value_col = std::string::npos;
  while (std::getline(in, line)) {
    const std::size_t gap = line.find("  ");
    REQUIRE(gap != std::string::npos);
    keys.push_back(line.substr(0, gap));
    const std::size_t col = line.find_first_not_of(' ', gap);
    if (value_col == std::string::npos) value_col = col;
    CHECK(col == value_col);  // one shared value column
  }
  CHECK(keys == std::vector<std::string>{"alpha", "nested.flag", "rows[0].x", "rows[1].x", "scalars"});

  const RunResult r = run_experiment_dispatch(parse_config(base_config()));
  const std::string rt = render_table(r.report);
  CHECK_THAT(rt, ContainsSubstring("results.distance") && ContainsSubstring("verdicts.converged") &&
                     ContainsSubstring("results.stage_lengths"));
}
