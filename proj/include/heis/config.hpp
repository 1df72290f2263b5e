#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmo.hpp"
#include "cc.hpp"
#include "fields.hpp"
#include "hom.hpp"
#include "maps.hpp"
#include "metrics.hpp"
#include "report.hpp"

namespace heis {

// Thrown on malformed configs; `path` names the offending field (e.g. "map.lambda").
struct ConfigError : std::runtime_error {
  std::string path;
  ConfigError(std::string p, const std::string& what)
      : std::runtime_error("config field '" + p + "': " + what), path(std::move(p)) {}
};

enum class ExperimentKind { Distortion, Bmo, JnTail, Transfer, Gotoh, Necessity, Roundness, Pansu, CcDist };

inline const std::vector<std::pair<std::string, ExperimentKind>>& kind_table() {
  static const std::vector<std::pair<std::string, ExperimentKind>> table = {
      {"distortion", ExperimentKind::Distortion}, {"bmo", ExperimentKind::Bmo},
      {"jn-tail", ExperimentKind::JnTail},        {"transfer", ExperimentKind::Transfer},
      {"gotoh", ExperimentKind::Gotoh},           {"necessity", ExperimentKind::Necessity},
      {"roundness", ExperimentKind::Roundness},   {"pansu", ExperimentKind::Pansu},
      {"ccdist", ExperimentKind::CcDist},
  };
  return table;
}

inline ExperimentKind parse_kind(const std::string& s, const std::string& path) {
  for (const auto& [name, k] : kind_table())
    if (name == s) return k;
  std::string known;
  for (const auto& [name, k] : kind_table()) known += (known.empty() ? "" : ", ") + name;
  throw ConfigError(path, "unknown kind '" + s + "' (known: " + known + ")");
}

inline std::string kind_name(ExperimentKind k) {
  for (const auto& [name, kk] : kind_table())
    if (kk == k) return name;
  return "?";
}

// Every budget an experiment may consume, with run-anywhere defaults. Budgets must be
// positive; unknown keys are rejected so typos cannot silently fall back to defaults.
struct Budgets {
  std::uint64_t samples = 4000;        // MC samples per ball (bmo / gotoh / transfer)
  int sphere_samples = 300;            // distortion direction grid size
  int refine_rounds = 3;               // witness refinement rounds
  int set_points = 100;                // points per set in necessity distance sampling
  int diam_points = 160;               // points for diameter estimation
  std::uint64_t volume_samples = 200000;  // MC volume samples (roundness)
  int lambda_samples = 2000;           // direction samples for the hom norm search
  int lambda_refine_rounds = 10;
  int lambda_points = 16;              // lambda grid size in the JN tail fit
  std::uint64_t jn_samples = 100000;   // MC samples for the JN tail
  int count = 0;                       // batch size (gotoh pairs / necessity homs); 0 = kind default
  CcConfig cc;                         // ccdist optimizer budgets
};

struct ExperimentConfig {
  int n = 1;
  ExperimentKind kind = ExperimentKind::CcDist;
  std::uint64_t seed = 0;
  Metric metric = Metric::Koranyi;
  Budgets budgets;
  Json map;       // {"id": ..., params}; empty object when absent
  Json function;  // {"id": ..., params}
  Json family;    // ball family spec
  Json points;    // array of points
  Json radii;     // array of positive reals
  Json pair;      // {"p": point, "q": point}
  Json ball;      // {"center": point, "radius": r}
  Json hom;       // {"a": row-major 2n x 2n, "mu": optional}
  Json expect;    // verdict-name -> bool overrides
};

namespace detail_config {

inline void check_keys(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(path.empty() ? k : path + "." + k, "unknown key");
}

inline const Json& require(const Json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(path.empty() ? key : path + "." + key, "missing required field");
  return j.at(key);
}

inline double as_num(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number, got " + j.dump());
  return j.get<double>();
}

inline double num_field(const Json& j, const std::string& path, const std::string& key) {
  return as_num(require(j, path, key), path + "." + key);
}

inline double num_or(const Json& j, const std::string& path, const std::string& key, double dflt) {
  return j.contains(key) ? as_num(j.at(key), path + "." + key) : dflt;
}

inline int int_field(const Json& j, const std::string& path, const std::string& key, int dflt) {
  if (!j.contains(key)) return dflt;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer, got " + v.dump());
  return v.get<int>();
}

inline std::uint64_t u64_field(const Json& j, const std::string& path, const std::string& key,
                               std::uint64_t dflt) {
  if (!j.contains(key)) return dflt;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<double>() < 0))
    throw ConfigError(path + "." + key, "expected a non-negative integer, got " + v.dump());
  return v.get<std::uint64_t>();
}

}  // namespace detail_config

template <int N>
HPoint<N> parse_point(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 * N + 1)
    throw ConfigError(path, "expected an array of " + std::to_string(2 * N + 1) +
                                " coordinates [x1..xn, y1..yn, t]");
  HPoint<N> p;
  for (int k = 0; k < N; ++k)
    p.z[k] = cplx(detail_config::as_num(j[k], path + "[" + std::to_string(k) + "]"),
                  detail_config::as_num(j[N + k], path + "[" + std::to_string(N + k) + "]"));
  p.t = detail_config::as_num(j[2 * N], path + "[" + std::to_string(2 * N) + "]");
  return p;
}

template <int N>
HomogeneousHom<N> parse_hom(const Json& j, const std::string& path) {
  using detail_config::as_num;
  using detail_config::require;
  if (!j.is_object()) throw ConfigError(path, "expected an object {\"a\": [...], \"mu\": ...}");
  detail_config::check_keys(j, path, {"a", "mu"});
  const Json& a = require(j, path, "a");
  constexpr int d = 2 * N;
  if (!a.is_array() || a.size() != d * d)
    throw ConfigError(path + ".a", "expected " + std::to_string(d * d) + " row-major entries");
  HomogeneousHom<N> L;
  for (int i = 0; i < d * d; ++i)
    L.A[static_cast<std::size_t>(i)] = as_num(a[i], path + ".a[" + std::to_string(i) + "]");
  if (j.contains("mu")) {
    L.mu = as_num(j.at("mu"), path + ".mu");
  } else if (N == 1) {
    L.mu = hom_det<N>(L);  // forced for n = 1: any invertible A is symplectic up to det
  } else {
    throw ConfigError(path + ".mu", "required for n > 1");
  }
  const auto val = validate_homomorphism<N>(L, 64, 1e-8, 0x76616c69ULL);
  if (!val.ok)
    throw ConfigError(path, "not a homomorphism (worst residual " + std::to_string(val.worst_residual) + ")");
  return L;
}

template <int N>
MapDescriptor<N> make_map(const Json& j, const std::string& path) {
  using detail_config::num_field;
  using detail_config::num_or;
  using detail_config::require;
  if (!j.is_object() || !j.contains("id"))
    throw ConfigError(path, "expected an object with an 'id' (see list-maps)");
  const std::string id = require(j, path, "id").get<std::string>();
  if (id == "identity") {
    detail_config::check_keys(j, path, {"id"});
    return map_identity<N>();
  }
  if (id == "left-translation") {
    detail_config::check_keys(j, path, {"id", "l"});
    return map_left_translation<N>(parse_point<N>(require(j, path, "l"), path + ".l"));
  }
  if (id == "rotation") {
    detail_config::check_keys(j, path, {"id", "theta", "thetas"});
    std::vector<double> thetas;
    if (j.contains("thetas")) {
      const Json& arr = j.at("thetas");
      if (!arr.is_array()) throw ConfigError(path + ".thetas", "expected an array of angles");
      for (std::size_t i = 0; i < arr.size(); ++i)
        thetas.push_back(detail_config::as_num(arr[i], path + ".thetas[" + std::to_string(i) + "]"));
    } else {
      thetas.push_back(num_field(j, path, "theta"));
    }
    return map_rotation<N>(thetas);
  }
  if (id == "conjugation") {
    detail_config::check_keys(j, path, {"id"});
    return map_conjugation<N>();
  }
  if (id == "dilation") {
    detail_config::check_keys(j, path, {"id", "lambda"});
    return map_dilation<N>(num_field(j, path, "lambda"));
  }
  if (id == "anisotropic") {
    detail_config::check_keys(j, path, {"id", "a"});
    return map_anisotropic<N>(num_field(j, path, "a"));
  }
  if (id == "vertical-stretch") {
    detail_config::check_keys(j, path, {"id", "c"});
    return map_vertical_stretch<N>(num_field(j, path, "c"));
  }
  if (id == "planar-shear") {
    detail_config::check_keys(j, path, {"id", "kappa"});
    return map_planar_shear<N>(num_or(j, path, "kappa", 1.0));
  }
  if (id == "hom") {
    Json h = j;
    h.erase("id");
    return map_from_hom<N>(parse_hom<N>(h, path));
  }
  std::string known;
  for (const auto& e : map_catalog()) known += (known.empty() ? "" : ", ") + e.id;
  throw ConfigError(path + ".id", "unknown map '" + id + "' (known: " + known + ")");
}

template <int N>
ScalarField<N> make_field(const Json& j, const std::string& path) {
  using detail_config::num_or;
  using detail_config::require;
  if (!j.is_object() || !j.contains("id"))
    throw ConfigError(path, "expected an object with an 'id' (see list-functions)");
  const std::string id = require(j, path, "id").get<std::string>();
  if (id == "constant") {
    detail_config::check_keys(j, path, {"id", "c"});
    return field_constant<N>(num_or(j, path, "c", 1.0));
  }
  if (id == "bounded-sinusoid") {
    detail_config::check_keys(j, path, {"id", "freq", "axis"});
    return field_bounded_sinusoid<N>(num_or(j, path, "freq", 1.0), detail_config::int_field(j, path, "axis", 0));
  }
  if (id == "indicator-halfspace") {
    detail_config::check_keys(j, path, {"id", "axis", "threshold"});
    return field_indicator_halfspace<N>(detail_config::int_field(j, path, "axis", 2 * N),
                                        num_or(j, path, "threshold", 0.0));
  }
  if (id == "log-koranyi") {
    detail_config::check_keys(j, path, {"id", "center"});
    HPoint<N> c{};
    if (j.contains("center")) c = parse_point<N>(j.at("center"), path + ".center");
    return field_log_koranyi<N>(c);
  }
  if (id == "koranyi-distance") {
    detail_config::check_keys(j, path, {"id", "center"});
    HPoint<N> c{};
    if (j.contains("center")) c = parse_point<N>(j.at("center"), path + ".center");
    return field_koranyi_distance<N>(c);
  }
  if (id == "affine") {
    detail_config::check_keys(j, path, {"id", "terms", "offset"});
    const Json& arr = require(j, path, "terms");
    if (!arr.is_array() || arr.empty())
      throw ConfigError(path + ".terms", "expected a non-empty array of {\"function\": ..., \"weight\": w}");
    std::vector<std::pair<ScalarField<N>, double>> terms;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string tp = path + ".terms[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) throw ConfigError(tp, "expected {\"function\": ..., \"weight\": w}");
      detail_config::check_keys(arr[i], tp, {"function", "weight"});
      terms.emplace_back(make_field<N>(require(arr[i], tp, "function"), tp + ".function"),
                         num_or(arr[i], tp, "weight", 1.0));
    }
    return field_affine<N>(terms, num_or(j, path, "offset", 0.0));
  }
  std::string known;
  for (const auto& e : field_catalog()) known += (known.empty() ? "" : ", ") + e.id;
  throw ConfigError(path + ".id", "unknown function '" + id + "' (known: " + known + ")");
}

template <int N>
BallFamily<N> make_family(const Json& j, const std::string& path, Metric metric) {
  using detail_config::num_or;
  BallFamily<N> fam;
  fam.metric = metric;
  if (j.is_null()) return fam;
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  detail_config::check_keys(j, path, {"extent", "per_axis", "r_min", "r_max", "r_ratio"});
  fam.extent = num_or(j, path, "extent", fam.extent);
  fam.per_axis = detail_config::int_field(j, path, "per_axis", fam.per_axis);
  fam.r_min = num_or(j, path, "r_min", fam.r_min);
  fam.r_max = num_or(j, path, "r_max", fam.r_max);
  fam.r_ratio = num_or(j, path, "r_ratio", fam.r_ratio);
  if (!(fam.extent > 0)) throw ConfigError(path + ".extent", "must be positive");
  if (fam.per_axis < 1) throw ConfigError(path + ".per_axis", "must be >= 1");
  if (!(fam.r_min > 0) || !(fam.r_max >= fam.r_min))
    throw ConfigError(path + ".r_min", "need 0 < r_min <= r_max");
  if (!(fam.r_ratio > 1)) throw ConfigError(path + ".r_ratio", "must be > 1");
  return fam;
}

inline Budgets parse_budgets(const Json& j, const std::string& path) {
  Budgets b;
  if (j.is_null()) return b;
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  detail_config::check_keys(j, path,
                            {"samples", "sphere_samples", "refine_rounds", "set_points", "diam_points",
                             "volume_samples", "lambda_samples", "lambda_refine_rounds", "lambda_points",
                             "jn_samples", "count", "cc_segments", "cc_restarts", "cc_outer_rounds",
                             "cc_inner_iters"});
  using detail_config::int_field;
  using detail_config::u64_field;
  b.samples = u64_field(j, path, "samples", b.samples);
  b.sphere_samples = int_field(j, path, "sphere_samples", b.sphere_samples);
  b.refine_rounds = int_field(j, path, "refine_rounds", b.refine_rounds);
  b.set_points = int_field(j, path, "set_points", b.set_points);
  b.diam_points = int_field(j, path, "diam_points", b.diam_points);
  b.volume_samples = u64_field(j, path, "volume_samples", b.volume_samples);
  b.lambda_samples = int_field(j, path, "lambda_samples", b.lambda_samples);
  b.lambda_refine_rounds = int_field(j, path, "lambda_refine_rounds", b.lambda_refine_rounds);
  b.lambda_points = int_field(j, path, "lambda_points", b.lambda_points);
  b.jn_samples = u64_field(j, path, "jn_samples", b.jn_samples);
  b.count = int_field(j, path, "count", b.count);
  b.cc.segments = int_field(j, path, "cc_segments", b.cc.segments);
  b.cc.restarts = int_field(j, path, "cc_restarts", b.cc.restarts);
  b.cc.outer_rounds = int_field(j, path, "cc_outer_rounds", b.cc.outer_rounds);
  b.cc.inner_iters = int_field(j, path, "cc_inner_iters", b.cc.inner_iters);
  if (b.samples == 0 || b.jn_samples == 0 || b.volume_samples == 0)
    throw ConfigError(path, "sample budgets must be positive");
  for (int v : {b.sphere_samples, b.refine_rounds, b.set_points, b.diam_points, b.lambda_samples,
                b.lambda_refine_rounds, b.lambda_points, b.cc.segments, b.cc.restarts, b.cc.outer_rounds,
                b.cc.inner_iters})
    if (v < 0) throw ConfigError(path, "budgets must be non-negative");
  return b;
}

inline ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("", "top level must be an object");
  detail_config::check_keys(j, "",
                            {"n", "kind", "seed", "metric", "budgets", "map", "function", "family",
                             "points", "radii", "pair", "ball", "hom", "expect"});
  ExperimentConfig c;
  c.n = detail_config::int_field(j, "", "n", 1);
  if (c.n < 1 || c.n > 2) throw ConfigError("n", "this build supports n in {1, 2}");
  c.kind = parse_kind(detail_config::require(j, "", "kind").get<std::string>(), "kind");
  if (!j.contains("seed")) throw ConfigError("seed", "mandatory: experiments take no entropy defaults");
  c.seed = detail_config::u64_field(j, "", "seed", 0);
  if (j.contains("metric")) {
    const std::string m = j.at("metric").get<std::string>();
    if (m == "koranyi")
      c.metric = Metric::Koranyi;
    else if (m == "cc")
      c.metric = Metric::CC;
    else
      throw ConfigError("metric", "expected 'koranyi' or 'cc'");
  }
  c.budgets = parse_budgets(j.contains("budgets") ? j.at("budgets") : Json(), "budgets");
  c.map = j.contains("map") ? j.at("map") : Json();
  c.function = j.contains("function") ? j.at("function") : Json();
  c.family = j.contains("family") ? j.at("family") : Json();
  c.points = j.contains("points") ? j.at("points") : Json();
  c.radii = j.contains("radii") ? j.at("radii") : Json();
  c.pair = j.contains("pair") ? j.at("pair") : Json();
  c.ball = j.contains("ball") ? j.at("ball") : Json();
  c.hom = j.contains("hom") ? j.at("hom") : Json();
  c.expect = j.contains("expect") ? j.at("expect") : Json();
  if (!c.expect.is_null()) {
    if (!c.expect.is_object()) throw ConfigError("expect", "expected an object of verdict -> bool");
    for (const auto& [k, v] : c.expect.items())
      if (!v.is_boolean()) throw ConfigError("expect." + k, "expected a boolean");
  }
  return c;
}

}  // namespace heis
