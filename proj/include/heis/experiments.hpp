#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "measure.hpp"
#include "necessity.hpp"
#include "pansu.hpp"
#include "qc.hpp"
#include "report.hpp"

namespace heis {

struct RunResult {
  Json report;
  bool pass = false;
};

namespace detail_exp {

template <int N>
Json json_ball(const Ball<N>& b) {
  return Json{{"center", json_point<N>(b.center)}, {"radius", b.radius}, {"metric", metric_name(b.metric)}};
}

template <int N>
Json json_hom(const HomogeneousHom<N>& L) {
  Json a = Json::array();
  for (double v : L.A) a.push_back(v);
  return Json{{"a", a}, {"mu", L.mu}};
}

inline Json json_budgets(const Budgets& b) {
  return Json{{"samples", b.samples},
              {"sphere_samples", b.sphere_samples},
              {"refine_rounds", b.refine_rounds},
              {"set_points", b.set_points},
              {"diam_points", b.diam_points},
              {"volume_samples", b.volume_samples},
              {"lambda_samples", b.lambda_samples},
              {"lambda_refine_rounds", b.lambda_refine_rounds},
              {"lambda_points", b.lambda_points},
              {"jn_samples", b.jn_samples},
              {"count", b.count},
              {"cc_segments", b.cc.segments},
              {"cc_restarts", b.cc.restarts},
              {"cc_outer_rounds", b.cc.outer_rounds},
              {"cc_inner_iters", b.cc.inner_iters}};
}

template <int N>
std::vector<HPoint<N>> parse_points(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of points");
  std::vector<HPoint<N>> pts;
  for (std::size_t i = 0; i < j.size(); ++i)
    pts.push_back(parse_point<N>(j[i], path + "[" + std::to_string(i) + "]"));
  return pts;
}

inline std::vector<double> parse_radii(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of radii");
  std::vector<double> rs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    rs.push_back(detail_config::as_num(j[i], path + "[" + std::to_string(i) + "]"));
    if (!(rs.back() > 0.0)) throw ConfigError(path + "[" + std::to_string(i) + "]", "radii must be positive");
  }
  return rs;
}

template <int N>
Ball<N> parse_ball(const Json& j, const std::string& path, Metric metric) {
  if (!j.is_object()) throw ConfigError(path, "expected {\"center\": [...], \"radius\": r}");
  detail_config::check_keys(j, path, {"center", "radius"});
  Ball<N> b{HPoint<N>::identity(), 1.0, metric};
  if (j.contains("center")) b.center = parse_point<N>(j.at("center"), path + ".center");
  b.radius = detail_config::num_or(j, path, "radius", 1.0);
  if (!(b.radius > 0.0)) throw ConfigError(path + ".radius", "must be positive");
  return b;
}

// verdict bookkeeping: expected defaults per kind, overridable via config "expect"
struct Verdicts {
  Json got = Json::object();
  Json expected = Json::object();

  void set(const std::string& name, bool value, bool expect_default) {
    got[name] = value;
    expected[name] = expect_default;
  }

  bool finalize(const Json& overrides) {
    if (overrides.is_object())
      for (const auto& [k, v] : overrides.items()) {
        if (!got.contains(k)) {
          std::string known;
          for (const auto& [kk, vv] : got.items()) known += (known.empty() ? "" : ", ") + kk;
          throw ConfigError("expect." + k, "unknown verdict (have: " + known + ")");
        }
        expected[k] = v.get<bool>();
      }
    for (const auto& [k, v] : expected.items())
      if (got.at(k).get<bool>() != v.get<bool>()) return false;
    return true;
  }
};

template <int N>
Json run_ccdist(const ExperimentConfig& cfg, const MetricContext<N>&, Verdicts& v) {
  if (!cfg.pair.is_object()) throw ConfigError("pair", "ccdist needs {\"p\": [...], \"q\": [...]}");
  detail_config::check_keys(cfg.pair, "pair", {"p", "q"});
  const HPoint<N> p = parse_point<N>(detail_config::require(cfg.pair, "pair", "p"), "pair.p");
  const HPoint<N> q = parse_point<N>(detail_config::require(cfg.pair, "pair", "q"), "pair.q");
  CcConfig cc = cfg.budgets.cc;
  cc.seed = mix_bits(cfg.seed, 0x63636363ULL);
  const CcResult est = cc_distance_estimate<N>(p, q, cc);
  v.set("converged", est.converged, true);
  return Json{{"estimator", "feasible-polyline length minimization; distance is an upper bound"},
              {"p", json_point<N>(p)},
              {"q", json_point<N>(q)},
              {"distance", est.distance},
              {"constraint_residual", est.constraint_residual},
              {"converged", est.converged},
              {"segments", est.segments},
              {"restarts", est.restarts},
              {"stage_lengths", json_vec(est.stage_lengths)},
              {"koranyi_distance", koranyi_distance<N>(p, q)}};
}

template <int N>
Json run_pansu(const ExperimentConfig& cfg, const MetricContext<N>&, Verdicts& v) {
  const MapDescriptor<N> f = make_map<N>(cfg.map, "map");
  std::vector<HPoint<N>> pts;
  if (cfg.points.is_null())
    pts.push_back(HPoint<N>::identity());
  else
    pts = parse_points<N>(cfg.points, "points");
  bool all_differentiable = true, any_divergent = false;
  Json rows = Json::array();
  for (const auto& p : pts) {
    const PansuEstimate<N> est = pansu_differential_estimate<N>(f, p);
    all_differentiable = all_differentiable && (est.exact || (!est.divergent && est.exponent >= 0.3));
    any_divergent = any_divergent || est.divergent;
    Json a = Json::array();
    for (double x : est.differential.A) a.push_back(x);
    rows.push_back(Json{{"point", json_point<N>(p)},
                        {"a", a},
                        {"mu", est.differential.mu},
                        {"scales", json_vec(est.scales)},
                        {"residuals", json_vec(est.residuals)},
                        {"noise_floors", json_vec(est.noise_floors)},
                        {"exact", est.exact},
                        {"divergent", est.divergent},
                        {"exponent", est.exponent}});
  }
  v.set("all_differentiable", all_differentiable, true);
  v.set("any_divergent", any_divergent, false);
  return Json{{"estimator", "rescaled left increments f(p)^-1 f((delta_s v) p); hom fitted on "
                            "the finest scales; residuals are sups over the direction set"},
              {"map", f.id},
              {"points", rows}};
}

template <int N>
Json run_distortion(const ExperimentConfig& cfg, const MetricContext<N>& ctx, Verdicts& v) {
  const MapDescriptor<N> f = make_map<N>(cfg.map, "map");
  std::vector<HPoint<N>> pts = cfg.points.is_null() ? default_qc_basepoints<N>(4, cfg.seed)
                                                    : parse_points<N>(cfg.points, "points");
  std::vector<double> radii = cfg.radii.is_null() ? default_qc_ladder() : parse_radii(cfg.radii, "radii");
  const QcProfileReport<N> rep = qc_profile<N>(f, pts, radii, cfg.budgets.sphere_samples,
                                               cfg.budgets.refine_rounds, cfg.seed, ctx);
  Json profiles = Json::array();
  for (const auto& prof : rep.profiles) {
    Json rows = Json::array();
    for (const auto& d : prof.per_radius)
      rows.push_back(Json{{"r", d.r},
                          {"k", d.k},
                          {"sup_d", d.sup_d},
                          {"inf_d", d.inf_d},
                          {"collision", d.collision},
                          {"directions", d.samples}});
    profiles.push_back(
        Json{{"point", json_point<N>(prof.x)}, {"per_radius", rows}, {"last_decade_slope", prof.slope}});
  }
  v.set("qc_consistent", rep.qc_consistent, true);
  v.set("not_qc", rep.not_qc, false);
  return Json{{"estimator", "K = sup/inf over a stratified direction grid; lower bound of true K"},
              {"map", f.id},
              {"profiles", profiles},
              {"plateau", rep.plateau},
              {"k_threshold", rep.k_threshold}};
}

template <int N>
Json run_bmo(const ExperimentConfig& cfg, const MetricContext<N>& ctx, Verdicts& v) {
  const ScalarField<N> u = make_field<N>(cfg.function, "function");
  const BallFamily<N> fam = make_family<N>(cfg.family, "family", cfg.metric);
  const BmoEstimate<N> est =
      bmo_norm_estimate<N>(u, fam, cfg.budgets.samples, cfg.seed, ctx, cfg.budgets.refine_rounds);
  v.set("bmo_bounded", !est.not_bmo_flag, true);
  return Json{{"estimator", "max mean oscillation over a finite lattice ball family; lower bound"},
              {"function", u.id},
              {"value", est.value},
              {"sigma_at_argmax", est.sigma_at_argmax},
              {"argmax", json_ball<N>(est.argmax)},
              {"rung_radii", json_vec(est.rung_radii)},
              {"rung_max", json_vec(est.rung_max)},
              {"growth_slope", est.growth_slope},
              {"not_bmo", est.not_bmo_flag},
              {"balls_evaluated", est.balls_evaluated}};
}

template <int N>
Json run_jn_tail(const ExperimentConfig& cfg, const MetricContext<N>& ctx, Verdicts& v) {
  const ScalarField<N> u = make_field<N>(cfg.function, "function");
  const Ball<N> ball = cfg.ball.is_null() ? Ball<N>{HPoint<N>::identity(), 1.0, cfg.metric}
                                          : parse_ball<N>(cfg.ball, "ball", cfg.metric);
  const BallFamily<N> fam = make_family<N>(cfg.family, "family", cfg.metric);
  const BmoEstimate<N> norm =
      bmo_norm_estimate<N>(u, fam, cfg.budgets.samples, mix_bits(cfg.seed, 0x6a6e0001ULL), ctx, 1);
  const JnReport jn = jn_tail_fit<N>(u, ball, norm.value, cfg.budgets.jn_samples,
                                     mix_bits(cfg.seed, 0x6a6e0002ULL), ctx, cfg.budgets.lambda_points);
  Json pts = Json::array();
  for (const auto& p : jn.points)
    pts.push_back(Json{{"lambda", p.lambda}, {"tail", p.tail}, {"hits", p.hits}});
  const bool pass = jn.verdict == JnVerdict::DegeneratePass || jn.a_hat > 0.0;
  v.set("jn_pass", pass, true);
  v.set("jn_strong", jn.verdict == JnVerdict::StrongPass, jn.verdict == JnVerdict::StrongPass);
  return Json{{"estimator", "MC level-set tails on a geometric lambda grid, log-linear fit"},
              {"function", u.id},
              {"ball", json_ball<N>(ball)},
              {"norm_scale", jn.norm_scale},
              {"norm_scale_source", "bmo_norm_estimate on the configured family"},
              {"a_hat", jn.a_hat},
              {"prefactor", jn.prefactor},
              {"r2", jn.r2},
              {"a_cert", jn.a_cert},
              {"verdict", jn_verdict_name(jn.verdict)},
              {"bound_ok", jn.bound_ok},
              {"points", pts},
              {"samples", jn.samples}};
}

template <int N>
Json run_transfer(const ExperimentConfig& cfg, const MetricContext<N>& ctx, Verdicts& v) {
  const MapDescriptor<N> f = make_map<N>(cfg.map, "map");
  const ScalarField<N> u = make_field<N>(cfg.function, "function");
  const BallFamily<N> fam = make_family<N>(cfg.family, "family", cfg.metric);
  const TransferReport<N> rep =
      bmo_transfer_experiment<N>(f, u, fam, cfg.budgets.samples, cfg.seed, ctx, cfg.budgets.refine_rounds);
  v.set("transfer_bounded", rep.ratio >= 0.8 && rep.ratio <= 1.25, true);
  return Json{{"estimator", "matched-family BMO scan ratio ||u o f^-1|| / ||u||"},
              {"map", f.id},
              {"function", u.id},
              {"ratio", rep.ratio},
              {"base_norm", rep.base_norm},
              {"base_sigma", rep.base_sigma},
              {"image_norm", rep.image_norm},
              {"image_sigma", rep.image_sigma},
              {"base_argmax", json_ball<N>(rep.base_argmax)},
              {"image_argmax", json_ball<N>(rep.image_argmax)},
              {"balls", rep.balls}};
}

template <int N>
Json run_gotoh(const ExperimentConfig& cfg, const MetricContext<N>& ctx, Verdicts& v) {
  const MapDescriptor<N> f = make_map<N>(cfg.map, "map");
  const int count = cfg.budgets.count > 0 ? cfg.budgets.count : 8;
  Rng rng = derive_rng(cfg.seed, 0x90704aadULL);
  std::vector<GotohPair<N>> pairs;
  for (int i = 0; i < count; ++i) {
    Ball<N> b1{}, b2{};
    b1.metric = b2.metric = cfg.metric;
    do {
      for (int j = 0; j < N; ++j) {
        b1.center.z[j] = cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
        b2.center.z[j] = cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
      }
      b1.center.t = rng.uniform(-4.0, 4.0);
      b2.center.t = rng.uniform(-4.0, 4.0);
    } while (koranyi_distance<N>(b1.center, b2.center) < 0.25);
    b1.radius = std::exp(rng.uniform(std::log(0.25), 0.0));
    b2.radius = std::exp(rng.uniform(std::log(0.25), 0.0));
    pairs.push_back(GotohPair<N>{set_from_ball<N>(b1, ctx), set_from_ball<N>(b2, ctx),
                                 default_gotoh_family<N>(b1, b2, ctx)});
  }
  const auto reports = gotoh_check<N>(f, pairs, cfg.budgets.samples, cfg.seed, ctx);
  bool all_sat = true;
  double kmax = 0.0, amin = 1.0;
  Json rows = Json::array();
  for (const auto& r : reports) {
    all_sat = all_sat && r.sat;
    if (r.sat) {
      kmax = std::max(kmax, r.k);
      amin = std::min(amin, r.alpha);
    }
    rows.push_back(Json{{"left", r.left.value},
                        {"left_sigma", r.left.sigma},
                        {"right", r.right.value},
                        {"right_sigma", r.right.sigma},
                        {"sat", r.sat},
                        {"k", r.k},
                        {"alpha", r.alpha}});
  }
  v.set("gotoh_sat", all_sat, true);
  return Json{{"estimator", "sup-min ball densities by MC; grid search over (K, alpha); "
                            "UNSAT within the grid is inconclusive"},
              {"map", f.id},
              {"pairs", rows},
              {"k_max", kmax},
              {"alpha_min", amin}};
}

template <int N>
Json run_necessity(const ExperimentConfig& cfg, const MetricContext<N>& ctx, Verdicts& v) {
  NecessityBudgets nb;
  nb.lambda_samples = cfg.budgets.lambda_samples;
  nb.lambda_refine_rounds = cfg.budgets.lambda_refine_rounds;
  nb.set_points = cfg.budgets.set_points;
  nb.diam_points = cfg.budgets.diam_points;
  nb.volume_samples = cfg.budgets.volume_samples;
  nb.refine_rounds = cfg.budgets.refine_rounds;
  const double r = cfg.radii.is_null() ? 1.0 : parse_radii(cfg.radii, "radii").at(0);

  std::vector<HomogeneousHom<N>> homs;
  if (!cfg.hom.is_null()) {
    homs.push_back(parse_hom<N>(cfg.hom, "hom"));
  } else if constexpr (N == 1) {
    const int count = cfg.budgets.count > 0 ? cfg.budgets.count : 4;
    Rng rng = derive_rng(cfg.seed, 0xec10aaadULL);
    for (int i = 0; i < count; ++i) homs.push_back(random_h1_hom(rng, 8.0));
  } else {
    throw ConfigError("hom", "required for n > 1 (random homs are drawn only on H^1)");
  }

  bool all_pointwise = true, all_set_bounds = true;
  Json rows = Json::array();
  for (std::size_t i = 0; i < homs.size(); ++i) {
    const NecessityConstruction<N> c =
        necessity_construction<N>(homs[i], r, nb, mix_bits(cfg.seed, 0xec100a00ULL + i), ctx);
    all_pointwise = all_pointwise && c.pointwise_ok;
    all_set_bounds = all_set_bounds && c.dist_ge_three_quarters && c.dist_ge_diam_bound;
    rows.push_back(Json{{"hom", json_hom<N>(homs[i])},
                        {"lambda_max", c.lambda.value},
                        {"x", json_point<N>(c.x)},
                        {"e1", json_ball<N>(c.e1)},
                        {"e2", json_ball<N>(c.e2)},
                        {"dist", c.dist},
                        {"diam", c.diam},
                        {"pairs", c.pairs},
                        {"roundness", c.roundness.ratio},
                        {"tol", c.tol},
                        {"pointwise_ok", c.pointwise_ok},
                        {"dist_ge_three_quarters", c.dist_ge_three_quarters},
                        {"dist_ge_diam_bound", c.dist_ge_diam_bound}});
  }
  v.set("pointwise_ok", all_pointwise, true);
  v.set("set_bounds_ok", all_set_bounds, true);
  return Json{{"estimator", "sampled set distance (upper-biased min) vs (13/16) r lambda pointwise; "
                            "set bounds with one-sided tolerances"},
              {"r", r},
              {"constructions", rows}};
}

template <int N>
Json run_roundness(const ExperimentConfig& cfg, const MetricContext<N>& ctx, Verdicts& v) {
  const MapDescriptor<N> f = make_map<N>(cfg.map, "map");
  std::vector<double> radii = cfg.radii.is_null() ? std::vector<double>{4.0, 1.0, 0.25}
                                                  : parse_radii(cfg.radii, "radii");
  const RoundnessEstimate ref = roundness_ratio<N>(map_identity<N>(), 1.0, cfg.budgets.volume_samples,
                                                   cfg.budgets.diam_points,
                                                   mix_bits(cfg.seed, 0x20600fffULL), ctx);
  const RoundnessLiminf lim = roundness_liminf<N>(f, radii, cfg.budgets.volume_samples,
                                                  cfg.budgets.diam_points, cfg.seed, ref.ratio, ctx);
  Json rows = Json::array();
  for (std::size_t i = 0; i < lim.radii.size(); ++i)
    rows.push_back(Json{{"r", lim.radii[i]},
                        {"ratio", lim.per_radius[i].ratio},
                        {"volume", lim.per_radius[i].volume},
                        {"volume_sigma", lim.per_radius[i].volume_sigma},
                        {"diam", lim.per_radius[i].diam}});
  v.set("roundness_pass", lim.heuristic_pass, true);
  return Json{{"estimator", "|f(B)| / diam(f(B))^Q with MC volume and sampled diameter; "
                            "verdict is the declared liminf heuristic"},
              {"map", f.id},
              {"rho0_ref", ref.ratio},
              {"per_radius", rows},
              {"liminf_surrogate", lim.liminf_surrogate},
              {"threshold", lim.threshold},
              {"heuristic_pass", lim.heuristic_pass}};
}

}  // namespace detail_exp

// Runs one experiment; the report is deterministic given (config, seed) and independent
// of the worker-thread count. wall_clock_ms is fixed to 0 in the canonical report: the
// CLI reports measured time out of band so report bytes stay comparable.
template <int N>
RunResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.n != N) throw std::invalid_argument("run_experiment: config n does not match instantiation");
  MetricContext<N> ctx;
  ctx.metric = cfg.metric;
  ctx.cc = cfg.budgets.cc;

  detail_exp::Verdicts v;
  Json results;
  switch (cfg.kind) {
    case ExperimentKind::CcDist: results = detail_exp::run_ccdist<N>(cfg, ctx, v); break;
    case ExperimentKind::Pansu: results = detail_exp::run_pansu<N>(cfg, ctx, v); break;
    case ExperimentKind::Distortion: results = detail_exp::run_distortion<N>(cfg, ctx, v); break;
    case ExperimentKind::Bmo: results = detail_exp::run_bmo<N>(cfg, ctx, v); break;
    case ExperimentKind::JnTail: results = detail_exp::run_jn_tail<N>(cfg, ctx, v); break;
    case ExperimentKind::Transfer: results = detail_exp::run_transfer<N>(cfg, ctx, v); break;
    case ExperimentKind::Gotoh: results = detail_exp::run_gotoh<N>(cfg, ctx, v); break;
    case ExperimentKind::Necessity: results = detail_exp::run_necessity<N>(cfg, ctx, v); break;
    case ExperimentKind::Roundness: results = detail_exp::run_roundness<N>(cfg, ctx, v); break;
  }

  RunResult out;
  out.pass = v.finalize(cfg.expect);
  Json echo{{"n", cfg.n},
            {"kind", kind_name(cfg.kind)},
            {"seed", cfg.seed},
            {"metric", metric_name(cfg.metric)},
            {"budgets", detail_exp::json_budgets(cfg.budgets)}};
  for (const auto& [key, section] :
       {std::pair<const char*, const Json*>{"map", &cfg.map}, {"function", &cfg.function},
        {"family", &cfg.family}, {"points", &cfg.points}, {"radii", &cfg.radii}, {"pair", &cfg.pair},
        {"ball", &cfg.ball}, {"hom", &cfg.hom}, {"expect", &cfg.expect}})
    if (!section->is_null()) echo[key] = *section;
  out.report = Json{{"version", kVersionTag},
                    {"kind", kind_name(cfg.kind)},
                    {"config", echo},
                    {"results", results},
                    {"verdicts", v.got},
                    {"expected", v.expected},
                    {"pass", out.pass},
                    {"wall_clock_ms", 0}};
  return out;
}

inline RunResult run_experiment_dispatch(const ExperimentConfig& cfg) {
  switch (cfg.n) {
    case 1: return run_experiment<1>(cfg);
    case 2: return run_experiment<2>(cfg);
    default: throw ConfigError("n", "this build supports n in {1, 2}");
  }
}

}  // namespace heis
