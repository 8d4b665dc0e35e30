#pragma once

// Subcommand wiring for the heightlab executable. run() never exits the
// process, so tests drive it in-process.

#include "heightlab/enumeration.hpp"
#include "heightlab/io.hpp"
#include "heightlab/kirszbraun.hpp"
#include "heightlab/sampler.hpp"
#include "heightlab/simplicial.hpp"
#include "heightlab/verify.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace heightlab::cli {

using io::json;

enum Exit : int { Ok = 0, DomainFailure = 1, Usage = 2 };

inline constexpr const char* formats_help = R"(Files
  domain JSON   {"dim":m,"shape":{"type":"box","lo":["0"],"hi":["3/4"]}}
                types: box(lo,hi), polytope(halfspaces:[{a,b}] meaning a.x <= b),
                unit_simplex(dim), simplices(scale, simplices:[{v,perm}], perm 1-based)
  profile       affine:s1,...,sm,b  or a JSON file with "type" one of
                affine(s,b) tent(apex,peak,left,right) min(dim,offset)
                quadratic(dim,coef,radius) pwa(mesh,values:[{x,h}])
  rationals     "p/q" strings, integers or finite decimals
CSV columns (every file starts with a "# heightlab/1 ..." line)
  points        z1..zm, is_boundary
  pins, fields  z1..zm, h
  table         m, s1..sm, n, ent   (n = "inf" rows hold the extrapolated value)
  minimizer     x1..xm, h  (mesh vertices, floating values)
Exit codes: 0 success, 1 domain error (error JSON written), 2 usage error)";

struct Context {
  std::ostream& out;
  std::ostream& err;
  unsigned threads = 0;
  std::string manifest_path;
  io::Manifest manifest;

  CountOptions count_options() const {
    CountOptions o;
    o.threads = threads;
    return o;
  }

  std::string header(const std::string& kind) const { return std::string("# ") + io::schema + " " + kind + " config=" + manifest.config_hash(); }

  void write_text(const std::string& path, const std::string& text) {
    io::write_file(path, text);
    manifest.outputs.push_back(path);
  }

  void read_input(const std::string& path) { manifest.inputs.push_back(path); }
};

inline json load_json(Context& ctx, const std::string& path) {
  ctx.read_input(path);
  return json::parse(io::read_file(path));
}

inline ContinuumDomain load_domain(Context& ctx, const std::string& path) { return io::domain_from_json(load_json(ctx, path)); }

inline LipschitzProfile load_profile(Context& ctx, const std::string& arg) {
  if (arg.rfind("affine:", 0) != 0) ctx.read_input(arg);
  return io::parse_profile_arg(arg);
}

/// "closed", a table cache path, or {"build":{"m","grid","n"}} inside configs.
inline SurfaceTensionModel load_model(Context& ctx, const json& spec) {
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    if (s == "closed") return SurfaceTensionModel::closed_form_1d();
    ctx.read_input(s);
    return io::load_table(s);
  }
  if (spec.contains("table")) return load_model(ctx, spec.at("table"));
  if (spec.contains("build")) {
    const auto& b = spec.at("build");
    return build_surface_tension_table(b.at("m").get<int>(), b.at("grid").get<int>(), b.at("n").get<std::vector<std::int64_t>>(), ctx.count_options());
  }
  throw std::invalid_argument("model must be \"closed\", a table path, or {\"build\":{...}}");
}

inline std::string entropy_text(const CountResult& c) { return c.entropy ? io::format_double(*c.entropy) : "undefined"; }

// ---- subcommands

struct DiscretizeArgs {
  std::string domain;
  std::int64_t n = 0;
  std::string out;
};

inline void run_discretize(Context& ctx, const DiscretizeArgs& a) {
  const auto region = load_domain(ctx, a.domain);
  const auto d = discretize(region, a.n);
  std::size_t boundary = d.boundary_indices().size();
  ctx.out << "sites " << d.size() << "\nboundary " << boundary << "\nhausdorff " << to_string(hausdorff_gap(region, d)) << "\n";
  if (!a.out.empty()) {
    std::ostringstream s;
    io::write_points_csv(s, d, "config=" + ctx.manifest.config_hash());
    ctx.write_text(a.out, s.str());
  }
}

struct ExtendArgs {
  std::string domain;
  std::int64_t n = 0;
  std::string pins;
  std::string mode = "min";
  std::string out;
};

inline void run_extend(Context& ctx, const ExtendArgs& a) {
  auto d = make_domain(discretize(load_domain(ctx, a.domain), a.n));
  ctx.read_input(a.pins);
  std::ifstream in(a.pins);
  if (!in) throw std::invalid_argument("cannot open " + a.pins);
  const auto p = PartialHeightFunction::from_pins(d, io::read_pins_csv(in, d->dim()));
  const auto h = a.mode == "max" ? extend_max(p) : extend_min(p);
  std::ostringstream s;
  write_field_csv(s, h, "extend-" + a.mode + " config=" + ctx.manifest.config_hash());
  if (a.out.empty()) ctx.out << s.str();
  else ctx.write_text(a.out, s.str());
  ctx.out << "extensions " << count_extensions(p, ctx.count_options()).count << "\n";
}

struct CountArgs {
  std::string domain;
  std::int64_t n = 0;
  std::string boundary;
  std::string delta;
  bool ball = false;
  std::string out;
};

inline void run_count(Context& ctx, const CountArgs& a) {
  auto d = make_domain(discretize(load_domain(ctx, a.domain), a.n));
  const auto p = load_profile(ctx, a.boundary);
  CountResult c;
  std::string mode;
  if (a.ball) {
    if (a.delta.empty()) throw std::invalid_argument("--ball needs --delta");
    c = count_ball(*d, p, parse_rational(a.delta), ctx.count_options());
    mode = "ball";
  } else if (!a.delta.empty()) {
    c = count_delta_boundary(round_profile_on_boundary(p, d), parse_rational(a.delta), ctx.count_options());
    mode = "delta-boundary";
  } else {
    c = count_exact_boundary(round_profile_on_boundary(p, d), ctx.count_options());
    mode = "exact-boundary";
  }
  ctx.out << "count " << c.count << "\nentropy " << entropy_text(c) << "\n";
  if (!a.out.empty()) {
    json j{{"schema", io::schema}, {"config_hash", ctx.manifest.config_hash()}, {"mode", mode}, {"count", c.count.str()}, {"sites", c.site_count}};
    j["entropy"] = c.entropy ? json(*c.entropy) : json(nullptr);
    ctx.write_text(a.out, j.dump(2) + "\n");
  }
}

struct SurfaceTensionArgs {
  int m = 1;
  int grid = 9;
  std::vector<std::int64_t> n;
  std::string out;
  std::string cache;
};

inline void run_surface_tension(Context& ctx, const SurfaceTensionArgs& a) {
  const auto table = build_surface_tension_table(a.m, a.grid, a.n, ctx.count_options());
  std::ostringstream s;
  io::write_table_csv(s, table, "config=" + ctx.manifest.config_hash());
  if (a.out.empty()) ctx.out << s.str();
  else ctx.write_text(a.out, s.str());
  if (!a.cache.empty()) ctx.write_text(a.cache, io::table_cache_text(table));
}

inline json report_to_json(const ApproximationReport& r) {
  return {{"ell", to_string(r.ell)},
          {"eps", to_string(r.eps)},
          {"simplices", r.simplices},
          {"uncovered_volume", r.uncovered_volume},
          {"hausdorff", r.hausdorff},
          {"max_value_error", r.max_value_error},
          {"value_threshold", r.value_threshold},
          {"bad_gradient_fraction", r.bad_gradient_fraction},
          {"volume_ok", r.volume_ok},
          {"value_ok", r.value_ok},
          {"gradient_ok", r.gradient_ok},
          {"passed", r.passed()}};
}

struct ApproximateArgs {
  std::string domain;
  std::string profile;
  std::string eps;
  std::string ell;
  std::string out;
  std::string mesh_out;
};

inline void run_approximate(Context& ctx, const ApproximateArgs& a) {
  const auto region = load_domain(ctx, a.domain);
  const auto p = load_profile(ctx, a.profile);
  const Rational eps = parse_rational(a.eps);
  std::vector<Rational> scales = a.ell.empty() ? default_scales() : std::vector<Rational>{parse_rational(a.ell)};
  const auto sweep = rademacher_sweep(p, region, eps, scales);
  json j{{"schema", io::schema}, {"config_hash", ctx.manifest.config_hash()}};
  j["reports"] = json::array();
  for (const auto& r : sweep.reports) j["reports"].push_back(report_to_json(r));
  j["skipped"] = json::array();
  for (const auto& s : sweep.skipped) j["skipped"].push_back(to_string(s));
  j["verdict"] = sweep.inconclusive() ? "inconclusive" : "pass";
  if (sweep.accepted) j["accepted_ell"] = to_string(sweep.accepted->report.ell);
  ctx.out << "verdict " << j["verdict"].get<std::string>();
  if (sweep.accepted) ctx.out << " ell " << to_string(sweep.accepted->report.ell);
  ctx.out << "\n";
  if (!a.out.empty()) ctx.write_text(a.out, j.dump(2) + "\n");
  if (!a.mesh_out.empty()) {
    if (!sweep.accepted) throw Error(ErrorKind::NoSimplexFits, "no accepted approximation to write");
    ctx.write_text(a.mesh_out, io::pwa_to_json(*sweep.accepted->h).dump(2) + "\n");
  }
}

struct MinimizeArgs {
  std::string domain;
  std::string boundary;
  std::string ell;
  std::string model = "closed";
  int max_iterations = 20000;
  std::string out;
};

inline void run_minimize(Context& ctx, const MinimizeArgs& a) {
  const auto region = load_domain(ctx, a.domain);
  const auto b = load_profile(ctx, a.boundary);
  const auto model = load_model(ctx, json(a.model));
  MinimizeOptions opts;
  opts.max_iterations = a.max_iterations;
  const auto res = minimize_macro_entropy(region, b, parse_rational(a.ell), model, opts);
  ctx.out << "entropy " << io::format_double(res.entropy) << "\niterations " << res.iterations << "\nconverged " << (res.converged ? "yes" : "no")
          << "\n";
  if (!a.out.empty()) {
    std::ostringstream s;
    s << ctx.header("minimizer") << " entropy=" << io::format_double(res.entropy) << "\n";
    const auto& mesh = res.h->mesh();
    for (int i = 0; i < mesh.dim(); ++i) s << "x" << (i + 1) << ",";
    s << "h\n";
    for (std::size_t v = 0; v < mesh.vertices().size(); ++v) {
      for (const auto& c : mesh.vertex_coordinates(v)) s << to_string(c) << ",";
      s << io::format_double(res.h->values()[v]) << "\n";
    }
    ctx.write_text(a.out, s.str());
  }
}

struct SampleArgs {
  std::string domain;
  std::int64_t n = 0;
  std::string boundary;
  std::string delta;
  std::string mode = "exact";
  std::uint64_t seed = 0;
  std::size_t sweeps = 100;
  std::string out;
  std::string ppm;
};

inline void run_sample(Context& ctx, const SampleArgs& a) {
  auto d = make_domain(discretize(load_domain(ctx, a.domain), a.n));
  const auto hb = round_profile_on_boundary(load_profile(ctx, a.boundary), d);
  const auto c = a.delta.empty() ? exact_boundary_constraint(hb) : delta_boundary_constraint(hb, parse_rational(a.delta));
  ctx.manifest.seed = a.seed;
  const auto h = a.mode == "glauber" ? sample_glauber(d, c, a.seed, a.sweeps, ctx.threads) : sample_exact(d, c, a.seed, ctx.count_options());
  std::ostringstream meta;
  meta << "mode=" << a.mode << (a.mode == "glauber" ? " (approximate, mixing not certified) sweeps=" + std::to_string(a.sweeps) : std::string())
       << " seed=" << a.seed << " rng=" << CounterRng::algorithm << " config=" << ctx.manifest.config_hash();
  std::ostringstream s;
  write_field_csv(s, h, meta.str());
  if (a.out.empty()) ctx.out << s.str();
  else ctx.write_text(a.out, s.str());
  if (!a.ppm.empty()) {
    std::ostringstream img;
    write_field_ppm(img, h);
    ctx.write_text(a.ppm, img.str());
  }
}

struct VerifyArgs {
  std::string claim;
  std::string config;
  std::string out;
};

inline VerificationReport verify_profile(Context& ctx, const json& cfg) {
  const auto region = io::domain_from_json(cfg.at("domain"));
  const auto p = io::profile_from_json(cfg.at("profile"));
  const auto model = load_model(ctx, cfg.value("model", json("closed")));
  const Rational eps = io::rational_from_json(cfg.at("eps"));
  const double tol = cfg.value("tolerance", 0.15);
  if (cfg.value("mode", std::string("simplicial")) == "general")
    return check_general_profile(p, region, model, io::rational_from_json(cfg.at("delta")), cfg.at("n").get<std::int64_t>(), eps, tol,
                                 ctx.count_options());
  const Rational ell = cfg.contains("ell") ? io::rational_from_json(cfg.at("ell")) : Rational(1);
  auto mesh = std::make_shared<const SimplexDomain>(simplices_inside(region, ell));
  return check_simplicial_profile(interpolate_on_mesh(p, mesh), model, eps, cfg.at("n").get<std::vector<std::int64_t>>(), tol, ctx.count_options());
}

inline VerificationReport verify_ldp(Context& ctx, const json& cfg) {
  std::vector<ProfileBall> balls;
  for (const auto& b : cfg.at("balls"))
    balls.push_back({io::profile_from_json(b.at("centre")), io::rational_from_json(b.at("radius")), b.value("closed", false)});
  auto out = check_ldp(io::domain_from_json(cfg.at("domain")), io::profile_from_json(cfg.at("boundary")), load_model(ctx, cfg.value("model", json("closed"))),
                       io::rational_from_json(cfg.at("delta")), cfg.at("n").get<std::int64_t>(), io::rational_from_json(cfg.at("ell")), balls,
                       ctx.count_options());
  out.report.notes.push_back("infimum E = " + io::format_double(out.infimum));
  return out.report;
}

inline void run_verify(Context& ctx, const VerifyArgs& a) {
  const json cfg = load_json(ctx, a.config);
  ctx.manifest.config["resolved"] = cfg;
  VerificationReport r;
  if (a.claim == "profile") r = verify_profile(ctx, cfg);
  else if (a.claim == "variational")
    r = check_variational(io::domain_from_json(cfg.at("domain")), io::profile_from_json(cfg.at("boundary")), load_model(ctx, cfg.value("model", json("closed"))),
                          io::rational_from_json(cfg.at("delta")), cfg.at("n").get<std::int64_t>(), io::rational_from_json(cfg.at("ell")),
                          cfg.value("tolerance", 0.1), ctx.count_options());
  else if (a.claim == "ldp") r = verify_ldp(ctx, cfg);
  else r = check_robustness_lemmas(cfg.value("seed", std::uint64_t{1}), ctx.count_options());
  json j = r.to_json();
  j["schema"] = io::schema;
  j["config_hash"] = ctx.manifest.config_hash();
  ctx.out << "verdict " << j["verdict"].get<std::string>() << "\n";
  if (a.out.empty()) ctx.out << j.dump(2) << "\n";
  else ctx.write_text(a.out, j.dump(2) + "\n");
}

// ---- entry point

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"heightlab: height functions Z^m -> Z, counting, surface tension, simplicial approximation and verification", "heightlab"};
  app.footer(formats_help);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  unsigned threads = 0;
  std::string manifest_path;
  app.add_option("--threads", threads, "worker threads (0 = available parallelism); results do not depend on it");
  app.add_option("--manifest", manifest_path, "manifest path (default <out>.manifest.json when --out is given)");

  DiscretizeArgs dis;
  auto* c_dis = app.add_subcommand("discretize", "lattice points of R_n; CSV z1..zm,is_boundary");
  c_dis->add_option("--domain", dis.domain, "domain JSON")->required();
  c_dis->add_option("--n", dis.n, "lattice scale")->required()->check(CLI::PositiveNumber);
  c_dis->add_option("--out", dis.out, "points CSV");

  ExtendArgs ext;
  auto* c_ext = app.add_subcommand("extend", "Kirszbraun min/max extension of pinned values; CSV z1..zm,h");
  c_ext->add_option("--domain", ext.domain, "domain JSON")->required();
  c_ext->add_option("--n", ext.n, "lattice scale")->required()->check(CLI::PositiveNumber);
  c_ext->add_option("--pins", ext.pins, "pins CSV z1..zm,h")->required();
  c_ext->add_option("--mode", ext.mode, "min or max")->check(CLI::IsMember({"min", "max"}));
  c_ext->add_option("--out", ext.out, "field CSV");

  CountArgs cnt;
  auto* c_cnt = app.add_subcommand("count", "exact count and entropy of the exact-boundary, delta-boundary or ball set");
  c_cnt->add_option("--domain", cnt.domain, "domain JSON")->required();
  c_cnt->add_option("--n", cnt.n, "lattice scale")->required()->check(CLI::PositiveNumber);
  c_cnt->add_option("--boundary", cnt.boundary, "profile (affine:s1,..,sm,b or JSON file)")->required();
  c_cnt->add_option("--delta", cnt.delta, "delta-boundary radius (rational)");
  c_cnt->add_flag("--ball", cnt.ball, "count the sup-norm ball of radius --delta around the profile instead");
  c_cnt->add_option("--out", cnt.out, "result JSON");

  SurfaceTensionArgs st;
  auto* c_st = app.add_subcommand("surface-tension", "ent_n on a slope grid with extrapolation; CSV m,s1..sm,n,ent");
  c_st->add_option("--m", st.m, "dimension")->check(CLI::Range(1, 3));
  c_st->add_option("--grid", st.grid, "grid points per axis on [-1,1]")->check(CLI::Range(2, 65));
  c_st->add_option("--n", st.n, "cube sizes, comma separated")->required()->delimiter(',');
  c_st->add_option("--out", st.out, "table CSV");
  c_st->add_option("--cache", st.cache, "also write a checksummed table cache");

  ApproximateArgs apx;
  auto* c_apx = app.add_subcommand("approximate", "simplicial approximation report (sweeps l in 1/2..1/16 unless --ell)");
  c_apx->add_option("--domain", apx.domain, "domain JSON")->required();
  c_apx->add_option("--profile", apx.profile, "profile (affine:... or JSON file)")->required();
  c_apx->add_option("--eps", apx.eps, "epsilon (rational)")->required();
  c_apx->add_option("--ell", apx.ell, "single mesh scale");
  c_apx->add_option("--out", apx.out, "report JSON");
  c_apx->add_option("--mesh-out", apx.mesh_out, "accepted piecewise-affine profile JSON");

  MinimizeArgs mn;
  auto* c_mn = app.add_subcommand("minimize", "minimize macroscopic entropy with pinned boundary; CSV x1..xm,h");
  c_mn->add_option("--domain", mn.domain, "domain JSON")->required();
  c_mn->add_option("--boundary", mn.boundary, "boundary profile")->required();
  c_mn->add_option("--ell", mn.ell, "mesh scale")->required();
  c_mn->add_option("--model", mn.model, "\"closed\" (1D) or a table cache path");
  c_mn->add_option("--max-iterations", mn.max_iterations, "iteration cap")->check(CLI::PositiveNumber);
  c_mn->add_option("--out", mn.out, "minimizer CSV");

  SampleArgs smp;
  auto* c_smp = app.add_subcommand("sample", "uniform height function (exact) or Glauber approximation; CSV z1..zm,h");
  c_smp->add_option("--domain", smp.domain, "domain JSON")->required();
  c_smp->add_option("--n", smp.n, "lattice scale")->required()->check(CLI::PositiveNumber);
  c_smp->add_option("--boundary", smp.boundary, "boundary profile")->required();
  c_smp->add_option("--delta", smp.delta, "delta-boundary radius; exact boundary if omitted");
  c_smp->add_option("--mode", smp.mode, "exact or glauber")->check(CLI::IsMember({"exact", "glauber"}));
  c_smp->add_option("--seed", smp.seed, "64-bit seed");
  c_smp->add_option("--sweeps", smp.sweeps, "Glauber sweeps")->check(CLI::PositiveNumber);
  c_smp->add_option("--out", smp.out, "field CSV");
  c_smp->add_option("--ppm", smp.ppm, "P6 heatmap (2D only)");

  VerifyArgs ver;
  auto* c_ver = app.add_subcommand("verify", "verification reports: profile | variational | ldp | lemmas");
  c_ver->add_option("claim", ver.claim, "which check")->required()->check(CLI::IsMember({"profile", "variational", "ldp", "lemmas"}));
  c_ver->add_option("--config", ver.config, "config JSON")->required();
  c_ver->add_option("--out", ver.out, "report JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return Usage;
  }

  auto* sub = app.get_subcommands().front();
  Context ctx{out, err, threads, manifest_path, {}};
  ctx.manifest.subcommand = sub->get_name();
  ctx.manifest.config = json::object();
  // output paths are not configuration: the hash must not depend on where results go
  static const std::vector<std::string> outputs{"--out", "--ppm", "--cache", "--mesh-out"};
  for (const auto* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || std::find(outputs.begin(), outputs.end(), name) != outputs.end()) continue;
    if (opt->count() == 0) {
      if (!opt->get_default_str().empty()) ctx.manifest.config[name] = opt->get_default_str();
      continue;
    }
    auto results = opt->reduced_results();
    ctx.manifest.config[name] = results.size() == 1 ? json(results.front()) : json(results);
  }

  std::string primary_out;
  for (const auto* opt : sub->get_options())
    if (opt->get_name() == "--out" && opt->count() > 0) primary_out = opt->as<std::string>();

  try {
    if (sub == c_dis) run_discretize(ctx, dis);
    else if (sub == c_ext) run_extend(ctx, ext);
    else if (sub == c_cnt) run_count(ctx, cnt);
    else if (sub == c_st) run_surface_tension(ctx, st);
    else if (sub == c_apx) run_approximate(ctx, apx);
    else if (sub == c_mn) run_minimize(ctx, mn);
    else if (sub == c_smp) run_sample(ctx, smp);
    else run_verify(ctx, ver);
  } catch (const Error& e) {
    json j{{"schema", io::schema}, {"subcommand", ctx.manifest.subcommand}, {"error", {{"kind", std::string(error_name(e.kind()))}, {"message", e.what()}}}};
    err << j.dump() << "\n";
    if (!primary_out.empty()) io::write_file(primary_out, j.dump(2) + "\n");
    return DomainFailure;
  } catch (const std::exception& e) {
    // malformed input files and values are usage errors
    err << "usage error: " << e.what() << "\n";
    return Usage;
  }

  const std::string mpath = !ctx.manifest_path.empty() ? ctx.manifest_path : primary_out.empty() ? std::string() : primary_out + ".manifest.json";
  if (!mpath.empty()) io::write_file(mpath, ctx.manifest.to_json().dump(2) + "\n");
  return Ok;
}

}  // namespace heightlab::cli
