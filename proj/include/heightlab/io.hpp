#pragma once

// JSON and CSV formats, the surface tension table cache and run manifests.

#include "heightlab/enumeration.hpp"
#include "heightlab/height_function.hpp"
#include "heightlab/kirszbraun.hpp"
#include "heightlab/mesh.hpp"
#include "heightlab/profile.hpp"

#include "json.hpp"

#include <boost/crc.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace heightlab::io {

using nlohmann::json;

inline constexpr const char* schema = "heightlab/1";
inline constexpr int table_version = 1;

inline std::uint32_t crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

inline std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  if (x == 0) x = 0;  // no "-0"
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  s = detail::trim(s);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double x = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) throw std::invalid_argument("bad number: " + std::string(s));
  return x;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// ---- rationals

inline Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number_float()) return parse_rational(format_double(j.get<double>()));
  throw std::invalid_argument("expected a rational, got " + j.dump());
}

inline RationalVector rationals_from_json(const json& j) {
  RationalVector out;
  for (const auto& x : j) out.push_back(rational_from_json(x));
  return out;
}

inline json rationals_to_json(const RationalVector& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

// ---- simplex domains

inline SimplexId simplex_from_json(const json& j, const Rational& scale) {
  SimplexId id;
  id.base = j.at("v").get<LatticePoint>();
  for (int p : j.at("perm").get<std::vector<int>>()) id.perm.push_back(p - 1);  // 1-based on disk
  id.scale = scale;
  return id;
}

inline json simplex_to_json(const SimplexId& id) {
  std::vector<int> perm;
  for (int p : id.perm) perm.push_back(p + 1);
  return {{"v", id.base}, {"perm", perm}};
}

inline SimplexDomain simplex_domain_from_json(const json& j) {
  const Rational scale = rational_from_json(j.at("scale"));
  std::vector<SimplexId> simplices;
  for (const auto& s : j.at("simplices")) simplices.push_back(simplex_from_json(s, scale));
  if (simplices.empty()) throw Error(ErrorKind::NoSimplexFits, "simplex domain without simplices");
  const int dim = simplices.front().dim();
  return SimplexDomain::build(dim, scale, std::move(simplices));
}

inline json simplex_domain_to_json(const SimplexDomain& d) {
  json s = json::array();
  for (const auto& id : d.simplices()) s.push_back(simplex_to_json(id));
  return {{"scale", to_string(d.scale())}, {"simplices", s}};
}

// ---- continuum domains

inline ContinuumDomain domain_from_json(const json& j) {
  const json& shape = j.contains("shape") ? j.at("shape") : j;
  const std::string type = shape.at("type");
  if (type == "box") return ContinuumDomain::box(rationals_from_json(shape.at("lo")), rationals_from_json(shape.at("hi")));
  if (type == "unit_simplex") return ContinuumDomain::unit_simplex(j.at("dim").get<int>());
  if (type == "polytope") {
    std::vector<HalfSpace> hs;
    for (const auto& h : shape.at("halfspaces")) hs.push_back({rationals_from_json(h.at("a")), rational_from_json(h.at("b"))});
    const int dim = j.contains("dim") ? j.at("dim").get<int>() : (hs.empty() ? 0 : static_cast<int>(hs.front().a.size()));
    return ContinuumDomain::polytope(dim, std::move(hs));
  }
  if (type == "simplices") {
    const Rational scale = rational_from_json(shape.at("scale"));
    std::vector<SimplexId> simplices;
    for (const auto& s : shape.at("simplices")) simplices.push_back(simplex_from_json(s, scale));
    if (simplices.empty()) throw Error(ErrorKind::InvalidDomain, "simplex union without simplices");
    const int dim = simplices.front().dim();
    return ContinuumDomain::simplex_union(dim, std::move(simplices));
  }
  throw std::invalid_argument("unknown domain type " + type);
}

inline json domain_to_json(const ContinuumDomain& d) {
  json shape;
  if (const auto* b = std::get_if<Box>(&d.shape())) {
    shape = {{"type", "box"}, {"lo", rationals_to_json(b->lo)}, {"hi", rationals_to_json(b->hi)}};
  } else if (const auto* p = std::get_if<Polytope>(&d.shape())) {
    json hs = json::array();
    for (const auto& h : p->halfspaces) hs.push_back({{"a", rationals_to_json(h.a)}, {"b", to_string(h.b)}});
    shape = {{"type", "polytope"}, {"halfspaces", hs}};
  } else {
    const auto& u = std::get<SimplexUnion>(d.shape());
    json s = json::array();
    for (const auto& id : u.simplices) s.push_back(simplex_to_json(id));
    shape = {{"type", "simplices"}, {"scale", to_string(u.simplices.front().scale)}, {"simplices", s}};
  }
  return {{"dim", d.dim()}, {"shape", shape}};
}

/// "z1,...,zm,is_boundary" per point.
inline void write_points_csv(std::ostream& out, const DiscreteDomain& d, const std::string& meta = "") {
  out << "# " << schema << " points" << (meta.empty() ? "" : " " + meta) << "\n";
  for (int i = 0; i < d.dim(); ++i) out << "z" << (i + 1) << ",";
  out << "is_boundary\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (auto c : d.point(i)) out << c << ",";
    out << (d.is_boundary(i) ? 1 : 0) << "\n";
  }
}

// ---- profiles

inline LipschitzProfile profile_from_json(const json& j) {
  const std::string type = j.at("type");
  if (type == "affine") return LipschitzProfile::affine(rationals_from_json(j.at("s")), j.contains("b") ? rational_from_json(j.at("b")) : Rational(0));
  if (type == "tent") {
    TentProfile t{rational_from_json(j.at("apex")), rational_from_json(j.at("peak"))};
    if (j.contains("left")) t.left = rational_from_json(j.at("left"));
    if (j.contains("right")) t.right = rational_from_json(j.at("right"));
    return LipschitzProfile::tent(t);
  }
  if (type == "min") {
    MinCoordsProfile p;
    if (j.contains("dim")) p.dim = j.at("dim").get<int>();
    if (j.contains("offset")) p.offset = rational_from_json(j.at("offset"));
    return LipschitzProfile::min_coords(p);
  }
  if (type == "quadratic") {
    QuadraticProfile p;
    if (j.contains("dim")) p.dim = j.at("dim").get<int>();
    if (j.contains("coef")) p.coef = rational_from_json(j.at("coef"));
    if (j.contains("radius")) p.radius = rational_from_json(j.at("radius"));
    return LipschitzProfile::quadratic(p);
  }
  if (type == "pwa") {
    auto mesh = std::make_shared<const SimplexDomain>(simplex_domain_from_json(j.at("mesh")));
    std::vector<Rational> values(mesh->vertices().size());
    std::vector<bool> seen(values.size(), false);
    for (const auto& v : j.at("values")) {
      const RationalVector x = rationals_from_json(v.at("x"));
      LatticePoint z;
      for (const auto& c : x) {
        const Rational k = c / mesh->scale();
        if (!is_integer(k)) throw std::invalid_argument("pwa vertex is not on the mesh lattice");
        z.push_back(k.numerator());
      }
      auto idx = mesh->vertex_index(z);
      if (!idx) throw std::invalid_argument("pwa value given at a point that is not a mesh vertex");
      values[*idx] = rational_from_json(v.at("h"));
      seen[*idx] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw std::invalid_argument("pwa profile misses some vertex value");
    return LipschitzProfile::piecewise(std::make_shared<const ExactPiecewiseAffine>(mesh, std::move(values)));
  }
  throw std::invalid_argument("unknown profile type " + type);
}

inline json pwa_to_json(const ExactPiecewiseAffine& h) {
  json values = json::array();
  for (std::size_t v = 0; v < h.mesh().vertices().size(); ++v)
    values.push_back({{"x", rationals_to_json(h.mesh().vertex_coordinates(v))}, {"h", to_string(h.values()[v])}});
  return {{"type", "pwa"}, {"mesh", simplex_domain_to_json(h.mesh())}, {"values", values}};
}

inline json profile_to_json(const LipschitzProfile& p) {
  return std::visit(
      [](const auto& q) -> json {
        using P = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<P, AffineSpec>) return {{"type", "affine"}, {"s", rationals_to_json(q.s)}, {"b", to_string(q.b)}};
        else if constexpr (std::is_same_v<P, LipschitzProfile::PwaPtr>) return pwa_to_json(*q);
        else if constexpr (std::is_same_v<P, TentProfile>)
          return {{"type", "tent"}, {"apex", to_string(q.apex)}, {"peak", to_string(q.peak)}, {"left", to_string(q.left)}, {"right", to_string(q.right)}};
        else if constexpr (std::is_same_v<P, MinCoordsProfile>) return {{"type", "min"}, {"dim", q.dim}, {"offset", to_string(q.offset)}};
        else {
          json j = {{"type", "quadratic"}, {"dim", q.dim}, {"coef", to_string(q.coef)}};
          if (q.radius) j["radius"] = to_string(*q.radius);
          return j;
        }
      },
      p.variant());
}

/// "affine:s1,...,sm,b" or the path of a profile JSON file.
inline LipschitzProfile parse_profile_arg(const std::string& arg) {
  if (arg.rfind("affine:", 0) == 0) {
    auto v = parse_rational_list(std::string_view(arg).substr(7));
    if (v.size() < 2) throw std::invalid_argument("affine:<s1,...,sm,b> needs at least two numbers");
    Rational b = v.back();
    v.pop_back();
    return LipschitzProfile::affine(std::move(v), b);
  }
  return profile_from_json(json::parse(read_file(arg)));
}

// ---- height functions and pins

/// Rows "z1,...,zm,h"; '#' lines and a header starting with 'z' are skipped.
inline std::vector<std::pair<LatticePoint, std::int64_t>> read_pins_csv(std::istream& in, int dim) {
  std::vector<std::pair<LatticePoint, std::int64_t>> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == 'z') continue;
    std::vector<std::int64_t> nums;
    std::size_t start = 0;
    while (start <= t.size()) {
      auto end = t.find(',', start);
      if (end == std::string_view::npos) end = t.size();
      nums.push_back(detail::parse_int(detail::trim(t.substr(start, end - start))));
      start = end + 1;
    }
    if (static_cast<int>(nums.size()) != dim + 1) throw std::invalid_argument("pin row needs " + std::to_string(dim + 1) + " columns: " + line);
    std::int64_t h = nums.back();
    nums.pop_back();
    out.emplace_back(std::move(nums), h);
  }
  return out;
}

inline HeightFunction read_height_csv(std::istream& in, DomainPtr d) {
  HeightFunction h{d, std::vector<std::int64_t>(d->size())};
  std::vector<bool> seen(d->size(), false);
  for (auto& [z, v] : read_pins_csv(in, d->dim())) {
    auto i = d->require_index(z);
    h.values[i] = v;
    seen[i] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw std::invalid_argument("height CSV misses some site");
  return h;
}

// ---- surface tension tables

/// Data rows "m,s1,...,sm,n,ent_n" plus one "m,s...,inf,ent_extrapolated" row per slope.
inline void write_table_csv(std::ostream& out, const SurfaceTensionModel& model, const std::string& meta = "") {
  out << "# " << schema << " surface-tension" << (meta.empty() ? "" : " " + meta) << "\n";
  out << "m,";
  for (int i = 0; i < model.dim(); ++i) out << "s" << (i + 1) << ",";
  out << "n,ent\n";
  for (const auto& e : model.entries()) {
    std::string prefix = std::to_string(model.dim()) + ",";
    for (const auto& s : e.s) prefix += to_string(s) + ",";
    for (std::size_t k = 0; k < model.n_list().size(); ++k) out << prefix << model.n_list()[k] << "," << format_double(e.ent_n[k]) << "\n";
    out << prefix << "inf," << format_double(e.extrapolated) << "\n";
  }
}

inline std::string table_cache_text(const SurfaceTensionModel& model) {
  std::ostringstream body;
  body << "# " << schema << " table-cache\n";
  body << "version " << table_version << "\n";
  body << "dim " << model.dim() << "\n";
  body << "grid " << model.grid() << "\n";
  body << "n";
  for (auto n : model.n_list()) body << " " << n;
  body << "\n";
  for (const auto& e : model.entries()) {
    body << "entry";
    for (const auto& s : e.s) body << " " << to_string(s);
    body << " |";
    for (double v : e.ent_n) body << " " << format_double(v);
    body << " | " << format_double(e.extrapolated) << "\n";
  }
  std::string text = body.str();
  return text + "checksum " + hex32(crc32(text)) + "\n";
}

inline void save_table(const std::string& path, const SurfaceTensionModel& model) {
  if (model.kind() != SurfaceTensionModel::Kind::Table) throw std::invalid_argument("only tabulated models are cached");
  write_file(path, table_cache_text(model));
}

inline SurfaceTensionModel parse_table_cache(const std::string& text) {
  auto corrupt = [](const std::string& why) { return Error(ErrorKind::CorruptTable, why); };
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(std::string("# ") + schema, 0) != 0) throw corrupt("missing table header");
  if (!std::getline(in, line) || line.rfind("version ", 0) != 0) throw corrupt("missing version line");
  if (line != "version " + std::to_string(table_version)) throw corrupt("table version " + line.substr(8) + " differs from supported version " + std::to_string(table_version));
  const auto pos = text.rfind("checksum ");
  if (pos == std::string::npos) throw corrupt("missing checksum (truncated file?)");
  const std::string body = text.substr(0, pos);
  std::string stated = text.substr(pos + 9);
  while (!stated.empty() && (stated.back() == '\n' || stated.back() == '\r')) stated.pop_back();
  if (stated != hex32(crc32(body))) throw corrupt("checksum mismatch");
  try {
    int dim = 0, grid = 0;
    std::vector<std::int64_t> ns;
    std::vector<SurfaceTensionModel::Entry> entries;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string tag;
      ls >> tag;
      if (tag == "dim") ls >> dim;
      else if (tag == "grid") ls >> grid;
      else if (tag == "n") {
        std::int64_t n;
        while (ls >> n) ns.push_back(n);
      } else if (tag == "entry") {
        SurfaceTensionModel::Entry e;
        std::string tok;
        while (ls >> tok && tok != "|") e.s.push_back(parse_rational(tok));
        while (ls >> tok && tok != "|") e.ent_n.push_back(parse_double(tok));
        ls >> tok;
        e.extrapolated = parse_double(tok);
        if (static_cast<int>(e.s.size()) != dim || e.ent_n.size() != ns.size()) throw corrupt("malformed entry");
        entries.push_back(std::move(e));
      } else if (tag == "checksum") {
        break;
      }
    }
    return SurfaceTensionModel::from_table(dim, grid, std::move(ns), std::move(entries));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw corrupt(e.what());
  }
}

inline SurfaceTensionModel load_table(const std::string& path) { return parse_table_cache(read_file(path)); }

// ---- manifests

struct Manifest {
  std::string subcommand;
  json config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  std::string config_hash() const { return hex32(crc32(config.dump())); }

  json to_json() const {
    json j;
    j["schema"] = schema;
    j["version"] = "1.0.0";
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["config_hash"] = config_hash();
    if (seed) {
      j["seed"] = *seed;
      j["rng"] = "splitmix64-counter/1";
    }
    auto hashes = [](const std::vector<std::string>& paths) {
      json h = json::object();
      for (const auto& p : paths) h[p] = hex32(crc32(read_file(p)));
      return h;
    };
    j["inputs"] = hashes(inputs);
    j["outputs"] = hashes(outputs);
    return j;
  }
};

}  // namespace heightlab::io
