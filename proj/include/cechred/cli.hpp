#pragma once

// Problem files, canonical JSON, and the command dispatcher behind the
// cechred-cli executable.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cechred/abelian.hpp"
#include "cechred/derham.hpp"
#include "cechred/dimred.hpp"
#include "cechred/errors.hpp"
#include "cechred/gysin.hpp"
#include "cechred/nerve.hpp"
#include "cechred/obstruction.hpp"

namespace cechred::cli {

using json = nlohmann::json;
using SimplexValues = std::map<Simplex, RatVector>;

// ---------------------------------------------------------------------------
// Problem files

struct DerhamSpec {
  int m = 0;
  std::vector<RatVector> F2;                         // n rows of C(m,2)
  std::optional<std::vector<RatVector>> structure;   // m rows of C(m,2)
};

struct WeylSpec {
  std::size_t N = 2;
  std::map<Simplex, IntVector> t;     // integer 2-vectors by edge
  std::map<Simplex, Rational> theta;  // phases by edge
};

struct MatrixSpec {
  std::vector<std::size_t> perm;
  RatVector phase;
};

struct UnitarySpec {
  std::vector<std::vector<MatrixSpec>> vertex;
  std::map<Simplex, MatrixSpec> edge;
};

struct Problem {
  int vertices = 0;
  std::vector<Simplex> maximal;
  Nerve nerve;
  std::size_t n = 1;
  SimplexValues F;                  // nonzero entries only
  std::optional<SimplexValues> s;   // nonzero entries only
  std::optional<RatVector> g;       // upper pairs
  std::optional<Integer> modulus;
  std::optional<DerhamSpec> derham;
  std::optional<WeylSpec> weyl;
  std::optional<UnitarySpec> unitary;
};

inline Rational parse_rational(const json& j, const std::string& where) {
  Rational q;
  try {
    if (j.is_number_integer()) {
      q = Rational(Integer(std::to_string(j.get<long long>())));
    } else if (j.is_string()) {
      std::string text = j.get<std::string>();
      if (text.empty() || text.find_first_not_of("+-0123456789/ ") != std::string::npos) throw std::invalid_argument(text);
      if (!text.empty() && text[0] == '+') text.erase(0, 1);
      if (q.set_str(text, 10) != 0) throw std::invalid_argument(text);
      if (q.get_den() == 0) throw std::invalid_argument(text);
      q.canonicalize();
    } else {
      throw std::invalid_argument("type");
    }
  } catch (const std::invalid_argument&) {
    throw InputError("cli: " + where + ": expected an integer or a \"p/q\" string, got " + j.dump());
  }
  return q;
}

inline std::string rational_text(const Rational& q) { return q.get_str(); }

inline json integer_json(const Integer& z) {
  if (z.fits_slong_p()) return json(z.get_si());
  return json(z.get_str());
}

inline Simplex parse_simplex_key(const std::string& key, std::size_t expected_size, const std::string& where) {
  Simplex s;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      s.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InputError("cli: " + where + ": bad simplex key \"" + key + "\"");
    }
  }
  if (s.size() != expected_size)
    throw InputError("cli: " + where + ": simplex \"" + key + "\" should have " + std::to_string(expected_size) +
                     " vertices");
  if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end())
    throw InputError("cli: " + where + ": simplex \"" + key + "\" must be strictly increasing");
  return s;
}

inline std::string simplex_key(const Simplex& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out;
}

inline RatVector parse_vector(const json& j, std::size_t n, const std::string& where) {
  RatVector v;
  if (j.is_array()) {
    for (const auto& x : j) v.push_back(parse_rational(x, where));
  } else {
    v.push_back(parse_rational(j, where));
  }
  if (v.size() != n) throw InputError("cli: " + where + ": expected " + std::to_string(n) + " entries");
  return v;
}

inline SimplexValues parse_simplex_values(const Nerve& nerve, const json& j, int dim, std::size_t n,
                                          const std::string& where) {
  if (!j.is_object()) throw InputError("cli: " + where + " must be an object keyed by simplices");
  SimplexValues out;
  for (const auto& [key, val] : j.items()) {
    Simplex s = parse_simplex_key(key, static_cast<std::size_t>(dim) + 1, where);
    if (!nerve.index_of(s)) throw InputError("cli: " + where + ": simplex " + key + " is not in the nerve");
    RatVector v = parse_vector(val, n, where + "[" + key + "]");
    if (!abelian::is_zero_vector(v)) out[s] = std::move(v);
  }
  return out;
}

inline std::vector<RatVector> parse_rows(const json& j, std::size_t width, const std::string& where) {
  if (!j.is_array()) throw InputError("cli: " + where + " must be an array of rows");
  std::vector<RatVector> rows;
  for (const auto& r : j) rows.push_back(parse_vector(r, width, where));
  return rows;
}

inline MatrixSpec parse_matrix(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("perm") || !j.contains("phase"))
    throw InputError("cli: " + where + " needs \"perm\" and \"phase\"");
  MatrixSpec m;
  for (const auto& p : j.at("perm")) {
    if (!p.is_number_integer() || p.get<long long>() < 0) throw InputError("cli: " + where + ": bad permutation entry");
    m.perm.push_back(p.get<std::size_t>());
  }
  m.phase = parse_vector(j.at("phase"), m.perm.size(), where + ".phase");
  return m;
}

inline void require_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError("cli: unknown key \"" + key + "\" in " + where);
}

inline Problem parse_problem(const json& j) {
  if (!j.is_object()) throw InputError("cli: problem must be a JSON object");
  require_keys(j, {"nerve", "n", "F", "s", "g", "modulus", "derham", "weyl", "unitary"}, "problem");
  if (!j.contains("nerve")) throw InputError("cli: problem needs a \"nerve\"");
  Problem p;
  const json& jn = j.at("nerve");
  if (jn.contains("fixture")) {
    require_keys(jn, {"fixture"}, "nerve");
    p.nerve = fixture(jn.at("fixture").get<std::string>()).nerve;
  } else {
    require_keys(jn, {"vertices", "maximal"}, "nerve");
    if (!jn.contains("vertices") || !jn.at("vertices").is_number_integer())
      throw InputError("cli: nerve needs an integer \"vertices\"");
    std::vector<Simplex> maximal;
    for (const auto& s : jn.value("maximal", json::array())) {
      Simplex simplex;
      for (const auto& v : s) {
        if (!v.is_number_integer()) throw InputError("cli: nerve.maximal entries must be integers");
        simplex.push_back(v.get<int>());
      }
      std::sort(simplex.begin(), simplex.end());
      maximal.push_back(simplex);
    }
    p.nerve = Nerve::from_maximal(jn.at("vertices").get<int>(), maximal);
  }
  p.vertices = p.nerve.vertex_count();
  p.maximal = p.nerve.maximal_simplices();
  std::sort(p.maximal.begin(), p.maximal.end());

  if (j.contains("n")) {
    if (!j.at("n").is_number_integer() || j.at("n").get<long long>() < 1) throw InputError("cli: n must be >= 1");
    p.n = j.at("n").get<std::size_t>();
  }
  if (j.contains("F")) p.F = parse_simplex_values(p.nerve, j.at("F"), 2, p.n, "F");
  for (const auto& [sim, v] : p.F)
    for (const auto& x : v)
      if (x.get_den() != 1) throw InputError("cli: F[" + simplex_key(sim) + "] must be integral");
  if (j.contains("s")) p.s = parse_simplex_values(p.nerve, j.at("s"), 1, p.n, "s");
  if (j.contains("g")) {
    const json& jg = j.at("g");
    p.g = jg.is_array() && jg.empty() ? RatVector{} : parse_vector(jg, pair_count(p.n), "g");
    if (p.g->size() != pair_count(p.n)) throw InputError("cli: g needs n(n-1)/2 entries");
  }
  if (j.contains("modulus")) {
    Rational N = parse_rational(j.at("modulus"), "modulus");
    if (N.get_den() != 1 || N < 1) throw InputError("cli: modulus must be a positive integer");
    p.modulus = N.get_num();
  }
  if (j.contains("derham")) {
    const json& jd = j.at("derham");
    require_keys(jd, {"m", "F2", "structure"}, "derham");
    DerhamSpec d;
    if (!jd.contains("m") || !jd.at("m").is_number_integer() || jd.at("m").get<int>() < 0)
      throw InputError("cli: derham.m must be a non-negative integer");
    d.m = jd.at("m").get<int>();
    d.F2 = parse_rows(jd.at("F2"), derham::binom(d.m, 2), "derham.F2");
    if (jd.contains("structure")) {
      d.structure = parse_rows(jd.at("structure"), derham::binom(d.m, 2), "derham.structure");
      if (d.structure->size() != static_cast<std::size_t>(d.m)) throw InputError("cli: derham.structure needs m rows");
    }
    p.derham = std::move(d);
  }
  if (j.contains("weyl")) {
    const json& jw = j.at("weyl");
    require_keys(jw, {"N", "t", "theta"}, "weyl");
    if (p.n != 2) throw InputError("cli: weyl data needs n = 2");
    WeylSpec w;
    w.N = jw.at("N").get<std::size_t>();
    for (const auto& [sim, v] : parse_simplex_values(p.nerve, jw.value("t", json::object()), 1, 2, "weyl.t")) {
      IntVector z;
      for (const auto& x : v) {
        if (x.get_den() != 1) throw InputError("cli: weyl.t must be integral");
        z.push_back(x.get_num());
      }
      w.t[sim] = z;
    }
    for (const auto& [sim, v] : parse_simplex_values(p.nerve, jw.value("theta", json::object()), 1, 1, "weyl.theta"))
      w.theta[sim] = frac(v[0]);
    std::erase_if(w.theta, [](const auto& kv) { return kv.second == 0; });
    // The Weyl gluing fixes s = t.
    SimplexValues st;
    for (const auto& [sim, z] : w.t) st[sim] = abelian::to_rational(z);
    if (p.s && *p.s != st) throw InputError("cli: weyl data fixes s = t, but \"s\" differs");
    p.s = std::move(st);
    p.weyl = std::move(w);
  }
  if (j.contains("unitary")) {
    const json& ju = j.at("unitary");
    require_keys(ju, {"vertex", "edge"}, "unitary");
    UnitarySpec u;
    for (const auto& fam : ju.at("vertex")) {
      std::vector<MatrixSpec> row;
      for (const auto& m : fam) row.push_back(parse_matrix(m, "unitary.vertex"));
      u.vertex.push_back(std::move(row));
    }
    for (const auto& [key, m] : ju.at("edge").items()) {
      Simplex e = parse_simplex_key(key, 2, "unitary.edge");
      if (!p.nerve.index_of(e)) throw InputError("cli: unitary.edge " + key + " is not in the nerve");
      u.edge[e] = parse_matrix(m, "unitary.edge[" + key + "]");
    }
    p.unitary = std::move(u);
  }
  return p;
}

inline json values_json(const SimplexValues& v) {
  json out = json::object();
  for (const auto& [s, vals] : v) {
    json arr = json::array();
    for (const auto& x : vals) arr.push_back(rational_text(x));
    out[simplex_key(s)] = arr;
  }
  return out;
}

inline json matrix_json(const MatrixSpec& m) {
  json ph = json::array();
  for (const auto& x : m.phase) ph.push_back(rational_text(frac(x)));
  return {{"perm", m.perm}, {"phase", ph}};
}

inline json rows_json(const std::vector<RatVector>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json a = json::array();
    for (const auto& x : r) a.push_back(rational_text(x));
    out.push_back(a);
  }
  return out;
}

/// Canonical form: expanded nerve, sorted keys, zero entries dropped,
/// rationals in lowest terms.
inline json canonical_json(const Problem& p) {
  json j;
  json maximal = json::array();
  for (const auto& s : p.maximal) maximal.push_back(s);
  j["nerve"] = {{"vertices", p.vertices}, {"maximal", maximal}};
  j["n"] = p.n;
  j["F"] = values_json(p.F);
  if (p.s) j["s"] = values_json(*p.s);
  if (p.g) {
    json g = json::array();
    for (const auto& x : *p.g) g.push_back(rational_text(x));
    j["g"] = g;
  }
  if (p.modulus) j["modulus"] = integer_json(*p.modulus);
  if (p.derham) {
    json d = {{"m", p.derham->m}, {"F2", rows_json(p.derham->F2)}};
    if (p.derham->structure) d["structure"] = rows_json(*p.derham->structure);
    j["derham"] = d;
  }
  if (p.weyl) {
    json t = json::object(), th = json::object();
    for (const auto& [s, v] : p.weyl->t)
      if (!abelian::is_zero_vector(v)) t[simplex_key(s)] = {integer_json(v[0]), integer_json(v[1])};
    for (const auto& [s, x] : p.weyl->theta) th[simplex_key(s)] = rational_text(x);
    j["weyl"] = {{"N", p.weyl->N}, {"t", t}, {"theta", th}};
  }
  if (p.unitary) {
    json vertex = json::array(), edge = json::object();
    for (const auto& fam : p.unitary->vertex) {
      json row = json::array();
      for (const auto& m : fam) row.push_back(matrix_json(m));
      vertex.push_back(row);
    }
    for (const auto& [s, m] : p.unitary->edge) edge[simplex_key(s)] = matrix_json(m);
    j["unitary"] = {{"vertex", vertex}, {"edge", edge}};
  }
  return j;
}

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string digest(const Problem& p) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json(p).dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Building library objects from a problem

inline Cochain cochain_from(const Nerve& nerve, int degree, const SimplexValues& vals, const CoefficientSystem& sys) {
  Cochain c = Cochain::zero(nerve, degree, sys);
  const std::size_t w = sys.width();
  for (const auto& [s, v] : vals) {
    const std::size_t idx = nerve.at(s);
    for (std::size_t l = 0; l < w; ++l) c.values[idx * w + l] = v[l];
  }
  c.normalize();
  return c;
}

inline TwistData twist_of(const Problem& p) {
  Cochain F = cochain_from(p.nerve, 2, p.F, CoefficientSystem::vector(Ring::Z, p.n));
  if (!is_cocycle(p.nerve, F)) throw InputError("cli: F is not a cocycle");
  if (!p.s) return TwistData::from_F(p.nerve, F);
  TwistData tw = TwistData::from_s(p.nerve, cochain_from(p.nerve, 1, *p.s, CoefficientSystem::vector(Ring::Q, p.n)));
  if (!p.F.empty() && tw.F.values != F.values) throw InputError("cli: F differs from ds");
  return tw;
}

inline derham::InvariantModel model_of(const DerhamSpec& d) {
  derham::CurvatureMatrix F2 = derham::CurvatureMatrix::from_rows(d.m, d.F2);
  if (d.structure) return derham::InvariantModel::lie(*d.structure, F2);
  return derham::InvariantModel::torus(F2);
}

inline obstruction::UnitaryCocycleData unitary_of(const Problem& p) {
  using obstruction::MonomialMatrix;
  if (p.weyl) {
    Cochain t = Cochain::zero(p.nerve, 1, CoefficientSystem::vector(Ring::Z, 2));
    for (const auto& [s, v] : p.weyl->t) {
      t.values[p.nerve.at(s) * 2] = v[0];
      t.values[p.nerve.at(s) * 2 + 1] = v[1];
    }
    RatVector theta(p.nerve.count(1));
    for (const auto& [s, x] : p.weyl->theta) theta[p.nerve.at(s)] = x;
    auto data = obstruction::weyl_fixture(p.nerve, p.weyl->N, t, theta);
    return data;
  }
  if (!p.unitary) throw InputError("cli: problem has neither \"weyl\" nor \"unitary\" data");
  obstruction::UnitaryCocycleData d;
  d.nerve = p.nerve;
  d.n = p.n;
  for (const auto& fam : p.unitary->vertex) {
    std::vector<MonomialMatrix> row;
    for (const auto& m : fam) row.emplace_back(m.perm, m.phase);
    d.vertex.push_back(std::move(row));
  }
  for (std::size_t e = 0; e < p.nerve.count(1); ++e) {
    auto it = p.unitary->edge.find(p.nerve.simplex(1, e));
    if (it == p.unitary->edge.end())
      throw InputError("cli: unitary.edge is missing " + simplex_key(p.nerve.simplex(1, e)));
    d.edge.emplace_back(it->second.perm, it->second.phase);
  }
  d.s = cochain_from(p.nerve, 1, p.s.value_or(SimplexValues{}), CoefficientSystem::vector(Ring::Q, p.n));
  return d;
}

// ---------------------------------------------------------------------------
// Options and reports

struct Options {
  std::string command;
  std::optional<int> degree;
  std::string ring = "int";
  std::optional<Integer> modulus;
  bool json_output = false;
  std::uint64_t seed = 1;
  int max_k = 4;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> list{"cech",   "dimred",     "gysin",     "bockstein",
                                             "derham", "lemma4",     "xi-extract", "verify-all"};
  return list;
}

inline Integer modulus_of(const Problem& p, const Options& o, const char* why) {
  if (o.modulus) return *o.modulus;
  if (p.modulus) return *p.modulus;
  throw InputError(std::string("cli: ") + why + " needs a modulus (--modulus or \"modulus\" in the problem)");
}

inline gysin::RowRing row_ring(const Problem& p, const Options& o) {
  const std::string& r = o.ring;
  if (r == "int") return gysin::RowRing::integers();
  if (r == "rat") return gysin::RowRing::rationals();
  if (r.rfind("mod", 0) == 0) {
    std::string rest = r.substr(3);
    if (rest.empty() || rest == "N") return gysin::RowRing::mod(modulus_of(p, o, "--ring modN"));
    if (rest.find_first_not_of("0123456789") != std::string::npos) throw InputError("cli: bad ring \"" + r + "\"");
    Integer N(rest);
    if (N < 1) throw InputError("cli: modulus must be positive");
    return gysin::RowRing::mod(N);
  }
  throw InputError("cli: unknown ring \"" + r + "\" (expected int, rat or modN)");
}

inline std::pair<int, int> degree_range(const Options& o) {
  if (o.degree) {
    if (*o.degree < 0) throw InputError("cli: --degree must be non-negative");
    return {*o.degree, *o.degree};
  }
  if (o.max_k < 0) throw InputError("cli: --max-k must be non-negative");
  return {0, o.max_k};
}

inline json group_json(const abelian::FpAbelianGroup& g) {
  json t = json::array();
  for (const auto& d : g.torsion) t.push_back(integer_json(d));
  return {{"free_rank", g.free_rank}, {"torsion", t}};
}

inline json groups_json(const Problem& p, const TwistData& tw, gysin::Column col, const gysin::RowRing& rr,
                        std::pair<int, int> range) {
  json out = json::array();
  for (int k = range.first; k <= range.second; ++k) {
    json g = group_json(gysin::column_group(p.nerve, tw, col, k, rr));
    g["degree"] = k;
    out.push_back(g);
  }
  return out;
}

inline json node_json(const gysin::NodeReport& n) {
  json j = {{"label", n.label},
            {"ring", n.ring},
            {"k", n.k},
            {"composite_zero", n.composite_zero},
            {"kernel_in_image", n.kernel_in_image},
            {"witnesses_verified", n.witnesses_verified},
            {"witness_count", n.witness_count},
            {"exact", n.exact()}};
  if (!n.failure.empty()) j["failure"] = n.failure;
  return j;
}

inline json triple_json(const DimRedCochain& c) {
  auto vals = [](const Cochain& x) {
    json a = json::array();
    for (const auto& v : x.values) a.push_back(rational_text(v));
    return a;
  };
  return {{"phi20", vals(c.top)}, {"phi11", vals(c.mid)}, {"phi02", vals(c.bot)}};
}

inline json zigzag_json(const gysin::ZigZagResult& z) {
  json coords = json::array();
  for (const auto& c : z.coordinates) coords.push_back(integer_json(c));
  return {{"degree", z.degree}, {"zero_class", z.zero_class}, {"order", integer_json(z.order)},
          {"coordinates", coords}, {"group", group_json(z.group)}};
}

// ---------------------------------------------------------------------------
// Commands

inline json cmd_cech(const Problem& p, const Options& o) {
  TwistData tw = TwistData::zero(p.nerve, p.n);
  gysin::RowRing rr = row_ring(p, o);
  return {{"ring", rr.name()}, {"groups", groups_json(p, tw, gysin::Column::Cech, rr, degree_range(o))}};
}

inline json cmd_dimred(const Problem& p, const Options& o) {
  TwistData tw = twist_of(p);
  gysin::RowRing rr = row_ring(p, o);
  auto range = degree_range(o);
  return {{"ring", rr.name()},
          {"n", p.n},
          {"groups", groups_json(p, tw, gysin::Column::Reduced, rr, range)},
          {"truncated_groups", groups_json(p, tw, gysin::Column::Truncated, rr, range)}};
}

inline json cmd_gysin(const Problem& p, const Options& o) {
  TwistData tw = twist_of(p);
  gysin::RowRing rr = row_ring(p, o);
  auto range = degree_range(o);
  auto rep = gysin::exactness_report(p.nerve, tw, rr, range.first, range.second);
  json nodes = json::array();
  for (const auto& n : rep.nodes) nodes.push_back(node_json(n));
  json out = {{"ring", rr.name()}, {"nodes", nodes}, {"all_exact", rep.all_exact()}};
  if (sgn(rr.modulus) != 0) out["findings_only"] = true;
  return out;
}

inline json cmd_bockstein(const Problem& p, const Options& o) {
  TwistData tw = twist_of(p);
  const Integer N = modulus_of(p, o, "bockstein");
  auto range = degree_range(o);
  json squares = json::array(), mod_row = json::array(), images = json::array();
  bool commute = true;
  for (int k = range.first; k <= range.second; ++k) {
    auto rows = gysin::theorem4_rows_check(p.nerve, tw, N, k);
    commute = commute && rows.all_commute();
    for (const auto& s : rows.squares) {
      json sq = {{"map", s.map}, {"column", s.column}, {"k", s.k}, {"samples", s.samples},
                 {"commutes", s.commutes}, {"sign", s.sign}};
      if (!s.failure.empty()) sq["failure"] = s.failure;
      squares.push_back(sq);
    }
    for (const auto& n : rows.mod_row) mod_row.push_back(node_json(n));
    auto modg = gysin::column_group(p.nerve, tw, gysin::Column::Reduced, k, gysin::RowRing::mod(N));
    for (std::size_t i = 0; i < modg.generators.size(); ++i) {
      RatVector vals;
      for (const auto& x : modg.generators[i]) vals.push_back(Rational(x) / Rational(N));
      auto c = DimRedCochain::unflatten(p.nerve, k, p.n, CoefficientSystem::scalar(Ring::QmodZ, N), vals);
      json z = zigzag_json(gysin::bockstein_zigzag(p.nerve, c, tw));
      z["source_degree"] = k;
      z["generator"] = i;
      images.push_back(z);
    }
  }
  return {{"modulus", integer_json(N)}, {"squares", squares}, {"all_commute", commute},
          {"mod_row_findings", mod_row}, {"bockstein_images", images}};
}

inline json cmd_derham(const Problem& p, const Options& o) {
  if (!p.derham) throw InputError("cli: derham needs a \"derham\" section");
  auto model = model_of(*p.derham);
  const int top = model.m + static_cast<int>(model.n);
  int k_hi = o.degree ? *o.degree : top;
  int k_lo = o.degree ? *o.degree : 0;
  json dims = json::array();
  bool match = true;
  for (int k = k_lo; k <= k_hi; ++k) {
    json row = {{"k", k}, {"bhm_dim", derham::bhm_cohomology(model, k, 0, std::max(k, 0)).dim}};
    if (model.structure) {
      const std::size_t ce = derham::ce_total_space(model, k);
      row["ce_dim"] = ce;
      match = match && ce == row["bhm_dim"].get<std::size_t>();
    }
    dims.push_back(row);
  }
  json gys = json::array();
  bool exact = true;
  for (int m = 0; m < static_cast<int>(model.n); ++m)
    for (int l = m + 1; l <= static_cast<int>(model.n); ++l) {
      auto rep = derham::bhm_gysin_check(model, m, l, k_lo, k_hi);
      exact = exact && rep.all_exact();
      std::size_t bad = 0;
      for (const auto& n : rep.nodes) bad += !n.exact();
      gys.push_back({{"m", m}, {"l", l}, {"nodes", rep.nodes.size()}, {"inexact_nodes", bad}, {"all_exact", rep.all_exact()}});
    }
  json out = {{"dims", dims}, {"gysin", gys}, {"gysin_exact", exact}};
  if (model.structure) out["dims_match_ce"] = match;
  return out;
}

inline json cmd_lemma4(const Problem& p, const Options&) {
  TwistData tw = twist_of(p);
  if (!tw.s) throw InputError("cli: lemma4 needs \"s\" in the problem");
  obstruction::GMatrix g = obstruction::GMatrix::zero(p.n);
  if (p.g) g.upper = *p.g;
  DimRedCochain triple = obstruction::lemma4_triple(p.nerve, g, tw);
  auto z = gysin::bockstein_zigzag(p.nerve, triple, tw);
  return {{"triple", triple_json(triple)}, {"closed", true}, {"bockstein", zigzag_json(z)}, {"zero_class", z.zero_class}};
}

inline json cmd_xi_extract(const Problem& p, const Options&) {
  auto data = unitary_of(p);
  json mackey = json::array();
  for (const auto& fam : data.vertex) {
    json f = json::array();
    for (const auto& x : obstruction::mackey_phi(fam)) f.push_back(rational_text(x));
    mackey.push_back(f);
  }
  auto x = obstruction::extract_xi_triple(data);
  auto glue = obstruction::verify_gluing(data, &x.triple);
  json issues = json::array();
  for (const auto& i : glue.issues) issues.push_back({{"simplex", i.simplex}, {"reason", i.reason}});
  auto z = gysin::bockstein_zigzag(p.nerve, x.triple, x.twist);
  return {{"triple", triple_json(x.triple)}, {"closed", true},       {"mackey", mackey},
          {"gluing_consistent", glue.consistent()}, {"gluing_checked", glue.checked}, {"gluing_issues", issues},
          {"bockstein", zigzag_json(z)}};
}

inline json check_json(const std::string& name, bool passed, json detail = json::object()) {
  detail["name"] = name;
  detail["passed"] = passed;
  return detail;
}

/// The property suite on one problem plus a seeded randomized sweep.
inline json cmd_verify_all(const Problem& p, const Options& o) {
  TwistData tw = twist_of(p);
  const int K = o.max_k;
  json checks = json::array();

  {
    bool ok = true;
    for (int k = 0; k <= K; ++k) ok = ok && (d_F_matrix(p.nerve, tw, k + 1) * d_F_matrix(p.nerve, tw, k)).is_zero();
    checks.push_back(check_json("d_squared_zero", ok, {{"max_k", K}}));
  }
  {
    bool ok = true;
    const std::size_t n = p.n;
    Cochain dC = cech_differential(p.nerve, tw.CF);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        Cochain want = cup(p.nerve, tw.F.component(i), tw.F.component(j)) - cup(p.nerve, tw.F.component(j), tw.F.component(i));
        ok = ok && dC.component(pair_index(i, j, n)).values == want.values;
      }
    checks.push_back(check_json("cf_coboundary_identity", ok));
  }
  {
    bool ok = true;
    TwistData zero = TwistData::zero(p.nerve, p.n);
    const CoefficientSystem kZ = CoefficientSystem::scalar(Ring::Z);
    for (int k = 0; k <= K; ++k) {
      std::vector<abelian::FpAbelianGroup> parts{cech_cohomology(p.nerve, kZ, k)};
      for (std::size_t i = 0; k >= 1 && i < p.n; ++i) parts.push_back(cech_cohomology(p.nerve, kZ, k - 1));
      for (std::size_t i = 0; k >= 2 && i < pair_count(p.n); ++i) parts.push_back(cech_cohomology(p.nerve, kZ, k - 2));
      auto [rank, torsion] = abelian::direct_sum_invariants(parts);
      auto h = dimred_cohomology(p.nerve, zero, Ring::Z, k);
      ok = ok && h.free_rank == rank && h.torsion == torsion;
    }
    checks.push_back(check_json("zero_twist_decomposition", ok));
  }
  for (const auto& rr : {gysin::RowRing::integers(), gysin::RowRing::rationals()}) {
    auto rep = gysin::exactness_report(p.nerve, tw, rr, 0, K);
    std::size_t witnesses = 0;
    for (const auto& n : rep.nodes) witnesses += n.witness_count;
    checks.push_back(check_json("gysin_exactness_" + rr.name(), rep.all_exact(),
                                {{"nodes", rep.nodes.size()}, {"witnesses", witnesses}}));
  }
  const Integer N = o.modulus ? *o.modulus : p.modulus.value_or(Integer(6));
  json findings = json::array();
  {
    bool ok = true;
    std::size_t squares = 0;
    for (int k = 0; k < K; ++k) {
      auto rows = gysin::theorem4_rows_check(p.nerve, tw, N, k);
      ok = ok && rows.all_commute();
      squares += rows.squares.size();
      for (const auto& n : rows.mod_row) findings.push_back({{"label", n.label}, {"exact", n.exact()}});
    }
    checks.push_back(check_json("coefficient_squares", ok, {{"modulus", integer_json(N)}, {"squares", squares}}));
  }

  std::mt19937_64 rng(o.seed);
  {
    bool ok = true;
    const int instances = 20;
    for (int t = 0; t < instances; ++t) {
      const int vertices = std::uniform_int_distribution<int>(3, 8)(rng);
      Nerve nerve = random_nerve(rng, vertices, 3);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
      TwistData rt = TwistData::from_F(nerve, random_cocycle_F(rng, nerve, n));
      for (int k = 0; k <= 3 && ok; ++k) ok = (d_F_matrix(nerve, rt, k + 1) * d_F_matrix(nerve, rt, k)).is_zero();
    }
    checks.push_back(check_json("random_d_squared_zero", ok, {{"instances", instances}}));
  }
  if (tw.s && p.n >= 2) {
    bool ok = true;
    const int samples = 10;
    for (int t = 0; t < samples; ++t) {
      obstruction::GMatrix g = obstruction::GMatrix::zero(p.n);
      for (auto& x : g.upper) {
        x = Rational(std::uniform_int_distribution<long>(-7, 7)(rng), std::uniform_int_distribution<long>(1, 6)(rng));
        x.canonicalize();
      }
      auto triple = obstruction::lemma4_triple(p.nerve, g, tw);
      ok = ok && gysin::bockstein_zigzag(p.nerve, triple, tw).zero_class;
    }
    checks.push_back(check_json("lemma4_zero_class", ok, {{"samples", samples}}));
  }
  if (p.derham) {
    json d = cmd_derham(p, Options{});
    if (d.contains("dims_match_ce")) checks.push_back(check_json("derham_ce_dimensions", d["dims_match_ce"].get<bool>()));
    checks.push_back(check_json("bhm_gysin_exactness", d["gysin_exact"].get<bool>()));
  }
  if (p.weyl || p.unitary) {
    auto data = unitary_of(p);
    auto x = obstruction::extract_xi_triple(data);
    checks.push_back(check_json("xi_triple_closed_and_glued", obstruction::verify_gluing(data, &x.triple).consistent()));
  }

  bool all = true;
  for (const auto& c : checks) all = all && c["passed"].get<bool>();
  return {{"seed", o.seed}, {"max_k", K}, {"checks", checks}, {"mod_row_findings", findings}, {"all_passed", all}};
}

/// Runs a command; the report carries the digest of the canonical problem.
inline json run(const Problem& p, const Options& o) {
  json body;
  if (o.command == "cech") body = cmd_cech(p, o);
  else if (o.command == "dimred") body = cmd_dimred(p, o);
  else if (o.command == "gysin") body = cmd_gysin(p, o);
  else if (o.command == "bockstein") body = cmd_bockstein(p, o);
  else if (o.command == "derham") body = cmd_derham(p, o);
  else if (o.command == "lemma4") body = cmd_lemma4(p, o);
  else if (o.command == "xi-extract") body = cmd_xi_extract(p, o);
  else if (o.command == "verify-all") body = cmd_verify_all(p, o);
  else throw InputError("cli: unknown command \"" + o.command + "\"");
  return {{"command", o.command}, {"input_digest", digest(p)}, {"result", body}};
}

// ---------------------------------------------------------------------------
// Human-readable output

inline std::string group_text(const json& g) {
  std::string out;
  const auto r = g["free_rank"].get<std::size_t>();
  if (r == 1) out = "Z";
  else if (r > 1) out = "Z^" + std::to_string(r);
  for (const auto& t : g["torsion"]) out += (out.empty() ? "" : " + ") + std::string("Z/") + t.dump();
  return out.empty() ? "0" : out;
}

inline std::string human(const json& report) {
  std::ostringstream os;
  const json& r = report["result"];
  const std::string cmd = report["command"].get<std::string>();
  os << cmd << "  digest " << report["input_digest"].get<std::string>() << "\n";
  auto list_groups = [&](const char* title, const json& groups) {
    os << title << ":\n";
    for (const auto& g : groups) os << "  k=" << g["degree"] << "  " << group_text(g) << "\n";
  };
  if (cmd == "cech" || cmd == "dimred") {
    os << "ring " << r["ring"].get<std::string>() << "\n";
    list_groups(cmd == "cech" ? "H^k" : "HH^k_F", r["groups"]);
    if (cmd == "dimred") list_groups("barHH^k_F", r["truncated_groups"]);
  } else if (cmd == "gysin") {
    for (const auto& n : r["nodes"])
      os << "  " << (n["exact"].get<bool>() ? "exact   " : "INEXACT ") << n["label"].get<std::string>() << "\n";
    os << "all exact: " << r["all_exact"] << "\n";
  } else if (cmd == "bockstein") {
    os << "squares commute: " << r["all_commute"] << "\n";
    for (const auto& z : r["bockstein_images"])
      os << "  k=" << z["source_degree"] << " generator " << z["generator"] << " -> order " << z["order"]
         << (z["zero_class"].get<bool>() ? " (zero class)" : "") << "\n";
  } else if (cmd == "derham") {
    for (const auto& d : r["dims"]) {
      os << "  k=" << d["k"] << "  dim H^{k,(0,k)} = " << d["bhm_dim"];
      if (d.contains("ce_dim")) os << "  CE = " << d["ce_dim"];
      os << "\n";
    }
    os << "Gysin exact: " << r["gysin_exact"] << "\n";
  } else if (cmd == "lemma4") {
    os << "zero class: " << r["zero_class"] << "\n";
  } else if (cmd == "xi-extract") {
    os << "closed: true\ngluing consistent: " << r["gluing_consistent"] << "\n";
    os << "zero class: " << r["bockstein"]["zero_class"] << "\n";
  } else if (cmd == "verify-all") {
    for (const auto& c : r["checks"])
      os << "  " << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "\n";
    os << "all passed: " << r["all_passed"] << "\n";
  }
  return os.str();
}

}  // namespace cechred::cli
