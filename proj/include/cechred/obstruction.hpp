#pragma once

// Finite monomial-matrix models for the obstruction formulas: Mackey and
// Phillips-Raeburn cocycles, the Xi-triple (phi20, phi11, phi02) extracted
// from unitary cocycle data, the triple attached to (g, s), and the gluing
// check behind A_phi.

#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cechred/dimred.hpp"
#include "cechred/errors.hpp"
#include "cechred/nerve.hpp"

namespace cechred::obstruction {

// ---------------------------------------------------------------------------
// Monomial matrices: M e_j = exp(2 pi i phase[j]) e_{perm[j]}

class MonomialMatrix {
 public:
  MonomialMatrix() = default;
  MonomialMatrix(std::vector<std::size_t> perm, RatVector phase) : perm_(std::move(perm)), phase_(std::move(phase)) {
    if (perm_.size() != phase_.size()) throw InputError("obstruction::MonomialMatrix: size mismatch");
    std::vector<bool> seen(perm_.size(), false);
    for (auto p : perm_) {
      if (p >= perm_.size() || seen[p]) throw InputError("obstruction::MonomialMatrix: not a permutation");
      seen[p] = true;
    }
    for (auto& x : phase_) {
      x.canonicalize();
      x = frac(x);
    }
  }

  static MonomialMatrix identity(std::size_t N) { return scalar(N, 0); }
  static MonomialMatrix scalar(std::size_t N, const Rational& phase) {
    std::vector<std::size_t> p(N);
    std::iota(p.begin(), p.end(), 0);
    return {std::move(p), RatVector(N, phase)};
  }
  static MonomialMatrix diagonal(RatVector phases) {
    std::vector<std::size_t> p(phases.size());
    std::iota(p.begin(), p.end(), 0);
    return {std::move(p), std::move(phases)};
  }
  static MonomialMatrix permutation(std::vector<std::size_t> perm) {
    RatVector ph(perm.size());
    return {std::move(perm), std::move(ph)};
  }

  std::size_t size() const { return perm_.size(); }
  const std::vector<std::size_t>& perm() const { return perm_; }
  const RatVector& phase() const { return phase_; }

  friend MonomialMatrix operator*(const MonomialMatrix& a, const MonomialMatrix& b) {
    if (a.size() != b.size()) throw InputError("obstruction::MonomialMatrix: size mismatch in product");
    std::vector<std::size_t> p(b.size());
    RatVector ph(b.size());
    for (std::size_t j = 0; j < b.size(); ++j) {
      p[j] = a.perm_[b.perm_[j]];
      ph[j] = b.phase_[j] + a.phase_[b.perm_[j]];
    }
    return {std::move(p), std::move(ph)};
  }

  MonomialMatrix inverse() const {
    std::vector<std::size_t> p(size());
    RatVector ph(size());
    for (std::size_t j = 0; j < size(); ++j) {
      p[perm_[j]] = j;
      ph[perm_[j]] = -phase_[j];
    }
    return {std::move(p), std::move(ph)};
  }

  MonomialMatrix pow(long e) const {
    MonomialMatrix base = e < 0 ? inverse() : *this, out = identity(size());
    for (unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e); k; k >>= 1) {
      if (k & 1) out = out * base;
      base = base * base;
    }
    return out;
  }

  /// Phase of a scalar matrix; nullopt if the matrix is not scalar.
  std::optional<Rational> scalar_phase() const {
    for (std::size_t j = 0; j < size(); ++j)
      if (perm_[j] != j || phase_[j] != phase_[0]) return std::nullopt;
    return size() == 0 ? Rational(0) : phase_[0];
  }
  bool is_scalar() const { return scalar_phase().has_value(); }

  MonomialMatrix times_phase(const Rational& c) const {
    RatVector ph = phase_;
    for (auto& x : ph) x += c;
    return {perm_, std::move(ph)};
  }

  friend bool operator==(const MonomialMatrix&, const MonomialMatrix&) = default;

 private:
  std::vector<std::size_t> perm_;
  RatVector phase_;
};

/// clock = diag(k/N), shift: e_j -> e_{j-1}; shift clock shift^-1 clock^-1 = 1/N.
inline std::pair<MonomialMatrix, MonomialMatrix> weyl_pair(std::size_t N) {
  if (N < 2) throw InputError("obstruction::weyl_pair: need N >= 2");
  RatVector ph(N);
  std::vector<std::size_t> p(N);
  for (std::size_t k = 0; k < N; ++k) {
    ph[k] = Rational(static_cast<long>(k), static_cast<long>(N));
    ph[k].canonicalize();
    p[k] = (k + N - 1) % N;
  }
  return {MonomialMatrix::diagonal(std::move(ph)), MonomialMatrix::permutation(std::move(p))};
}

/// Ordered product u^m = (u^1)^{m_1} ... (u^n)^{m_n}.
inline MonomialMatrix ordered_power(const std::vector<MonomialMatrix>& u, std::span<const Integer> m) {
  if (u.empty()) throw InputError("obstruction::ordered_power: no generators");
  if (m.size() != u.size()) throw InputError("obstruction::ordered_power: exponent length differs from n");
  MonomialMatrix out = MonomialMatrix::identity(u[0].size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!m[i].fits_slong_p()) throw InputError("obstruction::ordered_power: exponent too large");
    out = out * u[i].pow(m[i].get_si());
  }
  return out;
}

inline IntVector unit_vector(std::size_t n, std::size_t i) {
  IntVector e(n, 0);
  e[i] = 1;
  return e;
}

/// The phase of a matrix required to be scalar; ModelViolation otherwise.
inline Rational require_scalar(const MonomialMatrix& M, const std::string& what) {
  auto ph = M.scalar_phase();
  if (!ph) throw ModelViolation(what + " is not scalar");
  return *ph;
}

/// lcm of denominators, for choosing the Q/Z modulus of a result.
inline Integer common_denominator(const RatVector& values) {
  Integer l = 1;
  for (const auto& v : values) l = lcm(l, Integer(v.get_den()));
  return l;
}

// ---------------------------------------------------------------------------
// Mackey and Phillips-Raeburn

/// f_ij with f_ij u^i u^j = u^j u^i, stored in upper-pair order.
inline RatVector mackey_phi(const std::vector<MonomialMatrix>& u) {
  const std::size_t n = u.size();
  RatVector f(pair_count(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      f[pair_index(i, j, n)] = require_scalar(u[j] * u[i] * (u[i] * u[j]).inverse(),
                                              "obstruction::mackey_phi: commutator of generators " +
                                                  std::to_string(i + 1) + "," + std::to_string(j + 1));
  return f;
}

/// eta_{l0 l1}(e_i) = phase of u_{l1}^{e_i} (u_{l0}^{e_i})^{-1}, as a vector
/// 1-cochain in Q/Z.
inline Cochain phillips_raeburn_eta(const Nerve& nerve, const std::vector<std::vector<MonomialMatrix>>& u) {
  if (u.size() != static_cast<std::size_t>(nerve.vertex_count())) throw InputError("obstruction::phillips_raeburn_eta: one family per vertex");
  const std::size_t n = u.empty() ? 1 : u[0].size();
  for (std::size_t v = 0; v < u.size(); ++v) {
    if (u[v].size() != n) throw InputError("obstruction::phillips_raeburn_eta: ragged generator lists");
    RatVector f = mackey_phi(u[v]);
    if (!abelian::is_zero_vector(f))
      throw ModelViolation("obstruction::phillips_raeburn_eta: generators on vertex " + std::to_string(v) +
                           " do not commute");
  }
  RatVector vals(nerve.count(1) * n);
  for (std::size_t e = 0; e < nerve.count(1); ++e) {
    const Simplex& s = nerve.simplex(1, e);
    for (std::size_t i = 0; i < n; ++i)
      vals[e * n + i] = require_scalar(u[s[1]][i] * u[s[0]][i].inverse(),
                                       "obstruction::phillips_raeburn_eta: u_{l1} u_{l0}^-1 on edge " +
                                           std::to_string(e));
  }
  return Cochain::from_values(nerve, 1, CoefficientSystem::vector(Ring::QmodZ, n, common_denominator(vals)), vals);
}

// ---------------------------------------------------------------------------
// Unitary cocycle data and the Xi-triple

struct UnitaryCocycleData {
  Nerve nerve;
  std::size_t n = 1;
  std::vector<std::vector<MonomialMatrix>> vertex;  // vertex[lambda][i]
  std::vector<MonomialMatrix> edge;                 // by 1-simplex index, lambda0 < lambda1
  Cochain s;                                        // Q vector 1-cochain with integral ds

  std::size_t matrix_size() const { return vertex.empty() || vertex[0].empty() ? 0 : vertex[0][0].size(); }

  void validate() const {
    if (vertex.size() != static_cast<std::size_t>(nerve.vertex_count())) throw InputError("obstruction::UnitaryCocycleData: one family per vertex");
    if (edge.size() != nerve.count(1)) throw InputError("obstruction::UnitaryCocycleData: one connector per edge");
    const std::size_t N = matrix_size();
    if (N == 0) throw InputError("obstruction::UnitaryCocycleData: empty matrices");
    for (const auto& fam : vertex) {
      if (fam.size() != n) throw InputError("obstruction::UnitaryCocycleData: need n generators per vertex");
      for (const auto& M : fam)
        if (M.size() != N) throw InputError("obstruction::UnitaryCocycleData: matrix sizes differ");
    }
    for (const auto& M : edge)
      if (M.size() != N) throw InputError("obstruction::UnitaryCocycleData: matrix sizes differ");
    if (s.degree != 1 || s.system.shape != Shape::Vector || s.system.n != n || s.simplex_count != nerve.count(1))
      throw InputError("obstruction::UnitaryCocycleData: s must be a vector 1-cochain on the nerve");
  }

  TwistData twist() const { return TwistData::from_s(nerve, s); }

  /// -ds on a 2-simplex, the exponent in v_{l0}^{-ds}.
  IntVector minus_ds(const Cochain& F, std::size_t tri) const {
    IntVector m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = -F.at(tri, i).get_num();
    return m;
  }

  MonomialMatrix phi02_word(std::size_t v, std::size_t i, std::size_t j) const {
    const auto& u = vertex[v];
    return u[j] * u[i] * u[j].inverse() * u[i].inverse();
  }
  MonomialMatrix phi11_word(std::size_t e, std::span<const Integer> m) const {
    const Simplex& sim = nerve.simplex(1, e);
    return ordered_power(vertex[sim[1]], m) * edge[e] * ordered_power(vertex[sim[0]], m).inverse() * edge[e].inverse();
  }
  MonomialMatrix phi20_word(std::size_t tri, const Cochain& F) const {
    const Simplex& t = nerve.simplex(2, tri);
    const MonomialMatrix& v01 = edge[nerve.at({t[0], t[1]})];
    const MonomialMatrix& v12 = edge[nerve.at({t[1], t[2]})];
    const MonomialMatrix& v02 = edge[nerve.at({t[0], t[2]})];
    IntVector m = minus_ds(F, tri);
    return v12 * v01 * ordered_power(vertex[t[0]], m).inverse() * v02.inverse();
  }
};

inline std::string simplex_name(const Simplex& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

/// Lifts a Q/Z triple to Q and reports the first place where D_F is not
/// integral; nullopt when the triple is closed modulo 1.
inline std::optional<std::string> closedness_defect(const Nerve& nerve, const DimRedCochain& c, const TwistData& tw) {
  DimRedCochain q{c.k, change_ring(c.top, Ring::Q), change_ring(c.mid, Ring::Q), change_ring(c.bot, Ring::Q)};
  DimRedCochain d = d_F(nerve, q, tw);
  const char* names[] = {"top", "mid", "bot"};
  int slot = 0;
  for (const Cochain* part : {&d.top, &d.mid, &d.bot}) {
    const std::size_t w = part->system.width();
    for (std::size_t i = 0; i < part->values.size(); ++i)
      if (part->values[i].get_den() != 1)
        return std::string(names[slot]) + " slot at " + simplex_name(nerve.simplex(part->degree, i / w)) + " is " +
               part->values[i].get_str();
    ++slot;
  }
  return std::nullopt;
}

inline DimRedCochain make_triple(const Nerve& nerve, std::size_t n, const RatVector& top, const RatVector& mid,
                                 const RatVector& bot) {
  RatVector all = top;
  all.insert(all.end(), mid.begin(), mid.end());
  all.insert(all.end(), bot.begin(), bot.end());
  return DimRedCochain::unflatten(nerve, 2, n, CoefficientSystem::scalar(Ring::QmodZ, common_denominator(all)), all);
}

struct XiExtraction {
  DimRedCochain triple;  // (phi20, phi11, phi02), degree 2 over Q/Z
  TwistData twist;
};

/// Evaluates the three defining expressions; each must be scalar. The
/// result must be D_{ds}-closed modulo 1.
inline XiExtraction extract_xi_triple(const UnitaryCocycleData& data) {
  data.validate();
  const Nerve& nerve = data.nerve;
  const std::size_t n = data.n;
  TwistData tw = data.twist();

  RatVector bot(nerve.count(0) * pair_count(n));
  for (std::size_t v = 0; v < nerve.count(0); ++v)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        bot[v * pair_count(n) + pair_index(i, j, n)] =
            require_scalar(data.phi02_word(v, i, j), "obstruction::extract_xi_triple: phi02 at vertex " +
                                                         std::to_string(v));

  RatVector mid(nerve.count(1) * n);
  for (std::size_t e = 0; e < nerve.count(1); ++e) {
    const std::string where = " on edge " + simplex_name(nerve.simplex(1, e));
    for (std::size_t i = 0; i < n; ++i)
      mid[e * n + i] = require_scalar(data.phi11_word(e, unit_vector(n, i)), "obstruction::extract_xi_triple: phi11" + where);
    // Homomorphism check on generator pairs, including e_i + e_i.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        IntVector m = unit_vector(n, i);
        m[j] += 1;
        Rational both = require_scalar(data.phi11_word(e, m), "obstruction::extract_xi_triple: phi11" + where);
        if (frac(both - mid[e * n + i] - mid[e * n + j]) != 0)
          throw ModelViolation("obstruction::extract_xi_triple: phi11" + where + " is not a homomorphism");
      }
  }

  RatVector top(nerve.count(2));
  for (std::size_t t = 0; t < nerve.count(2); ++t)
    top[t] = require_scalar(data.phi20_word(t, tw.F),
                            "obstruction::extract_xi_triple: phi20 at " + simplex_name(nerve.simplex(2, t)));

  XiExtraction out{make_triple(nerve, n, top, mid, bot), tw};
  if (auto bad = closedness_defect(nerve, out.triple, tw))
    throw ModelViolation("obstruction::extract_xi_triple: triple is not D-closed: " + *bad);
  return out;
}

// ---------------------------------------------------------------------------
// The triple attached to (g, s)

/// Constant strictly upper-triangular g, stored in upper-pair order.
struct GMatrix {
  std::size_t n = 1;
  RatVector upper;

  static GMatrix zero(std::size_t n) { return {n, RatVector(pair_count(n))}; }
  Rational& at(std::size_t i, std::size_t j) { return upper[pair_index(i, j, n)]; }
  const Rational& at(std::size_t i, std::size_t j) const { return upper[pair_index(i, j, n)]; }
};

/// phi02 = g, phi11(e_l) = sum g_ij (delta_il s_j - s_i delta_jl),
/// phi20 = sum g_ij (s01_i s12_j - ds_i s02_j), all modulo 1.
inline DimRedCochain lemma4_triple(const Nerve& nerve, const GMatrix& g, const TwistData& tw) {
  if (!tw.s) throw PreconditionError("obstruction::lemma4_triple: twist carries no s");
  if (g.n != tw.n || g.upper.size() != pair_count(g.n)) throw InputError("obstruction::lemma4_triple: g has the wrong size");
  const std::size_t n = g.n;
  const Cochain& s = *tw.s;
  const Cochain& F = tw.F;

  RatVector bot(nerve.count(0) * pair_count(n));
  for (std::size_t v = 0; v < nerve.count(0); ++v)
    for (std::size_t p = 0; p < pair_count(n); ++p) bot[v * pair_count(n) + p] = g.upper[p];

  RatVector mid(nerve.count(1) * n);
  for (std::size_t e = 0; e < nerve.count(1); ++e)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        mid[e * n + i] += g.at(i, j) * s.at(e, j);
        mid[e * n + j] -= g.at(i, j) * s.at(e, i);
      }

  RatVector top(nerve.count(2));
  for (std::size_t t = 0; t < nerve.count(2); ++t) {
    const Simplex& tri = nerve.simplex(2, t);
    const std::size_t e01 = nerve.at({tri[0], tri[1]}), e12 = nerve.at({tri[1], tri[2]}),
                      e02 = nerve.at({tri[0], tri[2]});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        top[t] += g.at(i, j) * (s.at(e01, i) * s.at(e12, j) - F.at(t, i) * s.at(e02, j));
  }

  DimRedCochain out = make_triple(nerve, n, top, mid, bot);
  if (auto bad = closedness_defect(nerve, out, tw))
    throw ModelViolation("obstruction::lemma4_triple: triple is not D-closed: " + *bad);
  return out;
}

// ---------------------------------------------------------------------------
// Gluing consistency

struct GluingIssue {
  Simplex simplex;
  std::string reason;
};

struct GluingReport {
  std::vector<GluingIssue> issues;
  std::size_t checked = 0;
  bool consistent() const { return issues.empty(); }
};

/// For every 2-simplex, v12 v01 and v02 v0^{-ds} must differ by a scalar
/// (and by exactly phi20 when a triple is supplied); vertex and edge
/// conjugation relations are checked the same way.
inline GluingReport verify_gluing(const UnitaryCocycleData& data, const DimRedCochain* triple = nullptr) {
  data.validate();
  const Nerve& nerve = data.nerve;
  const std::size_t n = data.n;
  TwistData tw = data.twist();
  GluingReport rep;
  auto check = [&](const MonomialMatrix& word, const Simplex& where, const std::string& what,
                   const std::optional<Rational>& expected) {
    ++rep.checked;
    auto ph = word.scalar_phase();
    if (!ph)
      rep.issues.push_back({where, what + " is not scalar"});
    else if (expected && frac(*ph - *expected) != 0)
      rep.issues.push_back({where, what + " has phase " + ph->get_str() + ", expected " + expected->get_str()});
  };
  for (std::size_t v = 0; v < nerve.count(0); ++v)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        std::optional<Rational> want;
        if (triple) want = triple->bot.at(v, pair_index(i, j, n));
        check(data.phi02_word(v, i, j), nerve.simplex(0, v), "phi02 commutator", want);
      }
  for (std::size_t e = 0; e < nerve.count(1); ++e)
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<Rational> want;
      if (triple) want = triple->mid.at(e, i);
      check(data.phi11_word(e, unit_vector(n, i)), nerve.simplex(1, e), "phi11 conjugation", want);
    }
  for (std::size_t t = 0; t < nerve.count(2); ++t) {
    std::optional<Rational> want;
    if (triple) want = triple->top.at(t);
    check(data.phi20_word(t, tw.F), nerve.simplex(2, t), "v12 v01 (v02 v0^{-ds})^{-1}", want);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Fixtures

/// n = 2 data with v_lambda = (clock, shift) everywhere and connectors
/// v_e = exp(2 pi i theta_e) u^{-t_e}; s = t.
inline UnitaryCocycleData weyl_fixture(const Nerve& nerve, std::size_t N, const Cochain& t, const RatVector& theta) {
  if (t.degree != 1 || t.system.shape != Shape::Vector || t.system.n != 2)
    throw InputError("obstruction::weyl_fixture: t must be an integer vector 1-cochain with n = 2");
  if (theta.size() != nerve.count(1)) throw InputError("obstruction::weyl_fixture: one theta per edge");
  auto [clock, shift] = weyl_pair(N);
  UnitaryCocycleData d;
  d.nerve = nerve;
  d.n = 2;
  d.vertex.assign(static_cast<std::size_t>(nerve.vertex_count()), {clock, shift});
  for (std::size_t e = 0; e < nerve.count(1); ++e) {
    IntVector m{-t.at(e, 0).get_num(), -t.at(e, 1).get_num()};
    d.edge.push_back(ordered_power({clock, shift}, m).times_phase(theta[e]));
  }
  d.s = change_ring(t, Ring::Q);
  return d;
}

/// All matrices the identity.
inline UnitaryCocycleData identity_fixture(const Nerve& nerve, std::size_t n, std::size_t N) {
  UnitaryCocycleData d;
  d.nerve = nerve;
  d.n = n;
  d.vertex.assign(static_cast<std::size_t>(nerve.vertex_count()), std::vector<MonomialMatrix>(n, MonomialMatrix::identity(N)));
  d.edge.assign(nerve.count(1), MonomialMatrix::identity(N));
  d.s = Cochain::zero(nerve, 1, CoefficientSystem::vector(Ring::Q, n));
  return d;
}

}  // namespace cechred::obstruction
