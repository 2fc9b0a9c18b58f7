#pragma once

// Invariant-form de Rham side: the truncated complex C^{k,(m,l)} with the
// wedge-with-F2 map and D_{F2}, its cohomology, the Gysin sequence between
// truncations, the pushforward pi_*, and a Chevalley-Eilenberg oracle for
// the total space.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cechred/abelian.hpp"
#include "cechred/errors.hpp"

namespace cechred::derham {

using abelian::RatMatrix;

using Subset = std::vector<int>;

// ---------------------------------------------------------------------------
// Exterior algebra bookkeeping

/// k-subsets of {0..m-1} in lexicographic order.
inline std::vector<Subset> subsets(int m, int k) {
  std::vector<Subset> out;
  if (k < 0 || k > m) return out;
  Subset s(k);
  for (int i = 0; i < k; ++i) s[i] = i;
  while (true) {
    out.push_back(s);
    int i = k - 1;
    while (i >= 0 && s[i] == m - k + i) --i;
    if (i < 0) break;
    ++s[i];
    for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

inline std::size_t binom(int m, int k) {
  if (k < 0 || k > m) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(m - k + i) / static_cast<std::size_t>(i);
  return r;
}

/// Sorts `word` in place; returns the sign of the sort, or 0 on a repeat.
inline int sort_sign(std::vector<int>& word) {
  int sign = 1;
  for (std::size_t i = 1; i < word.size(); ++i)
    for (std::size_t j = i; j > 0 && word[j - 1] >= word[j]; --j) {
      if (word[j - 1] == word[j]) return 0;
      std::swap(word[j - 1], word[j]);
      sign = -sign;
    }
  return sign;
}

class SubsetIndex {
 public:
  SubsetIndex(int m, int k) : list_(subsets(m, k)) {
    for (std::size_t i = 0; i < list_.size(); ++i) index_.emplace(list_[i], i);
  }
  std::size_t size() const { return list_.size(); }
  const Subset& operator[](std::size_t i) const { return list_[i]; }
  std::size_t at(const Subset& s) const { return index_.at(s); }

 private:
  std::vector<Subset> list_;
  std::map<Subset, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Curvature and models

/// rows[a][pair] is the coefficient of dz_p ^ dz_q (p < q, lex pair order)
/// in the a-th component of F2.
struct CurvatureMatrix {
  int m = 0;
  std::size_t n = 0;
  std::vector<RatVector> rows;

  static CurvatureMatrix zero(int m, std::size_t n) {
    return {m, n, std::vector<RatVector>(n, RatVector(binom(m, 2)))};
  }
  static CurvatureMatrix from_rows(int m, std::vector<RatVector> rows) {
    CurvatureMatrix c{m, rows.size(), std::move(rows)};
    c.validate();
    return c;
  }
  void validate() const {
    if (m < 0) throw InputError("derham::CurvatureMatrix: negative base dimension");
    if (rows.size() != n) throw InputError("derham::CurvatureMatrix: row count differs from n");
    for (const auto& r : rows)
      if (r.size() != binom(m, 2)) throw InputError("derham::CurvatureMatrix: each row needs C(m,2) entries");
  }
  Rational& at(std::size_t a, int p, int q) { return rows[a][pair(p, q)]; }
  const Rational& at(std::size_t a, int p, int q) const { return rows[a][pair(p, q)]; }
  std::size_t pair(int p, int q) const {
    if (!(0 <= p && p < q && q < m)) throw InputError("derham::CurvatureMatrix: need 0 <= p < q < m");
    return SubsetIndex(m, 2).at({p, q});
  }
  CurvatureMatrix scaled(const Rational& c) const {
    CurvatureMatrix out = *this;
    for (auto& r : out.rows)
      for (auto& x : r) x *= c;
    return out;
  }
  bool is_zero() const {
    for (const auto& r : rows)
      if (!abelian::is_zero_vector(r)) return false;
    return true;
  }
};

/// Matrix of right multiplication by the 2-form `coeffs` from Lambda^j to
/// Lambda^{j+2} of Q^m.
inline RatMatrix wedge_two_form(int m, int j, const RatVector& coeffs) {
  SubsetIndex src(m, j), dst(m, j + 2), pairs(m, 2);
  RatMatrix out(dst.size(), src.size());
  for (std::size_t s = 0; s < src.size(); ++s)
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (coeffs[p] == 0) continue;
      std::vector<int> word = src[s];
      word.insert(word.end(), pairs[p].begin(), pairs[p].end());
      int sign = sort_sign(word);
      if (sign != 0) out(dst.at(word), s) += sign * coeffs[p];
    }
  return out;
}

/// Differential on Lambda(Q^m) from de_c = structure[c] (2-forms in lex
/// pair coordinates), extended as a graded derivation.
inline RatMatrix lie_differential(int m, int j, const std::vector<RatVector>& structure) {
  SubsetIndex src(m, j), dst(m, j + 1), pairs(m, 2);
  RatMatrix out(dst.size(), src.size());
  for (std::size_t s = 0; s < src.size(); ++s)
    for (int r = 0; r < j; ++r) {
      const RatVector& de = structure[src[s][r]];
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (de[p] == 0) continue;
        std::vector<int> word(src[s].begin(), src[s].begin() + r);
        word.insert(word.end(), pairs[p].begin(), pairs[p].end());
        word.insert(word.end(), src[s].begin() + r + 1, src[s].end());
        int sign = sort_sign(word);
        if (sign == 0) continue;
        if (r % 2) sign = -sign;
        out(dst.at(word), s) += sign * de[p];
      }
    }
  return out;
}

/// Finite graded model of base forms: dims[j] = dim Omega^j, d[j]: Omega^j ->
/// Omega^{j+1}, mu[a][j]: Omega^j -> Omega^{j+2} is wedge with F2^{(a)}.
struct InvariantModel {
  int m = 0;  // top form degree
  std::size_t n = 0;
  std::vector<std::size_t> dims;
  std::vector<RatMatrix> d;
  std::vector<std::vector<RatMatrix>> mu;
  /// Present for Lie-algebra models (torus or nilpotent base); needed by the
  /// Chevalley-Eilenberg oracle.
  std::optional<std::vector<RatVector>> structure;
  std::optional<CurvatureMatrix> curvature;

  std::size_t dim(int j) const { return (j < 0 || j > m) ? 0 : dims[j]; }

  RatMatrix d_at(int j) const {
    if (j < 0 || j >= m) return RatMatrix(dim(j + 1), dim(j));
    return d[j];
  }
  RatMatrix mu_at(std::size_t a, int j) const {
    if (j < 0 || j + 2 > m) return RatMatrix(dim(j + 2), dim(j));
    return mu[a][j];
  }

  bool is_torus() const {
    if (!structure) return false;
    for (const auto& s : *structure)
      if (!abelian::is_zero_vector(s)) return false;
    return true;
  }

  /// Throws ModelViolation unless d^2 = 0, d mu = mu d and the mu commute.
  void validate() const {
    if (dims.size() != static_cast<std::size_t>(m) + 1) throw InputError("derham::InvariantModel: need m+1 dims");
    if (d.size() != static_cast<std::size_t>(std::max(m, 0))) throw InputError("derham::InvariantModel: need m d's");
    if (mu.size() != n) throw InputError("derham::InvariantModel: need n mu families");
    for (int j = 0; j < m; ++j)
      if (d[j].rows() != dim(j + 1) || d[j].cols() != dim(j))
        throw InputError("derham::InvariantModel: d[" + std::to_string(j) + "] has the wrong shape");
    for (std::size_t a = 0; a < n; ++a) {
      if (mu[a].size() != static_cast<std::size_t>(std::max(m - 1, 0)))
        throw InputError("derham::InvariantModel: need m-1 mu blocks per component");
      for (int j = 0; j + 2 <= m; ++j)
        if (mu[a][j].rows() != dim(j + 2) || mu[a][j].cols() != dim(j))
          throw InputError("derham::InvariantModel: mu block has the wrong shape");
    }
    for (int j = 0; j + 2 <= m; ++j)
      if (!(d_at(j + 1) * d_at(j)).is_zero())
        throw ModelViolation("derham::InvariantModel: d^2 != 0 on degree " + std::to_string(j));
    for (std::size_t a = 0; a < n; ++a)
      for (int j = 0; j + 1 <= m; ++j) {
        if (!(d_at(j + 2) * mu_at(a, j) == mu_at(a, j + 1) * d_at(j)))
          throw ModelViolation("derham::InvariantModel: F2 component " + std::to_string(a) + " is not closed");
        for (std::size_t b = a + 1; b < n; ++b)
          if (!(mu_at(a, j + 2) * mu_at(b, j) == mu_at(b, j + 2) * mu_at(a, j)))
            throw ModelViolation("derham::InvariantModel: mu operators do not commute");
      }
  }

  /// Invariant forms on a nilpotent (or abelian) base with de_c = structure[c].
  static InvariantModel lie(std::vector<RatVector> structure, CurvatureMatrix F2) {
    F2.validate();
    for (auto& r : F2.rows)
      for (auto& x : r) x.canonicalize();
    for (auto& r : structure)
      for (auto& x : r) x.canonicalize();
    const int m = F2.m;
    if (structure.size() != static_cast<std::size_t>(m))
      throw InputError("derham::InvariantModel::lie: need one structure 2-form per base generator");
    for (const auto& s : structure)
      if (s.size() != binom(m, 2)) throw InputError("derham::InvariantModel::lie: structure rows need C(m,2) entries");
    InvariantModel model;
    model.m = m;
    model.n = F2.n;
    for (int j = 0; j <= m; ++j) model.dims.push_back(binom(m, j));
    for (int j = 0; j < m; ++j) model.d.push_back(lie_differential(m, j, structure));
    model.mu.resize(F2.n);
    for (std::size_t a = 0; a < F2.n; ++a)
      for (int j = 0; j + 2 <= m; ++j) model.mu[a].push_back(wedge_two_form(m, j, F2.rows[a]));
    model.structure = structure;
    model.curvature = F2;
    model.validate();
    return model;
  }

  /// Constant forms on the m-torus (d = 0).
  static InvariantModel torus(const CurvatureMatrix& F2) {
    return lie(std::vector<RatVector>(F2.m, RatVector(binom(F2.m, 2))), F2);
  }
};

// ---------------------------------------------------------------------------
// The complex

/// Component (k-i, i) is stored J-major: index = J * dim(k-i) + form index.
inline std::size_t component_dim(const InvariantModel& model, int k, int i) {
  if (i < 0 || i > static_cast<int>(model.n)) return 0;
  return model.dim(k - i) * binom(static_cast<int>(model.n), i);
}

struct BhmElement {
  int k = 0, m_lo = 0, l_hi = 0;
  std::vector<RatVector> components;  // components[i - m_lo]

  static BhmElement zero(const InvariantModel& model, int k, int m_lo, int l_hi) {
    BhmElement e{k, m_lo, l_hi, {}};
    for (int i = m_lo; i <= l_hi; ++i) e.components.emplace_back(component_dim(model, k, i));
    return e;
  }
  RatVector& component(int i) { return components.at(i - m_lo); }
  const RatVector& component(int i) const { return components.at(i - m_lo); }

  RatVector flatten() const {
    RatVector out;
    for (const auto& c : components) out.insert(out.end(), c.begin(), c.end());
    return out;
  }
  static BhmElement unflatten(const InvariantModel& model, int k, int m_lo, int l_hi, const RatVector& v) {
    BhmElement e = zero(model, k, m_lo, l_hi);
    std::size_t pos = 0;
    for (auto& c : e.components)
      for (auto& x : c) {
        if (pos >= v.size()) throw InputError("derham::BhmElement::unflatten: vector too short");
        x = v[pos++];
      }
    if (pos != v.size()) throw InputError("derham::BhmElement::unflatten: vector too long");
    return e;
  }
  bool is_zero() const {
    for (const auto& c : components)
      if (!abelian::is_zero_vector(c)) return false;
    return true;
  }
  friend bool operator==(const BhmElement&, const BhmElement&) = default;
};

inline void require_range(int m_lo, int l_hi, const char* where) {
  if (m_lo < 0 || m_lo > l_hi) throw InputError(std::string(where) + ": need 0 <= m_lo <= l_hi");
}

/// Matrix of H |-> H ^ F2 from component (k-i, i) to (k-i+2, i-1).
inline RatMatrix wedge_f2_matrix(const InvariantModel& model, int k, int i) {
  if (i < 1) throw InputError("derham::wedge_f2: component index must be >= 1");
  const int n = static_cast<int>(model.n);
  RatMatrix out(component_dim(model, k + 1, i - 1), component_dim(model, k, i));
  if (out.rows() == 0 || out.cols() == 0) return out;
  SubsetIndex src(n, i), dst(n, i - 1);
  const std::size_t fin = model.dim(k - i), fout = model.dim(k - i + 2);
  for (std::size_t J = 0; J < src.size(); ++J)
    for (int l = 0; l < i; ++l) {
      const int a = src[J][l];
      Subset rest = src[J];
      rest.erase(rest.begin() + l);
      const std::size_t R = dst.at(rest);
      RatMatrix mu = model.mu_at(a, k - i);
      const int sign = (l % 2 == 0) ? 1 : -1;  // (-1)^{l+1}, l counted from 1
      for (std::size_t r = 0; r < fout; ++r)
        for (std::size_t c = 0; c < fin; ++c)
          if (mu(r, c) != 0) out(R * fout + r, J * fin + c) += sign * mu(r, c);
    }
  return out;
}

inline RatVector wedge_f2(const InvariantModel& model, int k, int i, const RatVector& H) {
  return wedge_f2_matrix(model, k, i).apply(H);
}

/// d applied to each Lambda^i coordinate of component (k-i, i).
inline RatMatrix form_d_matrix(const InvariantModel& model, int k, int i) {
  RatMatrix out(component_dim(model, k + 1, i), component_dim(model, k, i));
  if (out.rows() == 0 || out.cols() == 0) return out;
  const std::size_t fin = model.dim(k - i), fout = model.dim(k - i + 1);
  RatMatrix dm = model.d_at(k - i);
  for (std::size_t J = 0; J < binom(static_cast<int>(model.n), i); ++J)
    for (std::size_t r = 0; r < fout; ++r)
      for (std::size_t c = 0; c < fin; ++c) out(J * fout + r, J * fin + c) = dm(r, c);
  return out;
}

struct Layout {
  std::vector<std::size_t> offset;  // per component, plus total at the end
  std::size_t total() const { return offset.back(); }
};

inline Layout layout(const InvariantModel& model, int k, int m_lo, int l_hi) {
  Layout L;
  std::size_t pos = 0;
  for (int i = m_lo; i <= l_hi; ++i) {
    L.offset.push_back(pos);
    pos += component_dim(model, k, i);
  }
  L.offset.push_back(pos);
  return L;
}

/// D_{F2}: C^{k,(m,l)} -> C^{k+1,(m,l)}. Output component i is
/// d H_i + (-1)^{k-i-1} H_{i+1} ^ F2.
inline RatMatrix d_F2_matrix(const InvariantModel& model, int k, int m_lo, int l_hi) {
  require_range(m_lo, l_hi, "derham::d_F2");
  Layout src = layout(model, k, m_lo, l_hi), dst = layout(model, k + 1, m_lo, l_hi);
  RatMatrix out(dst.total(), src.total());
  auto place = [&](const RatMatrix& block, std::size_t r0, std::size_t c0, int sign) {
    for (std::size_t r = 0; r < block.rows(); ++r)
      for (std::size_t c = 0; c < block.cols(); ++c)
        if (block(r, c) != 0) out(r0 + r, c0 + c) += sign * block(r, c);
  };
  for (int i = m_lo; i <= l_hi; ++i) {
    const std::size_t ci = static_cast<std::size_t>(i - m_lo);
    place(form_d_matrix(model, k, i), dst.offset[ci], src.offset[ci], 1);
    if (i + 1 <= l_hi) place(wedge_f2_matrix(model, k, i + 1), dst.offset[ci], src.offset[ci + 1], (k - i - 1) % 2 ? -1 : 1);
  }
  return out;
}

inline BhmElement d_F2(const InvariantModel& model, const BhmElement& H) {
  RatVector v = d_F2_matrix(model, H.k, H.m_lo, H.l_hi).apply(H.flatten());
  return BhmElement::unflatten(model, H.k + 1, H.m_lo, H.l_hi, v);
}

/// H^{k,(m,l)}_{F2} over Q: dimension and representative basis.
inline abelian::RationalHomology bhm_cohomology(const InvariantModel& model, int k, int m_lo, int l_hi) {
  require_range(m_lo, l_hi, "derham::bhm_cohomology");
  return abelian::rational_homology(d_F2_matrix(model, k, m_lo, l_hi), d_F2_matrix(model, k - 1, m_lo, l_hi));
}

// ---------------------------------------------------------------------------
// Gysin sequence H^{k,(m,m)} -> H^{k,(m,l)} -> H^{k,(m+1,l)} -> H^{k+1,(m,m)}

/// Inclusion of the i = m summand.
inline RatMatrix include_matrix(const InvariantModel& model, int k, int m, int l) {
  Layout dst = layout(model, k, m, l);
  RatMatrix out(dst.total(), component_dim(model, k, m));
  for (std::size_t c = 0; c < out.cols(); ++c) out(c, c) = 1;
  return out;
}

/// Projection dropping the i = m summand.
inline RatMatrix project_matrix(const InvariantModel& model, int k, int m, int l) {
  const std::size_t skip = component_dim(model, k, m);
  Layout src = layout(model, k, m, l);
  RatMatrix out(src.total() - skip, src.total());
  for (std::size_t r = 0; r < out.rows(); ++r) out(r, skip + r) = 1;
  return out;
}

/// [(H_{m+1}, ..., H_l)] |-> [(-1)^{k-m} H_{m+1} ^ F2].
inline RatMatrix connecting_matrix(const InvariantModel& model, int k, int m, int l) {
  Layout src = layout(model, k, m + 1, l);
  RatMatrix w = wedge_f2_matrix(model, k, m + 1);
  RatMatrix out(w.rows(), src.total());
  const int sign = (k - m) % 2 ? -1 : 1;
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) out(r, c) = sign * w(r, c);
  return out;
}

struct GysinNode {
  std::string label;
  int k = 0;
  bool composite_zero = false;
  bool kernel_in_image = false;
  bool witnesses_verified = false;
  std::size_t rank_in = 0, rank_out = 0, dim_middle = 0;
  bool exact() const { return composite_zero && kernel_in_image && witnesses_verified; }
};

struct GysinReport {
  int m = 0, l = 0;
  std::vector<GysinNode> nodes;
  bool all_exact() const {
    return std::all_of(nodes.begin(), nodes.end(), [](const GysinNode& x) { return x.exact(); });
  }
};

namespace detail {

struct Term {
  int k, m_lo, l_hi;
  abelian::RationalHomology h;
};

inline Term term(const InvariantModel& model, int k, int m_lo, int l_hi) {
  return {k, m_lo, l_hi, bhm_cohomology(model, k, m_lo, l_hi)};
}

inline std::string term_name(const Term& t) {
  return "H^{" + std::to_string(t.k) + ",(" + std::to_string(t.m_lo) + "," + std::to_string(t.l_hi) + ")}";
}

inline RatMatrix on_classes(const Term& A, const Term& B, const RatMatrix& chain) {
  RatMatrix out(B.h.dim, A.h.dim);
  for (std::size_t i = 0; i < A.h.dim; ++i) {
    RatVector c = B.h.coordinates(chain.apply(A.h.basis[i]));
    for (std::size_t r = 0; r < c.size(); ++r) out(r, i) = c[r];
  }
  return out;
}

/// Middle-node check of A --f--> B --g--> C; each kernel witness b is
/// re-verified as b - f(a) = D(z) at chain level.
inline GysinNode node(const InvariantModel& model, const Term& A, const Term& B, const Term& C, const RatMatrix& f,
                      const RatMatrix& g, const std::string& fname, const std::string& gname) {
  GysinNode out;
  out.k = B.k;
  out.label = term_name(A) + " -" + fname + "-> " + term_name(B) + " -" + gname + "-> " + term_name(C);
  auto chk = abelian::check_exact_rational(B.h.dim, on_classes(A, B, f), on_classes(B, C, g));
  out.composite_zero = chk.composite_zero;
  out.kernel_in_image = chk.kernel_in_image;
  out.rank_in = chk.rank_f;
  out.rank_out = chk.rank_g;
  out.dim_middle = chk.dim_middle;
  out.witnesses_verified = true;
  RatMatrix dB = d_F2_matrix(model, B.k - 1, B.m_lo, B.l_hi);
  for (const auto& [x, y] : chk.witnesses) {
    RatVector diff = B.h.lift(x), image = f.apply(A.h.lift(y));
    for (std::size_t t = 0; t < diff.size(); ++t) diff[t] -= image[t];
    if (abelian::is_zero_vector(diff)) continue;
    if (dB.cols() == 0 || !abelian::solve_rational(dB, diff)) out.witnesses_verified = false;
  }
  return out;
}

}  // namespace detail

/// Checks the three nodes at H^{k,(m,l)}, H^{k,(m+1,l)} and H^{k+1,(m,m)}
/// for every k in [k_min, k_max].
inline GysinReport bhm_gysin_check(const InvariantModel& model, int m, int l, int k_min, int k_max) {
  if (m < 0 || m >= l) throw InputError("derham::bhm_gysin_check: need 0 <= m < l");
  GysinReport rep{m, l, {}};
  using detail::term;
  for (int k = k_min; k <= k_max; ++k) {
    auto mm = term(model, k, m, m), ml = term(model, k, m, l), m1 = term(model, k, m + 1, l);
    auto mm_next = term(model, k + 1, m, m), ml_next = term(model, k + 1, m, l);
    RatMatrix in = include_matrix(model, k, m, l), pr = project_matrix(model, k, m, l);
    RatMatrix cn = connecting_matrix(model, k, m, l);
    rep.nodes.push_back(detail::node(model, mm, ml, m1, in, pr, "pi*", "pi_*"));
    rep.nodes.push_back(detail::node(model, ml, m1, mm_next, pr, cn, "pi_*", "^F2"));
    rep.nodes.push_back(detail::node(model, m1, mm_next, ml_next, cn, include_matrix(model, k + 1, m, l), "^F2", "pi*"));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Total-space oracle and pushforward

/// Chevalley-Eilenberg differential on Lambda^k of the algebra with
/// generators z_1..z_m, xi_1..xi_n: dz_c = structure[c], dxi_a = -F2^{(a)}.
inline RatMatrix ce_differential(const InvariantModel& model, int k) {
  if (!model.structure || !model.curvature)
    throw InputError("derham::ce_total_space: model has no Lie structure (torus or nilpotent base required)");
  const int m = model.m, total = m + static_cast<int>(model.n);
  std::vector<RatVector> structure;
  for (int c = 0; c < m; ++c) {
    RatVector row(binom(total, 2));
    SubsetIndex small(m, 2), big(total, 2);
    for (std::size_t p = 0; p < small.size(); ++p) row[big.at(small[p])] = (*model.structure)[c][p];
    structure.push_back(std::move(row));
  }
  for (std::size_t a = 0; a < model.n; ++a) {
    RatVector row(binom(total, 2));
    SubsetIndex small(m, 2), big(total, 2);
    for (std::size_t p = 0; p < small.size(); ++p) row[big.at(small[p])] = -model.curvature->rows[a][p];
    structure.push_back(std::move(row));
  }
  return lie_differential(total, k, structure);
}

inline std::size_t ce_total_space(const InvariantModel& model, int k) {
  const int total = model.m + static_cast<int>(model.n);
  ce_differential(model, 0);  // rejects models without Lie structure
  if (k < 0 || k > total) return 0;
  RatMatrix out = ce_differential(model, k), in = ce_differential(model, k - 1);
  std::size_t r_out = out.rows() == 0 || out.cols() == 0 ? 0 : abelian::rank(out);
  std::size_t r_in = in.rows() == 0 || in.cols() == 0 ? 0 : abelian::rank(in);
  return binom(total, k) - r_out - r_in;
}

struct PushforwardResult {
  BhmElement truncated;
  RatVector coordinates;  // in bhm_cohomology(model, k, m_lo + 1, l_hi)
  bool zero_class = false;
};

/// pi_*: H^{k,(m,l)} -> H^{k,(m+1,l)}, dropping the i = m summand of a closed
/// element.
inline PushforwardResult tdual_pushforward(const InvariantModel& model, const BhmElement& H) {
  if (H.m_lo >= H.l_hi) throw InputError("derham::tdual_pushforward: need m_lo < l_hi");
  if (!d_F2(model, H).is_zero()) throw PreconditionError("derham::tdual_pushforward: input is not D_F2-closed");
  PushforwardResult out;
  out.truncated = BhmElement::zero(model, H.k, H.m_lo + 1, H.l_hi);
  for (int i = H.m_lo + 1; i <= H.l_hi; ++i) out.truncated.component(i) = H.component(i);
  auto h = bhm_cohomology(model, H.k, H.m_lo + 1, H.l_hi);
  out.coordinates = h.coordinates(out.truncated.flatten());
  out.zero_class = abelian::is_zero_vector(out.coordinates);
  return out;
}

}  // namespace cechred::derham
