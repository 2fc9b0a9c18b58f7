#pragma once

// The three-column dimensionally reduced complex: C(F), the products
// cup1 / cup2 against F and C(F), the differentials D_F and D-bar_F, and the
// groups H^k_F and H-bar^k_F.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cechred/abelian.hpp"
#include "cechred/nerve.hpp"

namespace cechred {

namespace detail {

inline Rational parity_sign(int e) { return (e % 2 == 0) ? Rational(1) : Rational(-1); }

inline void require_shape(const Cochain& c, Shape shape, std::size_t n, const char* where) {
  if (c.system.shape != shape || (shape != Shape::Scalar && c.system.n != n))
    throw InputError(std::string(where) + ": coefficient shape mismatch");
}

inline std::size_t sub_index(const Nerve& nerve, const Simplex& s, std::size_t first, std::size_t last) {
  return nerve.at(Simplex(s.begin() + static_cast<long>(first), s.begin() + static_cast<long>(last) + 1));
}

}  // namespace detail

/// C(F)_{l0l1l2l3, ij} = F_{l0l1l2,i} F_{l0l2l3,j} - F_{l1l2l3,i} F_{l0l1l3,j}.
inline Cochain c_of_f(const Nerve& nerve, const Cochain& F) {
  if (F.degree != 2 || F.system.shape != Shape::Vector || F.system.ring != Ring::Z)
    throw InputError("dimred::c_of_f: F must be an integral vector 2-cochain");
  if (!is_cocycle(nerve, F)) throw PreconditionError("dimred::c_of_f: F is not a cocycle");
  const std::size_t n = F.system.n;
  Cochain C = Cochain::zero(nerve, 3, CoefficientSystem::upper(Ring::Z, n));
  for (std::size_t t = 0; t < C.simplex_count; ++t) {
    const Simplex& s = nerve.simplex(3, t);
    const std::size_t f012 = nerve.at({s[0], s[1], s[2]}), f023 = nerve.at({s[0], s[2], s[3]}),
                      f123 = nerve.at({s[1], s[2], s[3]}), f013 = nerve.at({s[0], s[1], s[3]});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        C.at(t, pair_index(i, j, n)) = F.at(f012, i) * F.at(f023, j) - F.at(f123, i) * F.at(f013, j);
  }
  return C;
}

/// Integral Euler representative F with its C(F), and optionally a rational
/// 1-cochain s with ds = F.
struct TwistData {
  std::size_t n = 1;
  Cochain F;
  Cochain CF;
  std::optional<Cochain> s;

  static TwistData from_F(const Nerve& nerve, Cochain F) {
    TwistData t;
    if (F.system.shape != Shape::Vector) throw InputError("dimred::TwistData: F must be vector valued");
    t.n = F.system.n;
    t.CF = c_of_f(nerve, F);
    t.F = std::move(F);
    return t;
  }

  static TwistData zero(const Nerve& nerve, std::size_t n) {
    return from_F(nerve, Cochain::zero(nerve, 2, CoefficientSystem::vector(Ring::Z, n)));
  }

  /// F := ds, which must be integral.
  static TwistData from_s(const Nerve& nerve, Cochain s) {
    if (s.degree != 1 || s.system.shape != Shape::Vector)
      throw InputError("dimred::TwistData: s must be a vector 1-cochain");
    Cochain ds = cech_differential(nerve, change_ring(s, Ring::Q));
    for (const auto& v : ds.values)
      if (v.get_den() != 1) throw PreconditionError("dimred::TwistData: ds is not integral");
    TwistData t = from_F(nerve, change_ring(ds, Ring::Z));
    t.s = change_ring(std::move(s), Ring::Q);
    return t;
  }
};

// ---------------------------------------------------------------------------
// Products against F and C(F)

/// (phi u1 F)_{l0..l_{p+2}} = sum_l phi_{l0..lp, l} F_{lp l_{p+1} l_{p+2}, l}.
inline Cochain cup1_vec(const Nerve& nerve, const Cochain& phi, const Cochain& F) {
  const std::size_t n = F.system.n;
  detail::require_shape(phi, Shape::Vector, n, "dimred::cup1_vec");
  const int p = phi.degree;
  Cochain out = Cochain::zero(nerve, p + 2, phi.system.with_shape(Shape::Scalar, 1));
  if (p < 0) return out;
  for (std::size_t t = 0; t < out.simplex_count; ++t) {
    const Simplex& s = nerve.simplex(p + 2, t);
    const std::size_t a = detail::sub_index(nerve, s, 0, p), f = detail::sub_index(nerve, s, p, p + 2);
    for (std::size_t l = 0; l < n; ++l) out.at(t) += phi.at(a, l) * F.at(f, l);
  }
  if (out.system.ring == Ring::QmodZ) out.normalize();
  return out;
}

/// (phi u1 F)_{.., l} = sum_{i<l} phi_{il} F_i - sum_{l<j} phi_{lj} F_j, with
/// phi on the front p-face and F on the back 2-face.
inline Cochain cup1_mat(const Nerve& nerve, const Cochain& phi, const Cochain& F) {
  const std::size_t n = F.system.n;
  detail::require_shape(phi, Shape::Upper, n, "dimred::cup1_mat");
  const int p = phi.degree;
  Cochain out = Cochain::zero(nerve, p + 2, phi.system.with_shape(Shape::Vector, n));
  if (p < 0) return out;
  for (std::size_t t = 0; t < out.simplex_count; ++t) {
    const Simplex& s = nerve.simplex(p + 2, t);
    const std::size_t a = detail::sub_index(nerve, s, 0, p), f = detail::sub_index(nerve, s, p, p + 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const Rational& v = phi.at(a, pair_index(i, j, n));
        out.at(t, j) += v * F.at(f, i);
        out.at(t, i) -= v * F.at(f, j);
      }
  }
  if (out.system.ring == Ring::QmodZ) out.normalize();
  return out;
}

/// (phi u2 C(F))_{l0..l_{p+3}} = sum_{i<j} phi_{l0..lp, ij} C(F)_{lp..l_{p+3}, ij}.
inline Cochain cup2(const Nerve& nerve, const Cochain& phi, const Cochain& CF) {
  const std::size_t n = CF.system.n;
  detail::require_shape(phi, Shape::Upper, n, "dimred::cup2");
  const int p = phi.degree;
  Cochain out = Cochain::zero(nerve, p + 3, phi.system.with_shape(Shape::Scalar, 1));
  if (p < 0) return out;
  const std::size_t P = pair_count(n);
  for (std::size_t t = 0; t < out.simplex_count; ++t) {
    const Simplex& s = nerve.simplex(p + 3, t);
    const std::size_t a = detail::sub_index(nerve, s, 0, p), c = detail::sub_index(nerve, s, p, p + 3);
    for (std::size_t q = 0; q < P; ++q) out.at(t) += phi.at(a, q) * CF.at(c, q);
  }
  if (out.system.ring == Ring::QmodZ) out.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// Cochains of the reduced complexes

/// (top, mid, bot) of degrees (k, k-1, k-2); slots of negative degree are
/// empty cochains.
struct DimRedCochain {
  int k = 0;
  Cochain top, mid, bot;

  static DimRedCochain zero(const Nerve& nerve, int k, std::size_t n, const CoefficientSystem& scalar) {
    return {k, Cochain::zero(nerve, k, scalar.with_shape(Shape::Scalar, 1)),
            Cochain::zero(nerve, k - 1, scalar.with_shape(Shape::Vector, n)),
            Cochain::zero(nerve, k - 2, scalar.with_shape(Shape::Upper, n))};
  }

  bool is_zero() const { return top.is_zero() && mid.is_zero() && bot.is_zero(); }
  std::size_t size() const { return top.values.size() + mid.values.size() + bot.values.size(); }

  RatVector flatten() const {
    RatVector v(top.values);
    v.insert(v.end(), mid.values.begin(), mid.values.end());
    v.insert(v.end(), bot.values.begin(), bot.values.end());
    return v;
  }

  static DimRedCochain unflatten(const Nerve& nerve, int k, std::size_t n, const CoefficientSystem& scalar,
                                 std::span<const Rational> v) {
    DimRedCochain c = zero(nerve, k, n, scalar);
    if (v.size() != c.size()) throw InputError("dimred::DimRedCochain: wrong vector length");
    auto it = v.begin();
    for (Cochain* slot : {&c.top, &c.mid, &c.bot}) {
      std::copy(it, it + static_cast<long>(slot->values.size()), slot->values.begin());
      it += static_cast<long>(slot->values.size());
      slot->normalize();
    }
    return c;
  }

  friend bool operator==(const DimRedCochain& a, const DimRedCochain& b) {
    return a.k == b.k && a.top == b.top && a.mid == b.mid && a.bot == b.bot;
  }
};

/// (mid, bot) of degrees (k, k-1).
struct TruncatedCochain {
  int k = 0;
  Cochain mid, bot;

  static TruncatedCochain zero(const Nerve& nerve, int k, std::size_t n, const CoefficientSystem& scalar) {
    return {k, Cochain::zero(nerve, k, scalar.with_shape(Shape::Vector, n)),
            Cochain::zero(nerve, k - 1, scalar.with_shape(Shape::Upper, n))};
  }

  bool is_zero() const { return mid.is_zero() && bot.is_zero(); }
  std::size_t size() const { return mid.values.size() + bot.values.size(); }

  RatVector flatten() const {
    RatVector v(mid.values);
    v.insert(v.end(), bot.values.begin(), bot.values.end());
    return v;
  }

  static TruncatedCochain unflatten(const Nerve& nerve, int k, std::size_t n, const CoefficientSystem& scalar,
                                    std::span<const Rational> v) {
    TruncatedCochain c = zero(nerve, k, n, scalar);
    if (v.size() != c.size()) throw InputError("dimred::TruncatedCochain: wrong vector length");
    std::copy(v.begin(), v.begin() + static_cast<long>(c.mid.values.size()), c.mid.values.begin());
    std::copy(v.begin() + static_cast<long>(c.mid.values.size()), v.end(), c.bot.values.begin());
    c.mid.normalize();
    c.bot.normalize();
    return c;
  }

  friend bool operator==(const TruncatedCochain& a, const TruncatedCochain& b) {
    return a.k == b.k && a.mid == b.mid && a.bot == b.bot;
  }
};

/// D_F(top, mid, bot) = (d top + (-1)^{k+1} mid u1 F + (-1)^{k+1} bot u2 C(F),
///                       d mid + (-1)^k bot u1 F, d bot).
inline DimRedCochain d_F(const Nerve& nerve, const DimRedCochain& c, const TwistData& tw) {
  DimRedCochain out{c.k + 1, cech_differential(nerve, c.top), cech_differential(nerve, c.mid),
                    cech_differential(nerve, c.bot)};
  const Rational s1 = detail::parity_sign(c.k + 1);
  out.top += s1 * cup1_vec(nerve, c.mid, tw.F);
  out.top += s1 * cup2(nerve, c.bot, tw.CF);
  out.mid += detail::parity_sign(c.k) * cup1_mat(nerve, c.bot, tw.F);
  return out;
}

/// D-bar_F(mid, bot) = (d mid + (-1)^{k+1} bot u1 F, d bot) for mid of
/// degree k: the lower two slots of D_F, so that dropping the top slot is a
/// chain map.
inline TruncatedCochain d_bar_F(const Nerve& nerve, const TruncatedCochain& c, const TwistData& tw) {
  TruncatedCochain out{c.k + 1, cech_differential(nerve, c.mid), cech_differential(nerve, c.bot)};
  out.mid += detail::parity_sign(c.k + 1) * cup1_mat(nerve, c.bot, tw.F);
  return out;
}

// ---------------------------------------------------------------------------
// Matrices

struct DimRedLayout {
  std::size_t top = 0, mid = 0, bot = 0;
  std::size_t total() const { return top + mid + bot; }
};

inline DimRedLayout dimred_layout(const Nerve& nerve, int k, std::size_t n) {
  return {nerve.count(k), nerve.count(k - 1) * n, nerve.count(k - 2) * pair_count(n)};
}

/// Truncated layout uses the mid and bot fields only.
inline DimRedLayout truncated_layout(const Nerve& nerve, int k, std::size_t n) {
  return {0, nerve.count(k) * n, nerve.count(k - 1) * pair_count(n)};
}

namespace detail {

inline void place(abelian::IntMatrix& M, std::size_t r0, std::size_t c0, const abelian::IntMatrix& B) {
  for (std::size_t r = 0; r < B.rows(); ++r)
    for (std::size_t c = 0; c < B.cols(); ++c)
      if (sgn(B(r, c)) != 0) M(r0 + r, c0 + c) += B(r, c);
}

inline Integer int_value(const Cochain& c, std::size_t s, std::size_t l) { return c.at(s, l).get_num(); }

// Block for bot (degree p, upper) -> mid (degree p+2, vector) of phi u1 F.
inline void place_cup1_mat(abelian::IntMatrix& M, std::size_t r0, std::size_t c0, const Nerve& nerve, int p,
                           const TwistData& tw, long sign) {
  const std::size_t n = tw.n;
  for (std::size_t t = 0; t < nerve.count(p + 2); ++t) {
    const Simplex& s = nerve.simplex(p + 2, t);
    const std::size_t a = sub_index(nerve, s, 0, p), f = sub_index(nerve, s, p, p + 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t col = c0 + a * pair_count(n) + pair_index(i, j, n);
        M(r0 + t * n + j, col) += sign * int_value(tw.F, f, i);
        M(r0 + t * n + i, col) -= sign * int_value(tw.F, f, j);
      }
  }
}

}  // namespace detail

/// Matrix of D_F : C^k -> C^{k+1} in the flattened (top, mid, bot) layout.
inline abelian::IntMatrix d_F_matrix(const Nerve& nerve, const TwistData& tw, int k) {
  const std::size_t n = tw.n, P = pair_count(n);
  const DimRedLayout in = dimred_layout(nerve, k, n), out = dimred_layout(nerve, k + 1, n);
  abelian::IntMatrix M(out.total(), in.total());
  detail::place(M, 0, 0, coboundary_matrix(nerve, k, 1));
  detail::place(M, out.top, in.top, coboundary_matrix(nerve, k - 1, n));
  detail::place(M, out.top + out.mid, in.top + in.mid, coboundary_matrix(nerve, k - 2, P));
  const long s1 = ((k + 1) % 2 == 0) ? 1 : -1;
  // top <- mid u1 F
  if (k - 1 >= 0)
    for (std::size_t t = 0; t < nerve.count(k + 1); ++t) {
      const Simplex& s = nerve.simplex(k + 1, t);
      const std::size_t a = detail::sub_index(nerve, s, 0, k - 1), f = detail::sub_index(nerve, s, k - 1, k + 1);
      for (std::size_t l = 0; l < n; ++l) M(t, in.top + a * n + l) += s1 * detail::int_value(tw.F, f, l);
    }
  // top <- bot u2 C(F)
  if (k - 2 >= 0 && P > 0)
    for (std::size_t t = 0; t < nerve.count(k + 1); ++t) {
      const Simplex& s = nerve.simplex(k + 1, t);
      const std::size_t a = detail::sub_index(nerve, s, 0, k - 2), c = detail::sub_index(nerve, s, k - 2, k + 1);
      for (std::size_t q = 0; q < P; ++q)
        M(t, in.top + in.mid + a * P + q) += s1 * detail::int_value(tw.CF, c, q);
    }
  // mid <- bot u1 F
  if (k - 2 >= 0) detail::place_cup1_mat(M, out.top, in.top + in.mid, nerve, k - 2, tw, (k % 2 == 0) ? 1 : -1);
  return M;
}

/// Matrix of D-bar_F : (mid deg k, bot deg k-1) -> (mid deg k+1, bot deg k).
inline abelian::IntMatrix d_bar_F_matrix(const Nerve& nerve, const TwistData& tw, int k) {
  const std::size_t n = tw.n, P = pair_count(n);
  const DimRedLayout in = truncated_layout(nerve, k, n), out = truncated_layout(nerve, k + 1, n);
  abelian::IntMatrix M(out.total(), in.total());
  detail::place(M, 0, 0, coboundary_matrix(nerve, k, n));
  detail::place(M, out.mid, in.mid, coboundary_matrix(nerve, k - 1, P));
  if (k - 1 >= 0) detail::place_cup1_mat(M, 0, in.mid, nerve, k - 1, tw, ((k + 1) % 2 == 0) ? 1 : -1);
  return M;
}

// ---------------------------------------------------------------------------
// Cohomology

inline abelian::FpAbelianGroup dimred_cohomology(const Nerve& nerve, const TwistData& tw, Ring ring, int k,
                                                 abelian::PivotRule rule = abelian::PivotRule::SmallestMagnitude) {
  if (k < 0) throw InputError("dimred::dimred_cohomology: negative degree");
  abelian::IntMatrix d_out = d_F_matrix(nerve, tw, k), d_in = d_F_matrix(nerve, tw, k - 1);
  switch (ring) {
    case Ring::Z: return abelian::homology_quotient(d_out, d_in, rule);
    case Ring::Q:
      return abelian::as_free_group(abelian::rational_homology(abelian::to_rational(d_out), abelian::to_rational(d_in)),
                                    d_out);
    case Ring::QmodZ: break;
  }
  throw UnsupportedRing("dimred::dimred_cohomology: Q/Z classes go through gysin::bockstein_zigzag");
}

inline abelian::FpAbelianGroup dimred_bar_cohomology(const Nerve& nerve, const TwistData& tw, Ring ring, int k,
                                                     abelian::PivotRule rule = abelian::PivotRule::SmallestMagnitude) {
  if (k < 0) throw InputError("dimred::dimred_bar_cohomology: negative degree");
  abelian::IntMatrix d_out = d_bar_F_matrix(nerve, tw, k), d_in = d_bar_F_matrix(nerve, tw, k - 1);
  switch (ring) {
    case Ring::Z: return abelian::homology_quotient(d_out, d_in, rule);
    case Ring::Q:
      return abelian::as_free_group(abelian::rational_homology(abelian::to_rational(d_out), abelian::to_rational(d_in)),
                                    d_out);
    case Ring::QmodZ: break;
  }
  throw UnsupportedRing("dimred::dimred_bar_cohomology: Q/Z classes go through gysin::bockstein_zigzag");
}

// ---------------------------------------------------------------------------
// Random twists

/// Random integral 2-cocycle in C^2(nerve; Z^n): the coboundary of a random
/// 1-cochain plus random multiples of the integral H^2 generators.
inline Cochain random_cocycle_F(std::mt19937_64& rng, const Nerve& nerve, std::size_t n, long spread = 2) {
  std::uniform_int_distribution<long> dist(-spread, spread);
  Cochain b = Cochain::zero(nerve, 1, CoefficientSystem::vector(Ring::Z, n));
  for (auto& v : b.values) v = dist(rng);
  Cochain F = cech_differential(nerve, b);
  if (nerve.count(2) > 0) {
    auto h2 = cech_cohomology(nerve, CoefficientSystem::vector(Ring::Z, n), 2);
    for (const auto& g : h2.generators) {
      const long m = dist(rng);
      for (std::size_t i = 0; i < g.size(); ++i) F.values[i] += m * g[i];
    }
  }
  return F;
}

/// Random rational 1-cochain with integral coboundary:
/// s = (dy + denominator * x + w) / denominator for random integer cochains
/// y (degree 0), x (degree 1) and an integral 1-cocycle w, so ds = dx.
inline Cochain random_rational_s(std::mt19937_64& rng, const Nerve& nerve, std::size_t n, long denominator) {
  std::uniform_int_distribution<long> dist(-3, 3);
  const CoefficientSystem vq = CoefficientSystem::vector(Ring::Q, n);
  Cochain x = Cochain::zero(nerve, 1, vq), y = Cochain::zero(nerve, 0, vq);
  for (auto& v : x.values) v = dist(rng);
  for (auto& v : y.values) v = dist(rng);
  Cochain s = cech_differential(nerve, y) + Rational(denominator) * x;
  if (nerve.count(1) > 0) {
    auto h1 = cech_cohomology(nerve, CoefficientSystem::vector(Ring::Z, n), 1);
    for (const auto& g : h1.generators) {
      const long m = dist(rng);
      for (std::size_t i = 0; i < g.size(); ++i) s.values[i] += m * g[i];
    }
  }
  s *= Rational(1, denominator);
  return s;
}

}  // namespace cechred
