#pragma once

// Finite nerves, Cech cochains with constant coefficients, the Cech
// differential, plain Cech cohomology, cup / cup-1 products and fixtures.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cechred/abelian.hpp"
#include "cechred/errors.hpp"

namespace cechred {

using Simplex = std::vector<int>;

/// Finite ordered simplicial complex, closed under faces. Simplices of each
/// dimension are stored in lexicographic order.
class Nerve {
 public:
  Nerve() = default;

  /// Face closure of the given simplices on vertices 0..vertex_count-1.
  /// Every vertex becomes a 0-simplex even if no maximal simplex names it.
  static Nerve from_maximal(int vertex_count, const std::vector<Simplex>& maximal) {
    if (vertex_count < 1) throw InputError("nerve::from_maximal: need at least one vertex");
    std::vector<std::set<Simplex>> by_dim(1);
    for (int v = 0; v < vertex_count; ++v) by_dim[0].insert({v});
    for (Simplex s : maximal) {
      if (s.empty()) throw InputError("nerve::from_maximal: empty simplex");
      std::sort(s.begin(), s.end());
      if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw InputError("nerve::from_maximal: repeated vertex in simplex");
      if (s.front() < 0 || s.back() >= vertex_count)
        throw InputError("nerve::from_maximal: vertex out of range");
      // All nonempty subsets.
      const std::size_t m = s.size();
      if (m > 20) throw InputError("nerve::from_maximal: simplex dimension too large");
      if (by_dim.size() < m) by_dim.resize(m);
      for (unsigned long mask = 1; mask < (1ul << m); ++mask) {
        Simplex face;
        for (std::size_t i = 0; i < m; ++i)
          if (mask & (1ul << i)) face.push_back(s[i]);
        by_dim[face.size() - 1].insert(std::move(face));
      }
    }
    Nerve n;
    n.vertex_count_ = vertex_count;
    for (auto& level : by_dim) {
      n.simplices_.emplace_back(level.begin(), level.end());
      std::map<Simplex, std::size_t> idx;
      for (std::size_t i = 0; i < n.simplices_.back().size(); ++i) idx.emplace(n.simplices_.back()[i], i);
      n.index_.push_back(std::move(idx));
    }
    n.build_faces();
    return n;
  }

  int vertex_count() const { return vertex_count_; }
  int dimension() const { return static_cast<int>(simplices_.size()) - 1; }

  std::size_t count(int k) const {
    return (k < 0 || k > dimension()) ? 0 : simplices_[static_cast<std::size_t>(k)].size();
  }

  const std::vector<Simplex>& simplices(int k) const {
    static const std::vector<Simplex> empty;
    return (k < 0 || k > dimension()) ? empty : simplices_[static_cast<std::size_t>(k)];
  }

  const Simplex& simplex(int k, std::size_t i) const { return simplices(k).at(i); }

  std::optional<std::size_t> index_of(const Simplex& s) const {
    if (s.empty() || static_cast<int>(s.size()) - 1 > dimension()) return std::nullopt;
    const auto& idx = index_[s.size() - 1];
    auto it = idx.find(s);
    if (it == idx.end()) return std::nullopt;
    return it->second;
  }

  /// Index of a simplex known to be present.
  std::size_t at(const Simplex& s) const {
    auto i = index_of(s);
    if (!i) throw InputError("nerve: simplex not in nerve");
    return *i;
  }

  /// faces(k, i)[j] = index of the (k-1)-face of simplex i omitting vertex j.
  const std::vector<std::size_t>& faces(int k, std::size_t i) const {
    return faces_.at(static_cast<std::size_t>(k)).at(i);
  }

  std::vector<Simplex> maximal_simplices() const {
    std::vector<Simplex> out;
    for (int k = dimension(); k >= 0; --k)
      for (const auto& s : simplices(k)) {
        bool covered = false;
        for (const auto& t : out)
          if (std::includes(t.begin(), t.end(), s.begin(), s.end())) {
            covered = true;
            break;
          }
        if (!covered) out.push_back(s);
      }
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const Nerve& a, const Nerve& b) {
    return a.vertex_count_ == b.vertex_count_ && a.simplices_ == b.simplices_;
  }

 private:
  void build_faces() {
    faces_.assign(simplices_.size(), {});
    for (std::size_t k = 1; k < simplices_.size(); ++k) {
      faces_[k].reserve(simplices_[k].size());
      for (const auto& s : simplices_[k]) {
        std::vector<std::size_t> f(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) {
          Simplex face;
          for (std::size_t t = 0; t < s.size(); ++t)
            if (t != j) face.push_back(s[t]);
          f[j] = index_[k - 1].at(face);
        }
        faces_[k].push_back(std::move(f));
      }
    }
  }

  int vertex_count_ = 0;
  std::vector<std::vector<Simplex>> simplices_;
  std::vector<std::map<Simplex, std::size_t>> index_;
  std::vector<std::vector<std::vector<std::size_t>>> faces_;
};

// ---------------------------------------------------------------------------
// Coefficient systems and cochains

enum class Ring { Z, Q, QmodZ };
enum class Shape { Scalar, Vector, Upper };

/// Index of the pair (i, j), i < j < n, in lexicographic order.
inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

struct CoefficientSystem {
  Ring ring = Ring::Z;
  Integer modulus = 1;  // only meaningful for QmodZ
  Shape shape = Shape::Scalar;
  std::size_t n = 1;

  static CoefficientSystem scalar(Ring r, Integer N = 1) { return {r, N, Shape::Scalar, 1}; }
  static CoefficientSystem vector(Ring r, std::size_t n, Integer N = 1) { return {r, N, Shape::Vector, n}; }
  static CoefficientSystem upper(Ring r, std::size_t n, Integer N = 1) { return {r, N, Shape::Upper, n}; }

  std::size_t width() const {
    switch (shape) {
      case Shape::Scalar: return 1;
      case Shape::Vector: return n;
      case Shape::Upper: return pair_count(n);
    }
    return 1;
  }

  CoefficientSystem with_shape(Shape s, std::size_t m) const { return {ring, modulus, s, m}; }
  CoefficientSystem with_ring(Ring r, Integer N = 1) const { return {r, N, shape, n}; }

  void validate() const {
    if (n < 1) throw InputError("nerve::CoefficientSystem: n must be at least 1");
    if (ring == Ring::QmodZ && modulus < 1) throw InputError("nerve::CoefficientSystem: modulus must be >= 1");
  }

  friend bool operator==(const CoefficientSystem&, const CoefficientSystem&) = default;
};

inline std::string ring_name(const CoefficientSystem& s) {
  switch (s.ring) {
    case Ring::Z: return "Z";
    case Ring::Q: return "Q";
    case Ring::QmodZ: return "Q/Z(" + s.modulus.get_str() + ")";
  }
  return "?";
}

/// Reduce a rational into [0, 1).
inline Rational frac(const Rational& q) {
  Integer fl;
  mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return q - Rational(fl);
}

inline Integer floor_of(const Rational& q) {
  Integer fl;
  mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return fl;
}

/// Degree-k cochain with one coefficient vector per k-simplex. Values are
/// stored densely, simplex-major and component-minor; absent entries are zero.
struct Cochain {
  int degree = 0;
  CoefficientSystem system;
  std::size_t simplex_count = 0;
  RatVector values;

  static Cochain zero(const Nerve& nerve, int k, const CoefficientSystem& system) {
    system.validate();
    Cochain c;
    c.degree = k;
    c.system = system;
    c.simplex_count = nerve.count(k);
    c.values.assign(c.simplex_count * system.width(), Rational(0));
    return c;
  }

  /// Cochain from a dense value vector, checked against the ring.
  static Cochain from_values(const Nerve& nerve, int k, const CoefficientSystem& system, RatVector values) {
    Cochain c = zero(nerve, k, system);
    if (values.size() != c.values.size())
      throw InputError("nerve::Cochain: expected " + std::to_string(c.values.size()) + " values, got " +
                       std::to_string(values.size()));
    c.values = std::move(values);
    c.normalize();
    return c;
  }

  static Cochain from_integers(const Nerve& nerve, int k, const CoefficientSystem& system,
                               std::span<const Integer> values) {
    return from_values(nerve, k, system, abelian::to_rational(values));
  }

  std::size_t width() const { return system.width(); }

  Rational& at(std::size_t simplex, std::size_t component = 0) { return values[simplex * width() + component]; }
  const Rational& at(std::size_t simplex, std::size_t component = 0) const {
    return values[simplex * width() + component];
  }

  bool is_zero() const { return abelian::is_zero_vector(std::span<const Rational>(values)); }

  /// Checks ring membership; reduces Q/Z values into [0, 1).
  void normalize() {
    for (auto& v : values) {
      v.canonicalize();
      switch (system.ring) {
        case Ring::Z:
          if (v.get_den() != 1) throw InputError("nerve::Cochain: non-integer value " + v.get_str() + " over Z");
          break;
        case Ring::Q: break;
        case Ring::QmodZ:
          if (!mpz_divisible_p(system.modulus.get_mpz_t(), v.get_den_mpz_t()))
            throw InputError("nerve::Cochain: denominator of " + v.get_str() + " does not divide modulus " +
                             system.modulus.get_str());
          v = frac(v);
          break;
      }
    }
  }

  IntVector integer_values() const { return abelian::to_integer(values, "nerve::Cochain::integer_values"); }

  /// Component l of a vector or upper cochain, as a scalar cochain.
  Cochain component(std::size_t l) const {
    Cochain c;
    c.degree = degree;
    c.system = system.with_shape(Shape::Scalar, 1);
    c.simplex_count = simplex_count;
    c.values.resize(simplex_count);
    for (std::size_t s = 0; s < simplex_count; ++s) c.values[s] = at(s, l);
    return c;
  }

  friend bool operator==(const Cochain& a, const Cochain& b) {
    return a.degree == b.degree && a.system == b.system && a.values == b.values;
  }

  Cochain& operator+=(const Cochain& o) {
    require_same(o, "nerve::Cochain::+=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    if (system.ring == Ring::QmodZ) normalize();
    return *this;
  }
  Cochain& operator-=(const Cochain& o) {
    require_same(o, "nerve::Cochain::-=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    if (system.ring == Ring::QmodZ) normalize();
    return *this;
  }
  Cochain& operator*=(const Rational& q) {
    for (auto& v : values) v *= q;
    if (system.ring == Ring::QmodZ) normalize();
    return *this;
  }
  friend Cochain operator+(Cochain a, const Cochain& b) { return a += b; }
  friend Cochain operator-(Cochain a, const Cochain& b) { return a -= b; }
  friend Cochain operator*(const Rational& q, Cochain a) { return a *= q; }

  void require_same(const Cochain& o, const char* where) const {
    if (degree != o.degree || system.shape != o.system.shape || system.n != o.system.n ||
        values.size() != o.values.size())
      throw InputError(std::string(where) + ": cochains of different degree or shape");
  }
};

/// Same cochain regarded over another ring (values re-checked).
inline Cochain change_ring(Cochain c, Ring r, Integer N = 1) {
  c.system = c.system.with_ring(r, N);
  c.normalize();
  return c;
}

/// Coboundary matrix C^k -> C^{k+1} for coefficient width w.
inline abelian::IntMatrix coboundary_matrix(const Nerve& nerve, int k, std::size_t w = 1) {
  const std::size_t rows = nerve.count(k + 1) * w, cols = nerve.count(k) * w;
  abelian::IntMatrix d(rows, cols);
  if (k < 0 || rows == 0 || cols == 0) return d;
  for (std::size_t s = 0; s < nerve.count(k + 1); ++s) {
    const auto& f = nerve.faces(k + 1, s);
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t c = 0; c < w; ++c) d(s * w + c, f[i] * w + c) += (i % 2 == 0) ? 1 : -1;
  }
  return d;
}

/// (dc)_{l0..l_{k+1}} = sum_i (-1)^i c_{l0..^li..l_{k+1}}.
inline Cochain cech_differential(const Nerve& nerve, const Cochain& c) {
  if (c.simplex_count != nerve.count(c.degree))
    throw InputError("nerve::cech_differential: cochain does not match nerve");
  Cochain out = Cochain::zero(nerve, c.degree + 1, c.system);
  const std::size_t w = c.width();
  if (c.degree < 0) return out;
  for (std::size_t s = 0; s < out.simplex_count; ++s) {
    const auto& f = nerve.faces(c.degree + 1, s);
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t l = 0; l < w; ++l) {
        if (i % 2 == 0)
          out.at(s, l) += c.at(f[i], l);
        else
          out.at(s, l) -= c.at(f[i], l);
      }
  }
  if (c.system.ring == Ring::QmodZ) out.normalize();
  return out;
}

inline bool is_cocycle(const Nerve& nerve, const Cochain& c) { return cech_differential(nerve, c).is_zero(); }

/// Rational Cech cohomology with an explicit complement basis.
inline abelian::RationalHomology rational_cech_cohomology(const Nerve& nerve, int k, std::size_t w = 1) {
  return abelian::rational_homology(abelian::to_rational(coboundary_matrix(nerve, k, w)),
                                    abelian::to_rational(coboundary_matrix(nerve, k - 1, w)));
}

/// H^k(nerve; ring^width). Over Q the result is a free group whose rank is
/// the Q-dimension; its coordinate_map gives rational coordinates.
inline abelian::FpAbelianGroup cech_cohomology(const Nerve& nerve, const CoefficientSystem& system, int k,
                                               abelian::PivotRule rule = abelian::PivotRule::SmallestMagnitude) {
  system.validate();
  const std::size_t w = system.width();
  if (k < 0) throw InputError("nerve::cech_cohomology: negative degree");
  switch (system.ring) {
    case Ring::Z:
      return abelian::homology_quotient(coboundary_matrix(nerve, k, w), coboundary_matrix(nerve, k - 1, w), rule);
    case Ring::Q:
      return abelian::as_free_group(rational_cech_cohomology(nerve, k, w), coboundary_matrix(nerve, k, w));
    case Ring::QmodZ:
      throw UnsupportedRing(
          "nerve::cech_cohomology: Q/Z coefficients are not computed as a group; use the Bockstein zig-zag "
          "(gysin::bockstein_zigzag) for Q/Z classes");
  }
  return {};
}

// ---------------------------------------------------------------------------
// Products

namespace detail {

inline Ring product_ring(const Cochain& a, const Cochain& b) {
  if (a.system.ring == Ring::QmodZ || b.system.ring == Ring::QmodZ)
    throw UnsupportedRing("nerve: products are defined for Z or Q cochains");
  return (a.system.ring == Ring::Z && b.system.ring == Ring::Z) ? Ring::Z : Ring::Q;
}

inline void require_scalar(const Cochain& c, const char* where) {
  if (c.system.shape != Shape::Scalar) throw InputError(std::string(where) + ": scalar cochain expected");
}

inline Simplex slice(const Simplex& s, std::size_t first, std::size_t last) {
  return Simplex(s.begin() + static_cast<long>(first), s.begin() + static_cast<long>(last) + 1);
}

}  // namespace detail

/// (a u b)_{l0..l_{p+q}} = a_{l0..lp} * b_{lp..l_{p+q}}.
inline Cochain cup(const Nerve& nerve, const Cochain& a, const Cochain& b) {
  detail::require_scalar(a, "nerve::cup");
  detail::require_scalar(b, "nerve::cup");
  const Ring r = detail::product_ring(a, b);
  const int p = a.degree, q = b.degree;
  Cochain out = Cochain::zero(nerve, p + q, CoefficientSystem::scalar(r));
  for (std::size_t s = 0; s < out.simplex_count; ++s) {
    const Simplex& sim = nerve.simplex(p + q, s);
    out.at(s) = a.at(nerve.at(detail::slice(sim, 0, p))) * b.at(nerve.at(detail::slice(sim, p, p + q)));
  }
  return out;
}

/// Steenrod cup-1:
///   (a u1 b)(v0..vn) = sum_{i=0}^{p-1} (-1)^{(p-i)(q+1)} a(v0..vi, v_{i+q}..vn) b(vi..v_{i+q})
/// with n = p+q-1. With this sign, d(a u1 b) = da u1 b + (-1)^p a u1 db
/// + (-1)^{p+q+1} a u b + (-1)^{pq+p+q} b u a.
inline Cochain cup1(const Nerve& nerve, const Cochain& a, const Cochain& b) {
  detail::require_scalar(a, "nerve::cup1");
  detail::require_scalar(b, "nerve::cup1");
  const Ring r = detail::product_ring(a, b);
  const int p = a.degree, q = b.degree, n = p + q - 1;
  Cochain out = Cochain::zero(nerve, n, CoefficientSystem::scalar(r));
  if (p == 0 || q == 0 || n < 0) return out;
  for (std::size_t s = 0; s < out.simplex_count; ++s) {
    const Simplex& sim = nerve.simplex(n, s);
    Rational total = 0;
    for (int i = 0; i <= p - 1; ++i) {
      const int j = i + q;
      Simplex front = detail::slice(sim, 0, i);
      for (int t = j; t <= n; ++t) front.push_back(sim[t]);
      const Rational term = a.at(nerve.at(front)) * b.at(nerve.at(detail::slice(sim, i, j)));
      if (((p - i) * (q + 1)) % 2 == 0)
        total += term;
      else
        total -= term;
    }
    out.at(s) = total;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixtures

struct Fixture {
  std::string name;
  Nerve nerve;
  /// Integral 2-cocycle generating H^2(Z) = Z, when the fixture ships one.
  std::optional<Cochain> h2_generator;
};

inline Nerve simplex_nerve(int k) {
  if (k < 0 || k > 12) throw InputError("nerve::fixture: simplex dimension out of range");
  Simplex s(static_cast<std::size_t>(k + 1));
  for (int i = 0; i <= k; ++i) s[static_cast<std::size_t>(i)] = i;
  return Nerve::from_maximal(k + 1, {s});
}

inline Nerve torus7_nerve() {
  std::vector<Simplex> tris;
  for (int i = 0; i < 7; ++i) {
    tris.push_back({i, (i + 1) % 7, (i + 3) % 7});
    tris.push_back({i, (i + 2) % 7, (i + 3) % 7});
  }
  return Nerve::from_maximal(7, tris);
}

inline Nerve projective6_nerve() {
  // {123,134,145,156,162,235,346,452,563,624}, relabelled to start at 0.
  return Nerve::from_maximal(6, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}, {0, 1, 5},
                                 {1, 2, 4}, {2, 3, 5}, {1, 3, 4}, {2, 4, 5}, {1, 3, 5}});
}

inline std::vector<std::string> fixture_names() {
  return {"point", "simplex(2)", "circle3", "torus7", "sphere_tetra", "projective6"};
}

namespace detail {

/// Indicator of the first triangle, checked by SNF to generate H^2 = Z.
inline Cochain facet_generator(const Nerve& nerve) {
  Cochain c = Cochain::zero(nerve, 2, CoefficientSystem::scalar(Ring::Z));
  c.at(0) = 1;
  auto h2 = cech_cohomology(nerve, c.system, 2);
  if (h2.free_rank != 1 || !h2.torsion.empty())
    throw ModelViolation("nerve::fixture: H^2 is not Z");
  IntVector coords = h2.coordinates(c.integer_values());
  if (abs(coords[0]) != 1) throw ModelViolation("nerve::fixture: facet cocycle does not generate H^2");
  return c;
}

}  // namespace detail

inline Fixture fixture(const std::string& name) {
  Fixture f;
  f.name = name;
  if (name == "point") {
    f.nerve = Nerve::from_maximal(1, {});
  } else if (name.rfind("simplex", 0) == 0) {
    std::string arg = name.substr(7);
    if (arg.size() >= 2 && arg.front() == '(' && arg.back() == ')') arg = arg.substr(1, arg.size() - 2);
    if (arg.empty() || !std::all_of(arg.begin(), arg.end(), ::isdigit))
      throw InputError("nerve::fixture: bad simplex fixture '" + name + "'");
    f.nerve = simplex_nerve(std::stoi(arg));
  } else if (name == "circle3") {
    f.nerve = Nerve::from_maximal(3, {{0, 1}, {1, 2}, {0, 2}});
  } else if (name == "torus7") {
    f.nerve = torus7_nerve();
    f.h2_generator = detail::facet_generator(f.nerve);
  } else if (name == "sphere_tetra") {
    f.nerve = Nerve::from_maximal(4, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
    f.h2_generator = detail::facet_generator(f.nerve);
  } else if (name == "projective6") {
    f.nerve = projective6_nerve();
  } else {
    throw InputError("nerve::fixture: unknown fixture '" + name + "'");
  }
  return f;
}

/// Random nerve: `vertices` vertices and a handful of random maximal
/// simplices of dimension at most max_dim.
inline Nerve random_nerve(std::mt19937_64& rng, int vertices, int max_dim) {
  std::uniform_int_distribution<int> dim_dist(1, std::max(1, max_dim));
  std::uniform_int_distribution<int> count_dist(1, std::max(2, vertices));
  std::vector<Simplex> maximal;
  const int count = count_dist(rng);
  std::vector<int> pool(static_cast<std::size_t>(vertices));
  for (int i = 0; i < vertices; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int t = 0; t < count; ++t) {
    const int d = std::min(dim_dist(rng), vertices - 1);
    std::shuffle(pool.begin(), pool.end(), rng);
    maximal.emplace_back(pool.begin(), pool.begin() + d + 1);
  }
  return Nerve::from_maximal(vertices, maximal);
}

}  // namespace cechred
