#pragma once

// Exact integer and rational linear algebra: Smith normal form, integer
// solving, kernels/images and finitely presented abelian groups.

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "cechred/errors.hpp"

namespace cechred {

using Integer = mpz_class;
using Rational = mpq_class;

using IntVector = std::vector<Integer>;
using RatVector = std::vector<Rational>;

namespace abelian {

/// Dense row-major matrix over an exact ring. Dimensions are fixed at
/// construction.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  Matrix(std::initializer_list<std::initializer_list<long>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw InputError("abelian::Matrix: ragged initializer");
      for (long v : row) data_.emplace_back(v);
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<T> column(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }
  std::vector<T> row(std::size_t r) const {
    return std::vector<T>(data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_);
  }
  void set_column(std::size_t c, std::span<const T> v) {
    if (v.size() != rows_) throw InputError("abelian::Matrix::set_column: length mismatch");
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& v) { return sgn(v) == 0; });
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Columns [first, last) as a new matrix.
  Matrix columns(std::size_t first, std::size_t last) const {
    Matrix out(rows_, last - first);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = first; c < last; ++c) out(r, c - first) = (*this)(r, c);
    return out;
  }
  /// Rows [first, last) as a new matrix.
  Matrix row_range(std::size_t first, std::size_t last) const {
    Matrix out(last - first, cols_);
    std::copy(data_.begin() + first * cols_, data_.begin() + last * cols_, out.data_.begin());
    return out;
  }

  std::vector<T> apply(std::span<const T> x) const {
    if (x.size() != cols_) throw InputError("abelian::Matrix::apply: dimension mismatch");
    std::vector<T> y(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      T acc = 0;
      const T* row_ptr = data_.data() + r * cols_;
      for (std::size_t c = 0; c < cols_; ++c)
        if (sgn(x[c]) != 0 && sgn(row_ptr[c]) != 0) acc += row_ptr[c] * x[c];
      y[r] = acc;
    }
    return y;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw InputError("abelian::Matrix: product dimension mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (sgn(aik) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          if (sgn(b(k, j)) != 0) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  /// Horizontal concatenation [a | b].
  friend Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_) throw InputError("abelian::hstack: row mismatch");
    Matrix out(a.rows_, a.cols_ + b.cols_);
    for (std::size_t r = 0; r < a.rows_; ++r) {
      for (std::size_t c = 0; c < a.cols_; ++c) out(r, c) = a(r, c);
      for (std::size_t c = 0; c < b.cols_; ++c) out(r, a.cols_ + c) = b(r, c);
    }
    return out;
  }

  // Elementary operations, used by the elimination routines.
  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(i, c), (*this)(j, c));
  }
  void swap_cols(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t r = 0; r < rows_; ++r) std::swap((*this)(r, i), (*this)(r, j));
  }
  /// row_dst += q * row_src
  void add_row(std::size_t dst, std::size_t src, const T& q) {
    if (sgn(q) == 0) return;
    for (std::size_t c = 0; c < cols_; ++c)
      if (sgn((*this)(src, c)) != 0) (*this)(dst, c) += q * (*this)(src, c);
  }
  /// col_dst += q * col_src
  void add_col(std::size_t dst, std::size_t src, const T& q) {
    if (sgn(q) == 0) return;
    for (std::size_t r = 0; r < rows_; ++r)
      if (sgn((*this)(r, src)) != 0) (*this)(r, dst) += q * (*this)(r, src);
  }
  void negate_row(std::size_t i) {
    for (std::size_t c = 0; c < cols_; ++c) (*this)(i, c) = -(*this)(i, c);
  }
  void negate_col(std::size_t j) {
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, j) = -(*this)(r, j);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntMatrix = Matrix<Integer>;
using RatMatrix = Matrix<Rational>;

inline RatMatrix to_rational(const IntMatrix& m) {
  RatMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

inline RatVector to_rational(std::span<const Integer> v) { return RatVector(v.begin(), v.end()); }

/// Throws unless every entry is an integer.
inline IntVector to_integer(std::span<const Rational> v, const char* where) {
  IntVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].get_den() != 1)
      throw PreconditionError(std::string(where) + ": value " + v[i].get_str() + " is not an integer");
    out[i] = v[i].get_num();
  }
  return out;
}

inline bool is_zero_vector(std::span<const Integer> v) {
  return std::all_of(v.begin(), v.end(), [](const Integer& x) { return sgn(x) == 0; });
}
inline bool is_zero_vector(std::span<const Rational> v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& x) { return sgn(x) == 0; });
}

// ---------------------------------------------------------------------------
// Smith normal form

enum class PivotRule {
  /// Pivot on the entry of smallest nonzero magnitude, ties broken by the
  /// lowest (row, col).
  SmallestMagnitude,
  /// Pivot on the first nonzero entry in column-major order. Only used to
  /// cross-check that results do not depend on the pivot order.
  FirstNonzero,
};

/// S = U * M * V with U, V unimodular and S diagonal with d1 | d2 | ... | dr,
/// all positive, zeros trailing. The inverses of U and V are tracked too.
struct SmithDecomposition {
  IntMatrix U, S, V;
  IntMatrix U_inv, V_inv;
  std::size_t rank = 0;

  IntVector invariant_factors() const {
    IntVector d(rank);
    for (std::size_t i = 0; i < rank; ++i) d[i] = S(i, i);
    return d;
  }
};

namespace detail {

// Row and column operations applied to S, mirrored into the transforms.
struct SmithWork {
  SmithDecomposition& sd;

  void row_add(std::size_t dst, std::size_t src, const Integer& q) {
    sd.S.add_row(dst, src, q);
    sd.U.add_row(dst, src, q);
    sd.U_inv.add_col(src, dst, -q);
  }
  void row_swap(std::size_t i, std::size_t j) {
    sd.S.swap_rows(i, j);
    sd.U.swap_rows(i, j);
    sd.U_inv.swap_cols(i, j);
  }
  void row_negate(std::size_t i) {
    sd.S.negate_row(i);
    sd.U.negate_row(i);
    sd.U_inv.negate_col(i);
  }
  void col_add(std::size_t dst, std::size_t src, const Integer& q) {
    sd.S.add_col(dst, src, q);
    sd.V.add_col(dst, src, q);
    sd.V_inv.add_row(src, dst, -q);
  }
  void col_swap(std::size_t i, std::size_t j) {
    sd.S.swap_cols(i, j);
    sd.V.swap_cols(i, j);
    sd.V_inv.swap_rows(i, j);
  }
};

inline bool magnitude_less(const Integer& a, const Integer& b) { return mpz_cmpabs(a.get_mpz_t(), b.get_mpz_t()) < 0; }

}  // namespace detail

inline SmithDecomposition smith_normal_form(const IntMatrix& M,
                                            PivotRule rule = PivotRule::SmallestMagnitude) {
  const std::size_t m = M.rows(), n = M.cols();
  SmithDecomposition sd{IntMatrix::identity(m), M, IntMatrix::identity(n),
                        IntMatrix::identity(m), IntMatrix::identity(n), 0};
  detail::SmithWork w{sd};
  IntMatrix& S = sd.S;

  auto move_to = [&](std::size_t t, std::size_t r, std::size_t c) {
    w.row_swap(t, r);
    w.col_swap(t, c);
  };

  std::size_t t = 0;
  for (; t < std::min(m, n); ++t) {
    // Initial pivot for this step.
    std::optional<std::pair<std::size_t, std::size_t>> pivot;
    if (rule == PivotRule::SmallestMagnitude) {
      for (std::size_t r = t; r < m; ++r)
        for (std::size_t c = t; c < n; ++c) {
          if (sgn(S(r, c)) == 0) continue;
          if (!pivot || detail::magnitude_less(S(r, c), S(pivot->first, pivot->second)))
            pivot = {r, c};
        }
    } else {
      for (std::size_t c = t; c < n && !pivot; ++c)
        for (std::size_t r = t; r < m; ++r)
          if (sgn(S(r, c)) != 0) {
            pivot = {r, c};
            break;
          }
    }
    if (!pivot) break;
    move_to(t, pivot->first, pivot->second);

    for (;;) {
      bool clean = true;
      for (std::size_t r = t + 1; r < m; ++r) {
        if (sgn(S(r, t)) == 0) continue;
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), S(r, t).get_mpz_t(), S(t, t).get_mpz_t());
        w.row_add(r, t, -q);
        if (sgn(S(r, t)) != 0) clean = false;
      }
      for (std::size_t c = t + 1; c < n; ++c) {
        if (sgn(S(t, c)) == 0) continue;
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), S(t, c).get_mpz_t(), S(t, t).get_mpz_t());
        w.col_add(c, t, -q);
        if (sgn(S(t, c)) != 0) clean = false;
      }
      if (!clean) {
        // A remainder smaller than the pivot survived: pivot on the smallest
        // entry of the pivot row/column and repeat.
        std::size_t best_r = t, best_c = t;
        for (std::size_t r = t + 1; r < m; ++r)
          if (sgn(S(r, t)) != 0 && detail::magnitude_less(S(r, t), S(best_r, best_c))) {
            best_r = r;
            best_c = t;
          }
        for (std::size_t c = t + 1; c < n; ++c)
          if (sgn(S(t, c)) != 0 && detail::magnitude_less(S(t, c), S(best_r, best_c))) {
            best_r = t;
            best_c = c;
          }
        if (best_r != t) w.row_swap(t, best_r);
        if (best_c != t) w.col_swap(t, best_c);
        continue;
      }
      // Row and column are clear; enforce divisibility of the remainder.
      std::optional<std::size_t> bad_row;
      for (std::size_t r = t + 1; r < m && !bad_row; ++r)
        for (std::size_t c = t + 1; c < n; ++c)
          if (!mpz_divisible_p(S(r, c).get_mpz_t(), S(t, t).get_mpz_t())) {
            bad_row = r;
            break;
          }
      if (!bad_row) break;
      w.row_add(t, *bad_row, Integer(1));
    }
    if (sgn(S(t, t)) < 0) w.row_negate(t);
  }
  sd.rank = t;
  return sd;
}

// ---------------------------------------------------------------------------
// Integer solving and membership

/// Solves M x = b over the integers, reusing one Smith decomposition for
/// any number of right-hand sides.
class IntegerSolver {
 public:
  explicit IntegerSolver(IntMatrix M) : M_(std::move(M)), sd_(smith_normal_form(M_)) {}

  const IntMatrix& matrix() const { return M_; }
  const SmithDecomposition& smith() const { return sd_; }

  std::optional<IntVector> solve(std::span<const Integer> b) const {
    if (b.size() != M_.rows())
      throw InputError("abelian::solve_integer: right-hand side has length " +
                       std::to_string(b.size()) + ", expected " + std::to_string(M_.rows()));
    IntVector y = sd_.U.apply(b);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (i < sd_.rank) {
        if (!mpz_divisible_p(y[i].get_mpz_t(), sd_.S(i, i).get_mpz_t())) return std::nullopt;
        mpz_divexact(y[i].get_mpz_t(), y[i].get_mpz_t(), sd_.S(i, i).get_mpz_t());
      } else if (sgn(y[i]) != 0) {
        return std::nullopt;
      }
    }
    IntVector z(M_.cols());
    for (std::size_t i = 0; i < sd_.rank; ++i) z[i] = y[i];
    return sd_.V.apply(z);
  }

 private:
  IntMatrix M_;
  SmithDecomposition sd_;
};

inline std::optional<IntVector> solve_integer(const IntMatrix& M, std::span<const Integer> b) {
  return IntegerSolver(M).solve(b);
}

struct Membership {
  bool member = false;
  IntVector coefficients;  // v = sum_i coefficients[i] * generator_i when member
};

/// Is v in the subgroup of Z^d generated by the columns of `generators`?
inline Membership membership(const IntMatrix& generators, std::span<const Integer> v) {
  if (v.size() != generators.rows())
    throw InputError("abelian::membership: vector length " + std::to_string(v.size()) +
                     " does not match ambient dimension " + std::to_string(generators.rows()));
  auto x = solve_integer(generators, v);
  if (!x) return {};
  return {true, std::move(*x)};
}

inline Membership membership(const std::vector<IntVector>& generators, std::span<const Integer> v) {
  IntMatrix g(v.size(), generators.size());
  for (std::size_t j = 0; j < generators.size(); ++j) g.set_column(j, generators[j]);
  return membership(g, v);
}

// ---------------------------------------------------------------------------
// Finitely presented abelian groups

/// Z^free_rank + Z/t1 + ... + Z/ts, with t1 | t2 | ... | ts, realized as a
/// subquotient ker/im of a cochain lattice. Summands are ordered torsion
/// first, then free; generator i lifts summand i to the ambient lattice.
struct FpAbelianGroup {
  std::size_t ambient_dim = 0;
  std::size_t free_rank = 0;
  IntVector torsion;
  std::vector<IntVector> generators;
  /// Row i reads off the coordinate of a cocycle along summand i. Integral
  /// on the cocycle lattice.
  RatMatrix coordinate_map;
  /// A vector is a cocycle iff these rows annihilate it (modulo
  /// cocycle_modulus when that is nonzero).
  IntMatrix cocycle_test;
  Integer cocycle_modulus = 0;

  std::size_t summand_count() const { return torsion.size() + free_rank; }
  bool is_trivial() const { return summand_count() == 0; }

  /// Order of summand i; 0 for a free summand.
  Integer summand_order(std::size_t i) const { return i < torsion.size() ? torsion[i] : Integer(0); }

  bool is_cocycle(std::span<const Integer> v) const {
    if (v.size() != ambient_dim) return false;
    IntVector t = cocycle_test.apply(v);
    if (sgn(cocycle_modulus) == 0) return is_zero_vector(t);
    return std::all_of(t.begin(), t.end(), [&](const Integer& x) {
      return mpz_divisible_p(x.get_mpz_t(), cocycle_modulus.get_mpz_t()) != 0;
    });
  }

  /// Coordinates of the class of a cocycle, torsion coordinates reduced into
  /// [0, t_i).
  IntVector coordinates(std::span<const Integer> cocycle) const {
    if (cocycle.size() != ambient_dim)
      throw InputError("abelian::FpAbelianGroup::coordinates: dimension mismatch");
    if (!is_cocycle(cocycle))
      throw PreconditionError("abelian::FpAbelianGroup::coordinates: vector is not a cocycle");
    RatVector q = coordinate_map.apply(to_rational(cocycle));
    IntVector c = to_integer(q, "abelian::FpAbelianGroup::coordinates");
    for (std::size_t i = 0; i < torsion.size(); ++i) mpz_fdiv_r(c[i].get_mpz_t(), c[i].get_mpz_t(), torsion[i].get_mpz_t());
    return c;
  }

  bool is_zero_class(std::span<const Integer> cocycle) const { return is_zero_vector(coordinates(cocycle)); }

  /// Order of the class of a cocycle; 0 means infinite order.
  Integer class_order(std::span<const Integer> cocycle) const {
    IntVector c = coordinates(cocycle);
    for (std::size_t i = torsion.size(); i < c.size(); ++i)
      if (sgn(c[i]) != 0) return 0;
    Integer order = 1;
    for (std::size_t i = 0; i < torsion.size(); ++i) {
      if (sgn(c[i]) == 0) continue;
      Integer g = gcd(c[i], torsion[i]);
      order = lcm(order, Integer(torsion[i] / g));
    }
    return order;
  }

  /// Relation matrix in summand coordinates: column i is t_i e_i.
  IntMatrix relations() const {
    IntMatrix r(summand_count(), torsion.size());
    for (std::size_t i = 0; i < torsion.size(); ++i) r(i, i) = torsion[i];
    return r;
  }

  /// Cochain lifting an element given in summand coordinates.
  IntVector lift(std::span<const Integer> coords) const {
    IntVector v(ambient_dim);
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (sgn(coords[i]) != 0)
        for (std::size_t a = 0; a < ambient_dim; ++a) v[a] += coords[i] * generators[i][a];
    return v;
  }

  std::string to_string() const {
    std::ostringstream os;
    bool first = true;
    if (free_rank > 0) {
      os << "Z";
      if (free_rank > 1) os << "^" << free_rank;
      first = false;
    }
    for (const auto& t : torsion) {
      os << (first ? "" : " + ") << "Z/" << t.get_str();
      first = false;
    }
    if (first) os << "0";
    return os.str();
  }
};

/// Free rank and invariant factors of a direct sum of groups.
inline std::pair<std::size_t, IntVector> direct_sum_invariants(const std::vector<FpAbelianGroup>& parts) {
  std::size_t free_rank = 0;
  IntVector factors;
  for (const auto& p : parts) {
    free_rank += p.free_rank;
    factors.insert(factors.end(), p.torsion.begin(), p.torsion.end());
  }
  IntMatrix D(factors.size(), factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) D(i, i) = factors[i];
  IntVector torsion;
  for (const auto& d : smith_normal_form(D).invariant_factors())
    if (d > 1) torsion.push_back(d);
  return {free_rank, torsion};
}

namespace detail {

inline void require_composable(const IntMatrix& d_out, const IntMatrix& d_in, const char* where) {
  if (d_out.cols() != d_in.rows())
    throw InputError(std::string(where) + ": d_out has " + std::to_string(d_out.cols()) +
                     " columns but d_in has " + std::to_string(d_in.rows()) + " rows");
}

inline void require_complex(const IntMatrix& d_out, const IntMatrix& d_in, const char* where) {
  require_composable(d_out, d_in, where);
  for (std::size_t j = 0; j < d_in.cols(); ++j) {
    IntVector col = d_in.column(j);
    if (!is_zero_vector(d_out.apply(col)))
      throw PreconditionError(std::string(where) + ": d_out * d_in is nonzero (first offending column " +
                              std::to_string(j) + ")");
  }
}

// Quotient of the lattice spanned by the columns of `basis` (a x r, a
// saturated lattice basis with left inverse `basis_coords` restricted to it)
// by a sublattice given in basis coordinates (r x c).
inline FpAbelianGroup quotient_by_sublattice(const IntMatrix& basis, const RatMatrix& basis_coords,
                                             const IntMatrix& sub_in_basis, IntMatrix cocycle_test,
                                             PivotRule rule) {
  SmithDecomposition sd = smith_normal_form(sub_in_basis, rule);
  IntMatrix new_basis = basis * sd.U_inv;
  RatMatrix new_coords = to_rational(sd.U) * basis_coords;

  FpAbelianGroup g;
  g.ambient_dim = basis.rows();
  g.cocycle_test = std::move(cocycle_test);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < basis.cols(); ++i) {
    if (i < sd.rank) {
      if (sd.S(i, i) == 1) continue;
      g.torsion.push_back(sd.S(i, i));
    } else {
      ++g.free_rank;
    }
    kept.push_back(i);
  }
  g.coordinate_map = RatMatrix(kept.size(), basis.rows());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    g.generators.push_back(new_basis.column(kept[k]));
    for (std::size_t a = 0; a < basis.rows(); ++a) g.coordinate_map(k, a) = new_coords(kept[k], a);
  }
  return g;
}

}  // namespace detail

/// ker(d_out) / im(d_in) as an invariant-factor presentation with explicit
/// generator lifts.
inline FpAbelianGroup homology_quotient(const IntMatrix& d_out, const IntMatrix& d_in,
                                        PivotRule rule = PivotRule::SmallestMagnitude) {
  detail::require_complex(d_out, d_in, "abelian::homology_quotient");
  const std::size_t a = d_out.cols();
  SmithDecomposition sd = smith_normal_form(d_out, rule);
  const std::size_t r = sd.rank;
  IntMatrix kernel = sd.V.columns(r, a);
  IntMatrix kernel_coords = sd.V_inv.row_range(r, a);
  IntMatrix image_in_kernel = kernel_coords * d_in;
  return detail::quotient_by_sublattice(kernel, to_rational(kernel_coords), image_in_kernel,
                                        sd.V_inv.row_range(0, r), rule);
}

/// Cohomology of the complex reduced mod N: {x : d_out x = 0 mod N} modulo
/// im(d_in) + N Z^a. Generators are integer representatives of the mod-N
/// classes (divide by N for the Q/Z picture).
inline FpAbelianGroup homology_quotient_mod(const IntMatrix& d_out, const IntMatrix& d_in,
                                            const Integer& N,
                                            PivotRule rule = PivotRule::SmallestMagnitude) {
  detail::require_composable(d_out, d_in, "abelian::homology_quotient_mod");
  if (N < 1) throw InputError("abelian::homology_quotient_mod: modulus must be >= 1");
  const std::size_t a = d_out.cols(), b = d_out.rows();
  for (std::size_t j = 0; j < d_in.cols(); ++j) {
    IntVector v = d_out.apply(d_in.column(j));
    for (auto& x : v)
      if (!mpz_divisible_p(x.get_mpz_t(), N.get_mpz_t()))
        throw PreconditionError("abelian::homology_quotient_mod: d_out * d_in is nonzero mod N (column " +
                                std::to_string(j) + ")");
  }
  // Cocycle lattice: projection of ker [d_out | N I_b] onto the first a
  // coordinates. It contains N Z^a, so it has full rank a.
  IntMatrix aug(b, a + b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < a; ++j) aug(i, j) = d_out(i, j);
    aug(i, a + i) = N;
  }
  SmithDecomposition sd = smith_normal_form(aug, rule);
  IntMatrix spanning = sd.V.columns(sd.rank, a + b).row_range(0, a);
  // spanning * V' = U'^-1 * S', so b_j = U'^-1 S'_jj e_j is a lattice basis
  // and the coordinate of v along b_j is (U' v)_j / S'_jj.
  SmithDecomposition sp = smith_normal_form(spanning, rule);
  IntMatrix basis(a, sp.rank);
  RatMatrix basis_coords(sp.rank, a);
  for (std::size_t j = 0; j < sp.rank; ++j)
    for (std::size_t i = 0; i < a; ++i) {
      basis(i, j) = sp.U_inv(i, j) * sp.S(j, j);
      basis_coords(j, i) = Rational(sp.U(j, i), sp.S(j, j));
      basis_coords(j, i).canonicalize();
    }
  IntMatrix boundary(a, d_in.cols() + a);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < d_in.cols(); ++j) boundary(i, j) = d_in(i, j);
    boundary(i, d_in.cols() + i) = N;
  }
  RatMatrix sub_q = basis_coords * to_rational(boundary);
  IntMatrix sub(sub_q.rows(), sub_q.cols());
  for (std::size_t i = 0; i < sub.rows(); ++i)
    for (std::size_t j = 0; j < sub.cols(); ++j) sub(i, j) = sub_q(i, j).get_num();
  FpAbelianGroup g = detail::quotient_by_sublattice(basis, basis_coords, sub, d_out, rule);
  g.cocycle_modulus = N;
  return g;
}

// ---------------------------------------------------------------------------
// Rational linear algebra

struct RowEchelon {
  RatMatrix R;                       // reduced row echelon form
  std::vector<std::size_t> pivots;   // pivot column of each nonzero row
};

inline RowEchelon reduced_row_echelon(RatMatrix A) {
  RowEchelon out;
  const std::size_t m = A.rows(), n = A.cols();
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t p = row;
    while (p < m && sgn(A(p, col)) == 0) ++p;
    if (p == m) continue;
    A.swap_rows(row, p);
    Rational inv = 1 / A(row, col);
    for (std::size_t c = col; c < n; ++c) A(row, c) *= inv;
    for (std::size_t r = 0; r < m; ++r)
      if (r != row && sgn(A(r, col)) != 0) A.add_row(r, row, Rational(-A(r, col)));
    out.pivots.push_back(col);
    ++row;
  }
  out.R = std::move(A);
  return out;
}

inline std::size_t rank(const RatMatrix& A) { return reduced_row_echelon(A).pivots.size(); }
inline std::size_t rank(const IntMatrix& A) { return smith_normal_form(A).rank; }

/// Basis of the right null space, one column per free variable.
inline RatMatrix nullspace(const RatMatrix& A) {
  RowEchelon e = reduced_row_echelon(A);
  const std::size_t n = A.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < n; ++c)
    if (!is_pivot[c]) free_cols.push_back(c);
  RatMatrix N(n, free_cols.size());
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    const std::size_t f = free_cols[k];
    N(f, k) = 1;
    for (std::size_t i = 0; i < e.pivots.size(); ++i) N(e.pivots[i], k) = -e.R(i, f);
  }
  return N;
}

inline std::optional<RatVector> solve_rational(const RatMatrix& M, std::span<const Rational> b) {
  if (b.size() != M.rows()) throw InputError("abelian::solve_rational: dimension mismatch");
  RatMatrix aug(M.rows(), M.cols() + 1);
  for (std::size_t r = 0; r < M.rows(); ++r) {
    for (std::size_t c = 0; c < M.cols(); ++c) aug(r, c) = M(r, c);
    aug(r, M.cols()) = b[r];
  }
  RowEchelon e = reduced_row_echelon(std::move(aug));
  RatVector x(M.cols());
  for (std::size_t i = 0; i < e.pivots.size(); ++i) {
    if (e.pivots[i] == M.cols()) return std::nullopt;
    x[e.pivots[i]] = e.R(i, M.cols());
  }
  return x;
}

/// ker(d_out) / im(d_in) over Q with a chosen complement basis.
struct RationalHomology {
  std::size_t ambient_dim = 0;
  std::size_t dim = 0;
  std::vector<RatVector> basis;
  RatMatrix d_out;
  /// coordinates(z) = coordinate_map * z restricted to `rows` for z in ker.
  RatMatrix coordinate_map;
  std::vector<std::size_t> selected_rows;

  bool is_cocycle(std::span<const Rational> z) const {
    return z.size() == ambient_dim && is_zero_vector(d_out.apply(z));
  }

  RatVector coordinates(std::span<const Rational> z) const {
    if (!is_cocycle(z)) throw PreconditionError("abelian::RationalHomology::coordinates: not a cocycle");
    RatVector sub(selected_rows.size());
    for (std::size_t i = 0; i < selected_rows.size(); ++i) sub[i] = z[selected_rows[i]];
    return coordinate_map.apply(sub);
  }

  bool is_zero_class(std::span<const Rational> z) const { return is_zero_vector(coordinates(z)); }

  RatVector lift(std::span<const Rational> coords) const {
    RatVector v(ambient_dim);
    for (std::size_t i = 0; i < coords.size(); ++i)
      for (std::size_t a = 0; a < ambient_dim; ++a) v[a] += coords[i] * basis[i][a];
    return v;
  }
};

inline RationalHomology rational_homology(const RatMatrix& d_out, const RatMatrix& d_in) {
  if (d_out.cols() != d_in.rows()) throw InputError("abelian::rational_homology: dimension mismatch");
  if (!(d_out * d_in).is_zero())
    throw PreconditionError("abelian::rational_homology: d_out * d_in is nonzero");
  const std::size_t a = d_out.cols();
  RationalHomology h;
  h.ambient_dim = a;
  h.d_out = d_out;

  RatMatrix kernel = nullspace(d_out);
  // Independent image columns, then kernel columns extending them.
  RatMatrix candidates = hstack(d_in, kernel);
  RowEchelon e = reduced_row_echelon(candidates);
  std::vector<std::size_t> image_cols, complement_cols;
  for (auto p : e.pivots) (p < d_in.cols() ? image_cols : complement_cols).push_back(p);
  h.dim = complement_cols.size();

  RatMatrix B(a, image_cols.size() + complement_cols.size());
  std::size_t col = 0;
  for (auto c : image_cols) B.set_column(col++, candidates.column(c));
  for (auto c : complement_cols) {
    RatVector v = candidates.column(c);
    // Clear denominators so generators are integral where possible.
    Integer l = 1;
    for (const auto& x : v) l = lcm(l, Integer(x.get_den()));
    for (auto& x : v) x *= l;
    B.set_column(col++, v);
    h.basis.push_back(std::move(v));
  }
  // Left inverse of B via an invertible square row selection.
  RowEchelon rows = reduced_row_echelon(B.transpose());
  h.selected_rows = rows.pivots;
  const std::size_t r = B.cols();
  RatMatrix square(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) square(i, j) = B(h.selected_rows[i], j);
  // Invert `square` by RREF of [square | I].
  RatMatrix aug(r, 2 * r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) aug(i, j) = square(i, j);
    aug(i, r + i) = 1;
  }
  RowEchelon inv = reduced_row_echelon(std::move(aug));
  h.coordinate_map = RatMatrix(h.dim, r);
  for (std::size_t i = 0; i < h.dim; ++i)
    for (std::size_t j = 0; j < r; ++j) h.coordinate_map(i, j) = inv.R(image_cols.size() + i, r + j);
  return h;
}

/// Q-homology packaged as a free FpAbelianGroup of rank dim. Its
/// coordinate_map returns rational coordinates, so use it directly rather
/// than through FpAbelianGroup::coordinates.
inline FpAbelianGroup as_free_group(const RationalHomology& h, IntMatrix cocycle_test) {
  FpAbelianGroup g;
  g.ambient_dim = h.ambient_dim;
  g.free_rank = h.dim;
  g.cocycle_test = std::move(cocycle_test);
  for (const auto& b : h.basis) g.generators.push_back(to_integer(b, "abelian::as_free_group"));
  g.coordinate_map = RatMatrix(h.dim, h.ambient_dim);
  for (std::size_t i = 0; i < h.dim; ++i)
    for (std::size_t j = 0; j < h.selected_rows.size(); ++j)
      g.coordinate_map(i, h.selected_rows[j]) = h.coordinate_map(i, j);
  return g;
}

// ---------------------------------------------------------------------------
// Exactness of A --f--> B --g--> C

/// One kernel generator x of g written as f(y) + relation.
struct ExactnessWitness {
  IntVector kernel_element;   // in B coordinates
  IntVector preimage;         // in A coordinates
  IntVector relation;         // coefficients on B's torsion relations
};

struct ExactnessCheck {
  bool composite_zero = false;
  bool kernel_in_image = false;
  std::vector<ExactnessWitness> witnesses;
  std::string failure;

  bool exact() const { return composite_zero && kernel_in_image; }
};

/// Checks exactness at B for maps given in summand coordinates. `f` is
/// |B| x |A| and `g` is |C| x |B|; the groups supply torsion relations.
inline ExactnessCheck check_exact(const FpAbelianGroup& A, const FpAbelianGroup& B,
                                  const FpAbelianGroup& C, const IntMatrix& f, const IntMatrix& g) {
  (void)A;
  ExactnessCheck out;
  const IntMatrix relB = B.relations(), relC = C.relations();
  // g * f must land in C's relations.
  IntMatrix gf = g * f;
  IntegerSolver inC(relC);
  out.composite_zero = true;
  for (std::size_t j = 0; j < gf.cols(); ++j)
    if (!inC.solve(gf.column(j))) {
      out.composite_zero = false;
      out.failure = "composite nonzero on generator " + std::to_string(j);
      break;
    }
  // ker g as a lattice in B coordinates: projection of ker [g | -relC].
  IntMatrix aug(g.rows(), g.cols() + relC.cols());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) aug(i, j) = g(i, j);
    for (std::size_t j = 0; j < relC.cols(); ++j) aug(i, g.cols() + j) = -relC(i, j);
  }
  SmithDecomposition sd = smith_normal_form(aug);
  IntMatrix image_plus_rel = hstack(f, relB);
  IntegerSolver inImage(image_plus_rel);
  out.kernel_in_image = true;
  for (std::size_t k = sd.rank; k < aug.cols(); ++k) {
    IntVector x(g.cols());
    for (std::size_t i = 0; i < g.cols(); ++i) x[i] = sd.V(i, k);
    if (is_zero_vector(x)) continue;
    auto sol = inImage.solve(x);
    if (!sol) {
      out.kernel_in_image = false;
      if (out.failure.empty()) out.failure = "kernel element not in image";
      out.witnesses.clear();
      break;
    }
    ExactnessWitness w;
    w.kernel_element = x;
    w.preimage.assign(sol->begin(), sol->begin() + f.cols());
    w.relation.assign(sol->begin() + f.cols(), sol->end());
    out.witnesses.push_back(std::move(w));
  }
  return out;
}

struct RationalExactnessCheck {
  bool composite_zero = false;
  bool kernel_in_image = false;
  std::size_t rank_f = 0, rank_g = 0, dim_middle = 0;
  std::vector<std::pair<RatVector, RatVector>> witnesses;  // (kernel element, preimage)

  bool exact() const { return composite_zero && kernel_in_image; }
};

/// Exactness at the middle space over Q: g f = 0 and rank f + rank g = dim B,
/// with every kernel basis vector of g solved back through f.
inline RationalExactnessCheck check_exact_rational(std::size_t dim_middle, const RatMatrix& f,
                                                   const RatMatrix& g) {
  RationalExactnessCheck out;
  out.dim_middle = dim_middle;
  out.composite_zero = (g.cols() == 0 || f.cols() == 0) ? true : (g * f).is_zero();
  out.rank_f = f.cols() == 0 ? 0 : rank(f);
  out.rank_g = g.rows() == 0 ? 0 : rank(g);
  RatMatrix gg = g.rows() == 0 ? RatMatrix(0, dim_middle) : g;
  RatMatrix ker = nullspace(gg);
  out.kernel_in_image = out.rank_f + out.rank_g == dim_middle;
  for (std::size_t k = 0; k < ker.cols() && out.kernel_in_image; ++k) {
    RatVector x = ker.column(k);
    auto y = f.cols() == 0 ? std::optional<RatVector>() : solve_rational(f, x);
    if (!y) {
      out.kernel_in_image = false;
      break;
    }
    out.witnesses.emplace_back(std::move(x), std::move(*y));
  }
  return out;
}

}  // namespace abelian
}  // namespace cechred
