#include <gtest/gtest.h>

#include "cechred/derham.hpp"
#include "test_support.hpp"

namespace cechred {
namespace {

using namespace derham;

Rational rand_q(std::mt19937_64& g) {
  Rational q(testing::uniform(g, -4, 4), testing::uniform(g, 1, 3));
  q.canonicalize();
  return q;
}

CurvatureMatrix random_curvature(std::mt19937_64& g, int m, std::size_t n, bool integral = false) {
  CurvatureMatrix F = CurvatureMatrix::zero(m, n);
  for (auto& r : F.rows)
    for (auto& x : r) x = integral ? Rational(testing::uniform(g, -2, 2)) : rand_q(g);
  return F;
}

CurvatureMatrix heisenberg_curvature() {
  CurvatureMatrix F = CurvatureMatrix::zero(2, 1);
  F.at(0, 0, 1) = 1;
  return F;
}

/// Base with de_2 = -e_0 ^ e_1 (the Heisenberg algebra), all 2-forms closed.
std::vector<RatVector> heisenberg_base() {
  std::vector<RatVector> s(3, RatVector(3));
  s[2][0] = -1;
  return s;
}

RatVector random_vector(std::mt19937_64& g, std::size_t n) {
  RatVector v(n);
  for (auto& x : v) x = rand_q(g);
  return v;
}

// Independent CE oracle on bitmask monomials: generator t has degree 1,
// d(t) given as a list of (coefficient, p, q) with p < q.
std::vector<std::size_t> brute_ce_betti(int total, const std::vector<std::vector<std::tuple<Rational, int, int>>>& dgen) {
  auto degree_of = [](unsigned mask) { return static_cast<int>(__builtin_popcount(mask)); };
  std::vector<std::vector<unsigned>> basis(total + 1);
  for (unsigned mask = 0; mask < (1u << total); ++mask) basis[degree_of(mask)].push_back(mask);
  auto idx = [&](int k, unsigned mask) {
    return static_cast<std::size_t>(std::find(basis[k].begin(), basis[k].end(), mask) - basis[k].begin());
  };
  std::vector<RatMatrix> d;
  for (int k = 0; k < total; ++k) {
    RatMatrix M(basis[k + 1].size(), basis[k].size());
    for (std::size_t c = 0; c < basis[k].size(); ++c) {
      unsigned mask = basis[k][c];
      int before = 0;
      for (int t = 0; t < total; ++t) {
        if (!(mask & (1u << t))) continue;
        for (const auto& [coef, p, q] : dgen[t]) {
          unsigned rest = mask & ~(1u << t);
          if (rest & ((1u << p) | (1u << q))) continue;
          // (-1)^slot times the sign sorting (before, p, q, after).
          const unsigned below = rest & ((1u << t) - 1), above = rest & ~((1u << t) - 1);
          auto greater = [](unsigned set, int x) { return __builtin_popcount(set & ~((2u << x) - 1)); };
          auto less = [](unsigned set, int x) { return __builtin_popcount(set & ((1u << x) - 1)); };
          int inversions = before + greater(below, p) + greater(below, q) + less(above, p) + less(above, q);
          int sign = inversions % 2 ? -1 : 1;
          M(idx(k + 1, rest | (1u << p) | (1u << q)), c) += sign * coef;
        }
        ++before;
      }
    }
    d.push_back(M);
  }
  std::vector<std::size_t> betti;
  for (int k = 0; k <= total; ++k) {
    std::size_t r_out = k < total ? abelian::rank(d[k]) : 0;
    std::size_t r_in = k > 0 ? abelian::rank(d[k - 1]) : 0;
    betti.push_back(basis[k].size() - r_out - r_in);
  }
  return betti;
}

TEST(Exterior, SubsetsAndSigns) {
  EXPECT_EQ(subsets(4, 2).size(), 6u);
  EXPECT_EQ(subsets(4, 2)[1], (Subset{0, 2}));
  EXPECT_TRUE(subsets(3, 4).empty());
  std::vector<int> w{2, 0, 1};
  EXPECT_EQ(sort_sign(w), 1);
  EXPECT_EQ(w, (std::vector<int>{0, 1, 2}));
  std::vector<int> v{1, 0};
  EXPECT_EQ(sort_sign(v), -1);
  std::vector<int> r{1, 0, 1};
  EXPECT_EQ(sort_sign(r), 0);
}

TEST(WedgeF2, Examples) {
  auto model = InvariantModel::torus(heisenberg_curvature());
  // n = 1, i = 1, H = 1 (x) X*_1 in degree k = 1.
  EXPECT_EQ(wedge_f2(model, 1, 1, RatVector{1}), (RatVector{1}));
  EXPECT_THROW(wedge_f2_matrix(model, 1, 0), InputError);
  auto flat = InvariantModel::torus(CurvatureMatrix::zero(2, 2));
  EXPECT_TRUE(wedge_f2_matrix(flat, 2, 2).is_zero());

  // n = 2, i = 2, H = 1 (x) X*_1 ^ X*_2: (+1) F^(1) (x) X*_2 + (-1) F^(2) (x) X*_1.
  CurvatureMatrix F = CurvatureMatrix::zero(2, 2);
  F.at(0, 0, 1) = 3;
  F.at(1, 0, 1) = 5;
  auto m2 = InvariantModel::torus(F);
  // Output component (2, 1) is J-major over {X*_1, X*_2}, each with dim Omega^2 = 1.
  EXPECT_EQ(wedge_f2(m2, 2, 2, RatVector{1}), (RatVector{-5, 3}));
}

TEST(DF2, SquaresToZeroOnRandomTorusModels) {
  auto g = testing::rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = static_cast<int>(testing::uniform(g, 1, 4));
    const std::size_t n = static_cast<std::size_t>(testing::uniform(g, 1, 3));
    auto model = InvariantModel::torus(random_curvature(g, m, n));
    const int total = m + static_cast<int>(n);
    const int k = static_cast<int>(testing::uniform(g, 0, total - 1));
    RatMatrix D1 = d_F2_matrix(model, k, 0, k + 1), D2 = d_F2_matrix(model, k + 1, 0, k + 1);
    ASSERT_TRUE((D2 * D1).is_zero()) << "m=" << m << " n=" << n << " k=" << k;
    BhmElement H = BhmElement::unflatten(model, k, 0, k + 1, random_vector(g, D1.cols()));
    EXPECT_TRUE(d_F2(model, d_F2(model, H)).is_zero());
  }
}

TEST(DF2, SquaresToZeroOnNilpotentBase) {
  auto g = testing::rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    auto model = InvariantModel::lie(heisenberg_base(), random_curvature(g, 3, 2));
    for (int k = 0; k <= 4; ++k)
      for (int lo = 0; lo <= 2; ++lo)
        EXPECT_TRUE((d_F2_matrix(model, k + 1, lo, 3) * d_F2_matrix(model, k, lo, 3)).is_zero());
  }
}

TEST(DF2, TorusIsPureWedgeAndFlatIsPureD) {
  auto g = testing::rng(13);
  auto torus = InvariantModel::torus(random_curvature(g, 3, 2));
  for (int k = 0; k <= 4; ++k)
    for (int i = 0; i <= 2; ++i) EXPECT_TRUE(form_d_matrix(torus, k, i).is_zero());

  auto flat = InvariantModel::lie(heisenberg_base(), CurvatureMatrix::zero(3, 2));
  for (int k = 0; k <= 4; ++k) {
    RatMatrix D = d_F2_matrix(flat, k, 0, 2);
    Layout src = layout(flat, k, 0, 2), dst = layout(flat, k + 1, 0, 2);
    for (int i = 0; i <= 2; ++i) {
      RatMatrix block = form_d_matrix(flat, k, i);
      for (std::size_t r = 0; r < block.rows(); ++r)
        for (std::size_t c = 0; c < block.cols(); ++c) EXPECT_EQ(D(dst.offset[i] + r, src.offset[i] + c), block(r, c));
    }
    // No off-diagonal entries.
    std::size_t nonzero = 0, diag = 0;
    for (std::size_t r = 0; r < D.rows(); ++r)
      for (std::size_t c = 0; c < D.cols(); ++c) nonzero += D(r, c) != 0;
    for (int i = 0; i <= 2; ++i) {
      RatMatrix block = form_d_matrix(flat, k, i);
      for (std::size_t r = 0; r < block.rows(); ++r)
        for (std::size_t c = 0; c < block.cols(); ++c) diag += block(r, c) != 0;
    }
    EXPECT_EQ(nonzero, diag);
  }
}

TEST(BhmCohomology, ThreeTorusAndHeisenberg) {
  auto flat = InvariantModel::torus(CurvatureMatrix::zero(2, 1));
  const std::size_t three_torus[] = {1, 3, 3, 1};
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(bhm_cohomology(flat, k, 0, k).dim, three_torus[k]);
  auto heis = InvariantModel::torus(heisenberg_curvature());
  EXPECT_EQ(bhm_cohomology(heis, 1, 0, 1).dim, 2u);
  const std::size_t heis_dims[] = {1, 2, 2, 1};
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(bhm_cohomology(heis, k, 0, k).dim, heis_dims[k]);
  EXPECT_THROW(bhm_cohomology(heis, 2, 2, 1), InputError);
  EXPECT_THROW(bhm_cohomology(heis, 2, -1, 1), InputError);
}

TEST(BhmCohomology, SingleColumnIsWedgeKernel) {
  auto g = testing::rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    auto model = InvariantModel::torus(random_curvature(g, 3, 2));
    for (int k = 0; k <= 2; ++k) {
      // Range (k, k): C^{k} holds only (0, k); the complex has d = 0 on the torus.
      EXPECT_EQ(bhm_cohomology(model, k, k, k).dim, component_dim(model, k, k));
    }
  }
}

TEST(CeOracle, KnownDimensions) {
  auto flat = InvariantModel::torus(CurvatureMatrix::zero(3, 2));
  for (int k = 0; k <= 5; ++k) EXPECT_EQ(ce_total_space(flat, k), binom(5, k));
  auto heis = InvariantModel::torus(heisenberg_curvature());
  std::vector<std::size_t> dims;
  for (int k = 0; k <= 3; ++k) dims.push_back(ce_total_space(heis, k));
  EXPECT_EQ(dims, (std::vector<std::size_t>{1, 2, 2, 1}));
  // Bitmask brute force: generators z0, z1, xi; d xi = -z0 z1.
  EXPECT_EQ(brute_ce_betti(3, {{}, {}, {{Rational(-1), 0, 1}}}), dims);
  auto scaled = InvariantModel::torus(heisenberg_curvature().scaled(Rational(-7, 3)));
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(ce_total_space(scaled, k), dims[k]);
}

TEST(CeOracle, MatchesBruteForceOnRandomModels) {
  auto g = testing::rng(15);
  for (int trial = 0; trial < 15; ++trial) {
    const int m = static_cast<int>(testing::uniform(g, 2, 4));
    const std::size_t n = static_cast<std::size_t>(testing::uniform(g, 1, 2));
    CurvatureMatrix F = random_curvature(g, m, n, true);
    auto model = InvariantModel::torus(F);
    const int total = m + static_cast<int>(n);
    std::vector<std::vector<std::tuple<Rational, int, int>>> dgen(total);
    auto pairs = subsets(m, 2);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t p = 0; p < pairs.size(); ++p)
        if (F.rows[a][p] != 0) dgen[m + a].emplace_back(-F.rows[a][p], pairs[p][0], pairs[p][1]);
    auto brute = brute_ce_betti(total, dgen);
    for (int k = 0; k <= total; ++k) EXPECT_EQ(ce_total_space(model, k), brute[k]) << "trial " << trial;
  }
}

TEST(CeOracle, TotalSpaceIsomorphism) {
  auto g = testing::rng(16);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = static_cast<int>(testing::uniform(g, 1, 4));
    const std::size_t n = static_cast<std::size_t>(testing::uniform(g, 1, 3));
    auto model = InvariantModel::torus(random_curvature(g, m, n));
    for (int k = 0; k <= m + static_cast<int>(n); ++k)
      EXPECT_EQ(bhm_cohomology(model, k, 0, k).dim, ce_total_space(model, k)) << "m=" << m << " n=" << n << " k=" << k;
  }
  for (int trial = 0; trial < 5; ++trial) {
    auto model = InvariantModel::lie(heisenberg_base(), random_curvature(g, 3, 2));
    for (int k = 0; k <= 5; ++k) EXPECT_EQ(bhm_cohomology(model, k, 0, k).dim, ce_total_space(model, k));
  }
}

TEST(CeOracle, RejectsModelWithoutStructure) {
  auto model = InvariantModel::torus(heisenberg_curvature());
  model.structure.reset();
  EXPECT_THROW(ce_total_space(model, 1), InputError);
}

TEST(Model, ValidationCatchesBrokenOperators) {
  // Base with de_3 = e_0 ^ e_1; F2 = e_2 ^ e_3 is not closed.
  std::vector<RatVector> base(4, RatVector(6));
  base[3][SubsetIndex(4, 2).at({0, 1})] = 1;
  CurvatureMatrix F = CurvatureMatrix::zero(4, 1);
  F.at(0, 2, 3) = 1;
  EXPECT_THROW(InvariantModel::lie(base, F), ModelViolation);

  auto model = InvariantModel::torus(CurvatureMatrix::zero(3, 1));
  model.d[0](0, 0) = 1;
  model.d[1](0, 0) = 1;
  EXPECT_THROW(model.validate(), ModelViolation);
  EXPECT_THROW(CurvatureMatrix::from_rows(3, {RatVector(2)}), InputError);
}

TEST(Gysin, FlatCurvatureIsExact) {
  auto model = InvariantModel::torus(CurvatureMatrix::zero(2, 1));
  auto rep = bhm_gysin_check(model, 0, 3, 0, 3);
  EXPECT_EQ(rep.nodes.size(), 12u);
  for (const auto& n : rep.nodes) EXPECT_TRUE(n.exact()) << n.label;
}

TEST(Gysin, HeisenbergAllTruncations) {
  auto model = InvariantModel::torus(heisenberg_curvature());
  auto rep = bhm_gysin_check(model, 0, 3, 0, 3);
  for (const auto& n : rep.nodes) EXPECT_TRUE(n.exact()) << n.label;
  for (int m = 0; m <= 2; ++m)
    for (int l = m + 1; l <= 3; ++l) EXPECT_TRUE(bhm_gysin_check(model, m, l, 0, 4).all_exact()) << m << "," << l;
}

TEST(Gysin, RankTwoRandomIntegerCurvature) {
  auto g = testing::rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    auto model = InvariantModel::torus(random_curvature(g, 2, 2, true));
    for (int m = 0; m <= 1; ++m) {
      auto rep = bhm_gysin_check(model, m, 4, 0, 4);
      for (const auto& n : rep.nodes) EXPECT_TRUE(n.exact()) << n.label;
    }
  }
  auto nil = InvariantModel::lie(heisenberg_base(), random_curvature(g, 3, 2, true));
  EXPECT_TRUE(bhm_gysin_check(nil, 0, 2, 0, 5).all_exact());
}

TEST(Gysin, ConnectingSignDoesNotAffectExactness) {
  // Both signs give exact sequences; the displayed sign is kept.
  auto model = InvariantModel::torus(heisenberg_curvature());
  for (int k = 0; k <= 3; ++k) {
    auto m1 = detail::term(model, k, 1, 3), mm = detail::term(model, k + 1, 0, 0);
    auto ml = detail::term(model, k + 1, 0, 3), ml0 = detail::term(model, k, 0, 3);
    RatMatrix cn = connecting_matrix(model, k, 0, 3);
    RatMatrix flipped = cn;
    for (std::size_t r = 0; r < flipped.rows(); ++r)
      for (std::size_t c = 0; c < flipped.cols(); ++c) flipped(r, c) = -flipped(r, c);
    RatMatrix inc = include_matrix(model, k + 1, 0, 3);
    EXPECT_TRUE(detail::node(model, m1, mm, ml, flipped, inc, "-^F2", "pi*").exact());
    EXPECT_TRUE(detail::node(model, ml0, m1, mm, project_matrix(model, k, 0, 3), flipped, "pi_*", "-^F2").exact());
  }
}

TEST(Gysin, BrokenConnectingMapIsDetected) {
  auto model = InvariantModel::torus(heisenberg_curvature());
  // At k = 1 the wedge map H^{1,(1,3)} -> H^{2,(0,0)} is onto a nonzero class.
  auto m1 = detail::term(model, 1, 1, 3), mm = detail::term(model, 2, 0, 0), ml = detail::term(model, 2, 0, 3);
  RatMatrix cn = connecting_matrix(model, 1, 0, 3);
  ASSERT_FALSE(cn.is_zero());
  RatMatrix zero(cn.rows(), cn.cols());
  EXPECT_FALSE(detail::node(model, m1, mm, ml, zero, include_matrix(model, 2, 0, 3), "0", "pi*").exact());
}

TEST(TDual, HeisenbergFluxGivesDualCurvature) {
  auto model = InvariantModel::torus(heisenberg_curvature());
  // H = vol_3 = dz1 ^ dz2 (x) X*_1.
  BhmElement H = BhmElement::zero(model, 3, 0, 3);
  ASSERT_EQ(H.component(1).size(), 1u);
  H.component(1)[0] = 1;
  auto r = tdual_pushforward(model, H);
  EXPECT_EQ(r.truncated.component(1), (RatVector{1}));
  EXPECT_FALSE(r.zero_class);
  EXPECT_EQ(r.coordinates.size(), 1u);
}

TEST(TDual, BaseOnlyClassMapsToZeroAndFlatIsProjection) {
  auto g = testing::rng(18);
  auto flat = InvariantModel::torus(CurvatureMatrix::zero(3, 1));
  BhmElement H = BhmElement::zero(flat, 2, 0, 2);
  for (auto& x : H.component(0)) x = rand_q(g);
  auto r = tdual_pushforward(flat, H);
  EXPECT_TRUE(r.truncated.is_zero());
  EXPECT_TRUE(r.zero_class);
  for (auto& x : H.component(1)) x = rand_q(g);
  r = tdual_pushforward(flat, H);
  EXPECT_EQ(r.truncated.component(1), H.component(1));
  EXPECT_EQ(r.truncated.component(2), H.component(2));

  auto heis = InvariantModel::torus(heisenberg_curvature());
  BhmElement open = BhmElement::zero(heis, 1, 0, 1);
  open.component(1)[0] = 1;  // D(1 (x) X*_1) = dz1 ^ dz2 != 0
  EXPECT_THROW(tdual_pushforward(heis, open), PreconditionError);
}

}  // namespace
}  // namespace cechred
