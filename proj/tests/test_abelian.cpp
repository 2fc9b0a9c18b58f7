#include <gtest/gtest.h>

#include "cechred/abelian.hpp"
#include "test_support.hpp"

namespace cechred {
namespace {

using abelian::IntMatrix;
using abelian::PivotRule;

void expect_valid_smith(const IntMatrix& M, const abelian::SmithDecomposition& sd) {
  EXPECT_EQ(sd.U * M * sd.V, sd.S);
  EXPECT_EQ(sd.U * sd.U_inv, IntMatrix::identity(M.rows()));
  EXPECT_EQ(sd.V * sd.V_inv, IntMatrix::identity(M.cols()));
  EXPECT_EQ(abs(testing::brute_det(sd.U)), 1);
  EXPECT_EQ(abs(testing::brute_det(sd.V)), 1);
  for (std::size_t r = 0; r < M.rows(); ++r)
    for (std::size_t c = 0; c < M.cols(); ++c)
      if (r != c || r >= sd.rank) {
        EXPECT_EQ(sd.S(r, c), 0) << r << "," << c;
      }
  for (std::size_t i = 0; i < sd.rank; ++i) {
    EXPECT_GT(sd.S(i, i), 0);
    if (i + 1 < sd.rank) {
      EXPECT_TRUE(mpz_divisible_p(sd.S(i + 1, i + 1).get_mpz_t(), sd.S(i, i).get_mpz_t()));
    }
  }
}

TEST(SmithNormalForm, IdentityIsFixed) {
  IntMatrix I = IntMatrix::identity(3);
  auto sd = abelian::smith_normal_form(I);
  EXPECT_EQ(sd.S, I);
  EXPECT_EQ(sd.U, I);
  EXPECT_EQ(sd.V, I);
  EXPECT_EQ(sd.rank, 3u);
}

TEST(SmithNormalForm, TwoByTwoMatchesGcdAndDeterminant) {
  IntMatrix M{{2, 4}, {6, 8}};
  // d1 = gcd of entries, d1 * d2 = |det|.
  Integer g = gcd(gcd(M(0, 0), M(0, 1)), gcd(M(1, 0), M(1, 1)));
  Integer det = abs(testing::brute_det(M));
  ASSERT_EQ(g, 2);
  ASSERT_EQ(det, 8);
  auto sd = abelian::smith_normal_form(M);
  expect_valid_smith(M, sd);
  EXPECT_EQ(sd.S(0, 0), g);
  EXPECT_EQ(sd.S(1, 1), det / g);
}

TEST(SmithNormalForm, ZeroAndEmptyMatrices) {
  IntMatrix Z(2, 3);
  auto sd = abelian::smith_normal_form(Z);
  EXPECT_TRUE(sd.S.is_zero());
  EXPECT_EQ(sd.rank, 0u);
  auto empty = abelian::smith_normal_form(IntMatrix(0, 4));
  EXPECT_EQ(empty.S.rows(), 0u);
  EXPECT_EQ(empty.V.rows(), 4u);
}

TEST(SmithNormalForm, RandomSweepAgainstDeterminantalDivisors) {
  auto g = testing::rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t r = testing::uniform(g, 1, 6), c = testing::uniform(g, 1, 6);
    IntMatrix M = testing::random_matrix(g, r, c, -3, 3);
    auto sd = abelian::smith_normal_form(M);
    expect_valid_smith(M, sd);
    EXPECT_EQ(sd.invariant_factors(), testing::determinantal_invariant_factors(M));
    auto alt = abelian::smith_normal_form(M, PivotRule::FirstNonzero);
    expect_valid_smith(M, alt);
    EXPECT_EQ(alt.S, sd.S);
  }
}

TEST(SmithNormalForm, DeterministicForFixedInput) {
  auto g = testing::rng(5);
  IntMatrix M = testing::random_matrix(g, 5, 5, -9, 9);
  auto a = abelian::smith_normal_form(M);
  auto b = abelian::smith_normal_form(M);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.V, b.V);
}

TEST(SmithNormalForm, LargeEntriesStayExact) {
  IntMatrix M(2, 2);
  M(0, 0) = Integer("123456789012345678901234567890");
  M(0, 1) = Integer("987654321098765432109876543210");
  M(1, 0) = 7;
  M(1, 1) = 11;
  auto sd = abelian::smith_normal_form(M);
  expect_valid_smith(M, sd);
}

TEST(SolveInteger, DiagonalCases) {
  IntMatrix M{{2}};
  auto x = abelian::solve_integer(M, IntVector{4});
  ASSERT_TRUE(x);
  EXPECT_EQ((*x)[0], 2);
  EXPECT_FALSE(abelian::solve_integer(M, IntVector{3}));
}

TEST(SolveInteger, RandomPreimagesAreRecovered) {
  auto g = testing::rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    IntMatrix M = testing::random_matrix(g, 5, 7, -4, 4);
    IntVector x0 = testing::random_vector(g, 7, -5, 5);
    IntVector b = M.apply(x0);
    auto x = abelian::solve_integer(M, b);
    ASSERT_TRUE(x);
    EXPECT_EQ(M.apply(*x), b);
  }
}

TEST(SolveInteger, DimensionMismatchIsInputError) {
  IntMatrix M{{1, 2}};
  EXPECT_THROW(abelian::solve_integer(M, IntVector{1, 2}), InputError);
}

TEST(HomologyQuotient, SmallExamples) {
  auto z = abelian::homology_quotient(IntMatrix{{0}}, IntMatrix{{0}});
  EXPECT_EQ(z.free_rank, 1u);
  EXPECT_TRUE(z.torsion.empty());
  auto z2 = abelian::homology_quotient(IntMatrix{{0}}, IntMatrix{{2}});
  EXPECT_EQ(z2.free_rank, 0u);
  EXPECT_EQ(z2.torsion, IntVector{2});
  EXPECT_EQ(z2.to_string(), "Z/2");
}

TEST(HomologyQuotient, NonComplexIsRejectedWithColumn) {
  try {
    abelian::homology_quotient(IntMatrix{{1, 0}}, IntMatrix{{0, 1}, {0, 0}});
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("column 1"), std::string::npos);
  }
}

// Cellular cochain complex of the minimal 6-vertex projective plane written
// out by hand: 6 vertices, 15 edges, 10 triangles.
struct ProjectivePlane {
  std::vector<std::vector<int>> edges, triangles;
  IntMatrix d0, d1;
};

ProjectivePlane projective_plane() {
  ProjectivePlane p;
  // Relabelled copy of the standard list {123,134,145,156,162,235,346,452,563,624}.
  p.triangles = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}, {0, 1, 5},
                 {1, 2, 4}, {2, 3, 5}, {1, 3, 4}, {2, 4, 5}, {1, 3, 5}};
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b) p.edges.push_back({a, b});
  auto edge_index = [&](int a, int b) {
    for (std::size_t i = 0; i < p.edges.size(); ++i)
      if (p.edges[i][0] == a && p.edges[i][1] == b) return i;
    return std::size_t(-1);
  };
  p.d0 = IntMatrix(15, 6);
  for (std::size_t i = 0; i < 15; ++i) {
    p.d0(i, p.edges[i][1]) += 1;
    p.d0(i, p.edges[i][0]) -= 1;
  }
  p.d1 = IntMatrix(10, 15);
  for (std::size_t t = 0; t < 10; ++t) {
    const auto& s = p.triangles[t];
    p.d1(t, edge_index(s[1], s[2])) += 1;
    p.d1(t, edge_index(s[0], s[2])) -= 1;
    p.d1(t, edge_index(s[0], s[1])) += 1;
  }
  return p;
}

TEST(HomologyQuotient, ProjectivePlaneDegreeTwo) {
  auto p = projective_plane();
  auto h2 = abelian::homology_quotient(IntMatrix(0, 10), p.d1);
  EXPECT_EQ(h2.free_rank, 0u);
  EXPECT_EQ(h2.torsion, IntVector{2});
  auto h1 = abelian::homology_quotient(p.d1, p.d0);
  EXPECT_TRUE(h1.is_trivial());
  auto h0 = abelian::homology_quotient(p.d0, IntMatrix(6, 0));
  EXPECT_EQ(h0.free_rank, 1u);
}

TEST(HomologyQuotient, RandomSweepAgainstNaiveOracle) {
  auto g = testing::rng(99);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t a = testing::uniform(g, 1, 6), b = testing::uniform(g, 1, 6);
    IntMatrix d_out = testing::random_matrix(g, b, a, -3, 3);
    if (trial % 4 == 0) d_out = IntMatrix(b, a);
    // d_in: integer combinations of a kernel basis of d_out.
    auto K = abelian::nullspace(abelian::to_rational(d_out));
    std::size_t c = testing::uniform(g, 1, 6);
    IntMatrix d_in(a, c);
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t k = 0; k < K.cols(); ++k) {
        Integer den = 1;
        for (std::size_t i = 0; i < a; ++i) den = lcm(den, Integer(K(i, k).get_den()));
        long coef = testing::uniform(g, -3, 3);
        for (std::size_t i = 0; i < a; ++i) {
          Rational v = K(i, k) * den * coef;
          d_in(i, j) += v.get_num();
        }
      }
    auto h = abelian::homology_quotient(d_out, d_in);
    // Oracle: rank via determinantal divisors; torsion = nontrivial
    // invariant factors of d_in (ker d_out is saturated).
    std::size_t rank_out = testing::determinantal_invariant_factors(d_out).size();
    IntVector inv_in = testing::determinantal_invariant_factors(d_in);
    IntVector torsion;
    for (const auto& d : inv_in)
      if (d > 1) torsion.push_back(d);
    EXPECT_EQ(h.free_rank, a - rank_out - inv_in.size());
    EXPECT_EQ(h.torsion, torsion);
    EXPECT_EQ(h.generators.size(), h.free_rank + h.torsion.size());
    for (std::size_t i = 0; i < h.generators.size(); ++i) {
      EXPECT_TRUE(abelian::is_zero_vector(d_out.apply(h.generators[i])));
      IntVector coords = h.coordinates(h.generators[i]);
      for (std::size_t j = 0; j < coords.size(); ++j) EXPECT_EQ(coords[j], i == j ? 1 : 0);
    }
    for (std::size_t j = 0; j < d_in.cols(); ++j) EXPECT_TRUE(h.is_zero_class(d_in.column(j)));
  }
}

TEST(HomologyQuotient, ModNMatchesUniversalCoefficients) {
  auto p = projective_plane();
  // H^1(RP^2; Z/2) = Z/2 and H^2(RP^2; Z/2) = Z/2.
  auto h1 = abelian::homology_quotient_mod(p.d1, p.d0, 2);
  EXPECT_EQ(h1.torsion, IntVector{2});
  EXPECT_EQ(h1.free_rank, 0u);
  auto h2 = abelian::homology_quotient_mod(IntMatrix(0, 10), p.d1, 2);
  EXPECT_EQ(h2.torsion, IntVector{2});
  // Z/3 coefficients kill everything above degree zero.
  EXPECT_TRUE(abelian::homology_quotient_mod(p.d1, p.d0, 3).is_trivial());
  auto h0 = abelian::homology_quotient_mod(p.d0, IntMatrix(6, 0), 6);
  EXPECT_EQ(h0.torsion, IntVector{6});
  for (const auto& gen : h1.generators) EXPECT_TRUE(h1.is_cocycle(gen));
}

TEST(Membership, SubgroupExamples) {
  std::vector<IntVector> gens{{2, 0}, {0, 3}};
  auto yes = abelian::membership(gens, IntVector{4, 3});
  ASSERT_TRUE(yes.member);
  EXPECT_EQ(yes.coefficients, (IntVector{2, 1}));
  EXPECT_FALSE(abelian::membership(gens, IntVector{1, 0}).member);
  EXPECT_THROW(abelian::membership(gens, IntVector{1, 0, 0}), InputError);
}

TEST(Membership, ImageLatticeWitness) {
  auto g = testing::rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    IntMatrix M = testing::random_matrix(g, 4, 3, -5, 5);
    IntVector x0 = testing::random_vector(g, 3, -4, 4);
    auto m = abelian::membership(M, M.apply(x0));
    ASSERT_TRUE(m.member);
    EXPECT_EQ(M.apply(m.coefficients), M.apply(x0));
  }
}

TEST(RationalAlgebra, RankNullspaceSolve) {
  auto A = abelian::to_rational(IntMatrix{{1, 2, 3}, {2, 4, 6}, {1, 0, 1}});
  EXPECT_EQ(abelian::rank(A), 2u);
  auto N = abelian::nullspace(A);
  ASSERT_EQ(N.cols(), 1u);
  EXPECT_TRUE((A * N).is_zero());
  auto x = abelian::solve_rational(A, RatVector{2, 4, 0});
  ASSERT_TRUE(x);
  EXPECT_EQ(A.apply(*x), (RatVector{2, 4, 0}));
  EXPECT_FALSE(abelian::solve_rational(A, RatVector{1, 0, 0}));
}

TEST(RationalAlgebra, HomologyDimensionIsRankDeficit) {
  auto p = projective_plane();
  auto h1 = abelian::rational_homology(abelian::to_rational(p.d1), abelian::to_rational(p.d0));
  EXPECT_EQ(h1.dim, 0u);
  auto h2 = abelian::rational_homology(abelian::RatMatrix(0, 10), abelian::to_rational(p.d1));
  EXPECT_EQ(h2.dim, 0u);
  auto h0 = abelian::rational_homology(abelian::to_rational(p.d0), abelian::RatMatrix(6, 0));
  EXPECT_EQ(h0.dim, 1u);
  EXPECT_EQ(h0.coordinates(h0.basis[0]), RatVector{1});
}

TEST(Exactness, ShortExactSequenceOfCyclicGroups) {
  // 0 -> Z --2--> Z -> Z/2 -> 0 at the middle Z.
  abelian::FpAbelianGroup Zg;
  Zg.free_rank = 1;
  abelian::FpAbelianGroup Z2;
  Z2.torsion = {2};
  auto check = abelian::check_exact(Zg, Zg, Z2, IntMatrix{{2}}, IntMatrix{{1}});
  EXPECT_TRUE(check.exact());
  ASSERT_FALSE(check.witnesses.empty());
  // Multiplication by 3 is not exact there.
  auto bad = abelian::check_exact(Zg, Zg, Z2, IntMatrix{{3}}, IntMatrix{{1}});
  EXPECT_FALSE(bad.exact());
}

}  // namespace
}  // namespace cechred
