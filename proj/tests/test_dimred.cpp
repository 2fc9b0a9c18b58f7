#include <gtest/gtest.h>

#include <map>

#include "cechred/dimred.hpp"
#include "test_support.hpp"

namespace cechred {
namespace {

const CoefficientSystem kZ = CoefficientSystem::scalar(Ring::Z);

Cochain random_cochain(std::mt19937_64& g, const Nerve& nerve, int k, const CoefficientSystem& sys) {
  Cochain c = Cochain::zero(nerve, k, sys);
  for (auto& v : c.values) v = testing::uniform(g, -3, 3);
  if (sys.ring == Ring::QmodZ)
    for (auto& v : c.values) v /= Rational(sys.modulus);
  c.normalize();
  return c;
}

DimRedCochain random_triple(std::mt19937_64& g, const Nerve& nerve, int k, std::size_t n,
                            const CoefficientSystem& scalar = kZ) {
  DimRedCochain c = DimRedCochain::zero(nerve, k, n, scalar);
  for (Cochain* slot : {&c.top, &c.mid, &c.bot}) *slot = random_cochain(g, nerve, slot->degree, slot->system);
  return c;
}

TEST(CofF, ZeroAndRankOne) {
  auto t = fixture("torus7").nerve;
  EXPECT_TRUE(c_of_f(t, Cochain::zero(t, 2, CoefficientSystem::vector(Ring::Z, 3))).is_zero());
  auto s5 = fixture("simplex(5)").nerve;
  auto g = testing::rng(1);
  Cochain F = random_cocycle_F(g, s5, 1);
  Cochain C = c_of_f(s5, F);
  EXPECT_EQ(C.width(), 0u);
  EXPECT_TRUE(C.is_zero());
}

TEST(CofF, RejectsNonCocycle) {
  auto s = fixture("simplex(3)").nerve;
  Cochain F = Cochain::zero(s, 2, CoefficientSystem::vector(Ring::Z, 2));
  F.at(0, 0) = 1;
  EXPECT_THROW(c_of_f(s, F), PreconditionError);
}

TEST(CofF, CoboundaryIsCupCommutator) {
  auto g = testing::rng(2);
  std::vector<Nerve> nerves{fixture("torus7").nerve, fixture("simplex(5)").nerve, fixture("projective6").nerve};
  for (int trial = 0; trial < 30; ++trial) nerves.push_back(random_nerve(g, testing::uniform(g, 4, 12), 4));
  for (const auto& nerve : nerves)
    for (std::size_t n = 2; n <= 3; ++n) {
      Cochain F = random_cocycle_F(g, nerve, n);
      Cochain C = c_of_f(nerve, F);
      Cochain dC = cech_differential(nerve, C);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          Cochain Fi = F.component(i), Fj = F.component(j);
          Cochain expected = cup(nerve, Fi, Fj) - cup(nerve, Fj, Fi);
          EXPECT_EQ(dC.component(pair_index(i, j, n)), expected);
          // C(F)_{ij} is the cup-1 product F_j u1 F_i.
          EXPECT_EQ(C.component(pair_index(i, j, n)), cup1(nerve, Fj, Fi));
        }
    }
}

TEST(Products, Cup1VecExamples) {
  auto sph = fixture("sphere_tetra");
  Cochain one = Cochain::from_values(sph.nerve, 0, CoefficientSystem::vector(Ring::Z, 1), RatVector(4, 1));
  Cochain F = change_ring(*sph.h2_generator, Ring::Z);
  F.system = CoefficientSystem::vector(Ring::Z, 1);
  EXPECT_EQ(cup1_vec(sph.nerve, one, F).values, sph.h2_generator->values);
  EXPECT_TRUE(cup1_vec(sph.nerve, Cochain::zero(sph.nerve, 0, one.system), F).is_zero());
}

TEST(Products, Cup1VecBilinear) {
  auto nerve = fixture("simplex(4)").nerve;
  auto g = testing::rng(3);
  const auto vz = CoefficientSystem::vector(Ring::Z, 2);
  Cochain a = random_cochain(g, nerve, 1, vz), b = random_cochain(g, nerve, 1, vz);
  Cochain F = random_cocycle_F(g, nerve, 2), G = random_cocycle_F(g, nerve, 2);
  EXPECT_EQ(cup1_vec(nerve, a + b, F), cup1_vec(nerve, a, F) + cup1_vec(nerve, b, F));
  EXPECT_EQ(cup1_vec(nerve, a, F + G), cup1_vec(nerve, a, F) + cup1_vec(nerve, a, G));
}

TEST(Products, Cup1MatHandExample) {
  auto nerve = fixture("simplex(2)").nerve;
  const std::size_t n = 2;
  Cochain phi = Cochain::zero(nerve, 0, CoefficientSystem::upper(Ring::Z, n));
  for (std::size_t v = 0; v < 3; ++v) phi.at(v, 0) = 1;
  Cochain F = Cochain::zero(nerve, 2, CoefficientSystem::vector(Ring::Z, n));
  F.at(0, 0) = 5;  // a
  F.at(0, 1) = 7;  // b
  Cochain out = cup1_mat(nerve, phi, F);
  EXPECT_EQ(out.at(0, 0), -7);
  EXPECT_EQ(out.at(0, 1), 5);
  // n = 1: no pairs.
  Cochain phi1 = Cochain::zero(nerve, 0, CoefficientSystem::upper(Ring::Z, 1));
  Cochain F1 = Cochain::zero(nerve, 2, CoefficientSystem::vector(Ring::Z, 1));
  F1.at(0, 0) = 3;
  EXPECT_TRUE(cup1_mat(nerve, phi1, F1).is_zero());
}

TEST(Products, Cup2AgainstDenseEnumeration) {
  auto nerve = fixture("simplex(5)").nerve;
  auto g = testing::rng(4);
  for (std::size_t n = 1; n <= 3; ++n)
    for (int p = 0; p <= 2; ++p) {
      Cochain F = random_cocycle_F(g, nerve, n);
      Cochain CF = c_of_f(nerve, F);
      Cochain phi = random_cochain(g, nerve, p, CoefficientSystem::upper(Ring::Z, n));
      Cochain out = cup2(nerve, phi, CF);
      // Oracle: enumerate tuples and evaluate C(F) from its defining formula.
      std::map<Simplex, std::vector<Rational>> Fm;
      for (std::size_t t = 0; t < nerve.count(2); ++t)
        for (std::size_t l = 0; l < n; ++l) Fm[nerve.simplex(2, t)].push_back(F.at(t, l));
      for (std::size_t t = 0; t < nerve.count(p + 3); ++t) {
        const Simplex& s = nerve.simplex(p + 3, t);
        Simplex front(s.begin(), s.begin() + p + 1);
        const int a = s[p], b = s[p + 1], c = s[p + 2], e = s[p + 3];
        Rational expected = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) {
            Rational cf = Fm[{a, b, c}][i] * Fm[{a, c, e}][j] - Fm[{b, c, e}][i] * Fm[{a, b, e}][j];
            expected += phi.at(nerve.at(front), pair_index(i, j, n)) * cf;
          }
        EXPECT_EQ(out.at(t), expected);
      }
    }
}

TEST(DF, ZeroTwistIsComponentwise) {
  auto nerve = fixture("torus7").nerve;
  auto g = testing::rng(5);
  TwistData tw = TwistData::zero(nerve, 2);
  DimRedCochain c = random_triple(g, nerve, 2, 2);
  DimRedCochain d = d_F(nerve, c, tw);
  EXPECT_EQ(d.top, cech_differential(nerve, c.top));
  EXPECT_EQ(d.mid, cech_differential(nerve, c.mid));
  EXPECT_EQ(d.bot, cech_differential(nerve, c.bot));
}

TEST(DF, DegreeZero) {
  auto nerve = fixture("sphere_tetra").nerve;
  auto g = testing::rng(6);
  TwistData tw = TwistData::from_F(nerve, random_cocycle_F(g, nerve, 2));
  DimRedCochain c = random_triple(g, nerve, 0, 2);
  EXPECT_EQ(c.mid.values.size(), 0u);
  DimRedCochain d = d_F(nerve, c, tw);
  EXPECT_EQ(d.top, cech_differential(nerve, c.top));
  EXPECT_TRUE(d.mid.is_zero());
}

TEST(DF, SquaresToZeroOnRandomInstances) {
  auto g = testing::rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Nerve nerve = random_nerve(g, static_cast<int>(testing::uniform(g, 3, 20)), 4);
    const std::size_t n = static_cast<std::size_t>(testing::uniform(g, 1, 3));
    TwistData tw = TwistData::from_F(nerve, random_cocycle_F(g, nerve, n));
    for (int k = 0; k <= nerve.dimension(); ++k) {
      DimRedCochain c = random_triple(g, nerve, k, n);
      ASSERT_TRUE(d_F(nerve, d_F(nerve, c, tw), tw).is_zero()) << "trial " << trial << " k=" << k;
      TruncatedCochain b{k, c.mid, c.bot};
      b.mid = random_cochain(g, nerve, k, b.mid.system);
      b.bot = random_cochain(g, nerve, k - 1, b.bot.system);
      ASSERT_TRUE(d_bar_F(nerve, d_bar_F(nerve, b, tw), tw).is_zero());
    }
  }
}

TEST(DF, SquaresToZeroOverQmodZ) {
  auto g = testing::rng(8);
  auto nerve = fixture("torus7").nerve;
  TwistData tw = TwistData::from_F(nerve, random_cocycle_F(g, nerve, 2));
  for (int k = 0; k <= 3; ++k) {
    DimRedCochain c = random_triple(g, nerve, k, 2, CoefficientSystem::scalar(Ring::QmodZ, 6));
    EXPECT_TRUE(d_F(nerve, d_F(nerve, c, tw), tw).is_zero());
  }
}

TEST(DF, MatrixAgreesWithCochainMap) {
  auto g = testing::rng(9);
  for (const auto& name : {"torus7", "simplex(4)", "projective6"}) {
    auto nerve = fixture(name).nerve;
    for (std::size_t n = 1; n <= 3; ++n) {
      TwistData tw = TwistData::from_F(nerve, random_cocycle_F(g, nerve, n));
      for (int k = 0; k <= nerve.dimension() + 1; ++k) {
        DimRedCochain c = random_triple(g, nerve, k, n);
        IntVector v = d_F_matrix(nerve, tw, k).apply(abelian::to_integer(c.flatten(), "test"));
        EXPECT_EQ(abelian::to_rational(v), d_F(nerve, c, tw).flatten()) << name << " n=" << n << " k=" << k;
        TruncatedCochain b = TruncatedCochain::zero(nerve, k, n, kZ);
        b.mid = random_cochain(g, nerve, k, b.mid.system);
        b.bot = random_cochain(g, nerve, k - 1, b.bot.system);
        IntVector w = d_bar_F_matrix(nerve, tw, k).apply(abelian::to_integer(b.flatten(), "test"));
        EXPECT_EQ(abelian::to_rational(w), d_bar_F(nerve, b, tw).flatten());
      }
    }
  }
}

TEST(DBarF, ExamplesAndLowerSlotCompatibility) {
  auto g = testing::rng(10);
  auto nerve = fixture("torus7").nerve;
  TwistData tw = TwistData::from_F(nerve, random_cocycle_F(g, nerve, 3));
  TruncatedCochain b = TruncatedCochain::zero(nerve, 1, 3, kZ);
  b.mid = random_cochain(g, nerve, 1, b.mid.system);
  TruncatedCochain db = d_bar_F(nerve, b, tw);
  EXPECT_EQ(db.mid, cech_differential(nerve, b.mid));
  EXPECT_TRUE(db.bot.is_zero());
  for (int k = 1; k <= 3; ++k) {
    DimRedCochain c = random_triple(g, nerve, k, 3);
    DimRedCochain d = d_F(nerve, c, tw);
    TruncatedCochain lower{k - 1, c.mid, c.bot};
    TruncatedCochain dl = d_bar_F(nerve, lower, tw);
    EXPECT_EQ(dl.mid, d.mid);
    EXPECT_EQ(dl.bot, d.bot);
  }
}

TEST(DimRedCohomology, PointNerve) {
  auto pt = fixture("point").nerve;
  for (std::size_t n = 1; n <= 3; ++n) {
    TwistData tw = TwistData::zero(pt, n);
    EXPECT_EQ(dimred_cohomology(pt, tw, Ring::Z, 0).to_string(), "Z");
    auto h1 = dimred_cohomology(pt, tw, Ring::Z, 1);
    EXPECT_EQ(h1.free_rank, n);
    EXPECT_TRUE(h1.torsion.empty());
    auto h2 = dimred_cohomology(pt, tw, Ring::Z, 2);
    EXPECT_EQ(h2.free_rank, n * (n - 1) / 2);
    EXPECT_TRUE(dimred_cohomology(pt, tw, Ring::Z, 3).is_trivial());
  }
}

IntVector sorted_concat(std::vector<abelian::FpAbelianGroup> parts, std::size_t& free_rank) {
  IntVector torsion;
  free_rank = 0;
  for (const auto& p : parts) {
    free_rank += p.free_rank;
    torsion.insert(torsion.end(), p.torsion.begin(), p.torsion.end());
  }
  return torsion;
}

// Invariant factors of a direct sum from the primary decomposition: SNF of
// the diagonal relation matrix.
IntVector direct_sum_torsion(const IntVector& factors) {
  abelian::IntMatrix D(factors.size(), factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) D(i, i) = factors[i];
  IntVector out;
  for (const auto& d : abelian::smith_normal_form(D).invariant_factors())
    if (d > 1) out.push_back(d);
  return out;
}

TEST(DimRedCohomology, ZeroTwistDecomposition) {
  for (const auto& name : {"point", "circle3", "torus7", "sphere_tetra", "projective6"}) {
    auto nerve = fixture(name).nerve;
    for (std::size_t n = 1; n <= 2; ++n) {
      TwistData tw = TwistData::zero(nerve, n);
      for (int k = 0; k <= 4; ++k) {
        std::vector<abelian::FpAbelianGroup> parts;
        parts.push_back(cech_cohomology(nerve, kZ, k));
        if (k >= 1)
          for (std::size_t i = 0; i < n; ++i) parts.push_back(cech_cohomology(nerve, kZ, k - 1));
        if (k >= 2)
          for (std::size_t i = 0; i < pair_count(n); ++i) parts.push_back(cech_cohomology(nerve, kZ, k - 2));
        std::size_t free_rank = 0;
        IntVector torsion = direct_sum_torsion(sorted_concat(parts, free_rank));
        auto h = dimred_cohomology(nerve, tw, Ring::Z, k);
        EXPECT_EQ(h.free_rank, free_rank) << name << " n=" << n << " k=" << k;
        EXPECT_EQ(h.torsion, torsion) << name << " n=" << n << " k=" << k;
      }
    }
  }
}

TEST(DimRedCohomology, TorusDegreeThree) {
  auto t = fixture("torus7");
  EXPECT_EQ(dimred_cohomology(t.nerve, TwistData::zero(t.nerve, 1), Ring::Z, 3).to_string(), "Z");
  Cochain F = *t.h2_generator;
  F.system = CoefficientSystem::vector(Ring::Z, 1);
  TwistData tw = TwistData::from_F(t.nerve, F);
  std::size_t rank_zero = 0, rank_twisted = 0;
  for (int k = 0; k <= 4; ++k) {
    rank_zero += dimred_cohomology(t.nerve, TwistData::zero(t.nerve, 1), Ring::Z, k).free_rank;
    rank_twisted += dimred_cohomology(t.nerve, tw, Ring::Z, k).free_rank;
  }
  EXPECT_LT(rank_twisted, rank_zero);
  // Nilmanifold Betti numbers (1, 2, 2, 1).
  std::vector<std::size_t> expected{1, 2, 2, 1, 0};
  for (int k = 0; k <= 4; ++k)
    EXPECT_EQ(dimred_cohomology(t.nerve, tw, Ring::Q, k).free_rank, expected[static_cast<std::size_t>(k)]) << k;
}

TEST(DimRedCohomology, ClassIndependentOfRepresentative) {
  auto g = testing::rng(11);
  auto nerve = fixture("torus7").nerve;
  TwistData tw = TwistData::from_F(nerve, random_cocycle_F(g, nerve, 2));
  for (int k = 1; k <= 3; ++k) {
    auto h = dimred_cohomology(nerve, tw, Ring::Z, k);
    for (std::size_t i = 0; i < h.generators.size(); ++i) {
      DimRedCochain b = random_triple(g, nerve, k - 1, 2);
      RatVector shifted = d_F(nerve, b, tw).flatten();
      IntVector z = h.generators[i];
      for (std::size_t a = 0; a < z.size(); ++a) z[a] += shifted[a].get_num();
      EXPECT_EQ(h.coordinates(z), h.coordinates(h.generators[i]));
    }
  }
}

TEST(DimRedCohomology, RationalRanksMatchIntegerRanks) {
  auto g = testing::rng(12);
  for (const auto& name : {"torus7", "projective6", "sphere_tetra"}) {
    auto nerve = fixture(name).nerve;
    TwistData tw = TwistData::from_F(nerve, random_cocycle_F(g, nerve, 2));
    for (int k = 0; k <= 4; ++k)
      EXPECT_EQ(dimred_cohomology(nerve, tw, Ring::Q, k).free_rank,
                dimred_cohomology(nerve, tw, Ring::Z, k).free_rank);
  }
  EXPECT_THROW(dimred_cohomology(fixture("point").nerve, TwistData::zero(fixture("point").nerve, 1), Ring::QmodZ, 1),
               UnsupportedRing);
}

TEST(Twist, FromRationalS) {
  auto g = testing::rng(13);
  auto nerve = fixture("torus7").nerve;
  Cochain s = random_rational_s(g, nerve, 2, 3);
  TwistData tw = TwistData::from_s(nerve, s);
  EXPECT_EQ(change_ring(cech_differential(nerve, s), Ring::Z), tw.F);
  Cochain bad = Cochain::zero(nerve, 1, CoefficientSystem::vector(Ring::Q, 1));
  bad.at(0, 0) = Rational(1, 2);
  EXPECT_THROW(TwistData::from_s(nerve, bad), PreconditionError);
}

}  // namespace
}  // namespace cechred
