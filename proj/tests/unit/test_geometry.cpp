#include "lcb/geometry.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lcb;
using fixtures::points;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }
Vector v3(double a, double b, double c) { return (Vector(3) << a, b, c).finished(); }

}  // namespace

TEST(ActionSet, CanonicalFormAndEquality) {
  ActionSet a = points({{1, 0}, {0, 1}, {1, 0}});
  ActionSet b = points({{0, 1}, {1, 0}});
  EXPECT_EQ(a.points().rows(), 2);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_THROW(ActionSet::finite(RowMatrix(0, 2)), InvariantViolation);
}

TEST(ActionSet, LexicographicTieBreak) {
  ActionSet sq = fixtures::unit_square();
  // (1,0) and (1,1) tie under phi = e1; lexicographically greatest wins
  EXPECT_EQ(sq.argmax(v2(1, 0)).point, v2(1, 1));
  EXPECT_EQ(sq.argmin(v2(1, 0)).point, v2(0, 1));
}

TEST(ActionSet, HalfspaceArgmaxMatchesVertices) {
  // unit square as constraints
  RowMatrix n(4, 2);
  n << 1, 0, -1, 0, 0, 1, 0, -1;
  Vector b(4);
  b << 1, 0, 1, 0;
  ActionSet h = ActionSet::halfspaces(n, b);
  ASSERT_TRUE(h.has_vertices());
  EXPECT_EQ(h.points().rows(), 4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  ActionSet sq = fixtures::unit_square();
  for (int k = 0; k < 50; ++k) {
    Vector phi = v2(g(rng), g(rng));
    EXPECT_NEAR((h.argmax(phi).point - sq.argmax(phi).point).norm(), 0.0, 1e-9);
  }
  EXPECT_EQ(h.argmax(v2(1, 0)).point, v2(1, 1));
}

TEST(ActionSet, UnboundedHalfspacesRejected) {
  RowMatrix n(2, 2);
  n << 1, 0, 0, 1;
  EXPECT_THROW(ActionSet::halfspaces(n, Vector::Ones(2)), InvariantViolation);
}

TEST(ActionSet, NormBound) {
  EXPECT_THROW(points({{2, 0}}).validate(1.0), InvariantViolation);
  EXPECT_NO_THROW(points({{1, 0}}).validate(1.0));
}

TEST(EmpiricalPolytope, MergesDuplicateSets) {
  auto p = EmpiricalPolytope::from_samples({points({{1, 0}, {0, 1}}), points({{0, 1}, {1, 0}}), points({{0, 0}})});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p.sets()[0].weight, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.sets()[1].weight, 1.0 / 3.0, 1e-15);
}

TEST(Support, SingleSet) {
  auto p = EmpiricalPolytope::from_samples({points({{1, 0}, {0, 1}})});
  auto s = p.support(v2(1, 0));
  EXPECT_DOUBLE_EQ(s.value, 1.0);
  EXPECT_EQ(s.maximizer, v2(1, 0));
}

TEST(Support, SingletonsAverage) {
  auto p = EmpiricalPolytope::from_samples({points({{1, 0}}), points({{0, 1}})});
  auto s = p.support(v2(1, 1));
  EXPECT_DOUBLE_EQ(s.value, 1.0);
  EXPECT_EQ(s.maximizer, v2(0.5, 0.5));
}

TEST(Support, MatchesSelectionEnumeration) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 100; ++rep) {
    auto p = EmpiricalPolytope::from_samples(fixtures::random_sets(rng, 3, 3, 2, 2));
    auto pts = oracle::selection_points(fixtures::to_oracle(p));
    Vector phi = v3(g(rng), g(rng), g(rng));
    auto s = p.support(phi);
    EXPECT_NEAR(s.value, oracle::support(pts, phi), 1e-12);
    EXPECT_NEAR(phi.dot(s.maximizer), s.value, 1e-12);
  }
}

TEST(Optimize, Examples) {
  auto sq = EmpiricalPolytope::from_samples({fixtures::unit_square()});
  EXPECT_EQ(sq.optimize(v2(-1, -1), Sense::Min).point, v2(1, 1));
  auto p = EmpiricalPolytope::from_samples({points({{1, 0, 0}, {0, 1, 0}}), points({{0, 1, 0}, {0, 0, 1}})});
  EXPECT_EQ(p.optimize(v3(0, -1, 0), Sense::Min).point, v3(0, 1, 0));
}

TEST(Optimize, MatchesEnumerationOnFourSets) {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 100; ++rep) {
    auto p = EmpiricalPolytope::from_samples(fixtures::random_sets(rng, 3, 4, 3));
    auto pts = oracle::selection_points(fixtures::to_oracle(p));
    Vector c = v3(g(rng), g(rng), g(rng));
    Vector x = p.optimize(c, Sense::Min).point;
    EXPECT_NEAR(c.dot(x), -oracle::support(pts, -c), 1e-12);
  }
}

TEST(AffineHull, DetectsLowerDimension) {
  auto seg = EmpiricalPolytope::from_samples({points({{0, 0}, {1, 0}})});
  EXPECT_EQ(seg.hull().dim(), 1);
  auto pt = EmpiricalPolytope::from_samples({points({{0.3, 0.2}})});
  EXPECT_EQ(pt.hull().dim(), 0);
  auto plane = EmpiricalPolytope::from_samples({points({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})});
  EXPECT_EQ(plane.hull().dim(), 2);
  // a thin sliver along e2 that random probes can easily miss
  auto thin = EmpiricalPolytope::from_samples({points({{0, 0, 0}, {1, 0, 0}, {0, 1e-5, 0}})});
  EXPECT_EQ(thin.hull().dim(), 2);
  Vector o = thin.hull().origin;
  EXPECT_GT(o[1], 0.0);
}

TEST(Separate, Examples) {
  auto tri = EmpiricalPolytope::from_samples({points({{0, 0}, {1, 0}, {0, 1}})});
  EXPECT_TRUE(separate(tri, v2(0.2, 0.2)).inside);
  auto s = separate(tri, v2(1, 1));
  ASSERT_FALSE(s.inside);
  EXPECT_NEAR(s.phi[0], 1 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(s.phi[1], 1 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(s.margin, 1 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(s.phi.norm(), 1.0, 1e-12);
}

TEST(Separate, SquarePlusSegmentMatchesHalfspaces) {
  // (square + segment) / 2 = [0,1] x [0,1/2]
  auto p = EmpiricalPolytope::from_samples({fixtures::unit_square(), points({{0, 0}, {1, 0}})});
  oracle::HalfspaceHull h(oracle::selection_points(fixtures::to_oracle(p)));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int k = 0; k < 100; ++k) {
    Vector x = v2(u(rng), u(rng));
    const double viol = h.signed_violation(x);
    const bool inside = x[0] >= 0 && x[0] <= 1 && x[1] >= 0 && x[1] <= 0.5;
    EXPECT_EQ(inside, viol <= 0);
    EXPECT_EQ(separate(p, x).inside, inside) << x.transpose();
  }
}

TEST(Separate, SeparatedMarginIsValid) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 40; ++rep) {
    auto p = EmpiricalPolytope::from_samples(fixtures::random_sets(rng, 3, 3, 3));
    Geometry geo(p);
    Vector x = 1.5 * v3(g(rng), g(rng), g(rng));
    auto s = geo.separate(x);
    if (s.inside) continue;
    EXPECT_NEAR(s.phi.norm(), 1.0, 1e-12);
    EXPECT_GT(s.margin, 0.0);
    EXPECT_GE(geo.gap(s.phi, x), s.margin - 1e-12);
  }
}

TEST(Separate, HomogeneousUnderRescaling) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1, 1);
  auto sets = fixtures::random_sets(rng, 2, 3, 3);
  auto p = EmpiricalPolytope::from_samples(sets);
  std::vector<ActionSet> scaled;
  for (auto& s : sets) scaled.push_back(ActionSet::finite(RowMatrix(3.0 * s.points())));
  auto q = EmpiricalPolytope::from_samples(scaled);
  for (int k = 0; k < 100; ++k) {
    Vector x = v2(u(rng), u(rng));
    EXPECT_EQ(separate(p, x).inside, separate(q, 3.0 * x).inside);
  }
}

TEST(Decompose, VertexIsItsOwnDecomposition) {
  auto sq = EmpiricalPolytope::from_samples({fixtures::unit_square()});
  auto d = decompose(sq, v2(0, 0));
  ASSERT_EQ(d.k(), 1);
  EXPECT_DOUBLE_EQ(d.weights[0], 1.0);
  EXPECT_EQ(d.vertices[0].point, v2(0, 0));
}

TEST(Decompose, CenterOfSquare) {
  auto sq = EmpiricalPolytope::from_samples({fixtures::unit_square()});
  auto d = decompose(sq, v2(0.5, 0.5));
  EXPECT_LE(d.k(), 3);
  EXPECT_LT((d.combination() - v2(0.5, 0.5)).norm(), 1e-12);
}

TEST(Decompose, OutsidePointRejected) {
  auto sq = EmpiricalPolytope::from_samples({fixtures::unit_square()});
  EXPECT_THROW(decompose(sq, v2(2, 2)), DomainError);
}

TEST(Decompose, RandomInteriorPointsInR4) {
  std::mt19937_64 rng(44);
  auto p = EmpiricalPolytope::from_samples(fixtures::random_sets(rng, 4, 5, 4, 2));
  auto all = oracle::selection_points(fixtures::to_oracle(p));
  Geometry geo(p);
  for (int k = 0; k < 20; ++k) {
    Vector y = fixtures::interior_point(p, rng);
    auto d = geo.decompose(y);
    EXPECT_LE(d.k(), 5);
    EXPECT_LT((d.combination() - y).norm(), 1e-8);
    double tot = 0;
    for (double w : d.weights) {
      EXPECT_GE(w, 0.0);
      tot += w;
    }
    EXPECT_NEAR(tot, 1.0, 1e-10);
    for (const auto& v : d.vertices) {
      // extreme: the witness separates v from every other selection point
      auto w = geo.cone_witness(v);
      for (const auto& x : all) {
        if ((x - v.point).norm() < 1e-12) continue;
        EXPECT_GT(w.phi.dot(x - v.point), 0.0);
      }
    }
  }
}

TEST(Decompose, LowerDimensionalPolytope) {
  auto p = EmpiricalPolytope::from_samples({points({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), points({{1, 0, 0}})});
  Geometry geo(p);
  Vector y = v3(0.6, 0.25, 0.15);
  ASSERT_TRUE(geo.separate(y).inside);
  auto d = geo.decompose(y);
  EXPECT_LE(d.k(), 3);
  EXPECT_LT((d.combination() - y).norm(), 1e-12);
  EXPECT_FALSE(geo.separate(v3(0.6, 0.25, 0.25)).inside);
}

TEST(ConeWitness, SquareCorner) {
  auto sq = EmpiricalPolytope::from_samples({fixtures::unit_square()});
  Geometry geo(sq);
  auto w = geo.cone_witness(v2(0, 0));
  EXPECT_GT(w.phi[0], 0);
  EXPECT_GT(w.phi[1], 0);
  EXPECT_LE(w.phi.norm(), 1.0 + 1e-12);
  for (Vector x : {v2(1, 0), v2(0, 1), v2(1, 1)}) EXPECT_LT(w.phi.dot(-x), 0.0);
}

TEST(ConeWitness, SimplexVertex) {
  auto s = EmpiricalPolytope::from_samples({points({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})});
  Geometry geo(s);
  auto w = geo.cone_witness(v3(1, 0, 0));
  EXPECT_LT(w.phi[0], std::min(w.phi[1], w.phi[2]));
}

TEST(ConeWitness, RejectsNonVertex) {
  auto sq = EmpiricalPolytope::from_samples({fixtures::unit_square()});
  Geometry geo(sq);
  EXPECT_THROW(geo.cone_witness(v2(0.5, 0)), DomainError);
  EXPECT_THROW(geo.cone_witness(v2(1e-3, 0)), DomainError);
}

TEST(ConeWitness, ArgminReproducesVertex) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    auto p = EmpiricalPolytope::from_samples(fixtures::random_sets(rng, 3, 6, 4));
    Geometry geo(p);
    Vector y = fixtures::interior_point(p, rng);
    auto d = geo.decompose(y);
    for (const auto& v : d.vertices) {
      auto w = geo.cone_witness(v);
      Vector avg = Vector::Zero(3);
      for (const auto& e : p.sets()) avg += e.weight * e.set.argmin(w.phi).point;
      EXPECT_LT((avg - v.point).norm(), 1e-9);
      EXPECT_LE(geo.witness_objective(v, w.phi), -w.epsilon);
      // positive rescaling leaves the argmin unchanged
      for (const auto& e : p.sets()) EXPECT_EQ(e.set.argmin(w.phi).point, e.set.argmin(7.5 * w.phi).point);
    }
  }
}

TEST(ConeWitness, DegenerateDirectionUsesDescent) {
  // vertex produced with a tie-broken objective: c = e1 on the square picks (1,1)
  auto sq = EmpiricalPolytope::from_samples({fixtures::unit_square()});
  Geometry geo(sq);
  Vertex v = sq.optimize(v2(1, 0));
  ASSERT_EQ(v.point, v2(1, 1));
  auto w = geo.cone_witness(v);
  EXPECT_LT(w.phi[0], 0);
  EXPECT_LT(w.phi[1], 0);
}

TEST(RayExit, SquareChords) {
  auto sq = EmpiricalPolytope::from_samples({fixtures::unit_square()});
  Geometry geo(sq);
  const auto& h = sq.hull();
  Vector z = h.to_local(v2(0.25, 0.5));
  Vector u = h.basis.transpose() * v2(1, 0);
  auto [lo, hi] = geo.chord(z, u);
  EXPECT_NEAR(hi, 0.75, 1e-12);
  EXPECT_NEAR(lo, -0.25, 1e-12);
  Vector diag = h.basis.transpose() * v2(1, 1).normalized();
  EXPECT_NEAR(geo.ray_exit(z, diag).t, 0.5 * std::sqrt(2.0), 1e-12);
}
