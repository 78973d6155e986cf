#pragma once

#include "lcb/empirical_polytope.hpp"
#include "oracles/brute_force.hpp"

#include <random>
#include <vector>

namespace fixtures {

inline lcb::ActionSet points(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<lcb::Vector> pts;
  for (auto r : rows) {
    lcb::Vector v(r.size());
    int i = 0;
    for (double x : r) v[i++] = x;
    pts.push_back(v);
  }
  return lcb::ActionSet::finite(pts);
}

inline lcb::ActionSet unit_square() { return points({{0, 0}, {1, 0}, {0, 1}, {1, 1}}); }

// Random finite sets with points in the unit ball.
inline std::vector<lcb::ActionSet> random_sets(std::mt19937_64& rng, int d, int sets, int max_points,
                                               int min_points = 1) {
  std::uniform_int_distribution<int> count(min_points, max_points);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<lcb::ActionSet> out;
  for (int s = 0; s < sets; ++s) {
    std::vector<lcb::Vector> pts;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      lcb::Vector v(d);
      for (int j = 0; j < d; ++j) v[j] = g(rng);
      v *= std::pow(u(rng), 1.0 / d) / v.norm();
      pts.push_back(v);
    }
    out.push_back(lcb::ActionSet::finite(pts));
  }
  return out;
}

inline std::vector<oracle::WeightedPoints> to_oracle(const lcb::EmpiricalPolytope& p) {
  std::vector<oracle::WeightedPoints> out;
  for (const auto& e : p.sets()) {
    oracle::WeightedPoints w{{}, e.weight};
    for (Eigen::Index i = 0; i < e.set.points().rows(); ++i) w.points.push_back(e.set.points().row(i).transpose());
    out.push_back(w);
  }
  return out;
}

// Random point of the polytope: a random convex combination of random vertices.
inline lcb::Vector interior_point(const lcb::EmpiricalPolytope& p, std::mt19937_64& rng, int count = 6) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.05, 1);
  lcb::Vector s = lcb::Vector::Zero(p.dim());
  double tot = 0;
  for (int k = 0; k < count; ++k) {
    lcb::Vector c(p.dim());
    for (int j = 0; j < p.dim(); ++j) c[j] = g(rng);
    const double w = u(rng);
    s += w * p.optimize(c).point;
    tot += w;
  }
  return s / tot;
}

}  // namespace fixtures
