#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <coplan/objective.hpp>

#include <random>

using namespace coplan;
using namespace coplan::objective;

namespace {

std::mt19937 rng(4242);
double uni(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Trajectories random_traj(int robots, int horizon, double span = 3.0) {
  Trajectories q(robots, horizon, 2);
  for (int r = 0; r < robots; ++r)
    for (int t = 0; t <= horizon; ++t) q.at(r, t) << uni(-span, span), uni(-span, span);
  return q;
}

FieldGrid small_grid(std::vector<Vec3> pts) {
  FieldGrid g;
  g.points = std::move(pts);
  g.initial_covariance = 1.0;
  g.process_noise = 0.01;
  g.sigma_meas = 1.0;
  g.ell = 1.0;
  return g;
}

}  // namespace

TEST_CASE("information gain follows the radial measurement-quality profile") {
  CHECK(information_gain(Vec3(1, 2, 0), Vec3(1, 2, 0), 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(information_gain(Vec3(1, 0, 0), Vec3(0, 0, 0), 1.0, 1.0) ==
        doctest::Approx(std::exp(-0.5)));
  CHECK(information_gain(Vec3(10, 0, 0), Vec3(0, 0, 0), 1.0, 1.0) < 2e-22);
  CHECK(information_gain(Vec3(0, 0, 0), Vec3(0, 0, 0), 2.0, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("filter recursion: parked robot halves then thirds the covariance") {
  FieldGrid g = small_grid({Vec3(1, 1, 0)});
  g.process_noise = 0;

  Trajectories q1(1, 1, 2);
  q1.at(0, 0) << 1, 1;
  q1.at(0, 1) << 1, 1;
  CHECK(propagate(g, q1)[0] == doctest::Approx(0.5));

  Trajectories q2(1, 2, 2);
  for (int t = 0; t <= 2; ++t) q2.at(0, t) << 1, 1;
  CHECK(propagate(g, q2)[0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("filter recursion: unobserved points only inflate") {
  FieldGrid g = small_grid({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  Trajectories q(1, 20, 2);
  for (int t = 0; t <= 20; ++t) q.at(0, t) << 500, 500;  // far beyond the gain tail
  Eigen::VectorXd P = propagate(g, q);
  CHECK(P[0] == doctest::Approx(1.2));
  CHECK(P[1] == doctest::Approx(1.2));
}

TEST_CASE("adding a robot never increases any covariance") {
  FieldGrid g = small_grid({Vec3(0, 0, 0), Vec3(2, 1, 0), Vec3(-1, 2, 0)});
  for (int it = 0; it < 20; ++it) {
    Trajectories one = random_traj(1, 6);
    Trajectories two(2, 6, 2);
    for (int t = 0; t <= 6; ++t) {
      two.at(0, t) = one.at(0, t);
      two.at(1, t) << uni(-3, 3), uni(-3, 3);
    }
    Eigen::VectorXd pa = propagate(g, one), pb = propagate(g, two);
    for (int j = 0; j < pa.size(); ++j) CHECK(pb[j] <= pa[j] + 1e-12);
  }
}

TEST_CASE("propagation is invariant under robot relabeling") {
  FieldGrid g = small_grid({Vec3(0, 0, 0), Vec3(1, 1, 0)});
  Trajectories a = random_traj(2, 5);
  Trajectories b(2, 5, 2);
  for (int t = 0; t <= 5; ++t) {
    b.at(0, t) = a.at(1, t);
    b.at(1, t) = a.at(0, t);
  }
  CHECK((propagate(g, a) - propagate(g, b)).norm() < 1e-14);
}

TEST_CASE("objective is a smoothed maximum with the log-sum-exp sandwich") {
  FieldGrid g = small_grid({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)});
  // all covariances equal: value is max + tau * log(count)
  Trajectories far(1, 4, 2);
  for (int t = 0; t <= 4; ++t) far.at(0, t) << 500, 500;
  double expected = (1.0 + 4 * 0.01) + g.temperature() * std::log(3.0);
  CHECK(objective_value(g, far) == doctest::Approx(expected));

  for (int it = 0; it < 30; ++it) {
    Trajectories q = random_traj(2, 5);
    Eigen::VectorXd P = propagate(g, q);
    double phi = objective_value(g, q);
    CHECK(phi >= P.maxCoeff() - 1e-12);
    CHECK(phi <= P.maxCoeff() + g.temperature() * std::log(double(P.size())) + 1e-12);
  }
}

TEST_CASE("objective gradient matches finite differences") {
  double worst = 0;
  for (int instance = 0; instance < 50; ++instance) {
    FieldGrid g = small_grid({Vec3(uni(-2, 2), uni(-2, 2), 0), Vec3(uni(-2, 2), uni(-2, 2), 0),
                              Vec3(uni(-2, 2), uni(-2, 2), 0)});
    int robots = 1 + instance % 2;
    Trajectories q = random_traj(robots, 5, 2.5);
    auto eval = objective_value_and_gradient(g, q);
    CHECK(eval.value == doctest::Approx(objective_value(g, q)));
    double h = 1e-6;
    for (int i = 0; i < q.raw().rows(); ++i) {
      for (int d = 0; d < 2; ++d) {
        double save = q.raw()(i, d);
        q.raw()(i, d) = save + h;
        double fp = objective_value(g, q);
        q.raw()(i, d) = save - h;
        double fm = objective_value(g, q);
        q.raw()(i, d) = save;
        double fd = (fp - fm) / (2 * h);
        worst = std::max(worst, std::abs(fd - eval.gradient(i, d)) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradient is zero at time zero and for far-away robots") {
  FieldGrid g = small_grid({Vec3(0, 0, 0)});
  Trajectories q(1, 3, 2);
  q.at(0, 0) << 0.5, 0;  // measurements start at step 1
  q.at(0, 1) << 0.5, 0;
  q.at(0, 2) << 500, 500;
  q.at(0, 3) << 0.3, 0.1;
  auto eval = objective_value_and_gradient(g, q);
  CHECK(eval.gradient.row(q.index(0, 0)).norm() == doctest::Approx(0));
  CHECK(eval.gradient.row(q.index(0, 2)).norm() == doctest::Approx(0));
  CHECK(eval.gradient.row(q.index(0, 3)).norm() > 0);
}

TEST_CASE("regular grids are cell centers") {
  FieldGrid g = FieldGrid::regular(Vec3(0, 0, 0), Vec3(10, 10, 0), 8, 8);
  REQUIRE(g.points.size() == 64);
  CHECK((g.points.front() - Vec3(0.625, 0.625, 0)).norm() < 1e-12);
  CHECK((g.points.back() - Vec3(9.375, 9.375, 0)).norm() < 1e-12);
  // second point advances along x first
  CHECK((g.points[1] - Vec3(1.875, 0.625, 0)).norm() < 1e-12);
  CHECK_THROWS_AS(FieldGrid::regular(Vec3(0, 0, 0), Vec3(1, 1, 0), 0, 4), ValidationError);
}
