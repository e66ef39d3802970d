#include "coplan/objective.hpp"

#include <cmath>

namespace coplan::objective {

FieldGrid FieldGrid::regular(const Vec3& lo, const Vec3& hi, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ValidationError("grid", "need at least one cell per axis");
  FieldGrid g;
  g.points.reserve(static_cast<size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      g.points.emplace_back(lo.x() + (ix + 0.5) * (hi.x() - lo.x()) / nx,
                            lo.y() + (iy + 0.5) * (hi.y() - lo.y()) / ny, 0.0);
    }
  }
  return g;
}

void FieldGrid::validate() const {
  if (points.empty()) throw ValidationError("grid", "no points");
  if (initial_covariance <= 0) throw ValidationError("grid", "initial covariance must be > 0");
  if (process_noise < 0) throw ValidationError("grid", "process noise must be >= 0");
  if (sigma_meas <= 0) throw ValidationError("grid", "sigma_meas must be > 0");
  if (ell <= 0) throw ValidationError("grid", "ell must be > 0");
}

double information_gain(const Vec3& q, const Vec3& point, double sigma_meas, double ell) {
  double d2 = (q - point).squaredNorm();
  return std::exp(-d2 / (2 * ell * ell)) / (sigma_meas * sigma_meas);
}

namespace {

// Forward filter pass; optionally records the prior covariance and summed
// information per (point, step) for the reverse sweep.
Eigen::VectorXd run_filters(const FieldGrid& grid, const Trajectories& q,
                            Eigen::MatrixXd* priors = nullptr,
                            Eigen::MatrixXd* infos = nullptr) {
  const int n = static_cast<int>(grid.points.size());
  const int T = q.horizon();
  Eigen::VectorXd P = Eigen::VectorXd::Constant(n, grid.initial_covariance);
  if (priors) priors->resize(n, T);
  if (infos) infos->resize(n, T);
  for (int t = 1; t <= T; ++t) {
    for (int j = 0; j < n; ++j) {
      double info = 0;
      for (int r = 0; r < q.robots(); ++r)
        info += information_gain(q.at3(r, t), grid.points[j], grid.sigma_meas, grid.ell);
      double prior = P[j] + grid.process_noise;
      if (priors) (*priors)(j, t - 1) = prior;
      if (infos) (*infos)(j, t - 1) = info;
      P[j] = prior / (1 + prior * info);
    }
  }
  return P;
}

// max-stable log-sum-exp with temperature tau
double smoothed_max(const Eigen::VectorXd& v, double tau) {
  double m = v.maxCoeff();
  double s = ((v.array() - m) / tau).exp().sum();
  return m + tau * std::log(s);
}

}  // namespace

Eigen::VectorXd propagate(const FieldGrid& grid, const Trajectories& q) {
  grid.validate();
  return run_filters(grid, q);
}

double objective_value(const FieldGrid& grid, const Trajectories& q) {
  grid.validate();
  return smoothed_max(run_filters(grid, q), grid.temperature());
}

ObjectiveEval objective_value_and_gradient(const FieldGrid& grid, const Trajectories& q) {
  grid.validate();
  const int n = static_cast<int>(grid.points.size());
  const int T = q.horizon();
  const double tau = grid.temperature();

  Eigen::MatrixXd priors, infos;
  Eigen::VectorXd P = run_filters(grid, q, &priors, &infos);

  ObjectiveEval out;
  out.value = smoothed_max(P, tau);
  out.gradient = Trajectories::Storage::Zero(q.raw().rows(), q.raw().cols());

  // seed: softmax weights of the final covariances
  double m = P.maxCoeff();
  Eigen::VectorXd bar = ((P.array() - m) / tau).exp();
  bar /= bar.sum();

  // reverse sweep through P_t = prior / (1 + prior * info), prior = P_{t-1} + noise
  const double inv_ell2 = 1.0 / (grid.ell * grid.ell);
  for (int t = T; t >= 1; --t) {
    for (int j = 0; j < n; ++j) {
      double prior = priors(j, t - 1);
      double info = infos(j, t - 1);
      double denom = 1 + prior * info;
      double post = prior / denom;
      double bar_info = bar[j] * (-post * post);
      bar[j] /= denom * denom;  // d post / d prior
      if (bar_info != 0) {
        for (int r = 0; r < q.robots(); ++r) {
          Vec3 qr = q.at3(r, t);
          double g = information_gain(qr, grid.points[j], grid.sigma_meas, grid.ell);
          Vec3 dg = -g * inv_ell2 * (qr - grid.points[j]);
          out.gradient.row(q.index(r, t)) += (bar_info * dg.head(q.dim())).transpose();
        }
      }
    }
  }
  return out;
}

}  // namespace coplan::objective
