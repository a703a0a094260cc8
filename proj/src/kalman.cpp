#include "smot/kalman.hpp"

#include <algorithm>

#include <Eigen/Cholesky>

namespace smot {

namespace {
constexpr double kMinSide = 1e-3;
}

BoxKalmanFilter::BoxKalmanFilter(KalmanNoise noise) : noise_(noise), motion_(Matrix8::Identity()) {
  for (int i = 0; i < 4; ++i) motion_(i, 4 + i) = 1.0;
}

double BoxKalmanFilter::reference_size(const Vector8& mean) const noexcept {
  return std::max(0.5 * (mean(2) + mean(3)), 1.0);
}

BoxKalmanFilter::State BoxKalmanFilter::initiate(const BoundingBox& box) const {
  State s;
  s.mean << box.center_x(), box.center_y(), box.width, box.height, 0.0, 0.0, 0.0, 0.0;
  const double ref = reference_size(s.mean);
  Vector8 std;
  const double pos = 2.0 * noise_.position_weight * ref;
  const double vel = noise_.initial_velocity_weight * ref;
  const double size_vel = 10.0 * noise_.size_velocity_weight * ref;
  std << pos, pos, pos, pos, vel, vel, size_vel, size_vel;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

void BoxKalmanFilter::predict(State& s) const {
  const double ref = reference_size(s.mean);
  Vector8 std;
  const double pos = noise_.position_weight * ref;
  const double vel = noise_.velocity_weight * ref;
  const double size_vel = noise_.size_velocity_weight * ref;
  std << pos, pos, pos, pos, vel, vel, size_vel, size_vel;
  const Matrix8 q = std.array().square().matrix().asDiagonal();

  s.mean = motion_ * s.mean;
  s.covariance = motion_ * s.covariance * motion_.transpose() + q;
  s.mean(2) = std::max(s.mean(2), kMinSide);
  s.mean(3) = std::max(s.mean(3), kMinSide);
}

void BoxKalmanFilter::update(State& s, const BoundingBox& box) const {
  const double ref = reference_size(s.mean);
  const double r = noise_.position_weight * ref;
  const Eigen::Matrix4d measurement_cov = Eigen::Vector4d::Constant(r * r).asDiagonal();

  const Eigen::Vector4d z(box.center_x(), box.center_y(), box.width, box.height);
  const Eigen::Vector4d innovation = z - s.mean.head<4>();
  const Eigen::Matrix4d projected = s.covariance.topLeftCorner<4, 4>() + measurement_cov;
  const Eigen::Matrix<double, 8, 4> cross = s.covariance.leftCols<4>();
  const Eigen::Matrix<double, 8, 4> gain =
      projected.llt().solve(cross.transpose()).transpose();

  s.mean += gain * innovation;
  s.covariance -= gain * cross.transpose();
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  s.mean(2) = std::max(s.mean(2), kMinSide);
  s.mean(3) = std::max(s.mean(3), kMinSide);
}

BoundingBox BoxKalmanFilter::to_box(const Vector8& mean) noexcept {
  return BoundingBox::from_center(mean(0), mean(1), mean(2), mean(3));
}

}  // namespace smot
