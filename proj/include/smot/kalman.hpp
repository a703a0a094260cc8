#pragma once

#include <Eigen/Core>

#include "smot/geometry.hpp"

namespace smot {

/// Noise scales for the constant-velocity box filter. Every standard
/// deviation is a weight times the mean box side, so small and large
/// objects see proportional uncertainty.
struct KalmanNoise {
  double position_weight = 1.0 / 20.0;        // process + measurement, cx/cy/w/h
  double velocity_weight = 1.0 / 160.0;       // process, v_cx/v_cy
  double size_velocity_weight = 1.0 / 1600.0; // process, v_w/v_h
  double initial_velocity_weight = 1.0;       // prior on v_cx/v_cy at spawn
};

/// State layout: [cx, cy, w, h, v_cx, v_cy, v_w, v_h].
class BoxKalmanFilter {
 public:
  using Vector8 = Eigen::Matrix<double, 8, 1>;
  using Matrix8 = Eigen::Matrix<double, 8, 8>;

  struct State {
    Vector8 mean = Vector8::Zero();
    Matrix8 covariance = Matrix8::Identity();
  };

  explicit BoxKalmanFilter(KalmanNoise noise = {});

  State initiate(const BoundingBox& box) const;
  void predict(State& state) const;
  void update(State& state, const BoundingBox& box) const;

  static BoundingBox to_box(const Vector8& mean) noexcept;

 private:
  double reference_size(const Vector8& mean) const noexcept;

  KalmanNoise noise_;
  Matrix8 motion_;
};

}  // namespace smot
