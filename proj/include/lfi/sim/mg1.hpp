#pragma once

// Single-server queue observed through percentiles of interdeparture times.

#include "lfi/simulator.hpp"

namespace lfi {

struct Mg1Problem {
  Index n_jobs = 50;
  Scalar theta1_upper = 10.0;
  Scalar gap_upper = 10.0;  // theta2 - theta1
  Scalar theta3_upper = 1.0 / 3.0;
  Vector theta_true = Vector{{1.0, 5.0, 0.2}};
};

inline constexpr Index kMg1Stats = 5;

/// Pilot mean vector and lower Cholesky factor of the pilot covariance.
struct PilotWhitener {
  Vector mean;
  Matrix chol;
};

/// Service s_i ~ U(theta1, theta2), arrival gaps ~ Exp(rate theta3),
/// d_i = d_{i-1} + s_i + max(0, v_i - d_{i-1}). Returns the interdeparture times.
Vector mg1_interdepartures(const Mg1Problem& p, const Vector& theta, Rng& rng);

/// 0/25/50/75/100th percentiles with linear interpolation between order statistics.
Vector percentiles(Vector values);

/// Percentiles of the interdeparture times at theta = (theta1, theta2, theta3).
Vector sim_mg1(const Mg1Problem& p, const Vector& theta, Rng& rng);

/// chol^-1 (p - mean). Throws PilotDegenerate unless the covariance is positive definite.
PilotWhitener make_whitener(const Vector& mean, const Matrix& covariance);
Vector pilot_whiten(const Vector& stats, const PilotWhitener& pilot);

/// (theta1, theta2 - theta1, theta3) and back; inference uses the first form,
/// where the prior is a box.
Vector mg1_to_inference(const Vector& theta);
Vector mg1_from_inference(const Vector& phi);

/// Pilot statistics from n simulations with parameters drawn from the prior.
PilotWhitener mg1_pilot(const Mg1Problem& p, Index n, Rng& rng);

/// Simulator over (theta1, theta2 - theta1, theta3) returning whitened percentiles.
Simulator mg1_simulator(const Mg1Problem& p, const PilotWhitener& pilot);
Prior mg1_prior(const Mg1Problem& p = {});

}  // namespace lfi
