// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exponential-family search distributions in expectation parameters.
//
// Every distribution is handled through its expectation parameter
// eta = E[T(x)] stored as a flat vector:
//   product Bernoulli on {0,1}^d : eta = probs                      (d entries)
//   Gaussian on R^d              : eta = (m, packed(m m^T + C))     (d + d(d+1)/2)
// The symmetric second-moment block is packed upper-triangular, row major:
// (0,0), (0,1), ..., (0,d-1), (1,1), ..., (d-1,d-1).
//
// Reference measures are the counting measure (Bernoulli) and Lebesgue
// measure (Gaussian). The parameter domain is the open interior; nothing in
// this module clamps.

#include <Eigen/Dense>

#include "igo/rng.hpp"

namespace igo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// A population of search points, one point per row.
using Samples = Eigen::MatrixXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;

enum class Family { bernoulli, gaussian };

class Model {
 public:
  static Model bernoulli(int dim);
  static Model gaussian(int dim);

  Family family() const noexcept { return family_; }
  int dim() const noexcept { return dim_; }
  /// Length of the expectation-parameter vector.
  int param_size() const noexcept;

  bool operator==(const Model&) const = default;

 private:
  Model(Family family, int dim) : family_(family), dim_(dim) {}
  Family family_;
  int dim_;
};

struct BernoulliParams {
  Vector probs;  // probs[i] = P[x_i = 1], each in (0, 1)
};

struct GaussianParams {
  Vector mean;
  Matrix cov;  // symmetric positive definite
};

// Packed upper-triangular storage of a symmetric d x d matrix.
Vector pack_symmetric(const Matrix& s);
Matrix unpack_symmetric(const Eigen::Ref<const Vector>& packed, int dim);

Vector sufficient_statistics(const Model& model, const PointRef& x);

/// Throws invalid_input when `params` break the type invariants.
Vector to_expectation(const BernoulliParams& params);
Vector to_expectation(const GaussianParams& params);

BernoulliParams bernoulli_params(const Model& model, const Vector& eta);
/// Recovers (m, C = M2 - m m^T); throws degenerate when C is not positive
/// definite.
GaussianParams gaussian_params(const Model& model, const Vector& eta);

/// True if eta is an interior point of the model's parameter domain.
bool in_domain(const Model& model, const Vector& eta);
/// Throws domain_exit naming `what` unless in_domain(model, eta).
void require_domain(const Model& model, const Vector& eta, const char* what);

double log_density(const Model& model, const Vector& eta, const PointRef& x);

/// `count` i.i.d. draws, one per row. Gaussian draws use the Cholesky factor
/// of the covariance.
Samples sample(const Model& model, const Vector& eta, Rng& rng, int count);

/// Natural gradient of ln p at eta in expectation coordinates: T(x) - eta.
Vector natural_grad_log_density(const Model& model, const Vector& eta,
                                const PointRef& x);

/// KL(P_p || P_q), closed form. Evaluated through log1p of the relative
/// change so nearby points keep full relative accuracy.
double kl_divergence(const Model& model, const Vector& p, const Vector& q);

/// Fisher information in expectation coordinates. Closed form for Bernoulli;
/// for Gaussian the central-difference Hessian of q -> KL(eta || q) at q = eta.
/// Throws ill_conditioned if the numerical Hessian is not positive definite.
Matrix fisher_information(const Model& model, const Vector& eta);

}  // namespace igo
