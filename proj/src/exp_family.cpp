// SPDX-License-Identifier: Apache-2.0
#include "igo/exp_family.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "igo/error.hpp"

namespace igo {

namespace {

void check_point(const Model& model, const PointRef& x) {
  if (x.size() != model.dim()) {
    fail(ErrorCode::invalid_input,
         "point has dimension " + std::to_string(x.size()) + ", model expects " +
             std::to_string(model.dim()));
  }
}

void check_eta(const Model& model, const Vector& eta) {
  if (eta.size() != model.param_size()) {
    fail(ErrorCode::invalid_input,
         "expectation parameter has length " + std::to_string(eta.size()) +
             ", model expects " + std::to_string(model.param_size()));
  }
}

// C = M2 - m m^T, without a positive-definiteness check.
Matrix raw_covariance(const Model& model, const Vector& eta) {
  const int d = model.dim();
  Vector m = eta.head(d);
  return unpack_symmetric(eta.tail(eta.size() - d), d) - m * m.transpose();
}

double bernoulli_kl(const Vector& p, const Vector& q) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double diff = q[i] - p[i];
    if (diff == 0.0) continue;
    // p ln(p/q) + (1-p) ln((1-p)/(1-q)) written in relative increments.
    kl -= p[i] * std::log1p(diff / p[i]) + (1.0 - p[i]) * std::log1p(-diff / (1.0 - p[i]));
  }
  return kl;
}

double gaussian_kl(const Model& model, const Vector& p, const Vector& q) {
  const int d = model.dim();
  const Vector m0 = p.head(d);
  const Vector m1 = q.head(d);
  const Vector dm = m0 - m1;
  // C0 - C1 assembled from moment differences so that it stays accurate when
  // the two points are close.
  const Matrix d_m2 = unpack_symmetric(p.tail(p.size() - d) - q.tail(q.size() - d), d);
  Matrix d_cov = d_m2 - (m0 * dm.transpose() + dm * m1.transpose());
  d_cov = 0.5 * (d_cov + d_cov.transpose()).eval();

  const Matrix c1 = raw_covariance(model, q);
  Eigen::LLT<Matrix> llt(c1);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::degenerate, "KL divergence: second argument has a singular covariance");
  }
  const Matrix l_inv_d = llt.matrixL().solve(d_cov);
  Matrix rel = llt.matrixL().solve(l_inv_d.transpose());
  rel = 0.5 * (rel + rel.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rel, Eigen::EigenvaluesOnly);

  double kl = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double mu = eig.eigenvalues()[i];
    if (mu <= -1.0) {
      fail(ErrorCode::degenerate, "KL divergence: first argument has a singular covariance");
    }
    kl += mu - std::log1p(mu);
  }
  const Vector z = llt.matrixL().solve(dm);
  kl += z.squaredNorm();
  return std::max(0.0, 0.5 * kl);
}

Matrix gaussian_fisher(const Model& model, const Vector& eta) {
  const int d = model.dim();
  const int n = model.param_size();
  const Matrix cov = raw_covariance(model, eta);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) {
    fail(ErrorCode::degenerate, "Fisher information: covariance is not positive definite");
  }
  const double m_scale = eta.head(d).cwiseAbs().maxCoeff();

  Vector h(n);
  for (int a = 0; a < n; ++a) {
    h[a] = a < d ? 1e-5 * lmin / (std::sqrt(lmin) + m_scale) : 1e-5 * lmin;
  }
  auto kl_at = [&](int a, double sa, int b, double sb) {
    Vector q = eta;
    q[a] += sa * h[a];
    q[b] += sb * h[b];
    return gaussian_kl(model, eta, q);
  };

  Matrix fim(n, n);
  for (int a = 0; a < n; ++a) {
    // KL(eta || eta) is exactly zero, so the diagonal stencil drops it.
    fim(a, a) = (kl_at(a, 1.0, a, 0.0) + kl_at(a, -1.0, a, 0.0)) / (h[a] * h[a]);
    for (int b = a + 1; b < n; ++b) {
      const double v = (kl_at(a, 1, b, 1) - kl_at(a, 1, b, -1) - kl_at(a, -1, b, 1) +
                        kl_at(a, -1, b, -1)) /
                       (4.0 * h[a] * h[b]);
      fim(a, b) = v;
      fim(b, a) = v;
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> check(fim, Eigen::EigenvaluesOnly);
  const double fmin = check.eigenvalues().minCoeff();
  const double fmax = check.eigenvalues().maxCoeff();
  if (!(fmin > 0.0)) {
    std::ostringstream msg;
    msg << "numerical Fisher information is not positive definite (eigenvalue range ["
        << fmin << ", " << fmax << "], covariance min eigenvalue " << lmin << ")";
    fail(ErrorCode::ill_conditioned, msg.str());
  }
  return fim;
}

}  // namespace

Model Model::bernoulli(int dim) {
  if (dim < 1) fail(ErrorCode::invalid_input, "Bernoulli model needs dimension >= 1");
  return Model(Family::bernoulli, dim);
}

Model Model::gaussian(int dim) {
  if (dim < 1) fail(ErrorCode::invalid_input, "Gaussian model needs dimension >= 1");
  return Model(Family::gaussian, dim);
}

int Model::param_size() const noexcept {
  return family_ == Family::bernoulli ? dim_ : dim_ + dim_ * (dim_ + 1) / 2;
}

Vector pack_symmetric(const Matrix& s) {
  const Eigen::Index d = s.rows();
  Vector out(d * (d + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) out[k++] = s(i, j);
  }
  return out;
}

Matrix unpack_symmetric(const Eigen::Ref<const Vector>& packed, int dim) {
  Matrix s(dim, dim);
  Eigen::Index k = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      s(i, j) = packed[k];
      s(j, i) = packed[k];
      ++k;
    }
  }
  return s;
}

Vector sufficient_statistics(const Model& model, const PointRef& x) {
  check_point(model, x);
  if (model.family() == Family::bernoulli) return x;
  const int d = model.dim();
  Vector t(model.param_size());
  t.head(d) = x;
  Eigen::Index k = d;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) t[k++] = x[i] * x[j];
  }
  return t;
}

Vector to_expectation(const BernoulliParams& params) {
  if (params.probs.size() < 1) fail(ErrorCode::invalid_input, "Bernoulli dimension must be >= 1");
  for (Eigen::Index i = 0; i < params.probs.size(); ++i) {
    const double p = params.probs[i];
    if (!(p > 0.0 && p < 1.0)) {
      fail(ErrorCode::invalid_input,
           "Bernoulli probability " + std::to_string(i) + " must lie in (0, 1)");
    }
  }
  return params.probs;
}

Vector to_expectation(const GaussianParams& params) {
  const Eigen::Index d = params.mean.size();
  if (d < 1) fail(ErrorCode::invalid_input, "Gaussian dimension must be >= 1");
  if (params.cov.rows() != d || params.cov.cols() != d) {
    fail(ErrorCode::invalid_input, "covariance shape does not match mean");
  }
  if (!(params.cov.array() == params.cov.transpose().array()).all()) {
    fail(ErrorCode::invalid_input, "covariance must be exactly symmetric");
  }
  if (Eigen::LLT<Matrix>(params.cov).info() != Eigen::Success) {
    fail(ErrorCode::invalid_input, "covariance must be positive definite");
  }
  Vector eta(d + d * (d + 1) / 2);
  eta.head(d) = params.mean;
  eta.tail(d * (d + 1) / 2) = pack_symmetric(params.cov + params.mean * params.mean.transpose());
  return eta;
}

BernoulliParams bernoulli_params(const Model& model, const Vector& eta) {
  if (model.family() != Family::bernoulli) fail(ErrorCode::invalid_input, "not a Bernoulli model");
  check_eta(model, eta);
  return BernoulliParams{eta};
}

GaussianParams gaussian_params(const Model& model, const Vector& eta) {
  if (model.family() != Family::gaussian) fail(ErrorCode::invalid_input, "not a Gaussian model");
  check_eta(model, eta);
  GaussianParams out{eta.head(model.dim()), raw_covariance(model, eta)};
  if (Eigen::LLT<Matrix>(out.cov).info() != Eigen::Success) {
    fail(ErrorCode::degenerate, "M2 - m m^T is not positive definite: degenerate distribution");
  }
  return out;
}

bool in_domain(const Model& model, const Vector& eta) {
  if (eta.size() != model.param_size() || !eta.allFinite()) return false;
  if (model.family() == Family::bernoulli) {
    return (eta.array() > 0.0).all() && (eta.array() < 1.0).all();
  }
  return Eigen::LLT<Matrix>(raw_covariance(model, eta)).info() == Eigen::Success;
}

void require_domain(const Model& model, const Vector& eta, const char* what) {
  if (in_domain(model, eta)) return;
  if (model.family() == Family::bernoulli) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": result leaves the open Bernoulli domain (";
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      if (!(eta[i] > 0.0 && eta[i] < 1.0)) {
        msg << "coordinate " << i << " = " << eta[i];
        break;
      }
    }
    msg << ")";
    fail(ErrorCode::domain_exit, msg.str());
  }
  fail(ErrorCode::domain_exit,
       std::string(what) + ": implied covariance is not positive definite");
}

double log_density(const Model& model, const Vector& eta, const PointRef& x) {
  check_point(model, x);
  check_eta(model, eta);
  if (model.family() == Family::bernoulli) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      lp += x[i] != 0.0 ? std::log(eta[i]) : std::log1p(-eta[i]);
    }
    return lp;
  }
  const GaussianParams g = gaussian_params(model, eta);
  Eigen::LLT<Matrix> llt(g.cov);
  const Vector z = llt.matrixL().solve(x - g.mean);
  const Matrix& l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  return -0.5 * (model.dim() * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

Samples sample(const Model& model, const Vector& eta, Rng& rng, int count) {
  if (count < 1) fail(ErrorCode::invalid_input, "sample count must be >= 1");
  check_eta(model, eta);
  const int d = model.dim();
  Samples out(count, d);
  if (model.family() == Family::bernoulli) {
    for (int r = 0; r < count; ++r) {
      for (int i = 0; i < d; ++i) out(r, i) = uniform01(rng) < eta[i] ? 1.0 : 0.0;
    }
    return out;
  }
  const Matrix cov = raw_covariance(model, eta);
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::degenerate, "cannot sample: covariance factorization failed");
  }
  const Matrix l = llt.matrixL();
  const Vector mean = eta.head(d);
  std::normal_distribution<double> normal;
  Vector z(d);
  for (int r = 0; r < count; ++r) {
    for (int i = 0; i < d; ++i) z[i] = normal(rng);
    out.row(r) = (mean + l * z).transpose();
  }
  return out;
}

Vector natural_grad_log_density(const Model& model, const Vector& eta, const PointRef& x) {
  check_eta(model, eta);
  return sufficient_statistics(model, x) - eta;
}

double kl_divergence(const Model& model, const Vector& p, const Vector& q) {
  check_eta(model, p);
  check_eta(model, q);
  if (model.family() == Family::bernoulli) return bernoulli_kl(p, q);
  return gaussian_kl(model, p, q);
}

Matrix fisher_information(const Model& model, const Vector& eta) {
  check_eta(model, eta);
  if (model.family() == Family::bernoulli) {
    if (!in_domain(model, eta)) {
      fail(ErrorCode::invalid_input, "Fisher information needs an interior Bernoulli point");
    }
    return (eta.array() * (1.0 - eta.array())).inverse().matrix().asDiagonal();
  }
  return gaussian_fisher(model, eta);
}

}  // namespace igo
