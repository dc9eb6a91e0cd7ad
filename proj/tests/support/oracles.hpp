// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force reference computations for the tests. Everything here is
// written from the defining formulas, in long double where sums matter, and
// shares no code with the library beyond the Eigen types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Real = long double;

/// Points of {0,1}^d, x_0 the most significant bit.
inline std::vector<std::vector<int>> cube(int d) {
  std::vector<std::vector<int>> pts;
  for (std::uint32_t k = 0; k < (1u << d); ++k) {
    std::vector<int> x(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = (k >> (d - 1 - i)) & 1u;
    pts.push_back(std::move(x));
  }
  return pts;
}

inline Real prob(const Vec& theta, const std::vector<int>& x) {
  Real p = 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real t = theta[static_cast<Eigen::Index>(i)];
    p *= x[i] ? t : 1 - t;
  }
  return p;
}

inline std::vector<Real> probs(const Vec& theta) {
  std::vector<Real> p;
  for (const auto& x : cube(static_cast<int>(theta.size()))) p.push_back(prob(theta, x));
  return p;
}

/// Largest m among the values with P[f <= m] >= q and P[f >= m] >= 1 - q.
template <class P>
double quantile(const std::vector<P>& p, const std::vector<double>& f, double q) {
  std::vector<double> vals(f);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  for (auto it = vals.rbegin(); it != vals.rend(); ++it) {
    Real le = 0, ge = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] <= *it) le += static_cast<Real>(p[i]);
      if (f[i] >= *it) ge += static_cast<Real>(p[i]);
    }
    if (le >= static_cast<Real>(q) && ge >= 1 - static_cast<Real>(q)) return *it;
  }
  return vals.front();
}

/// q-truncation preference: W(x) = (1/(q+ - q-)) * integral_{q-}^{q+} 1[u <= q]/q du.
template <class P>
std::vector<Real> truncation_W(const std::vector<P>& p, const std::vector<double>& f, double q) {
  std::vector<Real> w(f.size());
  const Real qq = q;
  for (std::size_t i = 0; i < f.size(); ++i) {
    Real lo = 0, hi = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (f[j] < f[i]) lo += static_cast<Real>(p[j]);
      if (f[j] <= f[i]) hi += static_cast<Real>(p[j]);
    }
    if (hi > lo) {
      w[i] = (std::min(hi, qq) - std::min(lo, qq)) / qq / (hi - lo);
    } else {
      w[i] = lo <= qq ? 1 / qq : 0;
    }
  }
  return w;
}

/// Level masses P[f = v] for the distinct values v of f, ascending.
template <class P>
std::vector<std::pair<double, Real>> level_masses(const std::vector<P>& p, const std::vector<double>& f) {
  std::vector<std::size_t> idx(f.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  std::vector<std::pair<double, Real>> levels;
  for (std::size_t i : idx) {
    if (levels.empty() || levels.back().first != f[i]) levels.emplace_back(f[i], 0);
    levels.back().second += static_cast<Real>(p[i]);
  }
  return levels;
}

/// quantile() by one pass over the level masses; for large supports.
template <class P>
double quantile_sorted(const std::vector<P>& p, const std::vector<double>& f, double q) {
  const auto levels = level_masses(p, f);
  Real total = 0;
  for (const auto& l : levels) total += l.second;
  Real le = total, ge = 0;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    ge += it->second;
    if (le >= static_cast<Real>(q) && ge >= 1 - static_cast<Real>(q)) return it->first;
    le -= it->second;
  }
  return levels.front().first;
}

/// truncation_W() by one pass over the level masses; for large supports.
template <class P>
std::vector<Real> truncation_W_sorted(const std::vector<P>& p, const std::vector<double>& f, double q) {
  const auto levels = level_masses(p, f);
  const Real qq = q;
  std::vector<std::pair<double, Real>> w_of;
  Real lo = 0;
  for (const auto& [value, mass] : levels) {
    const Real hi = lo + mass;
    w_of.emplace_back(value, hi > lo ? (std::min(hi, qq) - std::min(lo, qq)) / qq / (hi - lo)
                                     : (lo <= qq ? 1 / qq : 0));
    lo = hi;
  }
  std::vector<Real> w(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto it = std::lower_bound(w_of.begin(), w_of.end(), f[i],
                                     [](const auto& a, double v) { return a.first < v; });
    w[i] = it->second;
  }
  return w;
}

/// Rank-interval integrals of 1[u <= q]/q over ((i-1)/lambda, i/lambda].
inline std::vector<double> bar_weights(int lambda, double q) {
  std::vector<double> w(static_cast<std::size_t>(lambda));
  for (int i = 0; i < lambda; ++i) {
    const Real a = static_cast<Real>(i) / lambda;
    const Real b = static_cast<Real>(i + 1) / lambda;
    const Real overlap = std::max<Real>(0, std::min<Real>(b, q) - a);
    w[static_cast<std::size_t>(i)] = static_cast<double>(overlap / q);
  }
  return w;
}

/// Tie-averaged sample weights from O(lambda^2) rank counting.
inline std::vector<double> sample_weights(const std::vector<double>& f, double q) {
  const int n = static_cast<int>(f.size());
  const std::vector<double> bar = bar_weights(n, q);
  std::vector<double> w(f.size());
  for (int i = 0; i < n; ++i) {
    int lo = 0, hi = 0;
    for (int j = 0; j < n; ++j) {
      lo += f[static_cast<std::size_t>(j)] < f[static_cast<std::size_t>(i)];
      hi += f[static_cast<std::size_t>(j)] <= f[static_cast<std::size_t>(i)];
    }
    Real s = 0;
    for (int k = lo; k < hi; ++k) s += bar[static_cast<std::size_t>(k)];
    w[static_cast<std::size_t>(i)] = static_cast<double>(s / (hi - lo));
  }
  return w;
}

/// theta + dt * E[W (x - theta)] on the cube.
inline Vec exact_step(const Vec& theta, const std::vector<double>& f, double q, double dt) {
  const auto pts = cube(static_cast<int>(theta.size()));
  const auto p = probs(theta);
  const auto w = truncation_W(p, f, q);
  Vec out(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Real s = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      s += p[k] * w[k] * (pts[k][static_cast<std::size_t>(i)] - static_cast<Real>(theta[i]));
    }
    out[i] = static_cast<double>(theta[i] + dt * s);
  }
  return out;
}

/// E_eval[W_base].
inline Real J(const Vec& eval, const Vec& base, const std::vector<double>& f, double q) {
  const auto w = truncation_W(probs(base), f, q);
  const auto p = probs(eval);
  Real s = 0;
  for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * w[k];
  return s;
}

inline Real expected(const Vec& theta, const std::vector<double>& r) {
  const auto p = probs(theta);
  Real s = 0;
  for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * r[k];
  return s;
}

/// E[x r] / E[r].
inline Vec rpp_target(const Vec& theta, const std::vector<double>& r) {
  const auto pts = cube(static_cast<int>(theta.size()));
  const auto p = probs(theta);
  Real den = 0;
  std::vector<Real> num(static_cast<std::size_t>(theta.size()), 0);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    den += p[k] * r[k];
    for (std::size_t i = 0; i < num.size(); ++i) num[i] += p[k] * r[k] * pts[k][i];
  }
  Vec out(theta.size());
  for (std::size_t i = 0; i < num.size(); ++i) out[static_cast<Eigen::Index>(i)] = static_cast<double>(num[i] / den);
  return out;
}

inline double bernoulli_kl(const Vec& p, const Vec& q) {
  Real s = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Real a = p[i], b = q[i];
    s += a * std::log(a / b) + (1 - a) * std::log((1 - a) / (1 - b));
  }
  return static_cast<double>(s);
}

/// KL(N(m0, C0) || N(m1, C1)).
inline double gaussian_kl(const Vec& m0, const Mat& c0, const Vec& m1, const Mat& c1) {
  const Mat inv = c1.inverse();
  const Vec dm = m1 - m0;
  const double d = static_cast<double>(m0.size());
  return 0.5 * ((inv * c0).trace() + dm.dot(inv * dm) - d +
                std::log(c1.determinant() / c0.determinant()));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Pure rank-mu update: m + eta_m sum w (x - m), C + eta_c sum w ((x-m)(x-m)^T - C).
inline void rank_mu(const Vec& m, const Mat& c, const Mat& x, const std::vector<double>& w,
                    double eta_m, double eta_c, Vec& m_out, Mat& c_out) {
  Vec dm = Vec::Zero(m.size());
  Mat dc = Mat::Zero(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vec y = x.row(i).transpose() - m;
    dm += w[static_cast<std::size_t>(i)] * y;
    dc += w[static_cast<std::size_t>(i)] * (y * y.transpose() - c);
  }
  m_out = m + eta_m * dm;
  c_out = c + eta_c * dc;
}

/// Sup-form quantile of the uniform empirical measure by direct counting.
/// Exact for dyadic q.
inline double empirical_quantile(const std::vector<double>& v, double q) {
  const Real n = static_cast<Real>(v.size());
  double best = -std::numeric_limits<double>::infinity();
  for (double m : v) {
    Real le = 0, ge = 0;
    for (double x : v) {
      le += x <= m;
      ge += x >= m;
    }
    if (le >= static_cast<Real>(q) * n && ge >= (1 - static_cast<Real>(q)) * n) best = std::max(best, m);
  }
  return best;
}

}  // namespace oracle
