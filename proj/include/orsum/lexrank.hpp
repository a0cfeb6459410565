#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "orsum/error.hpp"

namespace orsum::lexrank {

class NoConvergence : public Error {
public:
  using Error::Error;
};

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Cosine similarity between the rows of `features`. All-zero rows are
/// similar to nothing but themselves, so the diagonal is always 1.
template <typename Derived>
Matrix<typename Derived::Scalar> cosine_similarity(const Eigen::MatrixBase<Derived>& features) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> norms = features.rowwise().norm();
  const Eigen::Index n = features.rows();
  Matrix<Scalar> sim = features * features.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar denom = norms(i) * norms(j);
      sim(i, j) = denom > Scalar(0) ? std::clamp(sim(i, j) / denom, Scalar(0), Scalar(1)) : Scalar(0);
    }
    sim(i, i) = Scalar(1);
  }
  return sim;
}

/// Row-stochastic transition matrix of the thresholded similarity graph
/// with uniform teleportation:
///   P = damping * rownorm(similarity >= threshold) + (1 - damping) / n.
/// Self-similarity is 1, so every row has at least its own edge.
template <typename Derived>
Matrix<typename Derived::Scalar> transition_matrix(const Eigen::MatrixBase<Derived>& similarity,
                                                   typename Derived::Scalar threshold,
                                                   typename Derived::Scalar damping) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = similarity.rows();
  Matrix<Scalar> adj = (similarity.array() >= threshold).template cast<Scalar>().matrix();
  adj.diagonal().setOnes();
  const Vector<Scalar> degree = adj.rowwise().sum();
  Matrix<Scalar> p(n, n);
  p.noalias() = damping * (degree.cwiseInverse().asDiagonal() * adj);
  p.array() += (Scalar(1) - damping) / Scalar(n);
  return p;
}

template <typename Scalar>
struct Centrality {
  Vector<Scalar> scores;
  int iterations = 0;
};

/// Stationary distribution of `transition_matrix(similarity, ...)` by power
/// iteration from the uniform vector, stopping once the L1 change between
/// sweeps drops below `tol`.
template <typename Derived>
Centrality<typename Derived::Scalar> centrality(const Eigen::MatrixBase<Derived>& similarity,
                                                typename Derived::Scalar threshold,
                                                typename Derived::Scalar damping,
                                                typename Derived::Scalar tol,
                                                int max_iterations = 10000) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = similarity.rows();
  if (n == 0 || similarity.cols() != n)
    throw std::invalid_argument("similarity must be a non-empty square matrix");
  const Matrix<Scalar> pt = transition_matrix(similarity, threshold, damping).transpose();

  Centrality<Scalar> out;
  Vector<Scalar> p = Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  Vector<Scalar> next(n);
  for (int it = 1; it <= max_iterations; ++it) {
    next.noalias() = pt * p;
    next /= next.sum();
    const Scalar delta = (next - p).template lpNorm<1>();
    p.swap(next);
    if (delta < tol) {
      out.scores = std::move(p);
      out.iterations = it;
      return out;
    }
  }
  throw NoConvergence("power iteration did not reach tolerance in " +
                      std::to_string(max_iterations) + " iterations");
}

}  // namespace orsum::lexrank
