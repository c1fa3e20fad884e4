#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wrapforge/http_endpoint.hpp"

namespace wrapforge {

template <typename Scalar = double>
using EmbeddingVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws std::invalid_argument on
/// a dimension mismatch, a zero vector or a non-finite entry.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& u,
                                            const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  if (u.size() != v.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  if (!u.allFinite() || !v.allFinite()) throw std::invalid_argument("cosine_similarity: non-finite entry");
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) throw std::invalid_argument("cosine_similarity: zero vector");
  const Scalar c = u.dot(v.template cast<Scalar>()) / (nu * nv);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Row-wise cosine between two equally shaped matrices of embeddings.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> rowwise_cosine(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("rowwise_cosine: shape mismatch");
  }
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> out(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) out(r) = cosine_similarity(a.row(r).transpose(), b.row(r).transpose());
  return out;
}

/// Calls `<base_url>/v1/embeddings` in batches of cfg.embedding_batch; one
/// vector per text, input order preserved, all of one dimension.
std::vector<EmbeddingVector<double>> embed_texts(std::span<const std::string> texts,
                                                 const EndpointConfig& cfg);

/// Deterministic feature-hashed bag of lowercased words (signed buckets, L2
/// normalized) used by the mock endpoint. "basis:<k>" yields the unit vector e_k.
EmbeddingVector<double> mock_embedding(std::string_view text, int dim = 64);

}  // namespace wrapforge
