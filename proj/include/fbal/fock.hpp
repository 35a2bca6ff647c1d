#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "fbal/lattice.hpp"
#include "fbal/linalg.hpp"

namespace fbal {

// ---------------------------------------------------------------------------
// State vectors on the antisymmetric Fock space over a Lattice. The basis
// vector with index m is f_M for the canonical (ascending) sequence M whose
// occupation bitmask is m; index 0 is the vacuum.
// ---------------------------------------------------------------------------

inline Vec zero_state(const Lattice& lat) {
  return Vec::Zero(static_cast<Eigen::Index>(lat.dim()));
}

inline Vec basis_state(const Lattice& lat, Mask m) {
  if (!subset_of(m, lat.full_mask()))
    throw std::invalid_argument("basis_state: mask outside lattice");
  Vec v = zero_state(lat);
  v(static_cast<Eigen::Index>(m)) = 1.0;
  return v;
}

inline Vec vacuum_state(const Lattice& lat) { return basis_state(lat, 0); }

/// f for an arbitrary label sequence: the signed canonical basis vector, or
/// the zero vector when a label repeats.
inline Vec f_vector(const Lattice& lat, const std::vector<int>& seq) {
  const SignedSequence ss = sequence_sign(lat, seq);
  Vec v = zero_state(lat);
  if (ss.sign == 0) return v;
  v(static_cast<Eigen::Index>(lat.mask_of(seq))) = static_cast<double>(ss.sign);
  return v;
}

// Sign picked up by a_l / a_l* moving past the modes occupied below position
// pos; together with the canonical ascending order this reproduces the
// prepend/remove action rules without ever touching the unsymmetrized space.
inline int parity_below(Mask occupied, int pos) {
  const Mask below = (Mask{1} << pos) - 1;
  return (popcount(occupied & below) & 1) ? -1 : 1;
}

inline Vec apply_creation(const Lattice& lat, int label, const Vec& v) {
  const int pos = lat.position(label);
  const Mask bit = Mask{1} << pos;
  Vec out = Vec::Zero(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) == 0.0) continue;
    const Mask m = static_cast<Mask>(i);
    if (m & bit) continue;  // already occupied: a_l* f_M = 0
    out(static_cast<Eigen::Index>(m | bit)) +=
        static_cast<double>(parity_below(m, pos)) * v(i);
  }
  return out;
}

inline Vec apply_annihilation(const Lattice& lat, int label, const Vec& v) {
  const int pos = lat.position(label);
  const Mask bit = Mask{1} << pos;
  Vec out = Vec::Zero(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) == 0.0) continue;
    const Mask m = static_cast<Mask>(i);
    if (!(m & bit)) continue;  // unoccupied: a_l f_M = 0
    out(static_cast<Eigen::Index>(m & ~bit)) +=
        static_cast<double>(parity_below(m, pos)) * v(i);
  }
  return out;
}

inline Vec apply_parity(const Lattice&, const Vec& v) {
  Vec out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (popcount(static_cast<Mask>(i)) & 1) out(i) = -out(i);
  return out;
}

// ---------------------------------------------------------------------------
// Dense operators. Everything below materializes 2^|L| x 2^|L| matrices, so
// it is meant for desk-scale lattices; the action functions above stay usable
// up to the full site cap.
// ---------------------------------------------------------------------------

inline Mat identity_op(const Lattice& lat) {
  const auto n = static_cast<Eigen::Index>(lat.dim());
  return Mat::Identity(n, n);
}

inline Mat creation_op(const Lattice& lat, int label) {
  const int pos = lat.position(label);
  const Mask bit = Mask{1} << pos;
  const auto n = static_cast<Eigen::Index>(lat.dim());
  Mat out = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Mask m = static_cast<Mask>(i);
    if (m & bit) continue;
    out(static_cast<Eigen::Index>(m | bit), i) =
        static_cast<double>(parity_below(m, pos));
  }
  return out;
}

inline Mat annihilation_op(const Lattice& lat, int label) {
  const int pos = lat.position(label);
  const Mask bit = Mask{1} << pos;
  const auto n = static_cast<Eigen::Index>(lat.dim());
  Mat out = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Mask m = static_cast<Mask>(i);
    if (!(m & bit)) continue;
    out(static_cast<Eigen::Index>(m & ~bit), i) =
        static_cast<double>(parity_below(m, pos));
  }
  return out;
}

/// theta: f_M -> (-1)^{|M|} f_M. Self-adjoint, squares to the identity.
inline Mat parity_op(const Lattice& lat) {
  const auto n = static_cast<Eigen::Index>(lat.dim());
  Mat out = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    out(i, i) = (popcount(static_cast<Mask>(i)) & 1) ? -1.0 : 1.0;
  return out;
}

/// Self-test: the largest operator-norm deviation from the canonical
/// anticommutation relations over all label pairs.
inline double car_deviation(const Lattice& lat) {
  std::vector<Mat> ann, cre;
  for (int l : lat.labels()) {
    ann.push_back(annihilation_op(lat, l));
    cre.push_back(creation_op(lat, l));
  }
  const Mat id = identity_op(lat);
  double worst = 0.0;
  for (std::size_t k = 0; k < ann.size(); ++k)
    for (std::size_t l = 0; l < ann.size(); ++l) {
      const Mat anti_aa = ann[k] * ann[l] + ann[l] * ann[k];
      worst = std::max(worst, operator_norm(anti_aa));
      Mat anti_ac = ann[k] * cre[l] + cre[l] * ann[k];
      if (k == l) anti_ac -= id;
      worst = std::max(worst, operator_norm(anti_ac));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Subspace H_I spanned by { f_M : M subset of I }, ordered by full-space
// basis index (equivalently by submask value).
// ---------------------------------------------------------------------------

inline std::vector<Mask> subspace_masks(const Lattice& lat, Mask support) {
  if (!subset_of(support, lat.full_mask()))
    throw std::invalid_argument("subspace_masks: support outside lattice");
  std::vector<Mask> out(std::size_t{1} << popcount(support));
  for (std::size_t s = 0; s < out.size(); ++s)
    out[s] = expand_mask(static_cast<Mask>(s), support);
  return out;
}

/// The block of op on H_I; this is the faithful representation pi_I when op
/// lies in A(I). Throws when op moves mass out of H_I.
inline Mat restrict_to(const Lattice& lat, const Mat& op, Mask support,
                       double tol = 1e-10) {
  const auto n = static_cast<Eigen::Index>(lat.dim());
  if (op.rows() != n || op.cols() != n)
    throw std::invalid_argument("restrict_to: operator dimension mismatch");
  const std::vector<Mask> basis = subspace_masks(lat, support);
  const auto bd = static_cast<Eigen::Index>(basis.size());
  Mat block(bd, bd);
  double off_mass = 0.0;
  for (Eigen::Index j = 0; j < bd; ++j) {
    const Vec col = op.col(static_cast<Eigen::Index>(basis[static_cast<std::size_t>(j)]));
    for (Eigen::Index i = 0; i < n; ++i) {
      const Mask m = static_cast<Mask>(i);
      if (subset_of(m, support)) continue;
      off_mass += std::norm(col(i));
    }
    for (Eigen::Index i = 0; i < bd; ++i)
      block(i, j) = col(static_cast<Eigen::Index>(basis[static_cast<std::size_t>(i)]));
  }
  if (std::sqrt(off_mass) > tol)
    throw std::invalid_argument(
        "restrict_to: operator does not leave the subspace invariant");
  return block;
}

}  // namespace fbal
