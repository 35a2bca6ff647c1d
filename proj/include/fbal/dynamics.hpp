#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fbal/algebra.hpp"
#include "fbal/fock.hpp"
#include "fbal/lattice.hpp"
#include "fbal/linalg.hpp"

namespace fbal {

// ---------------------------------------------------------------------------
// Permutations of a region I, identity elsewhere on L.
// ---------------------------------------------------------------------------

class LatticePermutation {
 public:
  LatticePermutation(Lattice lat, Mask region,
                     const std::vector<std::vector<int>>& cycles)
      : lat_(std::move(lat)), region_(region), cycles_(cycles) {
    if (!subset_of(region_, lat_.full_mask()))
      throw std::invalid_argument("LatticePermutation: region outside lattice");
    for (int l : lat_.labels()) fwd_[l] = l;
    std::set<int> seen;
    for (const auto& cycle : cycles) {
      for (std::size_t i = 0; i < cycle.size(); ++i) {
        const int from = cycle[i];
        const int to = cycle[(i + 1) % cycle.size()];
        if (!subset_of(Mask{1} << lat_.position(from), region_))
          throw std::invalid_argument("LatticePermutation: cycle leaves the region");
        if (!seen.insert(from).second)
          throw std::invalid_argument("LatticePermutation: label appears twice");
        fwd_[from] = to;
      }
    }
    for (const auto& [from, to] : fwd_) rev_[to] = from;
    if (rev_.size() != fwd_.size())
      throw std::invalid_argument("LatticePermutation: not a bijection");
  }

  static LatticePermutation identity(Lattice lat, Mask region) {
    return LatticePermutation(std::move(lat), region, {});
  }

  const Lattice& lattice() const { return lat_; }
  Mask region() const { return region_; }
  const std::vector<std::vector<int>>& cycles() const { return cycles_; }

  int apply(int label) const { return fwd_.at(label); }
  int inverse(int label) const { return rev_.at(label); }

  LatticePermutation inverted() const {
    std::vector<std::vector<int>> rev_cycles;
    for (auto cycle : cycles_) {
      std::reverse(cycle.begin(), cycle.end());
      rev_cycles.push_back(std::move(cycle));
    }
    return LatticePermutation(lat_, region_, rev_cycles);
  }

  std::vector<int> image_sequence(const std::vector<int>& seq) const {
    std::vector<int> out;
    out.reserve(seq.size());
    for (int l : seq) out.push_back(apply(l));
    return out;
  }

  Mask image_subset(Mask m) const {
    Mask out = 0;
    for (int l : lat_.labels_of(m)) out |= Mask{1} << lat_.position(apply(l));
    return out;
  }

  /// sigma^iota: the permutation of iota(I) with the same cycle pattern.
  LatticePermutation conjugated(const LabelMap& iota, Mask target_region) const {
    std::vector<std::vector<int>> mapped;
    for (const auto& cycle : cycles_) mapped.push_back(iota.image_of(cycle));
    return LatticePermutation(lat_, target_region, mapped);
  }

 private:
  Lattice lat_;
  Mask region_;
  std::vector<std::vector<int>> cycles_;
  std::map<int, int> fwd_, rev_;
};

/// U f_{(l_1,...,l_n)} = f_{(sigma(l_1),...,sigma(l_n))}; a signed permutation
/// matrix on the occupation basis, unitary by the sign-consistency of the
/// antisymmetrizer.
inline Mat permutation_unitary(const LatticePermutation& sigma) {
  const Lattice& lat = sigma.lattice();
  const auto n = static_cast<Eigen::Index>(lat.dim());
  Mat u = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::vector<int> image =
        sigma.image_sequence(lat.labels_of(static_cast<Mask>(j)));
    const SignedSequence ss = sequence_sign(lat, image);
    u(static_cast<Eigen::Index>(lat.mask_of(image)), j) =
        static_cast<double>(ss.sign);
  }
  return u;
}

inline Vec apply_permutation_unitary(const LatticePermutation& sigma, const Vec& v) {
  const Lattice& lat = sigma.lattice();
  Vec out = Vec::Zero(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v(j) == 0.0) continue;
    const std::vector<int> image =
        sigma.image_sequence(lat.labels_of(static_cast<Mask>(j)));
    const SignedSequence ss = sequence_sign(lat, image);
    out(static_cast<Eigen::Index>(lat.mask_of(image))) +=
        static_cast<double>(ss.sign) * v(j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-sided mixtures tau(a) = lambda U*aU + (1-lambda) UaU*.
// ---------------------------------------------------------------------------

struct MixtureDynamics {
  Mat unitary;                // full-space, or an H_I block when block_unitary
  bool block_unitary = false;
  double lambda = 0.5;
  LinearMap map;
};

namespace detail {
inline void check_unitary(const Mat& u, double tol = 1e-8) {
  const Mat gram = u.adjoint() * u;
  if ((gram - Mat::Identity(u.rows(), u.cols())).norm() > tol)
    throw std::invalid_argument("mix_map: operator is not unitary");
}
inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("mix_map: lambda must lie in [0,1]");
}
}  // namespace detail

/// Mixture from a full-space unitary. Every monomial image is expanded back
/// into A(I); a residual beyond tol means U does not preserve the algebra.
inline MixtureDynamics mix_map(const Algebra& alg, const Mat& u, double lambda,
                               double residual_tol = kMembershipTol) {
  detail::check_lambda(lambda);
  detail::check_unitary(u);
  LinearMap map = map_from_full_action(
      alg,
      [&](const Mat& a) {
        return Mat(lambda * (u.adjoint() * a * u) +
                   (1.0 - lambda) * (u * a * u.adjoint()));
      },
      residual_tol);
  return {u, false, lambda, std::move(map)};
}

/// Mixture from a unitary on H_I (the pi_I picture); expansion is exact here.
inline MixtureDynamics mix_map_block(const Algebra& alg, const Mat& u_block,
                                     double lambda) {
  detail::check_lambda(lambda);
  detail::check_unitary(u_block);
  if (u_block.rows() != static_cast<Eigen::Index>(alg.block_dim()))
    throw std::invalid_argument("mix_map_block: block dimension mismatch");
  LinearMap map = map_from_block_action(alg, [&](const Mat& a) {
    return Mat(lambda * (u_block.adjoint() * a * u_block) +
               (1.0 - lambda) * (u_block * a * u_block.adjoint()));
  });
  return {u_block, true, lambda, std::move(map)};
}

/// A permutation of the basis vectors of H_I that need not come from a
/// permutation of I: each listed subset maps to the next, unlisted ones stay.
inline Mat basis_cycle_unitary(const Algebra& alg,
                               const std::vector<std::vector<int>>& cycle) {
  const auto bd = static_cast<Eigen::Index>(alg.block_dim());
  std::vector<Eigen::Index> idx;
  std::set<Eigen::Index> seen;
  for (const auto& subset : cycle) {
    const Mask global = alg.lattice().mask_of(subset);
    if (!subset_of(global, alg.support()))
      throw std::invalid_argument("basis_cycle_unitary: subset outside the region");
    const auto i = static_cast<Eigen::Index>(compress_mask(global, alg.support()));
    if (!seen.insert(i).second)
      throw std::invalid_argument("basis_cycle_unitary: repeated basis state");
    idx.push_back(i);
  }
  Mat u = Mat::Zero(bd, bd);
  for (Eigen::Index j = 0; j < bd; ++j)
    if (!seen.count(j)) u(j, j) = 1.0;
  for (std::size_t k = 0; k < idx.size(); ++k)
    u(idx[(k + 1) % idx.size()], idx[k]) = 1.0;
  return u;
}

// ---------------------------------------------------------------------------
// Quantum Markov semigroup generated by L = tau - id.
// ---------------------------------------------------------------------------

class Semigroup {
 public:
  Semigroup(const Algebra& alg, LinearMap generator)
      : generator_(std::move(generator)) {
    if (generator_.support != alg.support())
      throw std::invalid_argument("Semigroup: generator/algebra mismatch");
    const Mat& k = generator_.matrix;
    Eigen::ComplexEigenSolver<Mat> es(k, true);
    if (es.info() == Eigen::Success) {
      const Mat v = es.eigenvectors();
      const SvdSummary s = svd_summary(v);
      if (s.condition > 1e-8) {
        Mat vinv = v.inverse();
        const Mat recon = v * es.eigenvalues().asDiagonal() * vinv;
        if ((recon - k).norm() < 1e-11 * (1.0 + k.norm())) {
          eigvecs_ = v;
          eigvecs_inv_ = std::move(vinv);
          eigvals_ = es.eigenvalues();
          diagonalized_ = true;
        }
      }
    }
  }

  const LinearMap& generator() const { return generator_; }
  bool diagonalized() const { return diagonalized_; }

  /// e^{tL}; eigendecomposition when well conditioned, scaling-and-squaring
  /// otherwise.
  LinearMap evolve(double t) const {
    if (t < 0.0) throw std::invalid_argument("evolve: negative time");
    Mat m;
    if (diagonalized_) {
      const Vec scaled = (eigvals_.array() * t).exp().matrix();
      m = eigvecs_ * scaled.asDiagonal() * eigvecs_inv_;
    } else {
      m = expm(Mat(generator_.matrix * t));
    }
    return {generator_.support, std::move(m)};
  }

 private:
  LinearMap generator_;
  bool diagonalized_ = false;
  Mat eigvecs_, eigvecs_inv_;
  Vec eigvals_;
};

inline Semigroup lindblad(const Algebra& alg, const MixtureDynamics& mix) {
  const auto n = static_cast<Eigen::Index>(alg.monomial_count());
  LinearMap generator{mix.map.support, Mat(mix.map.matrix - Mat::Identity(n, n))};
  return Semigroup(alg, std::move(generator));
}

}  // namespace fbal
