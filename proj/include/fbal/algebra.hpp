#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fbal/fock.hpp"
#include "fbal/lattice.hpp"
#include "fbal/linalg.hpp"

namespace fbal {

// ---------------------------------------------------------------------------
// Monomial basis of A(I): the 2^{2|I|} operators a*_N a_M, with N and M
// canonical subsets of I. Convention: a*_N = a*_{n_1}...a*_{n_j} with the n_i
// ascending, a_M = a_{m_s}...a_{m_1} with the m_i ascending, so that
// a*_N a_M f_M = f_N with no extra sign.
// ---------------------------------------------------------------------------

struct Monomial {
  Mask creators;      // N, as a global lattice mask
  Mask annihilators;  // M, as a global lattice mask
};

struct MonomialAction {
  Mask target = 0;
  int sign = 0;  // 0 when the monomial annihilates the basis state
};

inline MonomialAction monomial_on_mask(const Lattice& lat, const Monomial& mono,
                                       Mask m) {
  int sign = 1;
  Mask cur = m;
  // a_M: the lowest annihilator label acts first
  for (int p = 0; p < lat.sites(); ++p) {
    const Mask bit = Mask{1} << p;
    if (!(mono.annihilators & bit)) continue;
    if (!(cur & bit)) return {};
    sign *= parity_below(cur, p);
    cur &= ~bit;
  }
  // a*_N: the highest creator label acts first
  for (int p = lat.sites() - 1; p >= 0; --p) {
    const Mask bit = Mask{1} << p;
    if (!(mono.creators & bit)) continue;
    if (cur & bit) return {};
    sign *= parity_below(cur, p);
    cur |= bit;
  }
  return {cur, sign};
}

// 4^6 monomials already means a 4096x4096 expansion solve; beyond that the
// dense monomial picture stops being sensible.
inline constexpr int kMaxAlgebraSites = 6;

inline constexpr double kMembershipTol = 1e-8;

/// The finite-dimensional algebra A(I) in its monomial coordinates. Holds the
/// pi_I matrices of all monomials and a factorization of the resulting basis
/// matrix, so elements can be expanded and reconstructed cheaply.
class Algebra {
 public:
  Algebra(Lattice lat, Mask support) : lat_(std::move(lat)), support_(support) {
    if (!subset_of(support_, lat_.full_mask()))
      throw std::invalid_argument("Algebra: support not a subset of L");
    d_ = popcount(support_);
    if (d_ > kMaxAlgebraSites)
      throw std::invalid_argument("Algebra: support larger than " +
                                  std::to_string(kMaxAlgebraSites) + " sites");
    block_ = subspace_masks(lat_, support_);
    const auto bd = static_cast<Eigen::Index>(block_.size());
    const std::size_t count = monomial_count();
    pi_.reserve(count);
    Mat basis(bd * bd, static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) {
      const Monomial mono = monomial(k);
      Mat pik = Mat::Zero(bd, bd);
      for (Eigen::Index j = 0; j < bd; ++j) {
        const MonomialAction act =
            monomial_on_mask(lat_, mono, block_[static_cast<std::size_t>(j)]);
        if (act.sign == 0) continue;
        const auto row = static_cast<Eigen::Index>(compress_mask(act.target, support_));
        pik(row, j) = static_cast<double>(act.sign);
      }
      basis.col(static_cast<Eigen::Index>(k)) =
          Eigen::Map<const Vec>(pik.data(), bd * bd);
      pi_.push_back(std::move(pik));
    }
    basis_ = std::move(basis);
    solver_.compute(basis_);
  }

  Algebra(const Lattice& lat, const std::vector<int>& labels)
      : Algebra(lat, lat.mask_of(labels)) {}

  const Lattice& lattice() const { return lat_; }
  Mask support() const { return support_; }
  int sites() const { return d_; }
  std::size_t block_dim() const { return block_.size(); }
  std::size_t monomial_count() const { return std::size_t{1} << (2 * d_); }
  const std::vector<Mask>& block_basis() const { return block_; }

  Monomial monomial(std::size_t k) const {
    if (k >= monomial_count()) throw std::invalid_argument("Algebra: bad monomial index");
    const Mask sub_n = static_cast<Mask>(k >> d_);
    const Mask sub_m = static_cast<Mask>(k) & ((Mask{1} << d_) - 1);
    return {expand_mask(sub_n, support_), expand_mask(sub_m, support_)};
  }

  std::size_t monomial_index(Mask creators, Mask annihilators) const {
    if (!subset_of(creators, support_) || !subset_of(annihilators, support_))
      throw std::invalid_argument("Algebra: monomial outside support");
    return (std::size_t{compress_mask(creators, support_)} << d_) |
           compress_mask(annihilators, support_);
  }

  /// Written form, annihilators in their a_{m_s}...a_{m_1} order.
  std::string monomial_name(std::size_t k) const {
    const Monomial mono = monomial(k);
    if (mono.creators == 0 && mono.annihilators == 0) return "1";
    std::string out;
    for (int l : lat_.labels_of(mono.creators)) out += "a*(" + std::to_string(l) + ")";
    const std::vector<int> ann = lat_.labels_of(mono.annihilators);
    for (auto it = ann.rbegin(); it != ann.rend(); ++it)
      out += "a(" + std::to_string(*it) + ")";
    return out;
  }

  const Mat& pi_matrix(std::size_t k) const { return pi_.at(k); }

  Mat full_matrix(std::size_t k) const {
    const Monomial mono = monomial(k);
    const auto n = static_cast<Eigen::Index>(lat_.dim());
    Mat out = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const MonomialAction act = monomial_on_mask(lat_, mono, static_cast<Mask>(j));
      if (act.sign != 0)
        out(static_cast<Eigen::Index>(act.target), j) = static_cast<double>(act.sign);
    }
    return out;
  }

  Vec apply_monomial(std::size_t k, const Vec& v) const {
    const Monomial mono = monomial(k);
    Vec out = Vec::Zero(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v(i) == 0.0) continue;
      const MonomialAction act = monomial_on_mask(lat_, mono, static_cast<Mask>(i));
      if (act.sign != 0)
        out(static_cast<Eigen::Index>(act.target)) +=
            static_cast<double>(act.sign) * v(i);
    }
    return out;
  }

  /// Coordinates of a pi_I-picture matrix; exact, since the monomials span
  /// the whole matrix algebra on H_I.
  Vec expand_block(const Mat& block) const {
    const auto bd = static_cast<Eigen::Index>(block_dim());
    if (block.rows() != bd || block.cols() != bd)
      throw std::invalid_argument("expand_block: dimension mismatch");
    return solver_.solve(Eigen::Map<const Vec>(block.data(), bd * bd));
  }

  Mat reconstruct_block(const Vec& coeffs) const {
    const auto bd = static_cast<Eigen::Index>(block_dim());
    if (coeffs.size() != static_cast<Eigen::Index>(monomial_count()))
      throw std::invalid_argument("reconstruct_block: coefficient count mismatch");
    Vec flat = basis_ * coeffs;
    return Eigen::Map<const Mat>(flat.data(), bd, bd);
  }

  Mat reconstruct_full(const Vec& coeffs) const {
    if (coeffs.size() != static_cast<Eigen::Index>(monomial_count()))
      throw std::invalid_argument("reconstruct_full: coefficient count mismatch");
    const auto n = static_cast<Eigen::Index>(lat_.dim());
    Mat out = Mat::Zero(n, n);
    for (std::size_t k = 0; k < monomial_count(); ++k) {
      const Complex c = coeffs(static_cast<Eigen::Index>(k));
      if (c == 0.0) continue;
      const Monomial mono = monomial(k);
      for (Eigen::Index j = 0; j < n; ++j) {
        const MonomialAction act = monomial_on_mask(lat_, mono, static_cast<Mask>(j));
        if (act.sign != 0)
          out(static_cast<Eigen::Index>(act.target), j) +=
              static_cast<double>(act.sign) * c;
      }
    }
    return out;
  }

  /// Least-squares coordinates of a full-space operator, with the Frobenius
  /// residual measuring how far op is from A(I).
  Vec try_expand(const Mat& op, double* residual) const {
    const auto n = static_cast<Eigen::Index>(lat_.dim());
    if (op.rows() != n || op.cols() != n)
      throw std::invalid_argument("expand: operator dimension mismatch");
    const auto bd = static_cast<Eigen::Index>(block_dim());
    Mat block(bd, bd);
    for (Eigen::Index j = 0; j < bd; ++j)
      for (Eigen::Index i = 0; i < bd; ++i)
        block(i, j) = op(static_cast<Eigen::Index>(block_[static_cast<std::size_t>(i)]),
                         static_cast<Eigen::Index>(block_[static_cast<std::size_t>(j)]));
    Vec coeffs = expand_block(block);
    if (residual) *residual = (reconstruct_full(coeffs) - op).norm();
    return coeffs;
  }

  Vec expand(const Mat& op, double tol = kMembershipTol) const {
    double residual = 0.0;
    Vec coeffs = try_expand(op, &residual);
    if (residual > tol)
      throw std::invalid_argument("expand: operator is not in A(I) (residual " +
                                  std::to_string(residual) + ")");
    return coeffs;
  }

 private:
  Lattice lat_;
  Mask support_;
  int d_ = 0;
  std::vector<Mask> block_;
  std::vector<Mat> pi_;
  Mat basis_;  // vec'd pi matrices, one column per monomial
  Eigen::ColPivHouseholderQR<Mat> solver_;
};

/// An element of A(I) in monomial coordinates.
struct AlgebraElement {
  Mask support = 0;
  Vec coeffs;
};

inline AlgebraElement expand_element(const Algebra& alg, const Mat& op,
                                     double tol = kMembershipTol) {
  return {alg.support(), alg.expand(op, tol)};
}

// ---------------------------------------------------------------------------
// Linear maps on A(I), stored as matrices on monomial coefficient vectors.
// ---------------------------------------------------------------------------

struct LinearMap {
  Mask support = 0;
  Mat matrix;
};

inline LinearMap identity_map(const Algebra& alg) {
  const auto n = static_cast<Eigen::Index>(alg.monomial_count());
  return {alg.support(), Mat::Identity(n, n)};
}

/// f after g; both must live on the same support.
inline LinearMap compose(const LinearMap& f, const LinearMap& g) {
  if (f.support != g.support)
    throw std::invalid_argument("compose: support mismatch");
  return {f.support, f.matrix * g.matrix};
}

inline AlgebraElement apply_map(const LinearMap& m, const AlgebraElement& a) {
  if (m.support != a.support)
    throw std::invalid_argument("apply_map: support mismatch");
  return {a.support, m.matrix * a.coeffs};
}

inline LinearMap map_from_block_action(const Algebra& alg,
                                       const std::function<Mat(const Mat&)>& act) {
  const auto n = static_cast<Eigen::Index>(alg.monomial_count());
  Mat k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    k.col(j) = alg.expand_block(act(alg.pi_matrix(static_cast<std::size_t>(j))));
  return {alg.support(), std::move(k)};
}

inline LinearMap map_from_full_action(const Algebra& alg,
                                      const std::function<Mat(const Mat&)>& act,
                                      double tol = kMembershipTol) {
  const auto n = static_cast<Eigen::Index>(alg.monomial_count());
  Mat k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    k.col(j) = alg.expand(act(alg.full_matrix(static_cast<std::size_t>(j))), tol);
  return {alg.support(), std::move(k)};
}

// ---------------------------------------------------------------------------
// eta: the *-isomorphism A(I) -> A(iota(I)) with eta(a_l) = a_{iota(l)},
// realized as signed coefficient transport. Reordering the relabeled creator
// and annihilator strings back to canonical form contributes the permutation
// signs; no global unitary is involved.
// ---------------------------------------------------------------------------

inline Mat eta_transport_matrix(const Algebra& from, const Algebra& to,
                                const LabelMap& iota) {
  const Lattice& lat = from.lattice();
  if (iota.domain() != lat.labels_of(from.support()))
    throw std::invalid_argument("eta: iota domain is not the source support");
  Mask image = 0;
  for (int l : iota.image()) image |= Mask{1} << lat.position(l);
  if (image != to.support())
    throw std::invalid_argument("eta: iota image is not the target support");
  if (from.support() & to.support())
    throw std::invalid_argument("eta: source and target regions overlap");
  const auto n = static_cast<Eigen::Index>(from.monomial_count());
  Mat p = Mat::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Monomial mono = from.monomial(static_cast<std::size_t>(k));
    const SignedSequence sn =
        sequence_sign(lat, iota.image_of(lat.labels_of(mono.creators)));
    const SignedSequence sm =
        sequence_sign(lat, iota.image_of(lat.labels_of(mono.annihilators)));
    const std::size_t target =
        to.monomial_index(lat.mask_of(sn.entries), lat.mask_of(sm.entries));
    p(static_cast<Eigen::Index>(target), k) = static_cast<double>(sn.sign * sm.sign);
  }
  return p;
}

inline AlgebraElement eta_iso(const Algebra& from, const Algebra& to,
                              const LabelMap& iota, const AlgebraElement& a) {
  if (a.support != from.support())
    throw std::invalid_argument("eta_iso: element not on the source support");
  return {to.support(), eta_transport_matrix(from, to, iota) * a.coeffs};
}

/// tau^iota = eta . tau . eta^{-1} in the monomial basis of the target.
inline LinearMap copy_map(const Algebra& from, const Algebra& to,
                          const LabelMap& iota, const LinearMap& tau) {
  if (tau.support != from.support())
    throw std::invalid_argument("copy_map: map not on the source support");
  const Mat p = eta_transport_matrix(from, to, iota);
  // p is a signed permutation, so its inverse is its transpose
  return {to.support(), p * tau.matrix * p.transpose()};
}

// ---------------------------------------------------------------------------
// Parity automorphism Theta(a) = theta a theta: each monomial scales by
// (-1)^{|N|+|M|}.
// ---------------------------------------------------------------------------

inline Eigen::VectorXd theta_signs(const Algebra& alg) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(alg.monomial_count()));
  for (std::size_t k = 0; k < alg.monomial_count(); ++k) {
    const Monomial mono = alg.monomial(k);
    const int degree = popcount(mono.creators) + popcount(mono.annihilators);
    s(static_cast<Eigen::Index>(k)) = (degree & 1) ? -1.0 : 1.0;
  }
  return s;
}

inline LinearMap theta_map(const Algebra& alg) {
  return {alg.support(), theta_signs(alg).asDiagonal().toDenseMatrix().cast<Complex>()};
}

inline AlgebraElement theta_auto(const Algebra& alg, const AlgebraElement& a) {
  if (a.support != alg.support())
    throw std::invalid_argument("theta_auto: support mismatch");
  return {a.support, theta_signs(alg).asDiagonal() * a.coeffs};
}

/// Largest operator-norm (on H_I, where pi_I is isometric) of
/// (m.Theta - Theta.m) over the monomial basis.
inline double evenness_deviation(const Algebra& alg, const LinearMap& m) {
  if (m.support != alg.support())
    throw std::invalid_argument("evenness_deviation: support mismatch");
  const Eigen::VectorXd s = theta_signs(alg);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < m.matrix.cols(); ++j) {
    const Vec diff = s(j) * m.matrix.col(j) - (s.asDiagonal() * m.matrix.col(j));
    worst = std::max(worst, operator_norm(alg.reconstruct_block(diff)));
  }
  return worst;
}

inline bool is_even(const Algebra& alg, const LinearMap& m, double tol = 1e-10,
                    double* deviation = nullptr) {
  const double dev = evenness_deviation(alg, m);
  if (deviation) *deviation = dev;
  return dev < tol;
}

}  // namespace fbal
