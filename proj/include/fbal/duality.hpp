#pragma once

#include <stdexcept>
#include <vector>

#include "fbal/algebra.hpp"
#include "fbal/linalg.hpp"
#include "fbal/states.hpp"

namespace fbal {

// B_phi(a,b) = phi(ab) for a in A(I), b in A(iota(I)). The order ab is a
// genuine choice here; the swapped form phi(ba) is exposed separately.
inline Complex bilinear_form(const EntangledState& state, const Mat& a, const Mat& b) {
  return state.vector.dot(a * (b * state.vector));
}

inline Complex bilinear_form_swapped(const EntangledState& state, const Mat& a,
                                     const Mat& b) {
  return state.vector.dot(b * (a * state.vector));
}

/// Gram matrix of B_phi over the two monomial bases. Non-degenerate (full
/// rank 4^|I|) whenever every p_M is strictly positive.
struct BilinearGram {
  Mat matrix;
  Eigen::VectorXd singular_values;
  int rank = 0;
  double condition = 0.0;  // smallest/largest singular value
  bool strict_probs = false;
};

inline BilinearGram gram(const Algebra& alg_region, const Algebra& alg_mirror,
                         const EntangledState& state) {
  const LatticeConfig& cfg = state.config;
  if (alg_region.support() != cfg.region ||
      alg_mirror.support() != cfg.mirror_region())
    throw std::invalid_argument("gram: algebra/region mismatch");
  const auto na = static_cast<Eigen::Index>(alg_region.monomial_count());
  const auto nb = static_cast<Eigen::Index>(alg_mirror.monomial_count());
  std::vector<Vec> a_phi(static_cast<std::size_t>(na)),
      b_phi(static_cast<std::size_t>(nb));
  for (Eigen::Index i = 0; i < na; ++i)
    a_phi[static_cast<std::size_t>(i)] =
        alg_region.full_matrix(static_cast<std::size_t>(i)).adjoint() * state.vector;
  for (Eigen::Index j = 0; j < nb; ++j)
    b_phi[static_cast<std::size_t>(j)] =
        alg_mirror.full_matrix(static_cast<std::size_t>(j)) * state.vector;
  BilinearGram out;
  out.matrix.resize(na, nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < nb; ++j)
      out.matrix(i, j) =
          a_phi[static_cast<std::size_t>(i)].dot(b_phi[static_cast<std::size_t>(j)]);
  const SvdSummary s = svd_summary(out.matrix);
  out.singular_values = s.singular_values;
  out.rank = s.rank;
  out.condition = s.condition;
  out.strict_probs = cfg.probs.strictly_positive();
  return out;
}

inline BilinearGram gram(const EntangledState& state) {
  const Algebra alg_region(state.config.lattice, state.config.region);
  const Algebra alg_mirror(state.config.lattice, state.config.mirror_region());
  return gram(alg_region, alg_mirror, state);
}

namespace detail {
inline void check_dual_preconditions(const BilinearGram& g, double cond_floor) {
  if (!g.strict_probs)
    throw std::invalid_argument(
        "fermionic_dual: all probabilities must be strictly positive");
  if (g.condition < cond_floor)
    throw std::runtime_error("fermionic_dual: Gram matrix too ill-conditioned");
}
}  // namespace detail

/// The unique map alpha^phi on A(iota(I)) with
///   B_phi(alpha(a), b) = B_phi(a, alpha^phi(b)).
/// In Gram coordinates: K' = G^{-1} K^T G.
inline LinearMap fermionic_dual(const Algebra& alg_region, const Algebra& alg_mirror,
                                const BilinearGram& g, const LinearMap& alpha,
                                double cond_floor = 1e-12) {
  if (alpha.support != alg_region.support())
    throw std::invalid_argument("fermionic_dual: map not on A(I)");
  detail::check_dual_preconditions(g, cond_floor);
  Eigen::PartialPivLU<Mat> lu(g.matrix);
  return {alg_mirror.support(), lu.solve(Mat(alpha.matrix.transpose() * g.matrix))};
}

/// The mirrored direction: beta on A(iota(I)) to beta^phi on A(I) with
///   B_phi(a, beta(b)) = B_phi(beta^phi(a), b),  K' = G^{-T} K^T G^T.
inline LinearMap fermionic_dual_reverse(const Algebra& alg_region,
                                        const Algebra& alg_mirror,
                                        const BilinearGram& g, const LinearMap& beta,
                                        double cond_floor = 1e-12) {
  if (beta.support != alg_mirror.support())
    throw std::invalid_argument("fermionic_dual_reverse: map not on A(iota(I))");
  detail::check_dual_preconditions(g, cond_floor);
  Eigen::PartialPivLU<Mat> lu(Mat(g.matrix.transpose()));
  return {alg_region.support(),
          lu.solve(Mat(beta.matrix.transpose() * g.matrix.transpose()))};
}

/// The positivity failure probe: a = (1+kappa c)*(1+kappa c) with c = a_l and
/// b = (1+lambda d)*(1+lambda d) with d = a_{iota(l)}. Both are positive, yet
/// B_phi(a,b) picks up the imaginary part (kappa lambda - conj(kappa lambda))
/// phi(cd).
struct PositivityProbe {
  Complex value;          // B_phi(a, b)
  double a_min_eig = 0.0;
  double b_min_eig = 0.0;
  Complex phi_cd;         // phi(a_l a_{iota(l)})
};

inline PositivityProbe positivity_probe(const EntangledState& state, Complex kappa,
                                        Complex lambda, int label) {
  const Lattice& lat = state.config.lattice;
  if (!subset_of(Mask{1} << lat.position(label), state.config.region))
    throw std::invalid_argument("positivity_probe: label not in I");
  const Mat c = annihilation_op(lat, label);
  const Mat d = annihilation_op(lat, state.config.iota.apply(label));
  const Mat id = identity_op(lat);
  const Mat ca = id + kappa * c;
  const Mat db = id + lambda * d;
  const Mat a = ca.adjoint() * ca;
  const Mat b = db.adjoint() * db;
  PositivityProbe out;
  out.value = bilinear_form(state, a, b);
  out.a_min_eig = min_eigenvalue_hermitian(a);
  out.b_min_eig = min_eigenvalue_hermitian(b);
  out.phi_cd = phi(state, Mat(c * d));
  return out;
}

}  // namespace fbal
