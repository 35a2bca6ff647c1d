#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbal/algebra.hpp"
#include "fbal/dynamics.hpp"
#include "fbal/states.hpp"

namespace fbal {

inline constexpr double kBalanceTol = 1e-10;

/// Per-pair sweep of a detailed balance condition over a spanning set. By
/// bilinearity the verdict extends to all of A(I) x A(iota(I)) (or M_n x M_n).
/// lhs carries the dynamics on the a side, rhs on the b side.
struct BalanceReport {
  bool verdict = false;
  double tolerance = kBalanceTol;
  double max_violation = 0.0;
  Eigen::Index argmax_a = 0, argmax_b = 0;
  std::string argmax_a_name, argmax_b_name;
  Mat lhs, rhs;
  Eigen::MatrixXd deviation;
};

namespace detail {
inline void finalize_report(BalanceReport& report, double tol,
                            const std::function<std::string(Eigen::Index)>& a_name,
                            const std::function<std::string(Eigen::Index)>& b_name) {
  report.tolerance = tol;
  report.deviation = (report.lhs - report.rhs).cwiseAbs();
  report.max_violation = 0.0;
  for (Eigen::Index i = 0; i < report.deviation.rows(); ++i)
    for (Eigen::Index j = 0; j < report.deviation.cols(); ++j)
      if (report.deviation(i, j) > report.max_violation) {
        report.max_violation = report.deviation(i, j);
        report.argmax_a = i;
        report.argmax_b = j;
      }
  report.argmax_a_name = a_name(report.argmax_a);
  report.argmax_b_name = b_name(report.argmax_b);
  report.verdict = report.max_violation < tol;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Fermionic standard quantum detailed balance:
//   phi(tau(a) b) = phi(a tau^iota(b))  for a in A(I), b in A(iota(I)),
// swept over the monomial bases of both sides.
// ---------------------------------------------------------------------------

inline BalanceReport fermionic_sqdb(const Algebra& alg_region,
                                    const Algebra& alg_mirror, const LinearMap& tau,
                                    const EntangledState& state,
                                    double tol = kBalanceTol) {
  const LatticeConfig& cfg = state.config;
  if (tau.support != cfg.region)
    throw std::invalid_argument("fermionic_sqdb: map not on A(I)");
  if (alg_region.support() != cfg.region ||
      alg_mirror.support() != cfg.mirror_region())
    throw std::invalid_argument("fermionic_sqdb: algebra/region mismatch");

  const LinearMap tau_iota = copy_map(alg_region, alg_mirror, cfg.iota, tau);
  const auto na = static_cast<Eigen::Index>(alg_region.monomial_count());
  const auto nb = static_cast<Eigen::Index>(alg_mirror.monomial_count());
  const Vec& v = state.vector;

  // phi(tau(a_i) b_j) = <tau(a_i)* Phi, b_j Phi>, and symmetrically.
  std::vector<Vec> tau_a_phi(static_cast<std::size_t>(na)),
      a_phi(static_cast<std::size_t>(na));
  for (Eigen::Index i = 0; i < na; ++i) {
    const Mat tau_ai = alg_region.reconstruct_full(tau.matrix.col(i));
    tau_a_phi[static_cast<std::size_t>(i)] = tau_ai.adjoint() * v;
    a_phi[static_cast<std::size_t>(i)] =
        alg_region.full_matrix(static_cast<std::size_t>(i)).adjoint() * v;
  }
  std::vector<Vec> b_phi(static_cast<std::size_t>(nb)),
      tau_b_phi(static_cast<std::size_t>(nb));
  for (Eigen::Index j = 0; j < nb; ++j) {
    b_phi[static_cast<std::size_t>(j)] =
        alg_mirror.full_matrix(static_cast<std::size_t>(j)) * v;
    tau_b_phi[static_cast<std::size_t>(j)] =
        alg_mirror.reconstruct_full(tau_iota.matrix.col(j)) * v;
  }

  BalanceReport report;
  report.lhs.resize(na, nb);
  report.rhs.resize(na, nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < nb; ++j) {
      report.lhs(i, j) =
          tau_a_phi[static_cast<std::size_t>(i)].dot(b_phi[static_cast<std::size_t>(j)]);
      report.rhs(i, j) =
          a_phi[static_cast<std::size_t>(i)].dot(tau_b_phi[static_cast<std::size_t>(j)]);
    }
  detail::finalize_report(
      report, tol,
      [&](Eigen::Index i) { return alg_region.monomial_name(static_cast<std::size_t>(i)); },
      [&](Eigen::Index j) { return alg_mirror.monomial_name(static_cast<std::size_t>(j)); });
  return report;
}

inline BalanceReport fermionic_sqdb(const LinearMap& tau, const EntangledState& state,
                                    double tol = kBalanceTol) {
  const Algebra alg_region(state.config.lattice, state.config.region);
  const Algebra alg_mirror(state.config.lattice, state.config.mirror_region());
  return fermionic_sqdb(alg_region, alg_mirror, tau, state, tol);
}

inline std::vector<BalanceReport> fermionic_sqdb_continuous(
    const Algebra& alg_region, const Algebra& alg_mirror, const Semigroup& semigroup,
    const EntangledState& state, const std::vector<double>& t_grid,
    double tol = kBalanceTol) {
  std::vector<BalanceReport> out;
  out.reserve(t_grid.size());
  for (double t : t_grid)
    out.push_back(
        fermionic_sqdb(alg_region, alg_mirror, semigroup.evolve(t), state, tol));
  return out;
}

// ---------------------------------------------------------------------------
// Standard quantum detailed balance on M_n with the transposition reversing
// operation:  omega(tau(a) x b) = omega(a x tau(b))  with
// Omega = sum_j sqrt(p_j) d_j x d_j. On matrix units the entangled expectation
// collapses to omega(E_jk x E_pq) = sqrt(p_j p_k) delta_jp delta_kq, so the
// sweep needs no tensor-product space.
// ---------------------------------------------------------------------------

using BlockSuperop = std::function<Mat(const Mat&)>;

inline BalanceReport standard_sqdb(const BlockSuperop& tau,
                                   const std::vector<double>& probs,
                                   double tol = kBalanceTol,
                                   const std::vector<std::string>& basis_names = {}) {
  const auto n = static_cast<Eigen::Index>(probs.size());
  if (n == 0) throw std::invalid_argument("standard_sqdb: empty probability vector");
  std::vector<Mat> tau_units(static_cast<std::size_t>(n * n));
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) {
      Mat unit = Mat::Zero(n, n);
      unit(p, q) = 1.0;
      Mat image = tau(unit);
      if (image.rows() != n || image.cols() != n)
        throw std::invalid_argument("standard_sqdb: superoperator dimension mismatch");
      tau_units[static_cast<std::size_t>(p * n + q)] = std::move(image);
    }
  BalanceReport report;
  report.lhs.resize(n * n, n * n);
  report.rhs.resize(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index p = 0; p < n; ++p)
        for (Eigen::Index q = 0; q < n; ++q) {
          const Eigen::Index a = j * n + k;
          const Eigen::Index b = p * n + q;
          report.lhs(a, b) = std::sqrt(probs[static_cast<std::size_t>(p)] *
                                       probs[static_cast<std::size_t>(q)]) *
                             tau_units[static_cast<std::size_t>(a)](p, q);
          report.rhs(a, b) = std::sqrt(probs[static_cast<std::size_t>(j)] *
                                       probs[static_cast<std::size_t>(k)]) *
                             tau_units[static_cast<std::size_t>(b)](j, k);
        }
  const auto unit_name = [&](Eigen::Index flat) {
    const Eigen::Index r = flat / n, c = flat % n;
    if (static_cast<std::size_t>(n) == basis_names.size())
      return "E(" + basis_names[static_cast<std::size_t>(r)] + "," +
             basis_names[static_cast<std::size_t>(c)] + ")";
    return "E(" + std::to_string(r) + "," + std::to_string(c) + ")";
  };
  detail::finalize_report(report, tol, unit_name, unit_name);
  return report;
}

/// Adapter: a LinearMap on monomial coefficients as a superoperator in the
/// pi_I matrix picture.
inline BlockSuperop block_superop(const Algebra& alg, const LinearMap& map) {
  if (map.support != alg.support())
    throw std::invalid_argument("block_superop: support mismatch");
  const Mat matrix = map.matrix;
  const Algebra* ap = &alg;
  return [ap, matrix](const Mat& x) {
    return ap->reconstruct_block(Vec(matrix * ap->expand_block(x)));
  };
}

// ---------------------------------------------------------------------------
// The probability symmetry conditions of the cycle example. With D_I fixed
// ascending, the sequence bookkeeping collapses to subset-level statements:
// the canonical image of M under sigma (resp. sigma^(-1)) carries the same
// probability as M.
// ---------------------------------------------------------------------------

struct ProbSymmetryReport {
  bool inv = false;
  bool inv2 = false;
  bool inv_prime = false;
};

inline ProbSymmetryReport prob_symmetry(const ProbabilityTable& probs,
                                        const LatticePermutation& sigma,
                                        double tol = 1e-12) {
  if (sigma.region() != probs.support())
    throw std::invalid_argument("prob_symmetry: permutation region != table support");
  ProbSymmetryReport out{true, true, true};
  const Mask support = probs.support();
  const LatticePermutation inv = sigma.inverted();
  for (std::size_t s = 0; s < probs.size(); ++s) {
    const Mask global = expand_mask(static_cast<Mask>(s), support);
    const double pm = probs.p(static_cast<Mask>(s));
    if (std::abs(probs.p_subset(inv.image_subset(global)) - pm) > tol) out.inv = false;
    if (std::abs(probs.p_subset(sigma.image_subset(global)) - pm) > tol)
      out.inv_prime = false;
    for (std::size_t t = s + 1; t < probs.size(); ++t)
      if (popcount(static_cast<Mask>(t)) == popcount(static_cast<Mask>(s)) &&
          std::abs(probs.p(static_cast<Mask>(t)) - pm) > tol)
        out.inv2 = false;
  }
  return out;
}

}  // namespace fbal
