#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fbal/algebra.hpp"
#include "fbal/fock.hpp"
#include "fbal/lattice.hpp"

namespace fbal {

// ---------------------------------------------------------------------------
// Probability tables over the canonical subsets D_I, indexed by submask.
// ---------------------------------------------------------------------------

class ProbabilityTable {
 public:
  ProbabilityTable(Mask support, std::vector<double> values, double sum_tol = 1e-12)
      : support_(support), values_(std::move(values)) {
    const std::size_t expected = std::size_t{1} << popcount(support_);
    if (values_.size() != expected)
      throw std::invalid_argument("ProbabilityTable: expected " +
                                  std::to_string(expected) + " entries");
    double sum = 0.0;
    for (double v : values_) {
      if (!(v >= 0.0))
        throw std::invalid_argument("ProbabilityTable: negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > sum_tol)
      throw std::invalid_argument("ProbabilityTable: probabilities sum to " +
                                  std::to_string(sum) + ", not 1");
    for (double& v : values_) v /= sum;
    strict_ = true;
    for (double v : values_)
      if (v == 0.0) strict_ = false;
  }

  static ProbabilityTable uniform(Mask support) {
    const std::size_t n = std::size_t{1} << popcount(support);
    return ProbabilityTable(support,
                            std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  /// p_M depending only on |M|; per_length[k] is the value for each k-subset.
  static ProbabilityTable by_length(Mask support, const std::vector<double>& per_length) {
    const int d = popcount(support);
    if (per_length.size() != static_cast<std::size_t>(d) + 1)
      throw std::invalid_argument("by_length: need one value per subset size");
    const std::size_t n = std::size_t{1} << d;
    std::vector<double> values(n);
    for (std::size_t s = 0; s < n; ++s)
      values[s] = per_length[static_cast<std::size_t>(popcount(static_cast<Mask>(s)))];
    return ProbabilityTable(support, std::move(values));
  }

  Mask support() const { return support_; }
  int sites() const { return popcount(support_); }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  bool strictly_positive() const { return strict_; }

  double p(Mask submask) const { return values_.at(static_cast<std::size_t>(submask)); }

  double p_subset(Mask global) const {
    if (!subset_of(global, support_))
      throw std::invalid_argument("ProbabilityTable: subset outside support");
    return values_[compress_mask(global, support_)];
  }

 private:
  Mask support_;
  std::vector<double> values_;
  bool strict_ = false;
};

// ---------------------------------------------------------------------------
// I, its copy iota(I), and the probabilities shared by both.
// ---------------------------------------------------------------------------

struct LatticeConfig {
  Lattice lattice;
  Mask region;  // I
  LabelMap iota;
  ProbabilityTable probs;

  static LatticeConfig make(Lattice lattice, const std::vector<int>& region_labels,
                            LabelMap iota, ProbabilityTable probs) {
    const Mask region = lattice.mask_of(region_labels);
    if (iota.domain() != lattice.labels_of(region))
      throw std::invalid_argument("LatticeConfig: iota domain must be exactly I");
    Mask mirror = 0;
    for (int l : iota.image()) mirror |= Mask{1} << lattice.position(l);
    if (mirror & region)
      throw std::invalid_argument("LatticeConfig: I and iota(I) must be disjoint");
    if (probs.support() != region)
      throw std::invalid_argument("LatticeConfig: probability table not on I");
    return {std::move(lattice), region, std::move(iota), std::move(probs)};
  }

  Mask mirror_region() const {
    Mask m = 0;
    for (int l : iota.image()) m |= Mask{1} << lattice.position(l);
    return m;
  }

  /// The same probabilities, reindexed over subsets of iota(I).
  ProbabilityTable mirror_probs() const {
    const Mask mirror = mirror_region();
    std::vector<double> q(probs.size());
    for (std::size_t s = 0; s < probs.size(); ++s) {
      const Mask global = expand_mask(static_cast<Mask>(s), region);
      Mask image = 0;
      for (int l : lattice.labels_of(global))
        image |= Mask{1} << lattice.position(iota.apply(l));
      q[compress_mask(image, mirror)] = probs.p(static_cast<Mask>(s));
    }
    return ProbabilityTable(mirror, std::move(q));
  }
};

// ---------------------------------------------------------------------------
// Density operators and the entangled state Phi.
// ---------------------------------------------------------------------------

struct DensityOperator {
  Mat op;
  Mask support = 0;
};

/// rho_I = sum_M p_M |f_M><f_M| as a full-space operator.
inline DensityOperator diagonal_density(const Lattice& lat, Mask region,
                                        const ProbabilityTable& probs) {
  if (probs.support() != region)
    throw std::invalid_argument("diagonal_density: table not on the region");
  const auto n = static_cast<Eigen::Index>(lat.dim());
  Mat rho = Mat::Zero(n, n);
  for (std::size_t s = 0; s < probs.size(); ++s) {
    const Mask global = expand_mask(static_cast<Mask>(s), region);
    rho(static_cast<Eigen::Index>(global), static_cast<Eigen::Index>(global)) =
        probs.p(static_cast<Mask>(s));
  }
  return {std::move(rho), region};
}

/// rho = sum_{M,N} p_M q_N |f_MN><f_MN| for disjoint regions. The sign of
/// f_MN cancels in the rank-one term, so rho is diagonal.
inline DensityOperator product_state(const Lattice& lat, Mask region_i, Mask region_j,
                                     const ProbabilityTable& p,
                                     const ProbabilityTable& q) {
  if (region_i & region_j)
    throw std::invalid_argument("product_state: regions overlap");
  if (p.support() != region_i || q.support() != region_j)
    throw std::invalid_argument("product_state: table/region mismatch");
  const auto n = static_cast<Eigen::Index>(lat.dim());
  Mat rho = Mat::Zero(n, n);
  for (std::size_t s = 0; s < p.size(); ++s)
    for (std::size_t t = 0; t < q.size(); ++t) {
      const Mask global = expand_mask(static_cast<Mask>(s), region_i) |
                          expand_mask(static_cast<Mask>(t), region_j);
      rho(static_cast<Eigen::Index>(global), static_cast<Eigen::Index>(global)) =
          p.p(static_cast<Mask>(s)) * q.p(static_cast<Mask>(t));
    }
  return {std::move(rho), region_i | region_j};
}

struct EntangledState {
  LatticeConfig config;
  Vec vector;  // Phi
};

/// Phi = sum_M sqrt(p_M) f_{M iota(M)}; the concatenated sequence is resolved
/// to its canonical basis vector through sequence_sign.
inline EntangledState entangled_vector(LatticeConfig config) {
  const Lattice& lat = config.lattice;
  Vec v = zero_state(lat);
  for (std::size_t s = 0; s < config.probs.size(); ++s) {
    const double pm = config.probs.p(static_cast<Mask>(s));
    if (pm == 0.0) continue;
    std::vector<int> seq =
        lat.labels_of(expand_mask(static_cast<Mask>(s), config.region));
    for (int l : lat.labels_of(expand_mask(static_cast<Mask>(s), config.region)))
      seq.push_back(config.iota.apply(l));
    v += std::sqrt(pm) * f_vector(lat, seq);
  }
  return {std::move(config), std::move(v)};
}

inline Complex phi(const EntangledState& state, const Mat& a) {
  if (std::abs(state.vector.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("phi: state vector is not normalized");
  return state.vector.dot(a * state.vector);
}

// ---------------------------------------------------------------------------
// Reduction identities: Phi against rho_I on A(I) and rho_{iota(I)} on
// A(iota(I)), swept over the full monomial bases.
// ---------------------------------------------------------------------------

struct ReductionReport {
  double max_deviation = 0.0;
  double region_deviation = 0.0;
  double mirror_deviation = 0.0;
};

inline ReductionReport reduction_report(const EntangledState& state,
                                        const Algebra& alg_region,
                                        const Algebra& alg_mirror) {
  const LatticeConfig& cfg = state.config;
  if (alg_region.support() != cfg.region ||
      alg_mirror.support() != cfg.mirror_region())
    throw std::invalid_argument("reduction_report: algebra/region mismatch");
  const DensityOperator rho_i = diagonal_density(cfg.lattice, cfg.region, cfg.probs);
  const DensityOperator rho_m =
      diagonal_density(cfg.lattice, cfg.mirror_region(), cfg.mirror_probs());
  ReductionReport out;
  for (std::size_t k = 0; k < alg_region.monomial_count(); ++k) {
    const Mat a = alg_region.full_matrix(k);
    const double dev = std::abs(phi(state, a) - (rho_i.op * a).trace());
    out.region_deviation = std::max(out.region_deviation, dev);
  }
  for (std::size_t k = 0; k < alg_mirror.monomial_count(); ++k) {
    const Mat b = alg_mirror.full_matrix(k);
    const double dev = std::abs(phi(state, b) - (rho_m.op * b).trace());
    out.mirror_deviation = std::max(out.mirror_deviation, dev);
  }
  out.max_deviation = std::max(out.region_deviation, out.mirror_deviation);
  return out;
}

inline ReductionReport reduction_report(const EntangledState& state) {
  const Algebra alg_region(state.config.lattice, state.config.region);
  const Algebra alg_mirror(state.config.lattice, state.config.mirror_region());
  return reduction_report(state, alg_region, alg_mirror);
}

}  // namespace fbal
