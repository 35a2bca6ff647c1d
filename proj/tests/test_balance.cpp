#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fbal/balance.hpp"

using namespace fbal;

namespace {

struct CycleScenario {
  Lattice lattice;
  Algebra alg_region;
  Algebra alg_mirror;
  EntangledState state;
  LatticePermutation sigma;
  Mat unitary;
};

// sigma = (1 2) on I = {1,2} inside L = {1,2,3,4}
CycleScenario two_site(std::vector<double> probs) {
  Lattice lat({1, 2, 3, 4});
  const Mask region = lat.mask_of({1, 2});
  LatticeConfig cfg = LatticeConfig::make(
      lat, {1, 2}, LabelMap({{1, 3}, {2, 4}}),
      ProbabilityTable(region, std::move(probs)));
  LatticePermutation sigma(lat, region, {{1, 2}});
  Mat u = permutation_unitary(sigma);
  return {lat, Algebra(lat, region), Algebra(lat, lat.mask_of({3, 4})),
          entangled_vector(std::move(cfg)), std::move(sigma), std::move(u)};
}

// sigma = (1 2 3) on I = {1,2,3} inside L = {1,...,6}
CycleScenario three_site(const std::vector<double>& per_length) {
  Lattice lat({1, 2, 3, 4, 5, 6});
  const Mask region = lat.mask_of({1, 2, 3});
  LatticeConfig cfg = LatticeConfig::make(
      lat, {1, 2, 3}, LabelMap({{1, 4}, {2, 5}, {3, 6}}),
      ProbabilityTable::by_length(region, per_length));
  LatticePermutation sigma(lat, region, {{1, 2, 3}});
  Mat u = permutation_unitary(sigma);
  return {lat, Algebra(lat, region), Algebra(lat, lat.mask_of({4, 5, 6})),
          entangled_vector(std::move(cfg)), std::move(sigma), std::move(u)};
}

struct Section6 {
  Lattice lattice;
  Algebra alg_region;
  Algebra alg_mirror;
  EntangledState state;
  MixtureDynamics alpha;
};

Section6 section6(double lambda) {
  Lattice lat({1, 2, 3, 4});
  const Mask region = lat.mask_of({1, 2});
  LatticeConfig cfg =
      LatticeConfig::make(lat, {1, 2}, LabelMap({{1, 3}, {2, 4}}),
                          ProbabilityTable::uniform(region));
  Algebra alg(lat, region);
  const Mat u = basis_cycle_unitary(alg, {{}, {1}, {1, 2}, {2}});
  MixtureDynamics alpha = mix_map_block(alg, u, lambda);
  return {lat, std::move(alg), Algebra(lat, lat.mask_of({3, 4})),
          entangled_vector(std::move(cfg)), std::move(alpha)};
}

}  // namespace

TEST_CASE("identity dynamics always balance") {
  auto sc = two_site({0.4, 0.3, 0.2, 0.1});
  const BalanceReport r = fermionic_sqdb(sc.alg_region, sc.alg_mirror,
                                         identity_map(sc.alg_region), sc.state);
  REQUIRE(r.verdict);
  REQUIRE(r.max_violation < 1e-14);

  const BalanceReport s = standard_sqdb([](const Mat& a) { return a; },
                                        {0.4, 0.3, 0.2, 0.1});
  REQUIRE(s.verdict);
  REQUIRE(s.max_violation < 1e-14);
}

TEST_CASE("balanced cycles satisfy the fermionic condition") {
  SECTION("2-cycle at lambda = 1/2 with per-length probabilities") {
    auto sc = two_site({0.4, 0.2, 0.2, 0.2});
    const MixtureDynamics mix = mix_map(sc.alg_region, sc.unitary, 0.5);
    const BalanceReport r =
        fermionic_sqdb(sc.alg_region, sc.alg_mirror, mix.map, sc.state);
    REQUIRE(r.verdict);
    REQUIRE(r.max_violation < 1e-10);
  }

  SECTION("3-cycle at lambda = 1/2") {
    auto sc = three_site({0.25, 0.1, 0.1, 0.15});
    const MixtureDynamics mix = mix_map(sc.alg_region, sc.unitary, 0.5);
    const BalanceReport r =
        fermionic_sqdb(sc.alg_region, sc.alg_mirror, mix.map, sc.state);
    REQUIRE(r.verdict);
    REQUIRE(r.max_violation < 1e-10);
  }

  SECTION("unbalanced 3-cycle fails") {
    auto sc = three_site({0.25, 0.1, 0.1, 0.15});
    for (double lambda : {0.0, 0.3, 0.9}) {
      const MixtureDynamics mix = mix_map(sc.alg_region, sc.unitary, lambda);
      const BalanceReport r =
          fermionic_sqdb(sc.alg_region, sc.alg_mirror, mix.map, sc.state);
      REQUIRE_FALSE(r.verdict);
      REQUIRE(r.max_violation > 1e-3);
    }
  }
}

TEST_CASE("continuous-time balance") {
  SECTION("balanced generator stays balanced along the semigroup") {
    auto sc = two_site({0.4, 0.2, 0.2, 0.2});
    const MixtureDynamics mix = mix_map(sc.alg_region, sc.unitary, 0.5);
    const Semigroup sg = lindblad(sc.alg_region, mix);
    const auto reports = fermionic_sqdb_continuous(sc.alg_region, sc.alg_mirror, sg,
                                                   sc.state, {0.0, 0.5, 1.0, 2.0});
    for (const auto& r : reports) {
      REQUIRE(r.verdict);
      REQUIRE(r.max_violation < 1e-10);
    }
  }

  SECTION("unbalanced generator fails at t = 1") {
    auto sc = three_site({0.25, 0.1, 0.1, 0.15});
    const MixtureDynamics mix = mix_map(sc.alg_region, sc.unitary, 0.9);
    const Semigroup sg = lindblad(sc.alg_region, mix);
    const auto reports = fermionic_sqdb_continuous(sc.alg_region, sc.alg_mirror, sg,
                                                   sc.state, {1.0});
    REQUIRE_FALSE(reports.front().verdict);
  }
}

TEST_CASE("section 6: standard holds, fermionic fails") {
  auto sc = section6(0.5);

  const BalanceReport standard = standard_sqdb(
      block_superop(sc.alg_region, sc.alpha.map), sc.state.config.probs.values());
  REQUIRE(standard.verdict);
  REQUIRE(standard.max_violation < 1e-10);

  const BalanceReport fermionic =
      fermionic_sqdb(sc.alg_region, sc.alg_mirror, sc.alpha.map, sc.state);
  REQUIRE_FALSE(fermionic.verdict);
  REQUIRE(std::abs(fermionic.max_violation - 0.5) < 1e-10);

  // the witness pair (a_1, a_4*) sits exactly at +1/4 vs -1/4
  const auto ai = static_cast<Eigen::Index>(
      sc.alg_region.monomial_index(0, sc.lattice.mask_of({1})));
  const auto bj = static_cast<Eigen::Index>(
      sc.alg_mirror.monomial_index(sc.lattice.mask_of({4}), 0));
  REQUIRE(std::abs(fermionic.lhs(ai, bj) - Complex(0.25)) < 1e-12);
  REQUIRE(std::abs(fermionic.rhs(ai, bj) - Complex(-0.25)) < 1e-12);
  REQUIRE(std::abs(fermionic.deviation(ai, bj) - 0.5) < 1e-12);
}

TEST_CASE("report bookkeeping and error paths") {
  auto sc = two_site({0.4, 0.3, 0.2, 0.1});
  const MixtureDynamics mix = mix_map(sc.alg_region, sc.unitary, 0.5);
  const BalanceReport r =
      fermionic_sqdb(sc.alg_region, sc.alg_mirror, mix.map, sc.state);
  REQUIRE(r.max_violation == r.deviation.maxCoeff());
  REQUIRE(r.verdict == (r.max_violation < r.tolerance));
  REQUIRE(std::abs(r.deviation(r.argmax_a, r.argmax_b) - r.max_violation) == 0.0);

  // map living on the wrong support is rejected
  const LinearMap wrong{sc.alg_mirror.support(), identity_map(sc.alg_mirror).matrix};
  REQUIRE_THROWS_AS(fermionic_sqdb(sc.alg_region, sc.alg_mirror, wrong, sc.state),
                    std::invalid_argument);

  // superoperator with mismatched dimensions is rejected
  REQUIRE_THROWS_AS(
      standard_sqdb([](const Mat&) { return Mat::Zero(2, 2); }, {0.5, 0.25, 0.25}),
      std::invalid_argument);
}

TEST_CASE("section 6 with a one-sided cycle breaks standard balance") {
  auto sc = section6(0.0);
  const BalanceReport standard = standard_sqdb(
      block_superop(sc.alg_region, sc.alpha.map), sc.state.config.probs.values());
  REQUIRE_FALSE(standard.verdict);
}

TEST_CASE("entangled-pair expectation matches the explicit tensor product") {
  // standard_sqdb evaluates omega(a x b) = sum sqrt(p_m p_n) a_mn b_mn without
  // building K x K; rebuild Omega literally and compare
  const Eigen::Index n = 4;
  const std::vector<double> probs{0.4, 0.3, 0.2, 0.1};
  Vec omega_vec = Vec::Zero(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    omega_vec(j * n + j) = std::sqrt(probs[static_cast<std::size_t>(j)]);

  std::mt19937 rng(83);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto random_mat = [&] {
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(unit(rng), unit(rng));
    return m;
  };
  for (int trial = 0; trial < 5; ++trial) {
    const Mat a = random_mat(), b = random_mat();
    Mat kron(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        kron.block(i * n, j * n, n, n) = a(i, j) * b;
    const Complex direct = omega_vec.dot(kron * omega_vec);
    Complex collapsed = 0.0;
    for (Eigen::Index m = 0; m < n; ++m)
      for (Eigen::Index k = 0; k < n; ++k)
        collapsed += std::sqrt(probs[static_cast<std::size_t>(m)] *
                               probs[static_cast<std::size_t>(k)]) *
                     a(m, k) * b(m, k);
    REQUIRE(std::abs(direct - collapsed) < 1e-12);
  }
}

TEST_CASE("probability symmetry conditions") {
  Lattice lat({1, 2, 3, 4});
  const Mask region = lat.mask_of({1, 2});
  const LatticePermutation sigma(lat, region, {{1, 2}});

  SECTION("uniform table satisfies everything") {
    const auto r = prob_symmetry(ProbabilityTable::uniform(region), sigma);
    REQUIRE(r.inv);
    REQUIRE(r.inv2);
    REQUIRE(r.inv_prime);
  }

  SECTION("per-length tables satisfy inv2") {
    const auto r =
        prob_symmetry(ProbabilityTable::by_length(region, {0.4, 0.2, 0.2}), sigma);
    REQUIRE(r.inv2);
    REQUIRE(r.inv);
    REQUIRE(r.inv_prime);
  }

  SECTION("distinct values inside one sigma-orbit break inv") {
    const ProbabilityTable skew(region, {0.1, 0.3, 0.5, 0.1});
    const auto r = prob_symmetry(skew, sigma);
    REQUIRE_FALSE(r.inv);
    REQUIRE_FALSE(r.inv2);
    REQUIRE_FALSE(r.inv_prime);
  }
}

TEST_CASE("bilinearity reduces the sweep to monomial pairs") {
  auto sc = two_site({0.4, 0.2, 0.2, 0.2});
  const MixtureDynamics mix = mix_map(sc.alg_region, sc.unitary, 0.3);
  const BalanceReport r =
      fermionic_sqdb(sc.alg_region, sc.alg_mirror, mix.map, sc.state);
  const LinearMap tau_iota =
      copy_map(sc.alg_region, sc.alg_mirror, sc.state.config.iota, mix.map);

  std::mt19937 rng(71);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Vec ca(static_cast<Eigen::Index>(sc.alg_region.monomial_count()));
    Vec cb(static_cast<Eigen::Index>(sc.alg_mirror.monomial_count()));
    for (Eigen::Index i = 0; i < ca.size(); ++i) ca(i) = Complex(unit(rng), unit(rng));
    for (Eigen::Index j = 0; j < cb.size(); ++j) cb(j) = Complex(unit(rng), unit(rng));

    const Mat a = sc.alg_region.reconstruct_full(ca);
    const Mat b = sc.alg_mirror.reconstruct_full(cb);
    const Mat tau_a = sc.alg_region.reconstruct_full(Vec(mix.map.matrix * ca));
    const Mat tau_b = sc.alg_mirror.reconstruct_full(Vec(tau_iota.matrix * cb));
    const Complex direct =
        phi(sc.state, Mat(tau_a * b)) - phi(sc.state, Mat(a * tau_b));

    Complex combined = 0.0;
    for (Eigen::Index i = 0; i < ca.size(); ++i)
      for (Eigen::Index j = 0; j < cb.size(); ++j)
        combined += ca(i) * cb(j) * (r.lhs(i, j) - r.rhs(i, j));
    REQUIRE(std::abs(direct - combined) < 1e-10);
  }
}

TEST_CASE("phi_1 equals phi under inv2 probabilities") {
  auto sc = two_site({0.4, 0.2, 0.2, 0.2});
  const Lattice& lat = sc.lattice;
  const LatticeConfig& cfg = sc.state.config;
  Vec phi1 = zero_state(lat);
  for (std::size_t s = 0; s < cfg.probs.size(); ++s) {
    const double pm = cfg.probs.p(static_cast<Mask>(s));
    const std::vector<int> m =
        lat.labels_of(expand_mask(static_cast<Mask>(s), cfg.region));
    std::vector<int> seq = sc.sigma.image_sequence(m);
    for (int l : sc.sigma.image_sequence(m)) seq.push_back(cfg.iota.apply(l));
    phi1 += std::sqrt(pm) * f_vector(lat, seq);
  }
  REQUIRE((phi1 - sc.state.vector).norm() < 1e-13);
}

TEST_CASE("conjugated expectation identity under inv") {
  auto sc = two_site({0.4, 0.2, 0.2, 0.2});
  const Mat u = sc.unitary;
  const LatticePermutation sigma_iota =
      sc.sigma.conjugated(sc.state.config.iota, sc.alg_mirror.support());
  const Mat v = permutation_unitary(sigma_iota);
  const Vec& w = sc.state.vector;
  for (std::size_t i = 0; i < sc.alg_region.monomial_count(); ++i)
    for (std::size_t j = 0; j < sc.alg_mirror.monomial_count(); ++j) {
      const Mat a = sc.alg_region.full_matrix(i);
      const Mat b = sc.alg_mirror.full_matrix(j);
      const Complex lhs = w.dot(u.adjoint() * a * u * b * w);
      const Complex rhs = w.dot(a * v * b * v.adjoint() * w);
      REQUIRE(std::abs(lhs - rhs) < 1e-12);
    }
}
