#pragma once

// Test-only reference implementations, kept independent of the library's
// bitmask/parity-count code paths.
//
//  * tensor_oracle: builds the antisymmetric vectors and creation /
//    annihilation operators literally from the projection
//    P(x_1 x ... x x_n) = (1/n!) sum_pi eps_pi x_{pi(1)} x ... x x_{pi(n)}
//    acting on dense n-particle tensors.
//  * seq_oracle: applies the prepend / remove action rules term by term to
//    sequence-keyed amplitudes, with signs from explicit bubble sorting.

#include <algorithm>
#include <complex>
#include <map>
#include <numeric>
#include <vector>

#include "fbal/fock.hpp"
#include "fbal/lattice.hpp"

namespace tensor_oracle {

using fbal::Complex;
using fbal::Vec;

inline Eigen::Index tensor_dim(int s, int n) {
  Eigen::Index d = 1;
  for (int i = 0; i < n; ++i) d *= s;
  return d;
}

inline std::vector<int> digits_of(Eigen::Index idx, int s, int n) {
  std::vector<int> d(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    d[static_cast<std::size_t>(i)] = static_cast<int>(idx % s);
    idx /= s;
  }
  return d;
}

inline Eigen::Index index_of(const std::vector<int>& digits, int s) {
  Eigen::Index idx = 0;
  for (int d : digits) idx = idx * s + d;
  return idx;
}

inline int permutation_sign(const std::vector<int>& perm) {
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) sign = -sign;
  return sign;
}

// P on the n-particle sector of dimension s^n.
inline Vec project(const Vec& v, int s, int n) {
  if (n == 0) return v;
  Vec out = Vec::Zero(v.size());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  do {
    const int sign = permutation_sign(perm);
    for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
      if (v(idx) == 0.0) continue;
      const std::vector<int> d = digits_of(idx, s, n);
      std::vector<int> permuted(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        permuted[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      out(index_of(permuted, s)) += (static_cast<double>(sign) / fact) * v(idx);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// sqrt(n!) P(e_{l_1} x ... x e_{l_n}): unit norm for distinct labels.
inline Vec normalized_f(const fbal::Lattice& lat, const std::vector<int>& seq) {
  const int s = lat.sites();
  const int n = static_cast<int>(seq.size());
  Vec raw = Vec::Zero(tensor_dim(s, n));
  std::vector<int> d;
  for (int l : seq) d.push_back(lat.position(l));
  raw(index_of(d, s)) = 1.0;
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return std::sqrt(fact) * project(raw, s, n);
}

// a*(e_l) = P b*(e_l) from sector n to n+1, b*(x) t = sqrt(n+1) x (x) t.
inline Vec creation(const fbal::Lattice& lat, int label, const Vec& v, int n) {
  const int s = lat.sites();
  const int pos = lat.position(label);
  Vec raised = Vec::Zero(tensor_dim(s, n + 1));
  for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
    if (v(idx) == 0.0) continue;
    std::vector<int> d = digits_of(idx, s, n);
    d.insert(d.begin(), pos);
    raised(index_of(d, s)) += std::sqrt(static_cast<double>(n + 1)) * v(idx);
  }
  return project(raised, s, n + 1);
}

// a(e_l) = P b(e_l) from sector n+1 to n.
inline Vec annihilation(const fbal::Lattice& lat, int label, const Vec& v, int n_out) {
  const int s = lat.sites();
  const int pos = lat.position(label);
  Vec lowered = Vec::Zero(tensor_dim(s, n_out));
  for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
    if (v(idx) == 0.0) continue;
    const std::vector<int> d = digits_of(idx, s, n_out + 1);
    if (d[0] != pos) continue;
    const std::vector<int> rest(d.begin() + 1, d.end());
    lowered(index_of(rest, s)) +=
        std::sqrt(static_cast<double>(n_out + 1)) * v(idx);
  }
  return project(lowered, s, n_out);
}

}  // namespace tensor_oracle

namespace seq_oracle {

using fbal::Complex;

// Amplitudes keyed by canonical (ascending) label sequences.
using State = std::map<std::vector<int>, Complex>;

inline void accumulate(State& state, std::vector<int> seq, Complex amp) {
  // bubble sort, one sign flip per swap; repeated labels kill the term
  int sign = 1;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    for (std::size_t j = 0; j + 1 < seq.size() - i; ++j) {
      if (seq[j] == seq[j + 1]) return;
      if (seq[j] > seq[j + 1]) {
        std::swap(seq[j], seq[j + 1]);
        sign = -sign;
      }
    }
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    if (seq[i] == seq[i + 1]) return;
  state[seq] += static_cast<double>(sign) * amp;
}

inline State apply_creation(int label, const State& in) {
  State out;
  for (const auto& [seq, amp] : in) {
    std::vector<int> prepended;
    prepended.push_back(label);
    prepended.insert(prepended.end(), seq.begin(), seq.end());
    accumulate(out, std::move(prepended), amp);
  }
  return out;
}

inline State apply_annihilation(int label, const State& in) {
  State out;
  for (const auto& [seq, amp] : in) {
    int k = 0;
    bool found = false;
    for (std::size_t i = 0; i < seq.size(); ++i)
      if (seq[i] == label) {
        k = static_cast<int>(i) + 1;
        found = true;
        break;
      }
    if (!found) continue;
    std::vector<int> removed = seq;
    removed.erase(removed.begin() + (k - 1));
    const double sign = (k - 1) % 2 == 0 ? 1.0 : -1.0;
    accumulate(out, std::move(removed), sign * amp);
  }
  return out;
}

inline Complex inner(const State& a, const State& b) {
  Complex out = 0.0;
  for (const auto& [seq, amp] : a) {
    auto it = b.find(seq);
    if (it != b.end()) out += std::conj(amp) * it->second;
  }
  return out;
}

/// Phi = sum_M sqrt(p_M) f_{M iota(M)} built by raw accumulation.
inline State entangled_state(const std::vector<std::vector<int>>& subsets,
                             const std::vector<double>& probs,
                             const std::map<int, int>& iota) {
  State out;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (probs[i] == 0.0) continue;
    std::vector<int> seq = subsets[i];
    for (int l : subsets[i]) seq.push_back(iota.at(l));
    accumulate(out, std::move(seq), std::sqrt(probs[i]));
  }
  return out;
}

}  // namespace seq_oracle
