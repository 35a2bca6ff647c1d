#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fbal {

// Occupation subsets are bitmasks over the ascending label order of a Lattice.
using Mask = std::uint32_t;

// 2^16 basis vectors is the largest state space anyone may materialize.
inline constexpr int kDefaultMaxSites = 16;

inline int popcount(Mask m) { return std::popcount(m); }

inline bool subset_of(Mask m, Mask support) { return (m & ~support) == 0; }

// Renumber the bits of m that lie inside support into a dense submask.
inline Mask compress_mask(Mask m, Mask support) {
  Mask out = 0;
  int k = 0;
  for (int p = 0; p < 32; ++p) {
    const Mask bit = Mask{1} << p;
    if (bit > support) break;
    if (support & bit) {
      if (m & bit) out |= Mask{1} << k;
      ++k;
    }
  }
  return out;
}

// Inverse of compress_mask: scatter a dense submask back onto support.
inline Mask expand_mask(Mask sub, Mask support) {
  Mask out = 0;
  int k = 0;
  for (int p = 0; p < 32; ++p) {
    const Mask bit = Mask{1} << p;
    if (bit > support) break;
    if (support & bit) {
      if (sub & (Mask{1} << k)) out |= bit;
      ++k;
    }
  }
  return out;
}

/// Finite set of integer site labels, stored in ascending order. The ascending
/// order fixes the canonical representative of every occupation subset, and
/// with it every sign the toolkit produces.
class Lattice {
 public:
  explicit Lattice(std::vector<int> labels, int max_sites = kDefaultMaxSites)
      : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("Lattice: empty label set");
    if (max_sites < 1 || max_sites > 30)
      throw std::invalid_argument("Lattice: site cap must be in [1,30]");
    std::sort(labels_.begin(), labels_.end());
    if (std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end())
      throw std::invalid_argument("Lattice: duplicate label");
    if (static_cast<int>(labels_.size()) > max_sites)
      throw std::invalid_argument("Lattice: more than " + std::to_string(max_sites) +
                                  " sites");
  }

  int sites() const { return static_cast<int>(labels_.size()); }
  std::size_t dim() const { return std::size_t{1} << labels_.size(); }
  const std::vector<int>& labels() const { return labels_; }

  bool contains(int label) const {
    return std::binary_search(labels_.begin(), labels_.end(), label);
  }

  int position(int label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label)
      throw std::invalid_argument("Lattice: label " + std::to_string(label) +
                                  " not in L");
    return static_cast<int>(it - labels_.begin());
  }

  int label_at(int pos) const { return labels_.at(static_cast<std::size_t>(pos)); }

  Mask full_mask() const { return static_cast<Mask>(dim() - 1); }

  Mask mask_of(const std::vector<int>& subset) const {
    Mask m = 0;
    for (int l : subset) {
      const Mask bit = Mask{1} << position(l);
      if (m & bit)
        throw std::invalid_argument("Lattice: repeated label in subset");
      m |= bit;
    }
    return m;
  }

  std::vector<int> labels_of(Mask m) const {
    if (!subset_of(m, full_mask()))
      throw std::invalid_argument("Lattice: mask outside lattice");
    std::vector<int> out;
    for (int p = 0; p < sites(); ++p)
      if (m & (Mask{1} << p)) out.push_back(labels_[static_cast<std::size_t>(p)]);
    return out;
  }

  std::string subset_name(Mask m) const {
    std::string s = "{";
    bool first = true;
    for (int l : labels_of(m)) {
      if (!first) s += ",";
      s += std::to_string(l);
      first = false;
    }
    return s + "}";
  }

 private:
  std::vector<int> labels_;
};

/// A finite label sequence together with the sign of the permutation sorting
/// it ascending; sign 0 marks a repeated label (the antisymmetrizer kills it).
struct SignedSequence {
  std::vector<int> entries;
  int sign = 0;
};

inline SignedSequence sequence_sign(const Lattice& lat, const std::vector<int>& seq) {
  for (int l : seq) (void)lat.position(l);  // membership check
  SignedSequence out{seq, 1};
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq[i] == seq[j]) {
        out.sign = 0;
        return out;
      }
      if (seq[i] > seq[j]) out.sign = -out.sign;
    }
  return out;
}

/// Injective finite relabeling l -> iota(l); used to carry a region I to its
/// copy iota(I) elsewhere in the lattice.
class LabelMap {
 public:
  explicit LabelMap(const std::vector<std::pair<int, int>>& pairs) {
    for (auto [from, to] : pairs) {
      if (!fwd_.emplace(from, to).second)
        throw std::invalid_argument("LabelMap: duplicate source label " +
                                    std::to_string(from));
      if (!rev_.emplace(to, from).second)
        throw std::invalid_argument("LabelMap: duplicate target label " +
                                    std::to_string(to));
    }
  }

  int apply(int label) const {
    auto it = fwd_.find(label);
    if (it == fwd_.end())
      throw std::invalid_argument("LabelMap: label " + std::to_string(label) +
                                  " not in domain");
    return it->second;
  }

  int inverse(int label) const {
    auto it = rev_.find(label);
    if (it == rev_.end())
      throw std::invalid_argument("LabelMap: label " + std::to_string(label) +
                                  " not in image");
    return it->second;
  }

  bool has(int label) const { return fwd_.count(label) != 0; }

  std::vector<int> domain() const {
    std::vector<int> out;
    out.reserve(fwd_.size());
    for (const auto& [from, to] : fwd_) out.push_back(from);
    return out;
  }

  std::vector<int> image() const {
    std::vector<int> out;
    out.reserve(rev_.size());
    for (const auto& [to, from] : rev_) out.push_back(to);
    return out;
  }

  std::vector<int> image_of(const std::vector<int>& seq) const {
    std::vector<int> out;
    out.reserve(seq.size());
    for (int l : seq) out.push_back(apply(l));
    return out;
  }

  const std::map<int, int>& pairs() const { return fwd_; }

 private:
  std::map<int, int> fwd_, rev_;
};

}  // namespace fbal
