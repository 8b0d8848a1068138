#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "trimer/model.hpp"

namespace trimer {

// Slots of the phase-space monomials whose ensemble means feed every
// estimator. alpha+ is written "p" below. Pairs (i, j) run over
// (1,2), (1,3), (2,3); the ordered cross terms p_i a_j over all i != j.
enum class Mono : int {
  kA = 0,          // a_j                  (3)
  kP = 3,          // p_j                  (3)
  kAA = 6,         // a_j^2                (3)
  kPP = 9,         // p_j^2                (3)
  kN = 12,         // p_j a_j              (3)
  kNN = 15,        // p_j^2 a_j^2          (3)
  kNiNj = 18,      // p_i a_i p_j a_j      (3 pairs)
  kAiAj = 21,      // a_i a_j              (3 pairs)
  kPiPj = 24,      // p_i p_j              (3 pairs)
  kPiAj = 27,      // p_i a_j, i != j      (6 ordered)
};
inline constexpr int kMonomials = 33;

int pair_index(int i, int j);          // unordered pair of distinct wells -> 0..2
int ordered_pair_index(int i, int j);  // ordered pair, i != j -> 0..5

// Ensemble means of all monomials; the only input estimators need. Filled
// either from stochastic sums or from exact operator traces.
struct MomentMeans {
  std::array<cplx, kMonomials> v{};

  cplx a(int j) const { return v[static_cast<int>(Mono::kA) + j]; }
  cplx p(int j) const { return v[static_cast<int>(Mono::kP) + j]; }
  cplx aa(int j) const { return v[static_cast<int>(Mono::kAA) + j]; }
  cplx pp(int j) const { return v[static_cast<int>(Mono::kPP) + j]; }
  cplx n(int j) const { return v[static_cast<int>(Mono::kN) + j]; }
  cplx nn(int j) const { return v[static_cast<int>(Mono::kNN) + j]; }
  // <p_i a_i p_j a_j>, i != j
  cplx ninj(int i, int j) const { return v[static_cast<int>(Mono::kNiNj) + pair_index(i, j)]; }
  // <a_i a_j>, i != j
  cplx aiaj(int i, int j) const { return v[static_cast<int>(Mono::kAiAj) + pair_index(i, j)]; }
  // <p_i p_j>, i != j
  cplx pipj(int i, int j) const { return v[static_cast<int>(Mono::kPiPj) + pair_index(i, j)]; }
  // <p_i a_j>; reduces to n(j) when i == j
  cplx piaj(int i, int j) const;

  cplx& slot(Mono base, int offset) { return v[static_cast<int>(base) + offset]; }
};

// Raw sums for one trajectory batch at one sample time.
struct MonomialSums {
  std::int64_t count = 0;
  std::array<cplx, kMonomials> sum{};

  void add(const TrajectoryState& s);
  MonomialSums& operator+=(const MonomialSums& other);
  MomentMeans means() const;
};

// Streaming sums of the monomials at one sample time, kept per trajectory
// batch so that standard errors can be formed by leaving batches out.
// Totals are always summed in batch-key order, which makes a merge of
// accumulators over disjoint batches reproduce a single pass exactly.
class MomentAccumulator {
 public:
  void add(std::uint32_t batch, const TrajectoryState& s) { batches_[batch].add(s); }
  void add_sums(std::uint32_t batch, const MonomialSums& sums) { batches_[batch] += sums; }

  // Elementwise sum, batch by batch. Associative and commutative on disjoint
  // batch sets; the empty accumulator is the identity.
  MomentAccumulator& merge(const MomentAccumulator& other);

  std::int64_t count() const;
  bool empty() const { return count() == 0; }
  std::size_t batch_count() const { return batches_.size(); }
  const std::map<std::uint32_t, MonomialSums>& batches() const { return batches_; }

  MonomialSums totals() const;
  MomentMeans means() const;  // throws EmptyAccumulator
  // Means with each batch left out in turn (jackknife replicas), keyed by
  // the batch left out. Batches holding every sample are skipped.
  std::map<std::uint32_t, MomentMeans> leave_one_out_means() const;

  friend bool operator==(const MomentAccumulator&, const MomentAccumulator&) = default;

 private:
  std::map<std::uint32_t, MonomialSums> batches_;
};

inline bool operator==(const MonomialSums& x, const MonomialSums& y) {
  return x.count == y.count && x.sum == y.sum;
}

// Pool several sample times into one accumulator (time-averaged moments).
MomentAccumulator pool(const std::vector<const MomentAccumulator*>& parts);

}  // namespace trimer
