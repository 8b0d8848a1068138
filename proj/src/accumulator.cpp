#include "trimer/accumulator.hpp"

#include <cassert>

#include "trimer/error.hpp"

namespace trimer {

int pair_index(int i, int j) {
  assert(i != j);
  const int lo = i < j ? i : j;
  const int hi = i < j ? j : i;
  return lo == 0 ? hi - 1 : 2;  // (0,1)->0 (0,2)->1 (1,2)->2
}

int ordered_pair_index(int i, int j) {
  assert(i != j);
  return 2 * i + (j < i ? j : j - 1);
}

cplx MomentMeans::piaj(int i, int j) const {
  if (i == j) return n(j);
  return v[static_cast<int>(Mono::kPiAj) + ordered_pair_index(i, j)];
}

void MonomialSums::add(const TrajectoryState& s) {
  const auto& a = s.alpha;
  const auto& p = s.alpha_plus;
  auto at = [this](Mono base, int off) -> cplx& { return sum[static_cast<int>(base) + off]; };
  cplx n[kWells];
  for (int j = 0; j < kWells; ++j) {
    n[j] = p[j] * a[j];
    at(Mono::kA, j) += a[j];
    at(Mono::kP, j) += p[j];
    at(Mono::kAA, j) += a[j] * a[j];
    at(Mono::kPP, j) += p[j] * p[j];
    at(Mono::kN, j) += n[j];
    at(Mono::kNN, j) += n[j] * n[j];
  }
  for (int i = 0; i < kWells; ++i) {
    for (int j = i + 1; j < kWells; ++j) {
      const int k = pair_index(i, j);
      at(Mono::kNiNj, k) += n[i] * n[j];
      at(Mono::kAiAj, k) += a[i] * a[j];
      at(Mono::kPiPj, k) += p[i] * p[j];
    }
  }
  for (int i = 0; i < kWells; ++i) {
    for (int j = 0; j < kWells; ++j) {
      if (i != j) at(Mono::kPiAj, ordered_pair_index(i, j)) += p[i] * a[j];
    }
  }
  ++count;
}

MonomialSums& MonomialSums::operator+=(const MonomialSums& other) {
  count += other.count;
  for (int k = 0; k < kMonomials; ++k) sum[k] += other.sum[k];
  return *this;
}

MomentMeans MonomialSums::means() const {
  if (count == 0) throw EmptyAccumulator("no samples in accumulator");
  MomentMeans m;
  const double inv = 1.0 / static_cast<double>(count);
  for (int k = 0; k < kMonomials; ++k) m.v[k] = sum[k] * inv;
  return m;
}

MomentAccumulator& MomentAccumulator::merge(const MomentAccumulator& other) {
  for (const auto& [key, sums] : other.batches_) batches_[key] += sums;
  return *this;
}

std::int64_t MomentAccumulator::count() const {
  std::int64_t c = 0;
  for (const auto& [key, sums] : batches_) c += sums.count;
  return c;
}

MonomialSums MomentAccumulator::totals() const {
  MonomialSums t;
  for (const auto& [key, sums] : batches_) t += sums;
  return t;
}

MomentMeans MomentAccumulator::means() const { return totals().means(); }

std::map<std::uint32_t, MomentMeans> MomentAccumulator::leave_one_out_means() const {
  const MonomialSums total = totals();
  std::map<std::uint32_t, MomentMeans> out;
  for (const auto& [key, sums] : batches_) {
    if (sums.count == 0 || sums.count == total.count) continue;
    MonomialSums rest;
    rest.count = total.count - sums.count;
    for (int k = 0; k < kMonomials; ++k) rest.sum[k] = total.sum[k] - sums.sum[k];
    out.emplace(key, rest.means());
  }
  return out;
}

MomentAccumulator pool(const std::vector<const MomentAccumulator*>& parts) {
  MomentAccumulator out;
  for (const auto* p : parts) out.merge(*p);
  return out;
}

}  // namespace trimer
