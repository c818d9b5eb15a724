#include "hmpc/share.hpp"

#include <bit>
#include <string>

namespace hmpc {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

PartySet::PartySet(int parties) : n(parties), t((parties - 1) / 2) {
  if (parties < 3 || parties % 2 == 0 || parties > 15)
    throw std::invalid_argument("party count must be odd and in [3, 15], got " + std::to_string(parties));
}

namespace {

void lex_subsets(int n, int k, int start, std::uint32_t cur, int have, std::vector<std::uint32_t>& out) {
  if (have == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i <= n - (k - have); ++i) lex_subsets(n, k, i + 1, cur | (1u << i), have + 1, out);
}

}  // namespace

SubsetIndex::SubsetIndex(const PartySet& ps) : ps_(ps) {
  lex_subsets(ps.n, ps.h(), 0, 0, 0, masks_);
  g_ = static_cast<int>(binomial(ps.n - 1, ps.h() - 1));
  held_.resize(ps.n);
  slot_.assign(static_cast<std::size_t>(ps.n) * q(), -1);
  for (int j = 0; j < q(); ++j)
    for (int i = 0; i < ps.n; ++i)
      if (holds(i, j)) {
        slot_[i * q() + j] = static_cast<int>(held_[i].size());
        held_[i].push_back(j);
      }
  for (int i = 0; i < ps.n; ++i)
    if (static_cast<int>(held_[i].size()) != g_) throw std::logic_error("subset membership count mismatch");

  e_slots_.resize(ps.n);
  all_slots_.resize(ps.n);
  mul_plan_.resize(ps.n);
  for (int i = 0; i < ps.n; ++i) {
    e_slots_[i] = tadd_slots(ps.E_mask(), i);
    all_slots_[i] = tadd_slots(ps.all_mask(), i);
    mul_plan_[i].resize(g_);
    for (int a = 0; a < g_; ++a)
      for (int b = 0; b < g_; ++b)
        if (least_in(masks_[held_[i][a]], held_[i][b]) == i) mul_plan_[i][a].push_back(b);
  }
}

std::vector<int> SubsetIndex::members(int j) const {
  std::vector<int> out;
  for (int i = 0; i < ps_.n; ++i)
    if (holds(i, j)) out.push_back(i);
  return out;
}

int SubsetIndex::least_in(std::uint32_t T, int j) const {
  std::uint32_t both = T & masks_[j];
  if (both == 0) return -1;
  return std::countr_zero(both);
}

std::vector<int> SubsetIndex::tadd_slots(std::uint32_t T, int party) const {
  std::vector<int> out;
  if (!((T >> party) & 1)) return out;
  for (int a = 0; a < g_; ++a)
    if (least_in(T, held_[party][a]) == party) out.push_back(a);
  return out;
}

}  // namespace hmpc
