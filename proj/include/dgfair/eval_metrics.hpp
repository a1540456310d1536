#pragma once

#include <cstdint>
#include <vector>

#include "dgfair/util.hpp"

namespace dgfair {

// One user's evaluation instance: a deterministic ranking over that user's
// candidate items (best first, no duplicates) plus the relevant item ids.
struct RankedList {
    std::vector<int> ranking;
    std::vector<int> positives;
};

// Micro-averaged hit rate: total hits in the top k across users divided by
// the total number of positives across users.
double hit_rate_at(const std::vector<RankedList>& lists, int k);

// Micro-averaged precision: total hits divided by total recommended slots
// (k per user).
double precision_at(const std::vector<RankedList>& lists, int k);

// Mean over users of (1/|pos|) * sum over positives found in the top k of
// 1/log2(rank + 1), with ranks starting at 1. Positives outside the top k
// contribute zero.
double ndcg_at(const std::vector<RankedList>& lists, int k);

// Context for ranking-fairness measures over one candidate set.
struct FairnessContext {
    const std::vector<std::uint8_t>* protected_flags = nullptr;  // indexed by item id
    long universe = 0;          // size of the candidate set the ranking draws from
    long protected_count = 0;   // protected items within the candidate set
    std::vector<int> cutoffs;   // evaluation depths, ascending
};

// Cutoffs larger than the universe are dropped; the caller can surface the
// truncation in reports.
std::vector<int> truncate_cutoffs(const std::vector<int>& cutoffs, long universe);

// Ranking bias of the protected group measured against its global share.
// Both scores normalize by the larger of the two extremal rankings (all
// protected items first / all last) and return 0 when that normalizer is 0.
// rnd additionally weights each depth by 1/log2(k) and skips k = 1.
double rhr(const std::vector<int>& ranking, const FairnessContext& ctx);
double rnd(const std::vector<int>& ranking, const FairnessContext& ctx);

}  // namespace dgfair
