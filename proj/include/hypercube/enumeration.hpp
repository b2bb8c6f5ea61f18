#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hypercube/cayley.hpp"

namespace hypercube {

enum class EnumMode { Exhaustive, Sample };
enum class DedupMode { None, Isomorphism };

struct EnumConfig {
  int order = 5;
  EnumMode mode = EnumMode::Exhaustive;
  int sample_count = 100;
  std::uint64_t seed = 0;
  DedupMode dedup = DedupMode::None;
};

/// Throws EnumRange when order is outside [2,12] or exhaustive mode is
/// requested above order 6.
void validate(const EnumConfig& cfg);

/// Streams every reduced Latin square of the given order (first row and
/// column in natural order) exactly once, in lexicographic cell order.
/// Supported orders: 2..6.
class ReducedLatinEnumerator {
 public:
  explicit ReducedLatinEnumerator(int order);
  std::optional<CayleyTable> next();

 private:
  int order_;
  int num_free_;                 // free cells: (order-1)^2
  std::vector<int> free_row_, free_col_;
  std::vector<int> cells_;
  std::vector<int> row_used_, col_used_;  // bitmasks
  std::vector<int> tried_;       // last value tried at each depth, -1 none
  int depth_ = 0;
  bool exhausted_ = false;
};

/// One canonical representative per loop-isomorphism class, sorted by
/// canonical hash. Exhaustive; order must be at most 6.
std::vector<CayleyTable> enumerate_loops_upto_iso(int order);

/// Randomized-backtracking loop sampler (random value order at each cell).
/// Isomorphism duplicates are dropped and regenerated, so the result holds
/// canonical representatives of `count` distinct classes -- fewer when the
/// class space is exhausted first. Deterministic per seed.
std::vector<CayleyTable> sample_random_loops(int order, int count,
                                             std::uint64_t seed);

/// Raw samples without isomorphism dedup (repeats possible).
std::vector<CayleyTable> sample_random_loops_raw(int order, int count,
                                                 std::uint64_t seed);

/// Dispatch for the CLI: exhaustive stream (optionally deduped) or sampler.
std::vector<CayleyTable> run_enumeration(const EnumConfig& cfg);

}  // namespace hypercube
