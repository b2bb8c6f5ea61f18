#include "hypercube/enumeration.hpp"

#include <algorithm>
#include <map>

#include "hypercube/errors.hpp"
#include "hypercube/rng.hpp"

namespace hypercube {

void validate(const EnumConfig& cfg) {
  if (cfg.order < 2 || cfg.order > 12)
    throw EnumRange("order must be in [2, 12]");
  if (cfg.mode == EnumMode::Exhaustive && cfg.order > 6)
    throw EnumRange("exhaustive enumeration supported only up to order 6");
  if (cfg.mode == EnumMode::Sample && cfg.sample_count < 1)
    throw EnumRange("sample_count must be positive");
}

ReducedLatinEnumerator::ReducedLatinEnumerator(int order) : order_(order) {
  if (order < 2 || order > 6)
    throw EnumRange("reduced-square enumeration supported for orders 2..6");

  const int n = order_;
  num_free_ = (n - 1) * (n - 1);
  free_row_.resize(num_free_);
  free_col_.resize(num_free_);
  int k = 0;
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      free_row_[k] = i;
      free_col_[k] = j;
      ++k;
    }

  cells_.assign(static_cast<std::size_t>(n) * n, -1);
  row_used_.assign(n, 0);
  col_used_.assign(n, 0);
  for (int j = 0; j < n; ++j) {
    cells_[j] = j;  // first row
    row_used_[0] |= 1 << j;
    col_used_[j] |= 1 << j;
  }
  for (int i = 1; i < n; ++i) {
    cells_[static_cast<std::size_t>(i) * n] = i;  // first column
    row_used_[i] |= 1 << i;
    col_used_[0] |= 1 << i;
  }
  tried_.assign(num_free_, -1);
}

std::optional<CayleyTable> ReducedLatinEnumerator::next() {
  if (exhausted_) return std::nullopt;
  const int n = order_;
  const int full = (1 << n) - 1;

  // Depth-first search over free cells in row-major order; between calls
  // the state sits one backtrack short of the previously yielded square.
  while (true) {
    if (depth_ == num_free_) {
      // Complete square: yield it and rewind one step so the next call
      // resumes the search.
      std::vector<int> out = cells_;
      --depth_;
      const int i = free_row_[depth_], j = free_col_[depth_];
      row_used_[i] &= ~(1 << cells_[static_cast<std::size_t>(i) * n + j]);
      col_used_[j] &= ~(1 << cells_[static_cast<std::size_t>(i) * n + j]);
      cells_[static_cast<std::size_t>(i) * n + j] = -1;
      return CayleyTable::validated(n, std::move(out));
    }

    const int i = free_row_[depth_], j = free_col_[depth_];
    const int used = row_used_[i] | col_used_[j];
    int v = tried_[depth_] + 1;
    while (v < n && ((used >> v) & 1)) ++v;

    if (v < n && used != full) {
      tried_[depth_] = v;
      cells_[static_cast<std::size_t>(i) * n + j] = v;
      row_used_[i] |= 1 << v;
      col_used_[j] |= 1 << v;
      ++depth_;
      if (depth_ < num_free_) tried_[depth_] = -1;
    } else {
      // No candidate left here; backtrack.
      tried_[depth_] = -1;
      if (depth_ == 0) {
        exhausted_ = true;
        return std::nullopt;
      }
      --depth_;
      const int pi = free_row_[depth_], pj = free_col_[depth_];
      const int pv = cells_[static_cast<std::size_t>(pi) * n + pj];
      row_used_[pi] &= ~(1 << pv);
      col_used_[pj] &= ~(1 << pv);
      cells_[static_cast<std::size_t>(pi) * n + pj] = -1;
    }
  }
}

std::vector<CayleyTable> enumerate_loops_upto_iso(int order) {
  ReducedLatinEnumerator en(order);
  std::map<std::vector<int>, CanonicalLoop> classes;
  while (auto t = en.next()) {
    CanonicalLoop c = canonical_loop_form(*t);
    classes.try_emplace(c.table.cells(), std::move(c));
  }
  std::vector<CanonicalLoop> reps;
  reps.reserve(classes.size());
  for (auto& [_, c] : classes) reps.push_back(std::move(c));
  std::sort(reps.begin(), reps.end(), [](const CanonicalLoop& a, const CanonicalLoop& b) {
    return a.hash != b.hash ? a.hash < b.hash : a.table.cells() < b.table.cells();
  });
  std::vector<CayleyTable> out;
  out.reserve(reps.size());
  for (auto& r : reps) out.push_back(std::move(r.table));
  return out;
}

namespace {

/// One randomized reduced-square fill; value order at every cell is drawn
/// from the rng. Restarts from scratch on dead ends, so it always returns.
CayleyTable random_reduced_square(int order, Rng& rng) {
  const int n = order;
  while (true) {
    std::vector<int> cells(static_cast<std::size_t>(n) * n, -1);
    std::vector<int> row_used(n, 0), col_used(n, 0);
    for (int j = 0; j < n; ++j) {
      cells[j] = j;
      row_used[0] |= 1 << j;
      col_used[j] |= 1 << j;
    }
    for (int i = 1; i < n; ++i) {
      cells[static_cast<std::size_t>(i) * n] = i;
      row_used[i] |= 1 << i;
      col_used[0] |= 1 << i;
    }

    struct Frame {
      std::vector<int> candidates;
      std::size_t next = 0;
    };
    std::vector<Frame> stack;
    stack.reserve(static_cast<std::size_t>(n - 1) * (n - 1));
    const int num_free = (n - 1) * (n - 1);
    auto cell_of = [n](int k) {
      return std::pair<int, int>{1 + k / (n - 1), 1 + k % (n - 1)};
    };

    int k = 0;
    long long backtracks = 0;
    bool restart = false;
    while (k < num_free) {
      auto [i, j] = cell_of(k);
      if (static_cast<int>(stack.size()) == k) {
        Frame f;
        const int used = row_used[i] | col_used[j];
        for (int v = 0; v < n; ++v)
          if (!((used >> v) & 1)) f.candidates.push_back(v);
        rng.shuffle(f.candidates);
        stack.push_back(std::move(f));
      }
      Frame& f = stack.back();
      if (f.next < f.candidates.size()) {
        const int v = f.candidates[f.next++];
        cells[static_cast<std::size_t>(i) * n + j] = v;
        row_used[i] |= 1 << v;
        col_used[j] |= 1 << v;
        ++k;
      } else {
        stack.pop_back();
        if (k == 0) {
          restart = true;
          break;
        }
        --k;
        auto [pi, pj] = cell_of(k);
        const int pv = cells[static_cast<std::size_t>(pi) * n + pj];
        row_used[pi] &= ~(1 << pv);
        col_used[pj] &= ~(1 << pv);
        cells[static_cast<std::size_t>(pi) * n + pj] = -1;
        // Guard against pathological thrashing at larger orders.
        if (++backtracks > 200000) {
          restart = true;
          break;
        }
      }
    }
    if (restart) continue;
    return CayleyTable::validated(n, std::move(cells));
  }
}

}  // namespace

std::vector<CayleyTable> sample_random_loops_raw(int order, int count,
                                                 std::uint64_t seed) {
  if (order < 2) throw EnumRange("sampling requires order >= 2");
  Rng rng(splitmix64(seed) ^ 0x6c6f6f7073616d70ULL);
  std::vector<CayleyTable> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(random_reduced_square(order, rng));
  return out;
}

std::vector<CayleyTable> sample_random_loops(int order, int count,
                                             std::uint64_t seed) {
  if (order < 2) throw EnumRange("sampling requires order >= 2");
  Rng rng(splitmix64(seed) ^ 0x6c6f6f7073616d70ULL);
  std::map<std::vector<int>, CanonicalLoop> found;
  // The class space may hold fewer than `count` members (order 5 has just
  // six); stop after a long streak of duplicates instead of spinning.
  const int max_consecutive_misses = 1000;
  int misses = 0;
  while (static_cast<int>(found.size()) < count && misses < max_consecutive_misses) {
    CayleyTable t = random_reduced_square(order, rng);
    CanonicalLoop c = canonical_loop_form(t);
    if (found.try_emplace(c.table.cells(), std::move(c)).second) {
      misses = 0;
    } else {
      ++misses;
    }
  }
  std::vector<CanonicalLoop> reps;
  reps.reserve(found.size());
  for (auto& [_, c] : found) reps.push_back(std::move(c));
  std::sort(reps.begin(), reps.end(), [](const CanonicalLoop& a, const CanonicalLoop& b) {
    return a.hash != b.hash ? a.hash < b.hash : a.table.cells() < b.table.cells();
  });
  std::vector<CayleyTable> out;
  out.reserve(reps.size());
  for (auto& r : reps) out.push_back(std::move(r.table));
  return out;
}

std::vector<CayleyTable> run_enumeration(const EnumConfig& cfg) {
  validate(cfg);
  if (cfg.mode == EnumMode::Exhaustive) {
    if (cfg.dedup == DedupMode::Isomorphism)
      return enumerate_loops_upto_iso(cfg.order);
    std::vector<CayleyTable> out;
    ReducedLatinEnumerator en(cfg.order);
    while (auto t = en.next()) out.push_back(std::move(*t));
    return out;
  }
  if (cfg.dedup == DedupMode::Isomorphism)
    return sample_random_loops(cfg.order, cfg.sample_count, cfg.seed);
  return sample_random_loops_raw(cfg.order, cfg.sample_count, cfg.seed);
}

}  // namespace hypercube
