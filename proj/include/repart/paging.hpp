#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "repart/params.hpp"

namespace repart {

struct PageRequest {
  int page = 0;
  Rational weight;
};

struct PagingEntry {
  int page = 0;
  Rational weight;
  bool hit = false;
  Rational cost;
};

// Weighted paging with randomized marking: a miss costs its weight, the page is always fetched
// (cost 1) and replaces a uniformly random unmarked page.
class MarkingPaging {
 public:
  MarkingPaging(int num_pages, int cache_size, std::vector<int> initial_cache);

  Rational serve(int page, const Rational& weight, std::mt19937_64& rng);

  int num_pages() const { return num_pages_; }
  int cache_size() const { return cache_size_; }
  bool cached(int page) const { return cache_.count(page) != 0; }
  bool marked(int page) const { return marks_.count(page) != 0; }
  const std::set<int>& cache() const { return cache_; }
  const Rational& cost() const { return cost_; }
  int phases() const { return phases_; }
  const std::vector<PagingEntry>& trace() const { return trace_; }

 private:
  int num_pages_;
  int cache_size_;
  std::set<int> cache_;
  std::set<int> marks_;
  Rational cost_{0};
  int phases_ = 1;
  std::vector<PagingEntry> trace_;
};

// Exact offline optimum: a miss costs w / r, fetching costs 1 more and may evict any page.
// Without an initial cache the algorithm starts from any cache of at most z pages.
Rational paging_opt(const std::vector<PageRequest>& trace, int num_pages, int cache_size, const Rational& r,
                    const std::optional<std::vector<int>>& initial_cache, std::size_t max_requests = 200000);

// JSON lines {page, weight, hit, cost}.
std::string paging_dump(const std::vector<PagingEntry>& trace);

}  // namespace repart
