#include "repart/paging.hpp"

#include <map>
#include <sstream>

#include <boost/random/uniform_int_distribution.hpp>

#include "json.hpp"

namespace repart {

MarkingPaging::MarkingPaging(int num_pages, int cache_size, std::vector<int> initial_cache)
    : num_pages_(num_pages), cache_size_(cache_size) {
  if (cache_size < 0 || cache_size > num_pages) throw ConfigError("cache size out of range");
  for (int p : initial_cache) {
    if (p < 0 || p >= num_pages) throw InputError("unknown page " + std::to_string(p));
    cache_.insert(p);
  }
  if (static_cast<int>(cache_.size()) > cache_size) throw ConfigError("initial cache larger than cache size");
}

Rational MarkingPaging::serve(int page, const Rational& weight, std::mt19937_64& rng) {
  if (page < 0 || page >= num_pages_) throw InputError("unknown page " + std::to_string(page));
  if (weight > 1 || weight < 0) throw InputError("page weight outside [0, 1]");
  PagingEntry e{page, weight, false, Rational(0)};
  if (cache_.count(page)) {
    e.hit = true;
    marks_.insert(page);
  } else if (cache_size_ == 0) {
    e.cost = weight;
  } else {
    e.cost = weight + 1;
    if (static_cast<int>(cache_.size()) >= cache_size_) {
      std::vector<int> unmarked;
      for (int p : cache_)
        if (!marks_.count(p)) unmarked.push_back(p);
      if (unmarked.empty()) {
        marks_.clear();
        ++phases_;
        unmarked.assign(cache_.begin(), cache_.end());
      }
      boost::random::uniform_int_distribution<std::size_t> pick(0, unmarked.size() - 1);
      int victim = unmarked[pick(rng)];
      cache_.erase(victim);
    }
    cache_.insert(page);
    marks_.insert(page);
  }
  cost_ += e.cost;
  trace_.push_back(e);
  return e.cost;
}

Rational paging_opt(const std::vector<PageRequest>& trace, int num_pages, int cache_size, const Rational& r,
                    const std::optional<std::vector<int>>& initial_cache, std::size_t max_requests) {
  if (trace.size() > max_requests) throw ConfigError("paging trace too large for the exact oracle");
  if (num_pages > 20) throw ConfigError("too many pages for the exact oracle");
  using Mask = std::uint32_t;
  std::map<Mask, Rational> cur;
  if (initial_cache) {
    Mask m = 0;
    for (int p : *initial_cache) m |= Mask(1) << p;
    cur[m] = 0;
  } else {
    for (Mask m = 0; m < (Mask(1) << num_pages); ++m)
      if (__builtin_popcount(m) <= cache_size) cur[m] = 0;
  }
  for (const PageRequest& req : trace) {
    if (req.page < 0 || req.page >= num_pages) throw InputError("unknown page " + std::to_string(req.page));
    Mask bit = Mask(1) << req.page;
    Rational miss = req.weight / r;
    std::map<Mask, Rational> next;
    auto relax = [&](Mask m, const Rational& c) {
      auto it = next.find(m);
      if (it == next.end() || c < it->second) next[m] = c;
    };
    for (const auto& [m, c] : cur) {
      if (m & bit) {
        relax(m, c);
        continue;
      }
      relax(m, c + miss);
      Rational fetch = c + miss + 1;
      if (__builtin_popcount(m) < cache_size) relax(m | bit, fetch);
      if (cache_size == 0) continue;
      for (int q = 0; q < num_pages; ++q)
        if (m & (Mask(1) << q)) relax((m & ~(Mask(1) << q)) | bit, fetch);
    }
    cur.swap(next);
  }
  Rational best = -1;
  for (const auto& [m, c] : cur)
    if (best < 0 || c < best) best = c;
  return best;
}

std::string paging_dump(const std::vector<PagingEntry>& trace) {
  std::ostringstream out;
  for (const PagingEntry& e : trace) {
    nlohmann::json j{{"page", e.page}, {"weight", to_string(e.weight)}, {"hit", e.hit}, {"cost", to_string(e.cost)}};
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace repart
