// Copyright 2026 The editaudit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "editaudit/error.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/index.hpp"

namespace editaudit {

inline constexpr std::size_t kMaxSampleSize = 500;

struct SampleRequest {
  FilterSpec filter;
  std::optional<FocusBucket> bucket;  // absent = all four buckets
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::optional<std::string> cursor;
};

using BucketCounts = std::array<std::size_t, 4>;

struct QueryResult {
  std::vector<const EditRecord*> records;
  std::optional<std::string> next_cursor;
  BucketCounts counts{};              // per bucket, before sampling
  std::size_t filtered_total = 0;     // records matching the filter
  std::size_t censored_excluded = 0;  // matching records outside every bucket
};

namespace query_detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, bound) from a 64-bit engine, without modulo bias.
// std::uniform_int_distribution is implementation-defined, which would make
// samples differ between standard libraries.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t x = rng();
    const auto m = static_cast<unsigned __int128>(x) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

inline std::uint64_t request_check(const SampleRequest& req) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  mix(canonical_string(req.filter));
  mix("|");
  mix(req.bucket ? to_string(*req.bucket) : "*");
  mix("|");
  mix(std::to_string(req.seed));
  return h;
}

inline std::string encode_cursor(std::size_t offset, std::uint64_t check) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%zx.%016llx", offset, static_cast<unsigned long long>(check));
  return buf;
}

inline std::size_t decode_cursor(const std::string& token, std::uint64_t check) {
  std::size_t offset = 0;
  unsigned long long got = 0;
  int consumed = 0;
  if (std::sscanf(token.c_str(), "%zx.%16llx%n", &offset, &got, &consumed) != 2 ||
      static_cast<std::size_t>(consumed) != token.size() || token.size() < 18) {
    throw InvalidArgument("cursor: malformed token");
  }
  if (got != check) throw InvalidArgument("cursor: token does not belong to this filter/bucket/seed");
  return offset;
}

}  // namespace query_detail

/// Eligible positions (increasing) for a request: filter matches intersected
/// with the bucket, or with the union of all buckets when none is given.
inline std::vector<std::uint32_t> eligible_positions(const DatasetIndex& index, const Bitmap& filtered,
                                                     std::optional<FocusBucket> bucket) {
  if (bucket) return (filtered & index.bucket_members(*bucket)).positions();
  return (filtered & ~index.censored()).positions();
}

/// Uniform sample without replacement from the eligible set, paginated by
/// cursor. The order is a seeded Fisher-Yates shuffle of the eligible records
/// (in rev_id order), so results depend only on (dataset, filter, bucket, seed)
/// and pages never overlap.
inline QueryResult query(const DatasetIndex& index, const SampleRequest& req) {
  if (req.n > kMaxSampleSize) {
    throw InvalidArgument("n must be at most " + std::to_string(kMaxSampleSize));
  }
  validate(req.filter);
  const auto check = query_detail::request_check(req);
  const std::size_t offset = req.cursor ? query_detail::decode_cursor(*req.cursor, check) : 0;

  QueryResult out;
  const Bitmap filtered = index.evaluate(req.filter);
  out.filtered_total = filtered.count();
  for (auto b : kAllBuckets) out.counts[bucket_index(b)] = (filtered & index.bucket_members(b)).count();
  out.censored_excluded = (filtered & index.censored()).count();

  auto pool = eligible_positions(index, filtered, req.bucket);
  if (offset > pool.size()) throw InvalidArgument("cursor: offset beyond result set");
  const std::size_t stop = std::min(pool.size(), offset + req.n);
  std::mt19937_64 rng(query_detail::splitmix64(req.seed));
  for (std::size_t i = 0; i < stop; ++i) {
    const auto j = i + query_detail::bounded(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  const auto records = index.dataset().records();
  for (std::size_t i = offset; i < stop; ++i) out.records.push_back(&records[pool[i]]);
  if (stop < pool.size() && req.n > 0) out.next_cursor = query_detail::encode_cursor(stop, check);
  return out;
}

}  // namespace editaudit
