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

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "editaudit/dataset.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/focus.hpp"

namespace editaudit {

/// Fixed-size bit set over record positions.
class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(std::size_t size, bool value = false)
      : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    trim();
  }

  std::size_t size() const { return size_; }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }

  Bitmap& operator&=(const Bitmap& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
    return *this;
  }
  Bitmap& operator|=(const Bitmap& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }
  Bitmap operator~() const {
    Bitmap out = *this;
    for (auto& w : out.words_) w = ~w;
    out.trim();
    return out;
  }
  friend Bitmap operator&(Bitmap a, const Bitmap& b) { return a &= b; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  /// Positions of set bits in increasing order.
  std::vector<std::uint32_t> positions() const {
    std::vector<std::uint32_t> out;
    out.reserve(count());
    for (std::size_t w = 0; w < words_.size(); ++w) {
      auto bits = words_[w];
      while (bits) {
        out.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
        bits &= bits - 1;
      }
    }
    return out;
  }

 private:
  void trim() {
    if (size_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Per-field indexes over an immutable dataset at a fixed threshold. Equality
/// fields use bitmaps; numeric range fields use sorted (value, position)
/// columns. evaluate() must agree with a linear scan of matches().
class DatasetIndex {
 public:
  DatasetIndex(const Dataset& dataset, double threshold)
      : dataset_(&dataset),
        threshold_(threshold),
        minor_(dataset.size()),
        registered_(dataset.size()),
        bot_(dataset.size()),
        censored_(dataset.size()) {
    const auto records = dataset.records();
    const std::size_t n = records.size();
    for (auto& b : buckets_) b = Bitmap(n);
    for (auto* col : {&page_size_, &abs_edit_size_, &edit_count_, &account_age_}) col->reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = records[i];
      const auto& e = r.edit;
      const auto pos = static_cast<std::uint32_t>(i);
      namespace_bits(e.page_namespace).set(i);
      for (const auto& c : e.page_categories) {
        auto [it, inserted] = categories_.try_emplace(c, n);
        it->second.set(i);
      }
      if (e.is_minor) minor_.set(i);
      if (e.editor_is_registered) registered_.set(i);
      if (e.editor_is_bot) bot_.set(i);
      page_size_.emplace_back(e.page_size_before, pos);
      abs_edit_size_.emplace_back(r.abs_edit_size(), pos);
      edit_count_.emplace_back(e.editor_edit_count_at_time, pos);
      account_age_.emplace_back(e.editor_account_age_at_time, pos);
      const auto bucket = classify_focus(r.damaging_prob, r.revert.reverted, threshold);
      if (r.revert.censored && !r.revert.reverted) {
        censored_.set(i);
      } else {
        buckets_[bucket_index(bucket)].set(i);
      }
    }
    for (auto* col : {&page_size_, &abs_edit_size_, &edit_count_, &account_age_}) std::sort(col->begin(), col->end());
  }

  const Dataset& dataset() const { return *dataset_; }
  double threshold() const { return threshold_; }

  /// Records matching `filter`, regardless of bucket.
  Bitmap evaluate(const FilterSpec& filter) const {
    const std::size_t n = dataset_->size();
    Bitmap result(n, true);
    if (filter.namespaces) {
      Bitmap any(n);
      for (int ns : *filter.namespaces) {
        if (auto it = namespaces_.find(ns); it != namespaces_.end()) any |= it->second;
      }
      result &= any;
    }
    if (filter.categories_any) {
      Bitmap any(n);
      for (const auto& c : *filter.categories_any) {
        if (auto it = categories_.find(c); it != categories_.end()) any |= it->second;
      }
      result &= any;
    }
    apply_tri(result, filter.minor, minor_);
    apply_tri(result, filter.registered, registered_);
    apply_tri(result, filter.bot, bot_);
    apply_range(result, page_size_, filter.page_size_min, filter.page_size_max);
    apply_range(result, abs_edit_size_, filter.abs_edit_size_min, filter.abs_edit_size_max);
    apply_range(result, edit_count_, filter.editor_edit_count_min, filter.editor_edit_count_max);
    apply_range(result, account_age_, filter.editor_account_age_min, filter.editor_account_age_max);
    return result;
  }

  /// Non-censored records in `bucket`. Censored records (unreverted, window
  /// not yet elapsed) belong to no bucket.
  const Bitmap& bucket_members(FocusBucket bucket) const { return buckets_[bucket_index(bucket)]; }
  const Bitmap& censored() const { return censored_; }

 private:
  using Column = std::vector<std::pair<std::int64_t, std::uint32_t>>;

  Bitmap& namespace_bits(int ns) {
    auto [it, inserted] = namespaces_.try_emplace(ns, dataset_->size());
    return it->second;
  }

  static void apply_tri(Bitmap& result, TriState t, const Bitmap& yes) {
    if (t == TriState::Yes) result &= yes;
    if (t == TriState::No) result &= ~yes;
  }

  void apply_range(Bitmap& result, const Column& column, const std::optional<std::int64_t>& lo,
                   const std::optional<std::int64_t>& hi) const {
    if (!lo && !hi) return;
    auto first = column.begin();
    auto last = column.end();
    if (lo) {
      first = std::lower_bound(column.begin(), column.end(), std::pair{*lo, std::uint32_t{0}});
    }
    if (hi) {
      last = std::upper_bound(column.begin(), column.end(), std::pair{*hi, UINT32_MAX});
    }
    Bitmap in_range(dataset_->size());
    for (auto it = first; it < last; ++it) in_range.set(it->second);
    result &= in_range;
  }

  const Dataset* dataset_;
  double threshold_;
  std::unordered_map<int, Bitmap> namespaces_;
  std::unordered_map<std::string, Bitmap> categories_;
  Bitmap minor_, registered_, bot_, censored_;
  Column page_size_, abs_edit_size_, edit_count_, account_age_;
  std::array<Bitmap, 4> buckets_;
};

}  // namespace editaudit
