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

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/diff.hpp"
#include "editaudit/edit.hpp"
#include "editaudit/error.hpp"

namespace editaudit {

inline constexpr std::size_t kMaxExcerptBytes = 4096;
inline constexpr std::string_view kTruncationMarker = "\n[... truncated]";

enum class DiffSource { Fixture, Upstream, Cache };

constexpr std::string_view to_string(DiffSource s) {
  switch (s) {
    case DiffSource::Fixture:
      return "fixture";
    case DiffSource::Upstream:
      return "upstream";
    case DiffSource::Cache:
      return "cache";
  }
  return "";
}

struct DiffDoc {
  RevId rev_id = 0;
  std::string before_excerpt;
  std::string after_excerpt;
  std::vector<DiffOp> diff_ops;
  DiffSource source = DiffSource::Fixture;
};

/// Cuts `text` to at most 4 KB on a UTF-8 boundary, ending in a marker.
inline std::string excerpt(std::string_view text) {
  if (text.size() <= kMaxExcerptBytes) return std::string(text);
  std::size_t keep = kMaxExcerptBytes - kTruncationMarker.size();
  while (keep > 0 && (static_cast<unsigned char>(text[keep]) & 0xC0) == 0x80) --keep;
  std::string out(text.substr(0, keep));
  out.append(kTruncationMarker);
  return out;
}

/// Builds a DiffDoc from full revision texts: excerpts first, then the diff of
/// the excerpts, so applying diff_ops to before_excerpt yields after_excerpt.
inline DiffDoc make_diff_doc(RevId rev_id, std::string_view before, std::string_view after, DiffSource source) {
  DiffDoc doc;
  doc.rev_id = rev_id;
  doc.before_excerpt = excerpt(before);
  doc.after_excerpt = excerpt(after);
  doc.diff_ops = compute_diff(doc.before_excerpt, doc.after_excerpt);
  doc.source = source;
  return doc;
}

inline nlohmann::json to_json(const DiffDoc& d) {
  nlohmann::json j;
  j["rev_id"] = d.rev_id;
  j["before_excerpt"] = d.before_excerpt;
  j["after_excerpt"] = d.after_excerpt;
  j["diff_ops"] = nlohmann::json::array();
  for (const auto& op : d.diff_ops) j["diff_ops"].push_back({{"op", to_string(op.op)}, {"text", op.text}});
  j["source"] = to_string(d.source);
  return j;
}

inline DiffDoc diff_doc_from_json(const nlohmann::json& j) {
  try {
    DiffDoc d;
    d.rev_id = j.at("rev_id").get<RevId>();
    d.before_excerpt = j.at("before_excerpt").get<std::string>();
    d.after_excerpt = j.at("after_excerpt").get<std::string>();
    for (const auto& op : j.at("diff_ops")) {
      const auto kind = op.at("op").get<std::string>();
      DiffOp o;
      o.text = op.at("text").get<std::string>();
      if (kind == "equal") {
        o.op = DiffOpKind::Equal;
      } else if (kind == "insert") {
        o.op = DiffOpKind::Insert;
      } else if (kind == "delete") {
        o.op = DiffOpKind::Delete;
      } else {
        throw ParseError("diff: unknown op " + kind);
      }
      d.diff_ops.push_back(std::move(o));
    }
    const auto source = j.at("source").get<std::string>();
    d.source = source == "fixture" ? DiffSource::Fixture : source == "cache" ? DiffSource::Cache : DiffSource::Upstream;
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("diff document: ") + e.what());
  }
}

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Raised by a Transport when no HTTP response was obtained (connect failure,
/// timeout). Treated like a 5xx.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Minimal GET-only transport so tests can stub the upstream wiki.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& path_and_query) = 0;
};

/// Revision texts shipped with a fixture corpus: one JSON object per line,
/// {"rev_id", "before", "after"}.
class FixtureDiffStore {
 public:
  FixtureDiffStore() = default;
  explicit FixtureDiffStore(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fixture diffs " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        add(j.at("rev_id").get<RevId>(), j.at("before").get<std::string>(), j.at("after").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fixture diffs: ") + e.what());
      }
    }
  }

  void add(RevId rev_id, std::string before, std::string after) {
    texts_[rev_id] = {std::move(before), std::move(after)};
  }

  const std::pair<std::string, std::string>* find(RevId rev_id) const {
    auto it = texts_.find(rev_id);
    return it == texts_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<RevId, std::pair<std::string, std::string>> texts_;
};

/// Fetches before/after content for a revision, either from a local fixture
/// store (no network at all) or from an upstream wiki Action API, with an
/// on-disk cache and per-revision single-flight.
class WikiClient {
 public:
  struct Options {
    // Parent revision of a known revision; nullopt for revisions unknown to
    // the dataset. A parent of 0 means page creation.
    std::function<std::optional<RevId>(RevId)> parent_of;
    std::shared_ptr<const FixtureDiffStore> fixtures;  // fixture mode when set
    std::shared_ptr<Transport> transport;              // live mode
    std::string api_path = "/w/api.php";
    std::optional<std::filesystem::path> cache_dir;
    std::vector<std::chrono::milliseconds> retry_backoff = {std::chrono::milliseconds(250),
                                                            std::chrono::milliseconds(1000)};
    std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  };

  explicit WikiClient(Options options) : options_(std::move(options)) {
    if (options_.cache_dir) std::filesystem::create_directories(*options_.cache_dir);
  }

  bool live() const { return !options_.fixtures && options_.transport; }

  DiffDoc get_diff(RevId rev_id) {
    const auto parent = options_.parent_of ? options_.parent_of(rev_id) : std::optional<RevId>{};
    if (!parent) throw NotFound("unknown rev_id " + std::to_string(rev_id));

    if (options_.fixtures) {
      const auto* texts = options_.fixtures->find(rev_id);
      if (!texts) throw NotFound("no stored diff for rev_id " + std::to_string(rev_id));
      return make_diff_doc(rev_id, texts->first, texts->second, DiffSource::Fixture);
    }
    if (!options_.transport) throw Unavailable("no upstream wiki configured");

    std::shared_future<DiffDoc> pending;
    std::promise<DiffDoc> promise;
    bool leader = false;
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(rev_id); it != cache_.end()) return cached(it->second);
      if (auto from_disk = read_cache_file(rev_id)) {
        cache_.emplace(rev_id, *from_disk);
        return cached(*from_disk);
      }
      if (auto it = inflight_.find(rev_id); it != inflight_.end()) {
        pending = it->second;
      } else {
        pending = promise.get_future().share();
        inflight_.emplace(rev_id, pending);
        leader = true;
      }
    }
    if (!leader) return pending.get();

    try {
      DiffDoc doc = fetch(rev_id, *parent);
      {
        std::lock_guard lock(mutex_);
        cache_.emplace(rev_id, doc);
        write_cache_file(doc);
        inflight_.erase(rev_id);
      }
      promise.set_value(doc);
      return doc;
    } catch (...) {
      {
        std::lock_guard lock(mutex_);
        inflight_.erase(rev_id);
      }
      promise.set_exception(std::current_exception());
      throw;
    }
  }

 private:
  static DiffDoc cached(DiffDoc doc) {
    doc.source = DiffSource::Cache;
    return doc;
  }

  std::filesystem::path cache_path(RevId rev_id) const {
    return *options_.cache_dir / (std::to_string(rev_id) + ".json");
  }

  std::optional<DiffDoc> read_cache_file(RevId rev_id) const {
    if (!options_.cache_dir) return std::nullopt;
    std::ifstream in(cache_path(rev_id));
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      return diff_doc_from_json(nlohmann::json::parse(buf.str()));
    } catch (const std::exception&) {
      return std::nullopt;  // unreadable cache entries are refetched
    }
  }

  void write_cache_file(const DiffDoc& doc) const {
    if (!options_.cache_dir) return;
    const auto path = cache_path(doc.rev_id);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << to_json(doc).dump();
      if (!out) return;
    }
    std::filesystem::rename(tmp, path);
  }

  std::string revisions_query(RevId rev_id, RevId parent) const {
    std::string ids = parent > 0 ? std::to_string(parent) + "%7C" + std::to_string(rev_id) : std::to_string(rev_id);
    return options_.api_path + "?action=query&prop=revisions&revids=" + ids +
           "&rvprop=ids%7Ccontent&rvslots=main&format=json&formatversion=2";
  }

  HttpResponse get_with_retry(const std::string& url) {
    const std::size_t attempts = options_.retry_backoff.size() + 1;
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) options_.sleep(options_.retry_backoff[attempt - 1]);
      try {
        auto res = options_.transport->get(url);
        if (res.status < 500) return res;
      } catch (const TransportError&) {
      }
    }
    throw Unavailable("upstream wiki unavailable after " + std::to_string(attempts) + " attempts");
  }

  DiffDoc fetch(RevId rev_id, RevId parent) {
    const auto res = get_with_retry(revisions_query(rev_id, parent));
    if (res.status >= 400) throw NotFound("upstream returned " + std::to_string(res.status));
    if (res.status < 200 || res.status >= 300) throw Unavailable("unexpected upstream status");
    std::map<RevId, std::string> contents;
    try {
      const auto j = nlohmann::json::parse(res.body);
      if (j.contains("error")) throw NotFound("upstream error: " + j["error"].value("code", std::string("unknown")));
      const auto& query = j.at("query");
      if (query.contains("badrevids")) throw NotFound("upstream reports missing revision");
      for (const auto& page : query.at("pages")) {
        if (!page.contains("revisions")) continue;
        for (const auto& rev : page.at("revisions")) {
          const auto& main = rev.at("slots").at("main");
          contents[rev.at("revid").get<RevId>()] = main.value("content", std::string());
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Unavailable(std::string("malformed upstream response: ") + e.what());
    }
    auto after = contents.find(rev_id);
    if (after == contents.end()) throw NotFound("upstream has no content for rev_id " + std::to_string(rev_id));
    std::string before;
    if (parent > 0) {
      auto it = contents.find(parent);
      if (it == contents.end()) throw NotFound("upstream has no content for parent " + std::to_string(parent));
      before = it->second;
    }
    return make_diff_doc(rev_id, before, after->second, DiffSource::Upstream);
  }

  Options options_;
  std::mutex mutex_;
  std::unordered_map<RevId, DiffDoc> cache_;
  std::unordered_map<RevId, std::shared_future<DiffDoc>> inflight_;
};

}  // namespace editaudit
