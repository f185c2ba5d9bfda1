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

#include <fcntl.h>
#include <openssl/evp.h>
#include <openssl/rand.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/annotation.hpp"
#include "editaudit/error.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/timeutil.hpp"

namespace editaudit {

inline constexpr std::size_t kMaxNoteChars = 1000;
inline constexpr std::size_t kMaxDisplayNameChars = 64;
inline constexpr const char* kAnnotationsFile = "annotations.ndjson";
inline constexpr const char* kAuditorsFile = "auditors.ndjson";

namespace store_detail {

inline std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kHex[data[i] >> 4]);
    out.push_back(kHex[data[i] & 0xf]);
  }
  return out;
}

inline std::string random_hex(std::size_t bytes) {
  std::vector<unsigned char> buf(bytes);
  if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) throw Error("RAND_bytes failed");
  return to_hex(buf.data(), buf.size());
}

inline std::string sha256_hex(std::string_view s) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(s.data(), s.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  return to_hex(md, len);
}

inline std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

inline std::uint64_t parse_fingerprint_hex(const std::string& s) {
  if (s.size() != 16) throw ParseError("bad filter_fingerprint");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') {
      v |= static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v |= static_cast<std::uint64_t>(c - 'a' + 10);
    } else {
      throw ParseError("bad filter_fingerprint");
    }
  }
  return v;
}

// Append-only file handle. Each append is one write(2) of a complete line.
class AppendFile {
 public:
  AppendFile() = default;
  AppendFile(const std::filesystem::path& path, bool sync) : sync_(sync) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  }
  AppendFile(const AppendFile&) = delete;
  AppendFile& operator=(const AppendFile&) = delete;
  AppendFile(AppendFile&& o) noexcept : fd_(std::exchange(o.fd_, -1)), sync_(o.sync_) {}
  AppendFile& operator=(AppendFile&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
      sync_ = o.sync_;
    }
    return *this;
  }
  ~AppendFile() { close(); }

  void append(std::string_view line) {
    std::size_t done = 0;
    while (done < line.size()) {
      const auto n = ::write(fd_, line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError(std::string("append failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
    if (sync_ && ::fdatasync(fd_) != 0) throw IoError(std::string("fdatasync failed: ") + std::strerror(errno));
  }

 private:
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  int fd_ = -1;
  bool sync_ = true;
};

// Reads complete lines of an append-only log. A trailing fragment without a
// newline is an interrupted write: it is cut off the file and reported.
inline std::vector<std::string> read_log(const std::filesystem::path& path, std::size_t& torn_bytes,
                                         bool truncate_torn) {
  torn_bytes = 0;
  std::vector<std::string> lines;
  if (!std::filesystem::exists(path)) return lines;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  std::size_t start = 0;
  while (start < data.size()) {
    const auto nl = data.find('\n', start);
    if (nl == std::string::npos) {
      torn_bytes = data.size() - start;
      if (truncate_torn) std::filesystem::resize_file(path, start);
      break;
    }
    if (nl > start) lines.emplace_back(data.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace store_detail

inline nlohmann::json to_json(const Annotation& a) {
  nlohmann::json j;
  j["annotation_id"] = a.annotation_id;
  j["auditor_id"] = a.auditor_id;
  j["rev_id"] = a.rev_id;
  j["label"] = to_string(a.label);
  j["filter_fingerprint"] = fingerprint_hex(a.filter_fingerprint);
  j["bucket"] = to_string(a.bucket);
  j["note"] = a.note ? nlohmann::json(*a.note) : nlohmann::json(nullptr);
  j["created_at"] = a.created_at;
  j["superseded_by"] = a.superseded_by ? nlohmann::json(*a.superseded_by) : nlohmann::json(nullptr);
  return j;
}

inline Annotation annotation_from_json(const nlohmann::json& j) {
  Annotation a;
  try {
    a.annotation_id = j.at("annotation_id").get<AnnotationId>();
    a.auditor_id = j.at("auditor_id").get<std::string>();
    a.rev_id = j.at("rev_id").get<RevId>();
    const auto label = parse_label(j.at("label").get<std::string>());
    const auto bucket = parse_bucket(j.at("bucket").get<std::string>());
    if (!label || !bucket) throw ParseError("annotation: bad label or bucket");
    a.label = *label;
    a.bucket = *bucket;
    a.filter_fingerprint = store_detail::parse_fingerprint_hex(j.at("filter_fingerprint").get<std::string>());
    if (j.contains("note") && !j["note"].is_null()) a.note = j["note"].get<std::string>();
    a.created_at = j.at("created_at").get<UnixSeconds>();
    if (j.contains("superseded_by") && !j["superseded_by"].is_null()) {
      a.superseded_by = j["superseded_by"].get<AnnotationId>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("annotation: ") + e.what());
  }
  return a;
}

struct AnnotationHistory {
  std::vector<Annotation> annotations;  // live only, created_at order
  std::map<FocusBucket, std::map<Label, std::size_t>> counts;
};

inline nlohmann::json to_json(const AnnotationHistory& h) {
  nlohmann::json j;
  j["annotations"] = nlohmann::json::array();
  for (const auto& a : h.annotations) j["annotations"].push_back(to_json(a));
  j["counts"] = nlohmann::json::object();
  for (const auto& [bucket, by_label] : h.counts) {
    auto& entry = j["counts"][std::string(to_string(bucket))];
    for (const auto& [label, n] : by_label) entry[std::string(to_string(label))] = n;
  }
  return j;
}

struct NewAuditor {
  Auditor auditor;
  std::string token;  // shown once; only its SHA-256 is persisted
};

struct RecordResult {
  Annotation annotation;
  std::optional<AnnotationId> superseded;
};

/// Auditors and annotations persisted as two append-only NDJSON logs, with an
/// in-memory index rebuilt by replay on open.
///
/// Each annotation is one log line. Supersession is not written back to the
/// older line: on replay, a later annotation by the same auditor on the same
/// revision supersedes the earlier one. The live set is therefore a pure
/// function of the log and a correction is atomic with its append.
class AnnotationStore {
 public:
  struct Options {
    bool sync = true;
    std::function<UnixSeconds()> clock = now_unix;
    // Returns false for revisions outside the dataset. Unset accepts all.
    std::function<bool(RevId)> rev_exists;
    // Replay only: never touches the files. Writes throw.
    bool read_only = false;
  };

  explicit AnnotationStore(std::filesystem::path dir) : AnnotationStore(std::move(dir), Options{}) {}
  AnnotationStore(std::filesystem::path dir, Options options) : dir_(std::move(dir)), options_(std::move(options)) {
    if (options_.read_only) {
      if (!std::filesystem::is_directory(dir_)) throw IoError("no annotation store at " + dir_.string());
      replay();
      return;
    }
    std::filesystem::create_directories(dir_);
    replay();
    auditors_log_ = store_detail::AppendFile(dir_ / kAuditorsFile, options_.sync);
    annotations_log_ = store_detail::AppendFile(dir_ / kAnnotationsFile, options_.sync);
  }

  const std::filesystem::path& directory() const { return dir_; }
  std::size_t torn_bytes_recovered() const { return torn_bytes_; }

  NewAuditor create_auditor(std::string_view display_name) {
    if (display_name.empty() || store_detail::utf8_length(display_name) > kMaxDisplayNameChars) {
      throw InvalidArgument("display_name must be 1-64 characters");
    }
    if (options_.read_only) throw Error("store opened read-only");
    std::unique_lock lock(mutex_);
    NewAuditor out;
    do {
      out.auditor.auditor_id = "aud_" + store_detail::random_hex(8);
    } while (auditors_.contains(out.auditor.auditor_id));
    out.auditor.display_name = std::string(display_name);
    out.auditor.created_at = options_.clock();
    out.token = store_detail::random_hex(16);
    const auto token_hash = store_detail::sha256_hex(out.token);

    nlohmann::json j;
    j["auditor_id"] = out.auditor.auditor_id;
    j["display_name"] = out.auditor.display_name;
    j["created_at"] = out.auditor.created_at;
    j["token_sha256"] = token_hash;
    auditors_log_.append(j.dump() + "\n");
    auditors_.emplace(out.auditor.auditor_id, out.auditor);
    token_to_auditor_.emplace(token_hash, out.auditor.auditor_id);
    return out;
  }

  /// Auditor id for a bearer token, or nullopt.
  std::optional<std::string> authenticate(std::string_view token) const {
    const auto hash = store_detail::sha256_hex(token);
    std::shared_lock lock(mutex_);
    auto it = token_to_auditor_.find(hash);
    if (it == token_to_auditor_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<Auditor> auditor(const std::string& auditor_id) const {
    std::shared_lock lock(mutex_);
    auto it = auditors_.find(auditor_id);
    if (it == auditors_.end()) return std::nullopt;
    return it->second;
  }

  /// Appends a label. A previous live label by the same auditor on the same
  /// revision becomes superseded by the new one.
  RecordResult record_annotation(const std::string& auditor_id, RevId rev_id, Label label, FocusBucket bucket,
                                 std::uint64_t filter_fingerprint, std::optional<std::string> note = std::nullopt) {
    if (note && store_detail::utf8_length(*note) > kMaxNoteChars) {
      throw InvalidArgument("note exceeds 1000 characters");
    }
    if (options_.rev_exists && !options_.rev_exists(rev_id)) {
      throw NotFound("unknown rev_id " + std::to_string(rev_id));
    }
    if (options_.read_only) throw Error("store opened read-only");
    std::unique_lock lock(mutex_);
    if (!auditors_.contains(auditor_id)) throw AuthError("unknown auditor");
    Annotation a;
    a.annotation_id = annotations_.size() + 1;
    a.auditor_id = auditor_id;
    a.rev_id = rev_id;
    a.label = label;
    a.bucket = bucket;
    a.filter_fingerprint = filter_fingerprint;
    a.note = std::move(note);
    a.created_at = options_.clock();
    annotations_log_.append(to_json(a).dump() + "\n");
    RecordResult out{a, apply(a)};
    return out;
  }

  AnnotationHistory annotation_history(const std::string& auditor_id) const {
    std::shared_lock lock(mutex_);
    if (!auditors_.contains(auditor_id)) throw AuthError("unknown auditor");
    AnnotationHistory h;
    h.annotations = live_locked(auditor_id);
    std::stable_sort(h.annotations.begin(), h.annotations.end(), [](const Annotation& x, const Annotation& y) {
      return x.created_at != y.created_at ? x.created_at < y.created_at : x.annotation_id < y.annotation_id;
    });
    for (const auto& a : h.annotations) ++h.counts[a.bucket][a.label];
    return h;
  }

  /// Live annotations of one auditor, or of everyone when `auditor_id` is
  /// absent, in annotation_id order.
  std::vector<Annotation> live_annotations(const std::optional<std::string>& auditor_id = std::nullopt) const {
    std::shared_lock lock(mutex_);
    return live_locked(auditor_id);
  }

  std::optional<Annotation> live_annotation(const std::string& auditor_id, RevId rev_id) const {
    std::shared_lock lock(mutex_);
    auto it = live_.find({auditor_id, rev_id});
    if (it == live_.end()) return std::nullopt;
    return annotations_[it->second - 1];
  }

  /// Every annotation ever written (including superseded), by id.
  std::vector<Annotation> all_annotations() const {
    std::shared_lock lock(mutex_);
    return annotations_;
  }

 private:
  std::vector<Annotation> live_locked(const std::optional<std::string>& auditor_id) const {
    std::vector<Annotation> out;
    for (const auto& a : annotations_) {
      if (a.live() && (!auditor_id || a.auditor_id == *auditor_id)) out.push_back(a);
    }
    return out;
  }

  // Inserts into the index and returns the id it superseded, if any.
  std::optional<AnnotationId> apply(const Annotation& a) {
    annotations_.push_back(a);
    annotations_.back().superseded_by.reset();
    std::optional<AnnotationId> superseded;
    auto [it, inserted] = live_.try_emplace({a.auditor_id, a.rev_id}, a.annotation_id);
    if (!inserted) {
      superseded = it->second;
      annotations_[it->second - 1].superseded_by = a.annotation_id;
      it->second = a.annotation_id;
    }
    return superseded;
  }

  void replay() {
    std::size_t torn = 0;
    for (const auto& line : store_detail::read_log(dir_ / kAuditorsFile, torn, !options_.read_only)) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
        Auditor au{j.at("auditor_id").get<std::string>(), j.at("display_name").get<std::string>(),
                   j.at("created_at").get<UnixSeconds>()};
        token_to_auditor_.emplace(j.at("token_sha256").get<std::string>(), au.auditor_id);
        auditors_.emplace(au.auditor_id, std::move(au));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("auditors log corrupt: ") + e.what());
      }
    }
    torn_bytes_ = torn;
    for (const auto& line : store_detail::read_log(dir_ / kAnnotationsFile, torn, !options_.read_only)) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("annotations log corrupt: ") + e.what());
      }
      auto a = annotation_from_json(j);
      if (a.annotation_id != annotations_.size() + 1) {
        throw ParseError("annotations log corrupt: non-sequential annotation_id " + std::to_string(a.annotation_id));
      }
      apply(a);
    }
    torn_bytes_ += torn;
  }

  struct PairHash {
    std::size_t operator()(const std::pair<std::string, RevId>& p) const {
      return std::hash<std::string>{}(p.first) ^ (std::hash<RevId>{}(p.second) * 0x9e3779b97f4a7c15ULL);
    }
  };

  std::filesystem::path dir_;
  Options options_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Auditor> auditors_;
  std::unordered_map<std::string, std::string> token_to_auditor_;
  std::vector<Annotation> annotations_;
  std::unordered_map<std::pair<std::string, RevId>, AnnotationId, PairHash> live_;
  store_detail::AppendFile auditors_log_;
  store_detail::AppendFile annotations_log_;
  std::size_t torn_bytes_ = 0;
};

}  // namespace editaudit
