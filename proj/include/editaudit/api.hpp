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

#include <charconv>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "editaudit/config.hpp"
#include "editaudit/dataset.hpp"
#include "editaudit/error.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/index.hpp"
#include "editaudit/query.hpp"
#include "editaudit/report.hpp"
#include "editaudit/store.hpp"
#include "editaudit/summary.hpp"
#include "editaudit/wiki_client.hpp"

namespace editaudit {

/// Transport-neutral HTTP request, so the API can be exercised without sockets.
struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::multimap<std::string, std::string> params;
  std::string authorization;  // raw Authorization header
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Sliding one-second window per key.
class RateLimiter {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  RateLimiter(int per_second, Clock clock) : limit_(per_second), clock_(std::move(clock)) {}

  bool admit(const std::string& key) {
    if (limit_ <= 0) return true;
    const auto now = clock_();
    std::lock_guard lock(mutex_);
    auto& window = hits_[key];
    while (!window.empty() && now - window.front() >= std::chrono::seconds(1)) window.pop_front();
    if (window.size() >= static_cast<std::size_t>(limit_)) return false;
    window.push_back(now);
    return true;
  }

 private:
  int limit_;
  Clock clock_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::deque<std::chrono::steady_clock::time_point>> hits_;
};

namespace api_detail {

inline std::string base64url_decode(std::string_view in) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '-' || c == '+') return 62;
    if (c == '_' || c == '/') return 63;
    return -1;
  };
  std::string out;
  std::uint32_t buf = 0;
  int bits = 0;
  for (char c : in) {
    if (c == '=') break;
    const int v = value(c);
    if (v < 0) throw InvalidArgument("filter: not JSON and not base64url");
    buf = (buf << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buf >> bits) & 0xff));
    }
  }
  return out;
}

inline nlohmann::json error_json(int status, const std::string& message) {
  return {{"error", message}, {"status", status}};
}

}  // namespace api_detail

/// A filter travels either as JSON text (percent-encoded in the URL) or as
/// base64url-encoded JSON.
inline FilterSpec decode_filter_param(std::string_view value) {
  if (value.empty()) return FilterSpec{};
  if (value.front() == '{') return parse_filter(value);
  return parse_filter(api_detail::base64url_decode(value));
}

inline nlohmann::json edit_json(const EditRecord& r, double threshold, const std::optional<Annotation>& label) {
  const auto& e = r.edit;
  nlohmann::json j;
  j["rev_id"] = e.rev_id;
  j["parent_rev_id"] = e.parent_rev_id;
  j["page_id"] = e.page_id;
  j["page_namespace"] = e.page_namespace;
  j["page_title"] = e.page_title;
  j["page_categories"] = e.page_categories;
  j["page_size_before"] = e.page_size_before;
  j["byte_delta"] = e.byte_delta;
  j["is_minor"] = e.is_minor;
  j["timestamp"] = format_iso8601(e.timestamp);
  j["editor_name"] = e.editor_name;
  j["editor_is_registered"] = e.editor_is_registered;
  j["editor_is_bot"] = e.editor_is_bot;
  j["editor_edit_count_at_time"] = e.editor_edit_count_at_time;
  j["editor_account_age_at_time"] = e.editor_account_age_at_time;
  j["content_hash"] = e.content_hash;
  j["damaging_prob"] = r.damaging_prob;
  j["model_version"] = r.model_version;
  j["reverted"] = r.revert.reverted;
  j["reverting_rev_id"] = r.revert.reverting_rev_id ? nlohmann::json(*r.revert.reverting_rev_id) : nlohmann::json();
  j["seconds_to_revert"] =
      r.revert.seconds_to_revert ? nlohmann::json(*r.revert.seconds_to_revert) : nlohmann::json();
  j["is_self_revert"] = r.revert.is_self_revert;
  j["censored"] = r.revert.censored;
  j["bucket"] = r.revert.censored ? nlohmann::json()
                                  : nlohmann::json(to_string(classify_focus(r.damaging_prob, r.revert.reverted, threshold)));
  j["label"] = label ? nlohmann::json(to_string(label->label)) : nlohmann::json();
  j["annotation_id"] = label ? nlohmann::json(label->annotation_id) : nlohmann::json();
  return j;
}

inline nlohmann::json counts_json(const BucketCounts& counts) {
  nlohmann::json j = nlohmann::json::object();
  for (auto b : kAllBuckets) j[std::string(to_string(b))] = counts[bucket_index(b)];
  return j;
}

/// The audit HTTP API: Filter (edits query), Focus (bucket counts), Inspect
/// (diffs, annotations) and Discuss (history, summary, compare).
class AuditService {
 public:
  using SteadyClock = std::function<std::chrono::steady_clock::time_point()>;

  AuditService(ServiceConfig config, std::shared_ptr<const Dataset> dataset, std::shared_ptr<AnnotationStore> store,
               std::shared_ptr<WikiClient> wiki, SteadyClock clock = std::chrono::steady_clock::now)
      : config_(std::move(config)),
        dataset_(std::move(dataset)),
        index_(*dataset_, config_.threshold),
        store_(std::move(store)),
        wiki_(std::move(wiki)),
        limiter_(config_.write_rate_limit, std::move(clock)) {}

  const ServiceConfig& config() const { return config_; }
  const Dataset& dataset() const { return *dataset_; }
  AnnotationStore& store() { return *store_; }

  ApiResponse handle(const ApiRequest& req) {
    try {
      return route(req);
    } catch (const InvalidArgument& e) {
      return error(400, e.what());
    } catch (const AuthError& e) {
      return error(401, e.what());
    } catch (const NotFound& e) {
      return error(404, e.what());
    } catch (const InsufficientData& e) {
      return error(409, e.what());
    } catch (const RateLimited& e) {
      return error(429, e.what());
    } catch (const Unavailable& e) {
      return error(503, e.what());
    } catch (const std::exception& e) {
      return error(500, e.what());
    }
  }

 private:
  static ApiResponse error(int status, const std::string& message) {
    return {status, api_detail::error_json(status, message).dump()};
  }
  static ApiResponse ok(const nlohmann::json& j, int status = 200) { return {status, j.dump()}; }

  static void allow_params(const ApiRequest& req, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : req.params) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw InvalidArgument("unknown query parameter '" + key + "'");
      }
      if (req.params.count(key) > 1) throw InvalidArgument("repeated query parameter '" + key + "'");
    }
  }

  static std::optional<std::string> param(const ApiRequest& req, const std::string& key) {
    auto it = req.params.find(key);
    if (it == req.params.end()) return std::nullopt;
    return it->second;
  }

  template <typename Int>
  static Int int_param(const ApiRequest& req, const std::string& key, Int fallback) {
    const auto v = param(req, key);
    if (!v) return fallback;
    Int out{};
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) throw InvalidArgument(key + " must be a non-negative integer");
    return out;
  }

  double alpha_param(const ApiRequest& req) const {
    const auto v = param(req, "alpha");
    if (!v) return config_.alpha_default;
    double out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size() || !(out > 0.0 && out < 1.0)) {
      throw InvalidArgument("alpha must be a number in (0, 1)");
    }
    return out;
  }

  static FocusBucket bucket_param(const ApiRequest& req) {
    const auto v = param(req, "bucket");
    if (!v) throw InvalidArgument("bucket is required");
    const auto b = parse_bucket(*v);
    if (!b) throw InvalidArgument("unknown bucket '" + *v + "'");
    return *b;
  }

  static FilterSpec filter_param(const ApiRequest& req, const std::string& key) {
    const auto v = param(req, key);
    return v ? decode_filter_param(*v) : FilterSpec{};
  }

  std::string authenticate(const ApiRequest& req) const {
    constexpr std::string_view kPrefix = "Bearer ";
    if (req.authorization.rfind(kPrefix, 0) != 0) throw AuthError("missing bearer token");
    auto id = store_->authenticate(std::string_view(req.authorization).substr(kPrefix.size()));
    if (!id) throw AuthError("invalid token");
    return *id;
  }

  ApiResponse route(const ApiRequest& req) {
    const std::string& path = req.path;
    if (path == "/api/auditors") {
      if (req.method != "POST") return error(405, "method not allowed");
      allow_params(req, {});
      return create_auditor(req);
    }
    if (path.rfind("/api/", 0) != 0) return error(404, "no such endpoint");

    const bool is_annotations = path == "/api/annotations";
    const std::string_view expected_method = is_annotations ? "POST" : "GET";
    const bool known = is_annotations || path == "/api/edits" || path == "/api/summary" || path == "/api/compare" ||
                       path == "/api/history" || path == "/api/meta" || path.rfind("/api/diff/", 0) == 0;
    if (!known) return error(404, "no such endpoint");
    if (req.method != expected_method) return error(405, "method not allowed");

    const auto auditor_id = authenticate(req);
    if (is_annotations) return post_annotation(req, auditor_id);
    if (path == "/api/edits") return get_edits(req, auditor_id);
    if (path == "/api/summary") return get_summary(req, auditor_id);
    if (path == "/api/compare") return get_compare(req, auditor_id);
    if (path == "/api/history") {
      allow_params(req, {});
      return ok(to_json(store_->annotation_history(auditor_id)));
    }
    if (path == "/api/meta") {
      allow_params(req, {});
      return get_meta();
    }
    allow_params(req, {});
    return get_diff(path.substr(std::string_view("/api/diff/").size()));
  }

  ApiResponse create_auditor(const ApiRequest& req) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("body must be JSON");
    }
    if (!body.is_object() || !body.contains("display_name") || !body["display_name"].is_string()) {
      throw InvalidArgument("display_name is required");
    }
    for (const auto& [key, v] : body.items()) {
      if (key != "display_name") throw InvalidArgument("unknown field '" + key + "'");
    }
    auto created = store_->create_auditor(body["display_name"].get<std::string>());
    return ok({{"auditor_id", created.auditor.auditor_id},
               {"display_name", created.auditor.display_name},
               {"created_at", created.auditor.created_at},
               {"token", created.token}},
              201);
  }

  ApiResponse get_edits(const ApiRequest& req, const std::string& auditor_id) {
    allow_params(req, {"filter", "bucket", "n", "seed", "cursor"});
    SampleRequest sample;
    sample.filter = filter_param(req, "filter");
    if (const auto b = param(req, "bucket")) {
      sample.bucket = parse_bucket(*b);
      if (!sample.bucket) throw InvalidArgument("unknown bucket '" + *b + "'");
    }
    sample.n = int_param<std::size_t>(req, "n", 10);
    sample.seed = int_param<std::uint64_t>(req, "seed", 0);
    sample.cursor = param(req, "cursor");
    const auto result = query(index_, sample);

    nlohmann::json j;
    j["edits"] = nlohmann::json::array();
    for (const auto* r : result.records) {
      j["edits"].push_back(edit_json(*r, config_.threshold, store_->live_annotation(auditor_id, r->rev_id())));
    }
    j["counts"] = counts_json(result.counts);
    j["filtered_total"] = result.filtered_total;
    j["censored_excluded"] = result.censored_excluded;
    j["next_cursor"] = result.next_cursor ? nlohmann::json(*result.next_cursor) : nlohmann::json();
    j["threshold"] = config_.threshold;
    return ok(j);
  }

  ApiResponse post_annotation(const ApiRequest& req, const std::string& auditor_id) {
    if (!limiter_.admit(auditor_id)) throw RateLimited("write rate limit exceeded");
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("body must be JSON");
    }
    if (!body.is_object()) throw InvalidArgument("body must be a JSON object");
    static const std::set<std::string> kFields = {"rev_id", "label", "bucket", "filter", "note"};
    for (const auto& [key, v] : body.items()) {
      if (!kFields.contains(key)) throw InvalidArgument("unknown field '" + key + "'");
    }
    if (!body.contains("rev_id") || !body["rev_id"].is_number_integer()) throw InvalidArgument("rev_id is required");
    if (!body.contains("label") || !body["label"].is_string()) throw InvalidArgument("label is required");
    const auto rev_id = body["rev_id"].get<RevId>();
    const auto label = parse_label(body["label"].get<std::string>());
    if (!label) throw InvalidArgument("label must be damaging, not_damaging or skip");

    const auto* record = dataset_->find(rev_id);
    if (!record) throw NotFound("unknown rev_id " + std::to_string(rev_id));
    const auto actual = classify_focus(record->damaging_prob, record->revert.reverted, config_.threshold);
    FocusBucket bucket = actual;
    if (body.contains("bucket") && !body["bucket"].is_null()) {
      if (!body["bucket"].is_string()) throw InvalidArgument("bucket must be a string");
      const auto b = parse_bucket(body["bucket"].get<std::string>());
      if (!b) throw InvalidArgument("unknown bucket");
      if (*b != actual || record->revert.censored) {
        throw InvalidArgument("rev_id is not in bucket " + std::string(to_string(*b)));
      }
      bucket = *b;
    }
    FilterSpec filter;
    if (body.contains("filter") && !body["filter"].is_null()) {
      filter = body["filter"].is_string() ? decode_filter_param(body["filter"].get<std::string>())
                                          : filter_from_json(body["filter"]);
    }
    std::optional<std::string> note;
    if (body.contains("note") && !body["note"].is_null()) {
      if (!body["note"].is_string()) throw InvalidArgument("note must be a string");
      note = body["note"].get<std::string>();
    }
    const auto result = store_->record_annotation(auditor_id, rev_id, *label, bucket, fingerprint(filter), note);
    auto j = to_json(result.annotation);
    j["supersedes"] = result.superseded ? nlohmann::json(*result.superseded) : nlohmann::json();
    return ok(j, 201);
  }

  ApiResponse get_summary(const ApiRequest& req, const std::string& auditor_id) {
    allow_params(req, {"filter", "bucket", "alpha"});
    const auto filter = filter_param(req, "filter");
    const auto bucket = bucket_param(req);
    const auto alpha = alpha_param(req);
    const auto live = store_->live_annotations(auditor_id);
    return ok(to_json(summarize_slice(*dataset_, live, filter, bucket, alpha)));
  }

  ApiResponse get_compare(const ApiRequest& req, const std::string& auditor_id) {
    allow_params(req, {"filter_a", "filter_b", "bucket", "alpha"});
    const auto filter_a = filter_param(req, "filter_a");
    const auto filter_b = filter_param(req, "filter_b");
    const auto bucket = bucket_param(req);
    const auto alpha = alpha_param(req);
    const auto live = store_->live_annotations(auditor_id);
    return ok(to_json(compare_slices(*dataset_, live, filter_a, filter_b, bucket, alpha)));
  }

  ApiResponse get_diff(const std::string& id_text) {
    RevId rev_id = 0;
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), rev_id);
    if (ec != std::errc{} || ptr != id_text.data() + id_text.size() || rev_id <= 0) {
      throw NotFound("no such revision");
    }
    if (!dataset_->find(rev_id)) throw NotFound("unknown rev_id " + id_text);
    if (!wiki_) throw Unavailable("no diff source configured");
    return ok(to_json(wiki_->get_diff(rev_id)));
  }

  ApiResponse get_meta() const {
    nlohmann::json j;
    j["threshold"] = config_.threshold;
    j["alpha_default"] = config_.alpha_default;
    j["dataset_size"] = dataset_->size();
    j["revert_window_seconds"] = dataset_->provenance().revert_window_seconds;
    j["revert_radius"] = dataset_->provenance().revert_radius;
    j["presets"] = {{"all_human_mainspace", to_json(default_filter())}, {"newcomers", to_json(newcomer_filter())}};
    j["buckets"] = nlohmann::json::array();
    for (auto b : kAllBuckets) j["buckets"].push_back(to_string(b));
    return ok(j);
  }

  ServiceConfig config_;
  std::shared_ptr<const Dataset> dataset_;
  DatasetIndex index_;
  std::shared_ptr<AnnotationStore> store_;
  std::shared_ptr<WikiClient> wiki_;
  RateLimiter limiter_;
};

}  // namespace editaudit
