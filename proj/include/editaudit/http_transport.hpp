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
#include <memory>
#include <string>
#include <utility>

#include <httplib.h>

#include "editaudit/error.hpp"
#include "editaudit/wiki_client.hpp"

namespace editaudit {

/// Splits "https://host[:port]/w/api.php" into ("https://host[:port]", "/w/api.php").
inline std::pair<std::string, std::string> split_api_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw InvalidArgument("upstream url needs a scheme: " + url);
  const auto path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, "/"};
  return {url.substr(0, path), url.substr(path)};
}

/// Transport over cpp-httplib. Connection failures and timeouts surface as
/// TransportError.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(const std::string& base_url, std::chrono::seconds timeout = std::chrono::seconds(10))
      : client_(base_url) {
    client_.set_connection_timeout(timeout);
    client_.set_read_timeout(timeout);
    client_.set_follow_location(true);
    client_.set_default_headers({{"User-Agent", "editaudit/1.0 (edit-quality audit tool)"}});
  }

  HttpResponse get(const std::string& path_and_query) override {
    std::lock_guard lock(mutex_);
    auto res = client_.Get(path_and_query);
    if (!res) throw TransportError("upstream request failed: " + httplib::to_string(res.error()));
    return HttpResponse{res->status, res->body};
  }

 private:
  std::mutex mutex_;
  httplib::Client client_;
};

}  // namespace editaudit
