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

#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>

#include "editaudit/api.hpp"
#include "editaudit/config.hpp"
#include "editaudit/dataset.hpp"
#include "editaudit/http_transport.hpp"
#include "editaudit/store.hpp"
#include "editaudit/wiki_client.hpp"

namespace editaudit {

/// Builds the service graph from a config: dataset, annotation store, and a
/// diff source (fixture store, upstream wiki, or none).
inline std::unique_ptr<AuditService> make_service(const ServiceConfig& config,
                                                  std::shared_ptr<Transport> upstream_override = nullptr) {
  auto dataset = std::make_shared<const Dataset>(load_dataset(config.dataset_path));
  const auto& prov = dataset->provenance();
  if (prov.revert_window_seconds != config.revert_window_seconds || prov.revert_radius != config.revert_radius) {
    std::cerr << "warning: dataset was built with revert window " << prov.revert_window_seconds << "s radius "
              << prov.revert_radius << "; config says " << config.revert_window_seconds << "s radius "
              << config.revert_radius << "\n";
  }

  AnnotationStore::Options store_options;
  store_options.sync = config.fsync;
  store_options.rev_exists = [dataset](RevId id) { return dataset->find(id) != nullptr; };
  auto store = std::make_shared<AnnotationStore>(config.annotations_path, std::move(store_options));

  std::shared_ptr<WikiClient> wiki;
  WikiClient::Options wiki_options;
  wiki_options.parent_of = [dataset](RevId id) -> std::optional<RevId> {
    const auto* r = dataset->find(id);
    if (!r) return std::nullopt;
    return r->edit.parent_rev_id;
  };
  wiki_options.cache_dir = config.diff_cache_dir;
  if (config.fixture_diffs_path) {
    wiki_options.fixtures = std::make_shared<const FixtureDiffStore>(*config.fixture_diffs_path);
    wiki = std::make_shared<WikiClient>(std::move(wiki_options));
  } else if (config.upstream_wiki_api_url || upstream_override) {
    if (upstream_override) {
      wiki_options.transport = std::move(upstream_override);
      if (config.upstream_wiki_api_url) wiki_options.api_path = split_api_url(*config.upstream_wiki_api_url).second;
    } else {
      auto [base, path] = split_api_url(*config.upstream_wiki_api_url);
      wiki_options.transport = std::make_shared<HttpTransport>(base);
      wiki_options.api_path = path;
    }
    wiki = std::make_shared<WikiClient>(std::move(wiki_options));
  }
  return std::make_unique<AuditService>(config, std::move(dataset), std::move(store), std::move(wiki));
}

inline constexpr std::string_view kPlaceholderPage =
    "<!doctype html><title>editaudit</title><p>The audit API is served under <code>/api/</code>. "
    "Set <code>static_dir</code> in the config to serve the web interface here.</p>";

/// cpp-httplib front end for AuditService.
class HttpServer {
 public:
  explicit HttpServer(std::unique_ptr<AuditService> service) : service_(std::move(service)) {
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
      ApiRequest api;
      api.method = req.method;
      api.path = req.path;
      // Query string only; httplib also folds form-encoded bodies into params.
      if (const auto q = req.target.find('?'); q != std::string::npos) {
        httplib::Params query;
        httplib::detail::parse_query_text(req.target.substr(q + 1), query);
        for (const auto& [k, v] : query) api.params.emplace(k, v);
      }
      api.authorization = req.get_header_value("Authorization");
      api.body = req.body;
      const auto out = service_->handle(api);
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    server_.Get(R"(/api/.*)", dispatch);
    server_.Post(R"(/api/.*)", dispatch);
    server_.Put(R"(/api/.*)", dispatch);
    server_.Delete(R"(/api/.*)", dispatch);
    if (const auto& dir = service_->config().static_dir) {
      if (!server_.set_mount_point("/", dir->string())) {
        throw IoError("static_dir does not exist: " + dir->string());
      }
    } else {
      server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(std::string(kPlaceholderPage), "text/html");
      });
    }
  }

  ~HttpServer() { stop(); }

  AuditService& service() { return *service_; }

  /// Binds `host:port` (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& listen_addr) {
    const auto colon = listen_addr.rfind(':');
    if (colon == std::string::npos) throw InvalidArgument("listen_addr must be host:port");
    const auto host = listen_addr.substr(0, colon);
    const int port = std::stoi(listen_addr.substr(colon + 1));
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw IoError("cannot listen on " + listen_addr);
    return bound;
  }

  /// Blocks serving requests until stop().
  void listen() { server_.listen_after_bind(); }

  /// Serves on a background thread.
  void start() {
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  std::unique_ptr<AuditService> service_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace editaudit
