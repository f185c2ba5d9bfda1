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

// Operator entry points: build datasets, generate fixtures, run the service
// and print offline audit reports. Exit codes: 0 success, 1 runtime failure,
// 2 usage error.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "editaudit/config.hpp"
#include "editaudit/dataset.hpp"
#include "editaudit/error.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/fixture.hpp"
#include "editaudit/index.hpp"
#include "editaudit/ingest.hpp"
#include "editaudit/query.hpp"
#include "editaudit/report.hpp"
#include "editaudit/server.hpp"
#include "editaudit/store.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Errors in user-supplied arguments (as opposed to failures while running).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestArgs {
  std::string edits, predictions, out;
  std::int64_t window = editaudit::kDefaultRevertWindowSeconds;
  int radius = editaudit::kDefaultRevertRadius;
  double threshold = editaudit::kDefaultThreshold;
  bool strict = false;
  bool no_self_reverts = false;
  std::string observation_end;
};

int run_ingest(const IngestArgs& args) {
  editaudit::IngestOptions options;
  options.reverts.window_seconds = args.window;
  options.reverts.radius = args.radius;
  options.reverts.count_self_reverts = !args.no_self_reverts;
  options.parse.strict = args.strict;
  if (!args.observation_end.empty()) {
    const auto t = editaudit::parse_iso8601(args.observation_end);
    if (!t) throw UsageError("--observation-end must look like 2020-12-31T23:59:59Z");
    options.observation_end = *t;
  }
  auto result = editaudit::run_ingest(args.edits, args.predictions, options);
  editaudit::save_dataset(args.out, result.dataset);

  const auto& join = result.dataset.provenance().join;
  std::cout << "edits parsed:          " << join.records + join.edits_unmatched << "\n";
  for (const auto& [reason, n] : result.edits_parse.dropped) std::cout << "  dropped (" << reason << "): " << n << "\n";
  std::cout << "predictions parsed:    " << join.records + join.predictions_unmatched << "\n";
  for (const auto& [reason, n] : result.predictions_parse.dropped) {
    std::cout << "  dropped (" << reason << "): " << n << "\n";
  }
  std::cout << "records:               " << join.records << "\n"
            << "edits_unmatched:       " << join.edits_unmatched << "\n"
            << "predictions_unmatched: " << join.predictions_unmatched << "\n"
            << "reverted:              " << result.reverted << "\n"
            << "censored:              " << result.censored << "\n"
            << "threshold:             " << args.threshold << "\n";
  const editaudit::DatasetIndex index(result.dataset, args.threshold);
  std::size_t sum = 0;
  for (auto b : editaudit::kAllBuckets) {
    const auto n = index.bucket_members(b).count();
    sum += n;
    std::cout << "bucket " << editaudit::to_string(b) << ": " << n << "\n";
  }
  std::cout << "bucket total:          " << sum << " (non-censored records)\n"
            << "dataset written to " << args.out << "\n";
  return kExitOk;
}

struct FixtureArgs {
  editaudit::FixtureOptions options;
  std::string out_dir;
};

int run_fixture(const FixtureArgs& args) {
  const auto corpus = editaudit::generate_fixture(args.options);
  editaudit::write_fixture(corpus, args.out_dir);
  std::cout << "wrote " << corpus.edits.size() << " edits on " << args.options.pages << " pages to " << args.out_dir
            << "\n";
  return kExitOk;
}

int run_serve(const std::string& config_path, const std::string& listen_override) {
  auto config = editaudit::load_config(config_path);
  if (!listen_override.empty()) config.listen_addr = listen_override;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  editaudit::HttpServer server(editaudit::make_service(config));
  const int port = server.bind(config.listen_addr);
  const auto host = config.listen_addr.substr(0, config.listen_addr.rfind(':'));
  std::cout << "listening on " << host << ":" << port << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  // listen() also returns if the server stops on its own; release the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return kExitOk;
}

struct ReportArgs {
  std::string dataset, annotations, filter, bucket, compare_filter, auditor, format = "both";
  double alpha = editaudit::kDefaultAlpha;
};

int run_report(const ReportArgs& args) {
  editaudit::FilterSpec filter, compare_filter;
  try {
    filter = editaudit::parse_filter(args.filter);
    if (!args.compare_filter.empty()) compare_filter = editaudit::parse_filter(args.compare_filter);
  } catch (const editaudit::InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto bucket = editaudit::parse_bucket(args.bucket);
  if (!bucket) throw UsageError("unknown bucket '" + args.bucket + "'");
  if (!(args.alpha > 0.0 && args.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");

  const auto dataset = editaudit::load_dataset(args.dataset);
  std::filesystem::path store_dir = args.annotations;
  if (std::filesystem::is_regular_file(store_dir)) store_dir = store_dir.parent_path();
  editaudit::AnnotationStore::Options store_options;
  store_options.read_only = true;
  const editaudit::AnnotationStore store(store_dir, store_options);
  std::optional<std::string> auditor;
  if (!args.auditor.empty()) {
    if (!store.auditor(args.auditor)) throw UsageError("unknown auditor " + args.auditor);
    auditor = args.auditor;
  }
  const auto live = store.live_annotations(auditor);

  std::string text, json;
  if (args.compare_filter.empty()) {
    const auto summary = editaudit::summarize_slice(dataset, live, filter, *bucket, args.alpha);
    text = editaudit::render_text(summary);
    json = editaudit::to_json(summary).dump();
  } else {
    const auto comparison = editaudit::compare_slices(dataset, live, filter, compare_filter, *bucket, args.alpha);
    text = editaudit::render_text(comparison);
    json = editaudit::to_json(comparison).dump();
  }
  if (args.format != "json") std::cout << text;
  if (args.format == "both") std::cout << "\n";
  if (args.format != "text") std::cout << json << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit an edit-quality model against community revert behavior"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse edits and predictions, detect reverts, write a dataset");
  ingest_cmd->add_option("--edits", ingest.edits, "Edits TSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--predictions", ingest.predictions, "Predictions TSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest.out, "Dataset output path")->required();
  ingest_cmd->add_option("--window", ingest.window, "Revert window in seconds")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  ingest_cmd->add_option("--radius", ingest.radius, "Identity-revert radius in revisions")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  ingest_cmd->add_option("--threshold", ingest.threshold, "Damaging threshold for the bucket report")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  ingest_cmd->add_option("--observation-end", ingest.observation_end, "End of observation (ISO-8601 Z)");
  ingest_cmd->add_flag("--strict", ingest.strict, "Fail on the first malformed row");
  ingest_cmd->add_flag("--no-self-reverts", ingest.no_self_reverts, "Do not count self-reverts as reverts");

  FixtureArgs fixture;
  auto& fo = fixture.options;
  auto* fixture_cmd = app.add_subcommand("fixture", "Generate a synthetic corpus with planted ground truth");
  fixture_cmd->add_option("--edits", fo.edits, "Number of edits")->required()->check(CLI::PositiveNumber);
  fixture_cmd->add_option("--pages", fo.pages, "Number of pages")->required()->check(CLI::PositiveNumber);
  fixture_cmd->add_option("--seed", fo.seed, "Random seed")->required();
  fixture_cmd->add_option("--out-dir", fixture.out_dir, "Output directory")->required();
  fixture_cmd->add_option("--threshold", fo.threshold)->capture_default_str()->check(CLI::Range(0.01, 0.99));
  fixture_cmd->add_option("--revert-rate", fo.revert_rate)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  fixture_cmd->add_option("--ur-fraction", fo.ur_fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  fixture_cmd->add_option("--uc-fraction", fo.uc_fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  fixture_cmd->add_option("--missing-prediction-fraction", fo.missing_prediction_fraction)->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  fixture_cmd->add_option("--newcomer-fp-rate", fo.newcomer_fp_rate)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  fixture_cmd->add_option("--experienced-fp-rate", fo.experienced_fp_rate)->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  fixture_cmd->add_option("--other-fp-rate", fo.other_fp_rate)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  fixture_cmd->add_option("--fn-rate", fo.fn_rate)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  fixture_cmd->add_option("--overall-error-rate", fo.overall_error_rate)->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  std::string config_path, listen_override;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP audit service");
  serve_cmd->add_option("--config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--listen", listen_override, "Override listen_addr (host:port)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Print an audit summary or group comparison");
  report_cmd->add_option("--dataset", report.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--annotations", report.annotations, "Annotation store directory or annotations.ndjson")
      ->required()->check(CLI::ExistingPath);
  report_cmd->add_option("--filter", report.filter, "FilterSpec JSON")->required();
  report_cmd->add_option("--bucket", report.bucket, "Focus bucket")->required();
  report_cmd->add_option("--compare-filter", report.compare_filter, "Second FilterSpec JSON to compare against");
  report_cmd->add_option("--alpha", report.alpha, "Significance level")->capture_default_str();
  report_cmd->add_option("--auditor", report.auditor, "Only this auditor's labels (default: all auditors)");
  report_cmd->add_option("--format", report.format, "text, json or both")->capture_default_str()
      ->check(CLI::IsMember({"text", "json", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*fixture_cmd) return run_fixture(fixture);
    if (*serve_cmd) return run_serve(config_path, listen_override);
    if (*report_cmd) return run_report(report);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const editaudit::InsufficientData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
