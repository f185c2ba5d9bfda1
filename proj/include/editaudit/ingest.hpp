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

#include <filesystem>
#include <fstream>
#include <optional>

#include "editaudit/dataset.hpp"
#include "editaudit/error.hpp"
#include "editaudit/reverts.hpp"
#include "editaudit/tsv.hpp"

namespace editaudit {

struct IngestOptions {
  RevertOptions reverts;
  ParseOptions parse;
  // End of the observation period for censoring; defaults to the latest edit.
  std::optional<UnixSeconds> observation_end;
};

struct IngestResult {
  Dataset dataset;
  ParseResult<RawEdit> edits_parse;  // rows cleared after the join
  ParseResult<Prediction> predictions_parse;
  std::size_t reverted = 0;
  std::size_t censored = 0;
};

/// Parse both TSV files, detect reverts per page, and join.
inline IngestResult run_ingest(const std::filesystem::path& edits_path, const std::filesystem::path& predictions_path,
                               const IngestOptions& options = {}) {
  std::ifstream edits_in(edits_path);
  if (!edits_in) throw IoError("cannot open edits file " + edits_path.string());
  std::ifstream predictions_in(predictions_path);
  if (!predictions_in) throw IoError("cannot open predictions file " + predictions_path.string());

  IngestResult out;
  out.edits_parse = parse_edits(edits_in, options.parse);
  out.predictions_parse = parse_predictions(predictions_in, options.parse);
  const auto& edits = out.edits_parse.rows;
  UnixSeconds end = 0;
  for (const auto& e : edits) end = std::max(end, e.timestamp);
  if (options.observation_end) end = *options.observation_end;

  const auto statuses = detect_all_reverts(edits, options.reverts, end);
  auto joined = join_dataset(edits, out.predictions_parse.rows, statuses);
  for (const auto& r : joined.records) {
    out.reverted += r.revert.reverted;
    out.censored += r.revert.censored;
  }
  Dataset::Provenance prov;
  prov.revert_window_seconds = options.reverts.window_seconds;
  prov.revert_radius = options.reverts.radius;
  prov.observation_end = end;
  prov.join = joined.report;
  out.dataset = Dataset(std::move(joined.records), prov);
  out.edits_parse.rows.clear();
  out.predictions_parse.rows.clear();
  return out;
}

}  // namespace editaudit
