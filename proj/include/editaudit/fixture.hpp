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

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "editaudit/edit.hpp"
#include "editaudit/filter.hpp"
#include "editaudit/focus.hpp"
#include "editaudit/reverts.hpp"
#include "editaudit/summary.hpp"
#include "editaudit/timeutil.hpp"
#include "editaudit/tsv.hpp"

namespace editaudit {

/// Knobs for the synthetic corpus. Rates in the planted-error section are
/// realized exactly per (group, bucket) cell: cells are trimmed to a multiple
/// of the rate's denominator by re-scoring surplus edits across the threshold.
struct FixtureOptions {
  std::size_t edits = 10000;
  std::size_t pages = 500;
  std::uint64_t seed = 1;
  UnixSeconds start = 1546300800;           // 2019-01-01T00:00:00Z
  std::int64_t span_seconds = 730 * 86400;  // two years of history
  double threshold = kDefaultThreshold;
  RevertOptions reverts;

  double revert_rate = 0.10;             // normal edits that get reverted
  double late_revert_fraction = 0.05;    // reverts arriving 100-400 days later
  double self_revert_fraction = 0.10;    // reverts made by the reverted editor
  double ur_fraction = 0.20;             // reverted edits scored below threshold
  double uc_fraction = 0.05;             // unreverted edits scored at/above threshold
  double missing_prediction_fraction = 0.0;

  double newcomer_fp_rate = 0.6;     // UnexpectedConsensus, newcomers
  double experienced_fp_rate = 0.2;  // UnexpectedConsensus, experienced editors
  double other_fp_rate = 0.4;        // UnexpectedConsensus, everyone else
  double fn_rate = 0.4;              // UnexpectedRevert, all groups
  double overall_error_rate = 0.02;  // model errors across all scored edits
};

enum class FixtureGroup { Newcomers, Experienced, Other };

constexpr std::string_view to_string(FixtureGroup g) {
  switch (g) {
    case FixtureGroup::Newcomers:
      return "newcomers";
    case FixtureGroup::Experienced:
      return "experienced";
    case FixtureGroup::Other:
      return "other";
  }
  return "";
}

struct TruthRow {
  RevId rev_id = 0;
  Label truth = Label::NotDamaging;
  std::optional<FocusBucket> bucket;  // absent for censored edits
  FixtureGroup group = FixtureGroup::Other;
  bool model_error = false;
};

struct FixtureCorpus {
  std::vector<RawEdit> edits;
  std::vector<Prediction> predictions;
  std::vector<std::pair<std::string, std::string>> texts;  // parallel to edits: (before, after)
  std::vector<TruthRow> truth;                              // edits with a prediction, rev_id order
  nlohmann::json ground_truth;
};

namespace fixture_detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed ^ 0x6a09e667f3bcc909ULL) {}
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const std::uint64_t x = engine_();
      const auto m = static_cast<unsigned __int128>(x) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

inline std::string sha1_hex(std::string_view s) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(s.data(), s.size(), md, &len, EVP_sha1(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

// Smallest d <= 1000 with rate * d integral.
inline std::int64_t rate_denominator(double rate) {
  for (std::int64_t d = 1; d <= 1000; ++d) {
    const double x = rate * static_cast<double>(d);
    if (std::fabs(x - std::round(x)) < 1e-9) return d;
  }
  return 1000;
}

inline constexpr std::array<std::string_view, 48> kWords = {
    "river",   "history", "village", "station", "album",   "species", "council", "election", "founded",
    "church",  "league",  "season",  "novel",   "bridge",  "railway", "museum",  "census",   "district",
    "mountain", "harbor", "festival", "school", "battle",  "empire",  "painter", "poet",     "film",
    "island",  "castle",  "valley",  "record",  "tower",   "market",  "garden",  "theatre",  "orchestra",
    "treaty",  "dynasty", "canal",   "airport", "stadium", "library", "journal", "province", "language",
    "glacier", "temple",  "forest"};

inline constexpr std::array<std::string_view, 12> kCategories = {
    "Living_people", "LGBT_history", "Stubs",         "Rivers",        "Association_football", "Albums",
    "Politicians",   "Villages",     "Birds",         "Video_games",   "Women_scientists",     "Railway_stations"};

inline std::string random_line(Rng& rng) {
  std::string line;
  const auto words = rng.between(5, 10);
  for (std::int64_t w = 0; w < words; ++w) {
    if (w) line.push_back(' ');
    line.append(kWords[rng.below(kWords.size())]);
  }
  line.push_back('.');
  return line;
}

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out.append(lines[i]);
  }
  return out;
}

struct Editor {
  std::string name;
  FixtureGroup kind = FixtureGroup::Other;
  bool registered = false;
  bool bot = false;
  std::int64_t base_count = 0;
  UnixSeconds registered_at = 0;
};

struct PendingEdit {
  RawEdit edit;
  std::size_t editor = 0;
  std::string before;
  std::string after;
};

}  // namespace fixture_detail

/// Generates a deterministic synthetic corpus for `options`.
inline FixtureCorpus generate_fixture(const FixtureOptions& options) {
  using namespace fixture_detail;
  if (options.pages == 0) throw InvalidArgument("fixture: need at least one page");
  Rng rng(options.seed);

  // Editors: 5% bots, 25% anonymous, 30% newcomers, 40% experienced.
  const std::size_t n_editors = std::max<std::size_t>(20, options.edits / 8);
  std::vector<Editor> editors(n_editors);
  std::vector<std::size_t> patrollers;
  for (std::size_t i = 0; i < n_editors; ++i) {
    auto& ed = editors[i];
    const double u = rng.unit();
    if (u < 0.05) {
      ed.name = "ExampleBot" + std::to_string(i);
      ed.bot = ed.registered = true;
      ed.base_count = rng.between(5000, 900000);
      ed.registered_at = options.start - rng.between(365, 4000) * 86400;
      patrollers.push_back(i);
    } else if (u < 0.30) {
      ed.name = i % 2 ? "198.51." + std::to_string(i / 250 % 250) + "." + std::to_string(i % 250)
                      : "2001:db8::" + std::to_string(i);
    } else if (u < 0.60) {
      ed.name = "Newcomer" + std::to_string(i);
      ed.kind = FixtureGroup::Newcomers;
      ed.registered = true;
      ed.base_count = rng.between(0, 60);
      ed.registered_at = options.start - rng.between(0, 90) * 86400;
    } else {
      ed.name = "Editor" + std::to_string(i);
      ed.kind = FixtureGroup::Experienced;
      ed.registered = true;
      ed.base_count = rng.between(150, 40000);
      ed.registered_at = options.start - rng.between(200, 6000) * 86400;
      patrollers.push_back(i);
    }
  }

  // Edits per page.
  std::vector<std::size_t> per_page(options.pages, 0);
  for (std::size_t i = 0; i < options.edits; ++i) ++per_page[rng.below(options.pages)];

  std::vector<PendingEdit> pending;
  pending.reserve(options.edits);
  const UnixSeconds end = options.start + options.span_seconds;
  for (std::size_t p = 0; p < options.pages; ++p) {
    const std::size_t k = per_page[p];
    if (k == 0) continue;
    const PageId page_id = static_cast<PageId>(1000 + p);
    const int ns = rng.chance(0.8) ? 0 : std::array{1, 2, 3, 4, 10, 118}[rng.below(6)];
    std::string title = std::string(kWords[rng.below(kWords.size())]);
    title[0] = static_cast<char>(title[0] - 'a' + 'A');
    title += "_" + std::string(kWords[rng.below(kWords.size())]) + "_" + std::to_string(p);
    std::vector<std::string> cats;
    for (auto n = rng.below(4); n > 0; --n) cats.emplace_back(kCategories[rng.below(kCategories.size())]);
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());

    // Text states: history[i] is the page text after the i-th edit.
    std::vector<std::string> history;
    std::vector<std::string> lines;
    std::vector<std::vector<std::string>> line_history;
    std::string current;
    UnixSeconds t = options.start + rng.between(0, options.span_seconds / 2);
    int bad_run = 0;                 // consecutive edits awaiting a revert
    std::size_t bad_author = 0;
    std::vector<std::string> restore_lines;
    std::string restore_text;

    for (std::size_t i = 0; i < k; ++i) {
      PendingEdit pe;
      RawEdit& e = pe.edit;
      e.page_id = page_id;
      e.page_namespace = ns;
      e.page_title = title;
      e.page_categories = cats;
      pe.before = current;

      const bool do_revert = bad_run > 0 && (rng.chance(0.8) || i + 1 == k || bad_run >= 2);
      if (do_revert) {
        const bool late = rng.chance(options.late_revert_fraction);
        t += late ? rng.between(100, 400) * 86400 : rng.between(30, 3 * 86400);
        lines = restore_lines;
        current = restore_text;
        pe.editor = rng.chance(options.self_revert_fraction) ? bad_author
                                                             : patrollers[rng.below(patrollers.size())];
        bad_run = 0;
      } else {
        const auto remaining = static_cast<std::int64_t>(k - i);
        const std::int64_t mean_gap = std::max<std::int64_t>(60, (end - t) / (remaining + 1));
        t += 1 + static_cast<std::int64_t>(-std::log(1.0 - rng.unit()) * static_cast<double>(mean_gap));
        if (bad_run == 0) {
          restore_lines = lines;
          restore_text = current;
        }
        if (lines.empty()) {
          for (auto n = rng.between(3, 12); n > 0; --n) lines.push_back(random_line(rng));
        } else {
          const auto op = rng.below(3);
          const auto at = rng.below(lines.size());
          if (op == 0 || lines.size() < 3) {
            lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at), random_line(rng));
          } else if (op == 1) {
            lines[at] = random_line(rng);
          } else {
            lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(at));
          }
        }
        current = join_lines(lines);
        pe.editor = rng.below(n_editors);
        if (rng.chance(options.revert_rate) || bad_run > 0) {
          if (bad_run == 0) bad_author = pe.editor;
          ++bad_run;
        }
      }
      pe.after = current;
      e.timestamp = t;
      e.is_minor = rng.chance(0.15);
      e.page_size_before = static_cast<std::int64_t>(pe.before.size());
      e.byte_delta = static_cast<std::int64_t>(pe.after.size()) - e.page_size_before;
      e.content_hash = sha1_hex(pe.after);
      pending.push_back(std::move(pe));
    }
  }

  // Global rev_id order follows time; parents and editor counts follow from it.
  std::stable_sort(pending.begin(), pending.end(), [](const PendingEdit& a, const PendingEdit& b) {
    if (a.edit.timestamp != b.edit.timestamp) return a.edit.timestamp < b.edit.timestamp;
    return a.edit.page_id < b.edit.page_id;
  });
  std::map<PageId, RevId> last_rev;
  std::vector<std::int64_t> editor_edits(n_editors, 0);
  FixtureCorpus corpus;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    auto& pe = pending[i];
    RawEdit& e = pe.edit;
    e.rev_id = static_cast<RevId>(1000001 + i);
    auto [it, inserted] = last_rev.try_emplace(e.page_id, 0);
    e.parent_rev_id = it->second;
    it->second = e.rev_id;
    const auto& ed = editors[pe.editor];
    e.editor_name = ed.name;
    e.editor_is_registered = ed.registered;
    e.editor_is_bot = ed.bot;
    e.editor_edit_count_at_time = ed.registered ? ed.base_count + editor_edits[pe.editor] : 0;
    e.editor_account_age_at_time = ed.registered ? e.timestamp - ed.registered_at : 0;
    ++editor_edits[pe.editor];
    corpus.edits.push_back(e);
    corpus.texts.emplace_back(std::move(pe.before), std::move(pe.after));
  }

  const auto statuses = detect_all_reverts(corpus.edits, options.reverts);
  const std::size_t n = corpus.edits.size();

  // Scores. Integers in 1e-4 units keep the TSV representation exact.
  const auto t_units = static_cast<std::int64_t>(std::ceil(options.threshold * 10000 - 1e-9));
  auto score_below = [&] { return static_cast<double>(rng.between(100, t_units - 1)) / 10000.0; };
  auto score_above = [&] { return static_cast<double>(rng.between(t_units, 9900)) / 10000.0; };
  std::vector<bool> has_prediction(n, true);
  std::vector<double> score(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.chance(options.missing_prediction_fraction)) has_prediction[i] = false;
    const bool low = statuses[i].reverted ? rng.chance(options.ur_fraction) : !rng.chance(options.uc_fraction);
    score[i] = low ? score_below() : score_above();
  }

  auto group_of = [&](std::size_t i) {
    EditRecord probe;
    probe.edit = corpus.edits[i];
    if (matches(newcomer_filter(), probe)) return FixtureGroup::Newcomers;
    if (matches(experienced_filter(), probe)) return FixtureGroup::Experienced;
    return FixtureGroup::Other;
  };
  auto bucket_of = [&](std::size_t i) -> std::optional<FocusBucket> {
    if (statuses[i].censored) return std::nullopt;
    return classify_focus(score[i], statuses[i].reverted, options.threshold);
  };
  auto fp_rate = [&](FixtureGroup g) {
    return g == FixtureGroup::Newcomers     ? options.newcomer_fp_rate
           : g == FixtureGroup::Experienced ? options.experienced_fp_rate
                                            : options.other_fp_rate;
  };

  // Cells of the unexpected buckets, trimmed so planted rates are exact.
  std::map<std::pair<FixtureGroup, FocusBucket>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_prediction[i]) continue;
    const auto b = bucket_of(i);
    if (b && is_unexpected(*b)) cells[{group_of(i), *b}].push_back(i);
  }
  for (auto& [key, members] : cells) {
    const double rate = key.second == FocusBucket::UnexpectedConsensus ? fp_rate(key.first) : options.fn_rate;
    const auto d = static_cast<std::size_t>(rate_denominator(rate));
    rng.shuffle(members);
    while (members.size() % d != 0) {
      const auto i = members.back();
      members.pop_back();
      // Across the threshold into the matching Expected bucket.
      score[i] = key.second == FocusBucket::UnexpectedConsensus ? score_below() : score_above();
    }
  }

  std::vector<bool> is_error(n, false);
  std::size_t unexpected_total = 0, unexpected_errors = 0;
  nlohmann::json groups = nlohmann::json::array();
  for (auto& [key, members] : cells) {
    const double rate = key.second == FocusBucket::UnexpectedConsensus ? fp_rate(key.first) : options.fn_rate;
    const auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(members.size())));
    std::sort(members.begin(), members.end());
    rng.shuffle(members);
    for (std::size_t j = 0; j < k; ++j) is_error[members[j]] = true;
    unexpected_total += members.size();
    unexpected_errors += k;
    const FilterSpec filter = key.first == FixtureGroup::Newcomers     ? newcomer_filter()
                              : key.first == FixtureGroup::Experienced ? experienced_filter()
                                                                       : FilterSpec{};
    nlohmann::json g;
    g["group"] = to_string(key.first);
    g["filter"] = key.first == FixtureGroup::Other ? nlohmann::json() : to_json(filter);
    g["bucket"] = to_string(key.second);
    g["error_kind"] = to_string(error_kind_for(key.second));
    g["planted_rate"] = rate;
    g["n"] = members.size();
    g["n_model_error"] = k;
    groups.push_back(std::move(g));
  }

  // Remaining errors spread uniformly over expected buckets and censored edits.
  std::size_t scored = 0;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_prediction[i]) continue;
    ++scored;
    const auto b = bucket_of(i);
    if (!b || !is_unexpected(*b)) rest.push_back(i);
  }
  const auto target = static_cast<std::int64_t>(std::llround(options.overall_error_rate * static_cast<double>(scored)));
  const auto rest_errors = static_cast<std::size_t>(
      std::clamp<std::int64_t>(target - static_cast<std::int64_t>(unexpected_errors), 0,
                               static_cast<std::int64_t>(rest.size())));
  rng.shuffle(rest);
  for (std::size_t j = 0; j < rest_errors; ++j) is_error[rest[j]] = true;

  for (std::size_t i = 0; i < n; ++i) {
    if (!has_prediction[i]) continue;
    corpus.predictions.push_back(Prediction{corpus.edits[i].rev_id, score[i], "fixture-1"});
    const bool predicted_damaging = score[i] >= options.threshold;
    TruthRow row;
    row.rev_id = corpus.edits[i].rev_id;
    row.bucket = bucket_of(i);
    row.group = group_of(i);
    row.model_error = is_error[i];
    row.truth = predicted_damaging != is_error[i] ? Label::Damaging : Label::NotDamaging;
    corpus.truth.push_back(row);
  }

  nlohmann::json gt;
  gt["seed"] = options.seed;
  gt["edits"] = n;
  gt["pages"] = options.pages;
  gt["threshold"] = options.threshold;
  gt["revert_window_seconds"] = options.reverts.window_seconds;
  gt["revert_radius"] = options.reverts.radius;
  gt["groups"] = std::move(groups);
  gt["overall"] = {{"n", scored}, {"n_model_error", unexpected_errors + rest_errors}};
  gt["unexpected"] = {{"n", unexpected_total}, {"n_model_error", unexpected_errors}};
  gt["expected_or_censored"] = {{"n", rest.size()}, {"n_model_error", rest_errors}};
  corpus.ground_truth = std::move(gt);
  return corpus;
}

inline constexpr const char* kFixtureEditsFile = "edits.tsv";
inline constexpr const char* kFixturePredictionsFile = "predictions.tsv";
inline constexpr const char* kFixtureDiffsFile = "diffs.ndjson";
inline constexpr const char* kFixtureTruthFile = "truth.tsv";
inline constexpr const char* kFixtureGroundTruthFile = "ground_truth.json";

/// Writes edits.tsv, predictions.tsv, diffs.ndjson, truth.tsv and the
/// ground_truth.json sidecar into `dir`.
inline void write_fixture(const FixtureCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open(kFixtureEditsFile);
    serialize_edits(out, corpus.edits);
  }
  {
    auto out = open(kFixturePredictionsFile);
    serialize_predictions(out, corpus.predictions);
  }
  {
    auto out = open(kFixtureDiffsFile);
    for (std::size_t i = 0; i < corpus.edits.size(); ++i) {
      nlohmann::json j{{"rev_id", corpus.edits[i].rev_id},
                       {"before", corpus.texts[i].first},
                       {"after", corpus.texts[i].second}};
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open(kFixtureTruthFile);
    out << "rev_id\ttruth\tbucket\tgroup\tmodel_error\n";
    for (const auto& t : corpus.truth) {
      out << t.rev_id << '\t' << to_string(t.truth) << '\t' << (t.bucket ? to_string(*t.bucket) : "censored") << '\t'
          << to_string(t.group) << '\t' << (t.model_error ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open(kFixtureGroundTruthFile);
    out << corpus.ground_truth.dump(2) << '\n';
  }
}

/// Reads truth.tsv back as rev_id -> true label.
inline std::map<RevId, Label> read_truth_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<RevId, Label> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const auto tab2 = line.find('\t', tab + 1);
    const auto label = parse_label(line.substr(tab + 1, tab2 - tab - 1));
    if (!label) throw ParseError("truth file: bad label");
    out[std::stoll(line.substr(0, tab))] = *label;
  }
  return out;
}

}  // namespace editaudit
