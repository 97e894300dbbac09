// Copyright 2026 The fairrank Authors
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
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "fairrank/common.hpp"
#include "fairrank/dataio.hpp"
#include "json.hpp"

namespace fairrank {

// Users: advantaged = active (UG1) or mainstream (UG2).
// Items: advantaged = short head, protected = long tail.
enum class Group : std::uint8_t { kAdvantaged, kProtected };

// +1 for the protected group, -1 otherwise.
inline constexpr int group_sign(Group g) { return g == Group::kProtected ? 1 : -1; }

enum class UserMethod { kActivity, kMainstream };

inline const char* to_string(UserMethod m) {
  return m == UserMethod::kActivity ? "activity_ug1" : "mainstream_ug2";
}

inline UserMethod user_method_from_string(std::string_view s) {
  if (s == "activity_ug1" || s == "activity" || s == "ug1") return UserMethod::kActivity;
  if (s == "mainstream_ug2" || s == "mainstream" || s == "ug2") return UserMethod::kMainstream;
  throw UsageError("unknown user segmentation method '" + std::string(s) + "'");
}

// Where a top-fraction cut landed.
struct CutStats {
  double fraction = 0;
  std::size_t population = 0;
  std::size_t advantaged = 0;
  std::size_t boundary_count = 0;    // ranking key of the last advantaged entity
  std::size_t tied_at_boundary = 0;  // entities sharing that key
  std::size_t tied_included = 0;     // of which made the cut (lowest indices)

  nlohmann::json to_json() const {
    return {{"fraction", fraction}, {"population", population}, {"advantaged", advantaged},
            {"boundary_count", boundary_count}, {"tied_at_boundary", tied_at_boundary},
            {"tied_included", tied_included}, {"rounding", "ceil"},
            {"tie_break", "ascending_index"}};
  }
};

struct Segmentation {
  std::vector<Group> labels;
  CutStats cut;
};

struct GroupAssignment {
  std::vector<Group> user_group;
  std::vector<Group> item_group;
  UserMethod user_method = UserMethod::kActivity;
  CutStats user_cut;
  CutStats item_cut;

  std::size_t num_users() const { return user_group.size(); }
  std::size_t num_items() const { return item_group.size(); }

  int user_sign(Index u) const { return group_sign(user_group.at(static_cast<std::size_t>(u))); }
  int item_sign(Index i) const { return group_sign(item_group.at(static_cast<std::size_t>(i))); }
};

// Labels the top ceil(fraction * n) entities by key (descending) as
// advantaged; ties go to the lower index.
inline Segmentation top_fraction_cut(const std::vector<std::size_t>& keys, double fraction) {
  if (!(fraction > 0 && fraction < 1))
    throw UsageError("segmentation fraction must lie strictly between 0 and 1");
  Segmentation seg;
  seg.labels.assign(keys.size(), Group::kProtected);
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  auto take = std::min(ceil_count(fraction, keys.size()), keys.size());
  for (std::size_t r = 0; r < take; ++r) seg.labels[order[r]] = Group::kAdvantaged;

  seg.cut.fraction = fraction;
  seg.cut.population = keys.size();
  seg.cut.advantaged = take;
  if (take > 0) {
    auto boundary = keys[order[take - 1]];
    seg.cut.boundary_count = boundary;
    seg.cut.tied_at_boundary = static_cast<std::size_t>(std::count(keys.begin(), keys.end(), boundary));
    std::size_t included = 0;
    for (std::size_t r = 0; r < take; ++r) included += keys[order[r]] == boundary;
    seg.cut.tied_included = included;
  }
  return seg;
}

inline Segmentation segment_items_popularity(const InteractionDataset& train,
                                             double top_fraction = 0.2) {
  if (train.interactions.empty()) throw DataError("cannot segment items: empty training set");
  return top_fraction_cut(item_degrees(train), top_fraction);
}

inline Segmentation segment_users_activity(const InteractionDataset& train,
                                           double top_fraction = 0.05) {
  if (train.interactions.empty()) throw DataError("cannot segment users: empty training set");
  return top_fraction_cut(user_degrees(train), top_fraction);
}

// Counts each user's training interactions with short-head items.
inline Segmentation segment_users_mainstream(const InteractionDataset& train,
                                             const std::vector<Group>& item_labels,
                                             double top_fraction = 0.2) {
  if (train.interactions.empty()) throw DataError("cannot segment users: empty training set");
  if (item_labels.size() != train.num_items())
    throw DataError(detail::concat("missing item labels: have ", item_labels.size(),
                                   ", catalog has ", train.num_items()));
  std::vector<std::size_t> popular(train.num_users(), 0);
  for (const auto& r : train.interactions)
    if (item_labels[static_cast<std::size_t>(r.item)] == Group::kAdvantaged)
      ++popular[static_cast<std::size_t>(r.user)];
  return top_fraction_cut(popular, top_fraction);
}

struct SegmentationSpec {
  UserMethod user_method = UserMethod::kActivity;
  double user_fraction = 0.05;
  double item_fraction = 0.2;

  nlohmann::json to_json() const {
    return {{"user_method", to_string(user_method)}, {"user_fraction", user_fraction},
            {"item_fraction", item_fraction}};
  }

  static SegmentationSpec from_json(const nlohmann::json& j) {
    SegmentationSpec s;
    if (j.contains("user_method"))
      s.user_method = user_method_from_string(j.at("user_method").get<std::string>());
    s.user_fraction = j.value("user_fraction", s.user_method == UserMethod::kActivity ? 0.05 : 0.2);
    s.item_fraction = j.value("item_fraction", s.item_fraction);
    return s;
  }
};

inline GroupAssignment segment(const InteractionDataset& train, const SegmentationSpec& spec) {
  GroupAssignment g;
  auto items = segment_items_popularity(train, spec.item_fraction);
  auto users = spec.user_method == UserMethod::kActivity
                   ? segment_users_activity(train, spec.user_fraction)
                   : segment_users_mainstream(train, items.labels, spec.user_fraction);
  g.item_group = std::move(items.labels);
  g.item_cut = items.cut;
  g.user_group = std::move(users.labels);
  g.user_cut = users.cut;
  g.user_method = spec.user_method;
  return g;
}

// Two-column label files plus a manifest recording method and cut stats.
inline void write_groups(const std::filesystem::path& dir, const GroupAssignment& g) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output((dir / "user_groups.tsv").string());
    for (std::size_t u = 0; u < g.user_group.size(); ++u)
      out << u << '\t' << (g.user_group[u] == Group::kAdvantaged ? "advantaged" : "protected") << '\n';
  }
  {
    auto out = open_output((dir / "item_groups.tsv").string());
    for (std::size_t i = 0; i < g.item_group.size(); ++i)
      out << i << '\t' << (g.item_group[i] == Group::kAdvantaged ? "short_head" : "long_tail") << '\n';
  }
  nlohmann::json manifest = {
      {"user_method", to_string(g.user_method)},
      {"item_method", "popularity_ig"},
      {"user_cut", g.user_cut.to_json()},
      {"item_cut", g.item_cut.to_json()}};
  auto out = open_output((dir / "groups.json").string());
  out << manifest.dump(2) << '\n';
}

namespace detail {

inline std::vector<Group> read_labels(const std::filesystem::path& path,
                                      std::string_view advantaged, std::string_view protected_) {
  auto in = open_input(path.string());
  std::vector<Group> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_line(line, '\t');
    std::int64_t idx = 0;
    if (f.size() != 2 || !parse_int64(f[0], idx) || idx != static_cast<std::int64_t>(labels.size()))
      throw DataError(concat(path.string(), ": line ", line_no, ": malformed label row"));
    auto label = trim(f[1]);
    if (label == advantaged) labels.push_back(Group::kAdvantaged);
    else if (label == protected_) labels.push_back(Group::kProtected);
    else throw DataError(concat(path.string(), ": line ", line_no, ": unknown label '", label, "'"));
  }
  return labels;
}

}  // namespace detail

inline GroupAssignment read_groups(const std::filesystem::path& dir) {
  GroupAssignment g;
  g.user_group = detail::read_labels(dir / "user_groups.tsv", "advantaged", "protected");
  g.item_group = detail::read_labels(dir / "item_groups.tsv", "short_head", "long_tail");
  auto in = open_input((dir / "groups.json").string());
  auto manifest = nlohmann::json::parse(in, nullptr, false);
  if (manifest.is_discarded()) throw DataError((dir / "groups.json").string() + ": invalid JSON");
  g.user_method = user_method_from_string(manifest.value("user_method", "activity_ug1"));
  return g;
}

}  // namespace fairrank
