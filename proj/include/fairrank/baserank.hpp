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
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fairrank/common.hpp"
#include "fairrank/dataio.hpp"

namespace fairrank {

struct Candidate {
  Index item = 0;
  double score = 0;

  bool operator==(const Candidate&) const = default;
};

// Score descending, then item index ascending.
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

// Per-user top-N candidate lists, stored row-major in one buffer.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t n, std::string ranker_tag) : n_(n), ranker_tag_(std::move(ranker_tag)) {}

  std::size_t num_users() const { return offsets_.size() - 1; }
  std::size_t n() const { return n_; }
  const std::string& ranker_tag() const { return ranker_tag_; }
  std::span<const Candidate> row(Index u) const {
    auto uu = static_cast<std::size_t>(u);
    return {entries_.data() + offsets_.at(uu), offsets_.at(uu + 1) - offsets_[uu]};
  }
  std::size_t row_offset(Index u) const { return offsets_.at(static_cast<std::size_t>(u)); }
  std::size_t total_entries() const { return entries_.size(); }
  const std::vector<Candidate>& entries() const { return entries_; }

  // Users whose candidate pool was smaller than N.
  const std::vector<Index>& short_rows() const { return short_rows_; }

  // Appends the next user's row; the caller guarantees ranking order.
  void push_row(std::span<const Candidate> row) {
    if (row.size() < n_) short_rows_.push_back(static_cast<Index>(num_users()));
    entries_.insert(entries_.end(), row.begin(), row.end());
    offsets_.push_back(entries_.size());
  }

  void reserve(std::size_t users) {
    offsets_.reserve(users + 1);
    entries_.reserve(users * n_);
  }

  bool operator==(const ScoreMatrix& o) const {
    return n_ == o.n_ && ranker_tag_ == o.ranker_tag_ && offsets_ == o.offsets_ &&
           entries_ == o.entries_ && short_rows_ == o.short_rows_;
  }

 private:
  std::size_t n_ = 0;
  std::string ranker_tag_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Candidate> entries_;
  std::vector<Index> short_rows_;
};

// Sorted training items per user, for exclusion lookups.
class TrainIndex {
 public:
  explicit TrainIndex(const InteractionDataset& train) : items_(user_item_lists(train)) {
    for (auto& v : items_) std::sort(v.begin(), v.end());
  }
  bool contains(Index u, Index item) const {
    const auto& v = items_.at(static_cast<std::size_t>(u));
    return std::binary_search(v.begin(), v.end(), item);
  }
  const std::vector<Index>& items(Index u) const { return items_.at(static_cast<std::size_t>(u)); }
  std::size_t num_users() const { return items_.size(); }

 private:
  std::vector<std::vector<Index>> items_;
};

// Throws DataError describing the first violated invariant.
inline void validate_score_matrix(const ScoreMatrix& scores, const InteractionDataset& train) {
  if (scores.num_users() != train.num_users())
    throw DataError(detail::concat("score matrix has ", scores.num_users(), " rows, dataset has ",
                                   train.num_users(), " users"));
  TrainIndex index(train);
  std::size_t short_pos = 0;
  for (std::size_t u = 0; u < scores.num_users(); ++u) {
    auto row = scores.row(static_cast<Index>(u));
    bool listed_short = short_pos < scores.short_rows().size() &&
                        scores.short_rows()[short_pos] == static_cast<Index>(u);
    if (listed_short) ++short_pos;
    if (row.size() > scores.n() || (row.size() < scores.n() && !listed_short))
      throw DataError(detail::concat("user ", u, ": row has ", row.size(), " entries, N = ", scores.n()));
    std::vector<Index> seen;
    for (std::size_t r = 0; r < row.size(); ++r) {
      if (!std::isfinite(row[r].score))
        throw DataError(detail::concat("user ", u, ": non-finite score at rank ", r + 1));
      if (row[r].item < 0 || static_cast<std::size_t>(row[r].item) >= train.num_items())
        throw DataError(detail::concat("user ", u, ": item index out of range"));
      if (r > 0 && !ranks_before(row[r - 1], row[r]))
        throw DataError(detail::concat("user ", u, ": row not in ranking order at rank ", r + 1));
      if (index.contains(static_cast<Index>(u), row[r].item))
        throw DataError(detail::concat("user ", u, ": candidate ", row[r].item, " is a training item"));
      seen.push_back(row[r].item);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw DataError(detail::concat("user ", u, ": duplicate candidate item"));
  }
}

namespace detail {

// Top-N of `pool` by (score desc, item asc).
inline std::vector<Candidate> top_n(std::vector<Candidate> pool, std::size_t n) {
  auto take = std::min(n, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(),
                    ranks_before);
  pool.resize(take);
  return pool;
}

}  // namespace detail

// Every user gets the most-interacted items they have not consumed.
inline ScoreMatrix mostpop_scores(const InteractionDataset& train, std::size_t n) {
  if (n < 1) throw UsageError("N must be >= 1");
  auto counts = item_degrees(train);
  std::vector<Candidate> global(train.num_items());
  for (std::size_t i = 0; i < global.size(); ++i)
    global[i] = {static_cast<Index>(i), static_cast<double>(counts[i])};
  std::sort(global.begin(), global.end(), ranks_before);

  TrainIndex index(train);
  ScoreMatrix out(n, "mostpop");
  out.reserve(train.num_users());
  std::vector<Candidate> row;
  for (std::size_t u = 0; u < train.num_users(); ++u) {
    row.clear();
    for (const auto& c : global) {
      if (row.size() == n) break;
      if (!index.contains(static_cast<Index>(u), c.item)) row.push_back(c);
    }
    out.push_row(row);
  }
  return out;
}

// Uniform sample without replacement from each user's unseen items. The
// r-th draw of a length-L row scores (L - r) / L.
inline ScoreMatrix random_scores(const InteractionDataset& train, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw UsageError("N must be >= 1");
  TrainIndex index(train);
  ScoreMatrix out(n, "random");
  out.reserve(train.num_users());
  std::vector<Index> pool;
  std::vector<Candidate> row;
  for (std::size_t u = 0; u < train.num_users(); ++u) {
    pool.clear();
    for (std::size_t i = 0; i < train.num_items(); ++i)
      if (!index.contains(static_cast<Index>(u), static_cast<Index>(i))) pool.push_back(static_cast<Index>(i));
    std::mt19937_64 rng(mix_seed(seed, u));
    auto len = std::min(n, pool.size());
    row.clear();
    for (std::size_t r = 0; r < len; ++r) {
      auto j = r + static_cast<std::size_t>(uniform_below(rng, pool.size() - r));
      std::swap(pool[r], pool[j]);
      row.push_back({pool[r], static_cast<double>(len - r) / static_cast<double>(len)});
    }
    out.push_row(row);
  }
  return out;
}

// Item-item cosine over binary user incidence, each item keeping only its
// `neighbors` most similar items (positive similarity, ties to lower index).
class ItemNeighborhood {
 public:
  struct Neighbor {
    Index item;
    double similarity;
  };

  ItemNeighborhood(const InteractionDataset& train, std::size_t neighbors) {
    if (neighbors < 1) throw UsageError("neighbors must be >= 1");
    const auto m = train.num_items();
    auto deg = item_degrees(train);
    std::vector<std::vector<Index>> item_users(m);
    for (const auto& r : train.interactions) item_users[static_cast<std::size_t>(r.item)].push_back(r.user);
    auto user_items = user_item_lists(train);

    lists_.resize(m);
    std::vector<std::size_t> co(m, 0);
    std::vector<Index> touched;
    for (std::size_t i = 0; i < m; ++i) {
      touched.clear();
      for (auto u : item_users[i])
        for (auto j : user_items[static_cast<std::size_t>(u)]) {
          if (static_cast<std::size_t>(j) == i) continue;
          if (co[static_cast<std::size_t>(j)]++ == 0) touched.push_back(j);
        }
      std::vector<Candidate> sims;
      sims.reserve(touched.size());
      for (auto j : touched) {
        auto jj = static_cast<std::size_t>(j);
        sims.push_back({j, static_cast<double>(co[jj]) /
                               std::sqrt(static_cast<double>(deg[i]) * static_cast<double>(deg[jj]))});
        co[jj] = 0;
      }
      for (const auto& c : detail::top_n(std::move(sims), neighbors))
        lists_[i].push_back({c.item, c.score});
    }
  }

  const std::vector<Neighbor>& neighbors(Index item) const {
    return lists_.at(static_cast<std::size_t>(item));
  }

 private:
  std::vector<std::vector<Neighbor>> lists_;
};

// Cosine similarity of two items' binary user vectors; 0 if either is empty.
inline double item_cosine(const InteractionDataset& train, Index a, Index b) {
  std::vector<Index> ua, ub;
  for (const auto& r : train.interactions) {
    if (r.item == a) ua.push_back(r.user);
    if (r.item == b) ub.push_back(r.user);
  }
  if (ua.empty() || ub.empty()) return 0.0;
  std::sort(ua.begin(), ua.end());
  std::sort(ub.begin(), ub.end());
  std::vector<Index> common;
  std::set_intersection(ua.begin(), ua.end(), ub.begin(), ub.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) /
         std::sqrt(static_cast<double>(ua.size()) * static_cast<double>(ub.size()));
}

// score(u, i) = sum over training items j of u of cos(i, j), counted only
// when i is among j's retained neighbors.
inline ScoreMatrix itemknn_scores(const InteractionDataset& train, std::size_t n,
                                  std::size_t neighbors) {
  if (n < 1) throw UsageError("N must be >= 1");
  ItemNeighborhood hood(train, neighbors);
  TrainIndex index(train);
  ScoreMatrix out(n, "itemknn");
  out.reserve(train.num_users());
  std::vector<double> acc(train.num_items());
  std::vector<Candidate> pool;
  for (std::size_t u = 0; u < train.num_users(); ++u) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (auto j : index.items(static_cast<Index>(u)))
      for (const auto& nb : hood.neighbors(j)) acc[static_cast<std::size_t>(nb.item)] += nb.similarity;
    pool.clear();
    for (std::size_t i = 0; i < train.num_items(); ++i)
      if (!index.contains(static_cast<Index>(u), static_cast<Index>(i)))
        pool.push_back({static_cast<Index>(i), acc[i]});
    out.push_row(detail::top_n(pool, n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Score-matrix file: a header line "#fairrank-scores<TAB>ranker_tag=..<TAB>N=.."
// followed by one "user<TAB>item<TAB>score<TAB>rank" line per candidate.

inline void write_scores(std::ostream& out, const ScoreMatrix& scores, const InteractionDataset& ds) {
  out << "#fairrank-scores\tranker_tag=" << scores.ranker_tag() << "\tN=" << scores.n() << '\n';
  for (std::size_t u = 0; u < scores.num_users(); ++u) {
    auto row = scores.row(static_cast<Index>(u));
    for (std::size_t r = 0; r < row.size(); ++r)
      out << ds.users.token(static_cast<Index>(u)) << '\t' << ds.items.token(row[r].item) << '\t'
          << format_double(row[r].score) << '\t' << r + 1 << '\n';
  }
}

inline void write_scores(const std::string& path, const ScoreMatrix& scores, const InteractionDataset& ds) {
  auto out = open_output(path);
  write_scores(out, scores, ds);
}

// Reads a score file against `train`'s vocabularies. Rows are re-sorted,
// truncated to N, and checked against the matrix invariants.
inline ScoreMatrix read_scores(std::istream& in, const InteractionDataset& train, std::size_t n,
                               const std::string& source = "<stream>") {
  if (n < 1) throw UsageError("N must be >= 1");
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty score file");
  auto header = split_line(trim(line), '\t');
  if (header.empty() || header[0] != "#fairrank-scores")
    throw DataError(source + ": line 1: missing '#fairrank-scores' header");
  std::string tag = "imported";
  for (std::size_t h = 1; h < header.size(); ++h)
    if (header[h].starts_with("ranker_tag=")) tag = std::string(header[h].substr(11));

  std::vector<std::vector<Candidate>> rows(train.num_users());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split_line(line, '\t');
    if (f.size() < 3)
      throw DataError(detail::concat(source, ": line ", line_no, ": expected user, item, score[, rank]"));
    auto user = train.users.find(trim(f[0]));
    if (!user) throw DataError(detail::concat(source, ": line ", line_no, ": unknown user '", trim(f[0]), "'"));
    auto item = train.items.find(trim(f[1]));
    if (!item) throw DataError(detail::concat(source, ": line ", line_no, ": unknown item '", trim(f[1]), "'"));
    double score = 0;
    if (!parse_double(f[2], score) || !std::isfinite(score))
      throw DataError(detail::concat(source, ": line ", line_no, ": non-finite or invalid score '",
                                     trim(f[2]), "'"));
    rows[static_cast<std::size_t>(*user)].push_back({*item, score});
  }

  TrainIndex index(train);
  ScoreMatrix out(n, tag);
  out.reserve(train.num_users());
  for (std::size_t u = 0; u < rows.size(); ++u) {
    auto& row = rows[u];
    std::vector<Index> ids;
    for (const auto& c : row) {
      if (index.contains(static_cast<Index>(u), c.item))
        throw DataError(detail::concat(source, ": user '", train.users.token(static_cast<Index>(u)),
                                       "': candidate '", train.items.token(c.item),
                                       "' is one of the user's training items"));
      ids.push_back(c.item);
    }
    std::sort(ids.begin(), ids.end());
    auto dup = std::adjacent_find(ids.begin(), ids.end());
    if (dup != ids.end())
      throw DataError(detail::concat(source, ": user '", train.users.token(static_cast<Index>(u)),
                                     "': duplicate item '", train.items.token(*dup), "'"));
    out.push_row(detail::top_n(std::move(row), n));
  }
  return out;
}

inline ScoreMatrix import_scores(const std::string& path, const InteractionDataset& train, std::size_t n) {
  auto in = open_input(path);
  return read_scores(in, train, n, path);
}

struct RankerSpec {
  std::string name;  // label used in output paths and reports
  std::string type = "mostpop";  // mostpop | random | itemknn | import
  std::size_t n = 100;
  std::size_t neighbors = 50;
  std::uint64_t seed = 1;
  std::map<std::string, std::string> import_paths;  // dataset name -> score file

  nlohmann::json to_json() const {
    nlohmann::json j = {{"name", name}, {"type", type}, {"N", n}};
    if (type == "itemknn") j["neighbors"] = neighbors;
    if (type == "random") j["seed"] = seed;
    if (type == "import") j["paths"] = import_paths;
    return j;
  }

  static RankerSpec from_json(const nlohmann::json& j) {
    RankerSpec s;
    s.type = j.value("type", s.type);
    s.name = j.value("name", s.type);
    s.n = j.value("N", s.n);
    s.neighbors = j.value("neighbors", s.neighbors);
    s.seed = j.value("seed", s.seed);
    if (j.contains("paths")) s.import_paths = j.at("paths").get<std::map<std::string, std::string>>();
    if (s.type != "mostpop" && s.type != "random" && s.type != "itemknn" && s.type != "import")
      throw UsageError("unknown ranker type '" + s.type + "'");
    return s;
  }
};

inline ScoreMatrix build_scores(const RankerSpec& spec, const InteractionDataset& train,
                                const std::string& dataset_name = "") {
  if (spec.type == "mostpop") return mostpop_scores(train, spec.n);
  if (spec.type == "random") return random_scores(train, spec.n, spec.seed);
  if (spec.type == "itemknn") return itemknn_scores(train, spec.n, spec.neighbors);
  if (spec.type == "import") {
    auto it = spec.import_paths.find(dataset_name);
    if (it == spec.import_paths.end())
      throw DataError("ranker '" + spec.name + "' has no score file for dataset '" + dataset_name + "'");
    return import_scores(it->second, train, spec.n);
  }
  throw UsageError("unknown ranker type '" + spec.type + "'");
}

}  // namespace fairrank
