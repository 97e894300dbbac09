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
#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <istream>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairrank/common.hpp"
#include "json.hpp"

namespace fairrank {

// Dense index vocabulary. Indices are assigned in first-seen order.
class Vocabulary {
 public:
  Index intern(std::string_view token) {
    auto it = index_.find(std::string(token));
    if (it != index_.end()) return it->second;
    auto id = static_cast<Index>(tokens_.size());
    tokens_.emplace_back(token);
    index_.emplace(tokens_.back(), id);
    return id;
  }

  std::optional<Index> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(Index id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Index> index_;
};

struct Interaction {
  Index user = 0;
  Index item = 0;
  double weight = 1.0;
  std::optional<std::int64_t> timestamp;

  bool operator==(const Interaction&) const = default;
};

struct InteractionDataset {
  Vocabulary users;
  Vocabulary items;
  std::vector<Interaction> interactions;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t num_users() const { return users.size(); }
  std::size_t num_items() const { return items.size(); }
  std::size_t size() const { return interactions.size(); }

  // Same vocabularies, no interactions.
  InteractionDataset empty_like() const {
    InteractionDataset out;
    out.users = users;
    out.items = items;
    out.provenance = provenance;
    return out;
  }
};

// Column layout of a delimited interaction file. Negative columns are absent.
struct TextFormat {
  char delimiter = ',';
  int user_col = 0;
  int item_col = 1;
  int weight_col = 2;
  int timestamp_col = -1;
  bool skip_header = false;

  nlohmann::json to_json() const {
    return {{"delimiter", std::string(1, delimiter)},
            {"user_col", user_col},
            {"item_col", item_col},
            {"weight_col", weight_col},
            {"timestamp_col", timestamp_col},
            {"skip_header", skip_header}};
  }

  static TextFormat from_json(const nlohmann::json& j) {
    TextFormat f;
    if (j.contains("delimiter")) {
      auto d = j.at("delimiter").get<std::string>();
      if (d == "\\t" || d == "tab") d = "\t";
      if (d.size() != 1) throw UsageError("delimiter must be a single character");
      f.delimiter = d[0];
    }
    f.user_col = j.value("user_col", f.user_col);
    f.item_col = j.value("item_col", f.item_col);
    f.weight_col = j.value("weight_col", f.weight_col);
    f.timestamp_col = j.value("timestamp_col", f.timestamp_col);
    f.skip_header = j.value("skip_header", f.skip_header);
    return f;
  }
};

namespace detail {

inline std::uint64_t pair_key(Index user, Index item) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(user)) << 32) |
         static_cast<std::uint32_t>(item);
}

// Keeps the first-seen slot of each (user, item) pair; the retained record
// has the highest weight, then the latest timestamp.
inline void add_deduplicated(std::vector<Interaction>& out,
                             std::unordered_map<std::uint64_t, std::size_t>& seen,
                             const Interaction& rec) {
  auto [it, inserted] = seen.emplace(pair_key(rec.user, rec.item), out.size());
  if (inserted) {
    out.push_back(rec);
    return;
  }
  Interaction& kept = out[it->second];
  bool replace = rec.weight > kept.weight;
  if (rec.weight == kept.weight) {
    auto a = rec.timestamp.value_or(std::numeric_limits<std::int64_t>::min());
    auto b = kept.timestamp.value_or(std::numeric_limits<std::int64_t>::min());
    replace = a > b;
  }
  if (replace) kept = rec;
}

}  // namespace detail

inline InteractionDataset read_interactions(std::istream& in, const TextFormat& format,
                                            const std::string& source = "<stream>") {
  if (format.user_col < 0 || format.item_col < 0)
    throw UsageError("user and item columns are required");
  const int needed = std::max({format.user_col, format.item_col, format.weight_col,
                               format.timestamp_col}) + 1;

  InteractionDataset ds;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && format.skip_header) continue;
    if (trim(line).empty()) continue;
    auto fields = split_line(line, format.delimiter);
    if (static_cast<int>(fields.size()) < needed)
      throw DataError(detail::concat(source, ": line ", line_no, ": expected at least ",
                                     needed, " fields, found ", fields.size()));
    auto user = trim(fields[static_cast<std::size_t>(format.user_col)]);
    auto item = trim(fields[static_cast<std::size_t>(format.item_col)]);
    if (user.empty() || item.empty())
      throw DataError(detail::concat(source, ": line ", line_no, ": empty user or item id"));
    Interaction rec;
    if (format.weight_col >= 0) {
      auto text = fields[static_cast<std::size_t>(format.weight_col)];
      if (!parse_double(text, rec.weight) || !std::isfinite(rec.weight))
        throw DataError(detail::concat(source, ": line ", line_no, ": invalid weight '",
                                       trim(text), "'"));
      if (rec.weight < 0)
        throw DataError(detail::concat(source, ": line ", line_no, ": negative weight"));
    }
    if (format.timestamp_col >= 0) {
      std::int64_t ts = 0;
      auto text = trim(fields[static_cast<std::size_t>(format.timestamp_col)]);
      if (!parse_int64(text, ts))
        throw DataError(detail::concat(source, ": line ", line_no, ": invalid timestamp '",
                                       text, "'"));
      rec.timestamp = ts;
    }
    rec.user = ds.users.intern(user);
    rec.item = ds.items.intern(item);
    detail::add_deduplicated(ds.interactions, seen, rec);
  }
  if (ds.interactions.empty()) throw DataError(source + ": empty dataset");
  ds.provenance = {{"source", source}, {"format", format.to_json()}, {"steps", nlohmann::json::array()}};
  return ds;
}

inline InteractionDataset load_interactions(const std::string& path, const TextFormat& format) {
  auto in = open_input(path);
  return read_interactions(in, format, path);
}

// Builds a dataset from already-resolved records, applying the same
// deduplication rule as the text loader.
inline InteractionDataset make_dataset(std::size_t num_users, std::size_t num_items,
                                       const std::vector<Interaction>& records) {
  InteractionDataset ds;
  for (std::size_t u = 0; u < num_users; ++u) ds.users.intern("u" + std::to_string(u));
  for (std::size_t i = 0; i < num_items; ++i) ds.items.intern("i" + std::to_string(i));
  std::unordered_map<std::uint64_t, std::size_t> seen;
  for (const auto& rec : records) {
    if (rec.user < 0 || static_cast<std::size_t>(rec.user) >= num_users || rec.item < 0 ||
        static_cast<std::size_t>(rec.item) >= num_items)
      throw UsageError("interaction index out of vocabulary bounds");
    if (!(rec.weight >= 0)) throw UsageError("interaction weight must be non-negative");
    detail::add_deduplicated(ds.interactions, seen, rec);
  }
  ds.provenance = {{"source", "<memory>"}, {"steps", nlohmann::json::array()}};
  return ds;
}

inline std::vector<std::size_t> user_degrees(const InteractionDataset& ds) {
  std::vector<std::size_t> deg(ds.num_users(), 0);
  for (const auto& r : ds.interactions) ++deg[static_cast<std::size_t>(r.user)];
  return deg;
}

inline std::vector<std::size_t> item_degrees(const InteractionDataset& ds) {
  std::vector<std::size_t> deg(ds.num_items(), 0);
  for (const auto& r : ds.interactions) ++deg[static_cast<std::size_t>(r.item)];
  return deg;
}

// Per-user item lists in interaction order.
inline std::vector<std::vector<Index>> user_item_lists(const InteractionDataset& ds) {
  std::vector<std::vector<Index>> lists(ds.num_users());
  for (const auto& r : ds.interactions) lists[static_cast<std::size_t>(r.user)].push_back(r.item);
  return lists;
}

// Iteratively drops users and items with fewer than k interactions until
// every survivor has degree >= k. Surviving tokens keep their relative order.
inline InteractionDataset kcore_filter(const InteractionDataset& ds, int k) {
  if (k < 1) throw UsageError("k-core requires k >= 1");
  const auto kk = static_cast<std::size_t>(k);
  auto udeg = user_degrees(ds);
  auto ideg = item_degrees(ds);
  std::vector<std::vector<std::size_t>> by_user(ds.num_users()), by_item(ds.num_items());
  for (std::size_t e = 0; e < ds.interactions.size(); ++e) {
    by_user[static_cast<std::size_t>(ds.interactions[e].user)].push_back(e);
    by_item[static_cast<std::size_t>(ds.interactions[e].item)].push_back(e);
  }
  std::vector<char> edge_alive(ds.interactions.size(), 1);
  std::vector<char> user_alive(ds.num_users(), 1), item_alive(ds.num_items(), 1);
  // Queue entries: (is_item, index).
  std::deque<std::pair<bool, std::size_t>> queue;
  for (std::size_t u = 0; u < udeg.size(); ++u)
    if (udeg[u] < kk) queue.emplace_back(false, u);
  for (std::size_t i = 0; i < ideg.size(); ++i)
    if (ideg[i] < kk) queue.emplace_back(true, i);

  while (!queue.empty()) {
    auto [is_item, idx] = queue.front();
    queue.pop_front();
    auto& alive = is_item ? item_alive : user_alive;
    if (!alive[idx]) continue;
    alive[idx] = 0;
    for (auto e : (is_item ? by_item : by_user)[idx]) {
      if (!edge_alive[e]) continue;
      edge_alive[e] = 0;
      const auto& r = ds.interactions[e];
      if (is_item) {
        auto u = static_cast<std::size_t>(r.user);
        if (user_alive[u] && --udeg[u] < kk) queue.emplace_back(false, u);
      } else {
        auto i = static_cast<std::size_t>(r.item);
        if (item_alive[i] && --ideg[i] < kk) queue.emplace_back(true, i);
      }
    }
  }

  InteractionDataset out;
  std::vector<Index> user_map(ds.num_users(), -1), item_map(ds.num_items(), -1);
  for (std::size_t u = 0; u < ds.num_users(); ++u)
    if (user_alive[u]) user_map[u] = out.users.intern(ds.users.token(static_cast<Index>(u)));
  for (std::size_t i = 0; i < ds.num_items(); ++i)
    if (item_alive[i]) item_map[i] = out.items.intern(ds.items.token(static_cast<Index>(i)));
  for (std::size_t e = 0; e < ds.interactions.size(); ++e) {
    if (!edge_alive[e]) continue;
    Interaction r = ds.interactions[e];
    r.user = user_map[static_cast<std::size_t>(r.user)];
    r.item = item_map[static_cast<std::size_t>(r.item)];
    out.interactions.push_back(r);
  }
  out.provenance = ds.provenance;
  if (!out.provenance.contains("steps")) out.provenance["steps"] = nlohmann::json::array();
  out.provenance["steps"].push_back({{"op", "kcore"}, {"k", k}});
  return out;
}

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;

  void validate() const {
    if (!(train > 0 && validation > 0 && test > 0))
      throw UsageError("split ratios must be positive");
    if (std::abs(train + validation + test - 1.0) > 1e-9)
      throw UsageError("split ratios must sum to 1");
  }
};

struct SplitDataset {
  InteractionDataset train;
  InteractionDataset validation;
  InteractionDataset test;
  std::uint64_t split_seed = 0;
  SplitRatios ratios;
};

// Per-user share sizes: floors of each ratio, remainder units go to train
// first and then test. Users with fewer than 3 interactions keep everything
// in train.
inline std::array<std::size_t, 3> split_sizes(std::size_t count, const SplitRatios& ratios) {
  if (count < 3) return {count, 0, 0};
  std::array<std::size_t, 3> sizes = {floor_count(ratios.train, count),
                                      floor_count(ratios.validation, count),
                                      floor_count(ratios.test, count)};
  std::size_t rem = count - (sizes[0] + sizes[1] + sizes[2]);
  for (std::size_t r = 0; r < rem; ++r) ++sizes[r % 2 == 0 ? 0 : 2];
  return sizes;
}

inline SplitDataset split(const InteractionDataset& ds, const SplitRatios& ratios,
                          std::uint64_t seed) {
  ratios.validate();
  std::vector<std::vector<std::size_t>> positions(ds.num_users());
  for (std::size_t e = 0; e < ds.interactions.size(); ++e)
    positions[static_cast<std::size_t>(ds.interactions[e].user)].push_back(e);

  // 0 = train, 1 = validation, 2 = test
  std::vector<std::uint8_t> part(ds.interactions.size(), 0);
  for (std::size_t u = 0; u < positions.size(); ++u) {
    auto& pos = positions[u];
    std::mt19937_64 rng(mix_seed(seed, u));
    shuffle_in_place(pos, rng);
    auto sizes = split_sizes(pos.size(), ratios);
    for (std::size_t r = 0; r < pos.size(); ++r)
      part[pos[r]] = r < sizes[0] ? 0 : (r < sizes[0] + sizes[1] ? 1 : 2);
  }

  SplitDataset out{ds.empty_like(), ds.empty_like(), ds.empty_like(), seed, ratios};
  InteractionDataset* parts[3] = {&out.train, &out.validation, &out.test};
  for (std::size_t e = 0; e < ds.interactions.size(); ++e)
    parts[part[e]]->interactions.push_back(ds.interactions[e]);
  const char* names[3] = {"train", "validation", "test"};
  for (int p = 0; p < 3; ++p) {
    if (!parts[p]->provenance.contains("steps")) parts[p]->provenance["steps"] = nlohmann::json::array();
    parts[p]->provenance["steps"].push_back(
        {{"op", "split"}, {"part", names[p]}, {"seed", seed},
         {"ratios", {ratios.train, ratios.validation, ratios.test}}});
  }
  return out;
}

inline double sparsity(std::size_t num_users, std::size_t num_items, std::size_t interactions) {
  if (num_users == 0 || num_items == 0) throw DataError("sparsity undefined for an empty matrix");
  return 1.0 - static_cast<double>(interactions) /
                   (static_cast<double>(num_users) * static_cast<double>(num_items));
}

struct DatasetStats {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_interactions = 0;
  double sparsity = 0;
  // (threshold, fraction with degree >= threshold)
  std::vector<std::pair<std::size_t, double>> user_fraction_at_least;
  std::vector<std::pair<std::size_t, double>> item_fraction_at_least;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"users", num_users}, {"items", num_items},
                        {"interactions", num_interactions}, {"sparsity", sparsity}};
    j["user_fraction_at_least"] = nlohmann::json::object();
    j["item_fraction_at_least"] = nlohmann::json::object();
    for (auto [t, f] : user_fraction_at_least) j["user_fraction_at_least"][std::to_string(t)] = f;
    for (auto [t, f] : item_fraction_at_least) j["item_fraction_at_least"][std::to_string(t)] = f;
    return j;
  }
};

inline DatasetStats dataset_stats(const InteractionDataset& ds,
                                  const std::vector<std::size_t>& thresholds = {}) {
  DatasetStats st;
  st.num_users = ds.num_users();
  st.num_items = ds.num_items();
  st.num_interactions = ds.size();
  st.sparsity = sparsity(st.num_users, st.num_items, st.num_interactions);
  auto fraction_at_least = [](std::vector<std::size_t> deg, std::size_t t) {
    auto hits = std::count_if(deg.begin(), deg.end(), [t](std::size_t d) { return d >= t; });
    return static_cast<double>(hits) / static_cast<double>(deg.size());
  };
  auto udeg = user_degrees(ds);
  auto ideg = item_degrees(ds);
  for (auto t : thresholds) {
    st.user_fraction_at_least.emplace_back(t, fraction_at_least(udeg, t));
    st.item_fraction_at_least.emplace_back(t, fraction_at_least(ideg, t));
  }
  return st;
}

// Synthetic implicit-feedback data with Zipf item popularity, skewed user
// activity, and clustered tastes so that neighborhood rankers have signal.
struct ZipfSpec {
  std::size_t users = 1000;
  std::size_t items = 500;
  std::size_t min_degree = 10;
  std::size_t max_degree = 120;
  double exponent = 1.0;
  std::size_t clusters = 8;
  double affinity = 0.7;  // probability a draw comes from the user's cluster
  std::uint64_t seed = 7;

  nlohmann::json to_json() const {
    return {{"users", users}, {"items", items}, {"min_degree", min_degree},
            {"max_degree", max_degree}, {"exponent", exponent}, {"clusters", clusters},
            {"affinity", affinity}, {"seed", seed}};
  }

  static ZipfSpec from_json(const nlohmann::json& j) {
    ZipfSpec s;
    s.users = j.value("users", s.users);
    s.items = j.value("items", s.items);
    s.min_degree = j.value("min_degree", s.min_degree);
    s.max_degree = j.value("max_degree", s.max_degree);
    s.exponent = j.value("exponent", s.exponent);
    s.clusters = j.value("clusters", s.clusters);
    s.affinity = j.value("affinity", s.affinity);
    s.seed = j.value("seed", s.seed);
    return s;
  }
};

inline InteractionDataset make_zipf_dataset(const ZipfSpec& spec) {
  if (spec.users == 0 || spec.items == 0 || spec.clusters == 0)
    throw UsageError("synthetic dataset needs users, items and clusters");
  if (spec.min_degree > spec.max_degree || spec.max_degree > spec.items)
    throw UsageError("synthetic degrees must satisfy min <= max <= items");

  // Popularity rank r has weight 1/(r+1)^s. Item index == popularity rank.
  std::vector<double> cumulative(spec.items);
  double total = 0;
  for (std::size_t r = 0; r < spec.items; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), spec.exponent);
    cumulative[r] = total;
  }
  // Cluster c owns items with index % clusters == c.
  std::vector<std::vector<double>> cluster_cum(spec.clusters);
  std::vector<std::vector<Index>> cluster_items(spec.clusters);
  for (std::size_t r = 0; r < spec.items; ++r) {
    auto c = r % spec.clusters;
    double prev = cluster_cum[c].empty() ? 0.0 : cluster_cum[c].back();
    cluster_cum[c].push_back(prev + 1.0 / std::pow(static_cast<double>(r + 1), spec.exponent));
    cluster_items[c].push_back(static_cast<Index>(r));
  }
  auto draw = [](const std::vector<double>& cum, std::mt19937_64& rng) {
    double x = uniform_unit(rng) * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), x);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cum.begin(),
                                                             static_cast<std::ptrdiff_t>(cum.size()) - 1));
  };

  std::vector<Interaction> records;
  for (std::size_t u = 0; u < spec.users; ++u) {
    std::mt19937_64 rng(mix_seed(spec.seed, u));
    double a = uniform_unit(rng);
    auto degree = spec.min_degree +
                  static_cast<std::size_t>(static_cast<double>(spec.max_degree - spec.min_degree) * a * a * a);
    auto cluster = static_cast<std::size_t>(uniform_below(rng, spec.clusters));
    std::vector<char> taken(spec.items, 0);
    std::size_t have = 0;
    std::size_t attempts = 0;
    while (have < degree) {
      std::size_t item;
      if (++attempts > 50 * spec.items) {
        // Fall back to the first untaken item so pathological specs terminate.
        item = static_cast<std::size_t>(std::find(taken.begin(), taken.end(), 0) - taken.begin());
      } else if (uniform_unit(rng) < spec.affinity && cluster_items[cluster].size() > 0) {
        item = static_cast<std::size_t>(cluster_items[cluster][draw(cluster_cum[cluster], rng)]);
      } else {
        item = draw(cumulative, rng);
      }
      if (taken[item]) continue;
      taken[item] = 1;
      ++have;
      records.push_back({static_cast<Index>(u), static_cast<Index>(item), 1.0, std::nullopt});
    }
  }
  auto ds = make_dataset(spec.users, spec.items, records);
  ds.provenance = {{"source", "synthetic-zipf"}, {"spec", spec.to_json()},
                   {"steps", nlohmann::json::array()}};
  return ds;
}

// ---------------------------------------------------------------------------
// Canonical on-disk form: a directory holding the vocabularies, the three
// split parts with dense indices, and manifest.json.

namespace detail {

inline void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto out = open_output(path.string());
  for (std::size_t i = 0; i < vocab.size(); ++i) out << i << '\t' << vocab.tokens()[i] << '\n';
}

inline Vocabulary read_vocabulary(const std::filesystem::path& path) {
  auto in = open_input(path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_line(line, '\t');
    std::int64_t idx = 0;
    if (fields.size() != 2 || !parse_int64(fields[0], idx) ||
        idx != static_cast<std::int64_t>(vocab.size()))
      throw DataError(detail::concat(path.string(), ": line ", line_no, ": malformed vocabulary row"));
    vocab.intern(trim(fields[1]));
  }
  return vocab;
}

inline void write_indexed(const std::filesystem::path& path, const InteractionDataset& ds) {
  auto out = open_output(path.string());
  for (const auto& r : ds.interactions) {
    out << r.user << '\t' << r.item << '\t' << format_double(r.weight) << '\t';
    if (r.timestamp) out << *r.timestamp;
    out << '\n';
  }
}

inline std::vector<Interaction> read_indexed(const std::filesystem::path& path,
                                             std::size_t n, std::size_t m) {
  auto in = open_input(path.string());
  std::vector<Interaction> recs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_line(line, '\t');
    std::int64_t u = 0, i = 0, ts = 0;
    Interaction r;
    if (f.size() < 3 || !parse_int64(f[0], u) || !parse_int64(f[1], i) ||
        !parse_double(f[2], r.weight) || u < 0 || i < 0 ||
        static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(i) >= m)
      throw DataError(detail::concat(path.string(), ": line ", line_no, ": malformed record"));
    r.user = static_cast<Index>(u);
    r.item = static_cast<Index>(i);
    if (f.size() >= 4 && !trim(f[3]).empty()) {
      if (!parse_int64(trim(f[3]), ts))
        throw DataError(detail::concat(path.string(), ": line ", line_no, ": bad timestamp"));
      r.timestamp = ts;
    }
    recs.push_back(r);
  }
  return recs;
}

}  // namespace detail

inline void write_split_dataset(const std::filesystem::path& dir, const SplitDataset& split_ds,
                                const nlohmann::json& preprocessing = nlohmann::json::object()) {
  std::filesystem::create_directories(dir);
  detail::write_vocabulary(dir / "users.tsv", split_ds.train.users);
  detail::write_vocabulary(dir / "items.tsv", split_ds.train.items);
  detail::write_indexed(dir / "train.tsv", split_ds.train);
  detail::write_indexed(dir / "validation.tsv", split_ds.validation);
  detail::write_indexed(dir / "test.tsv", split_ds.test);
  nlohmann::json manifest = {
      {"n", split_ds.train.num_users()},
      {"m", split_ds.train.num_items()},
      {"counts", {{"train", split_ds.train.size()},
                  {"validation", split_ds.validation.size()},
                  {"test", split_ds.test.size()}}},
      {"seed", split_ds.split_seed},
      {"ratios", {split_ds.ratios.train, split_ds.ratios.validation, split_ds.ratios.test}},
      {"preprocessing", preprocessing},
      {"provenance", split_ds.train.provenance}};
  auto out = open_output((dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

inline SplitDataset read_split_dataset(const std::filesystem::path& dir) {
  auto in = open_input((dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }
  auto users = detail::read_vocabulary(dir / "users.tsv");
  auto items = detail::read_vocabulary(dir / "items.tsv");
  SplitDataset out;
  InteractionDataset* parts[3] = {&out.train, &out.validation, &out.test};
  const char* names[3] = {"train.tsv", "validation.tsv", "test.tsv"};
  for (int p = 0; p < 3; ++p) {
    parts[p]->users = users;
    parts[p]->items = items;
    parts[p]->interactions = detail::read_indexed(dir / names[p], users.size(), items.size());
    parts[p]->provenance = manifest.value("provenance", nlohmann::json::object());
  }
  out.split_seed = manifest.value("seed", std::uint64_t{0});
  if (manifest.contains("ratios") && manifest["ratios"].size() == 3)
    out.ratios = {manifest["ratios"][0], manifest["ratios"][1], manifest["ratios"][2]};
  return out;
}

}  // namespace fairrank
