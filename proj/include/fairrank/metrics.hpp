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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fairrank/common.hpp"
#include "fairrank/dataio.hpp"
#include "fairrank/segmentation.hpp"
#include "json.hpp"

namespace fairrank {

// One recommended item list per user, best first.
using Recommendations = std::vector<std::vector<Index>>;

struct NdcgResult {
  std::vector<std::optional<double>> per_user;  // empty for users without test items
  double all = 0;
  double advantaged = 0;
  double protected_ = 0;
  std::size_t users_all = 0;
  std::size_t users_advantaged = 0;
  std::size_t users_protected = 0;
};

// Binary-relevance nDCG@K against the test split.
inline std::vector<std::optional<double>> ndcg_per_user(const Recommendations& lists,
                                                        const InteractionDataset& test, std::size_t k) {
  if (k < 1) throw UsageError("K must be >= 1");
  auto relevant = user_item_lists(test);
  for (auto& v : relevant) std::sort(v.begin(), v.end());
  std::vector<std::optional<double>> out(test.num_users());
  for (std::size_t u = 0; u < out.size(); ++u) {
    if (relevant[u].empty()) continue;
    double dcg = 0;
    if (u < lists.size()) {
      for (std::size_t r = 0; r < std::min(k, lists[u].size()); ++r)
        if (std::binary_search(relevant[u].begin(), relevant[u].end(), lists[u][r]))
          dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
    double idcg = 0;
    for (std::size_t r = 0; r < std::min(k, relevant[u].size()); ++r)
      idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    out[u] = dcg / idcg;
  }
  return out;
}

// Means in ascending user order over users that have a value.
inline NdcgResult group_ndcg(std::vector<std::optional<double>> per_user, const GroupAssignment& groups) {
  if (groups.num_users() != per_user.size())
    throw DataError("user group labels do not cover every evaluated user");
  NdcgResult res;
  double sum_all = 0, sum_adv = 0, sum_prot = 0;
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    if (!per_user[u]) continue;
    double v = *per_user[u];
    sum_all += v;
    ++res.users_all;
    if (groups.user_group[u] == Group::kAdvantaged) {
      sum_adv += v;
      ++res.users_advantaged;
    } else {
      sum_prot += v;
      ++res.users_protected;
    }
  }
  auto mean = [](double s, std::size_t c) { return c == 0 ? std::nan("") : s / static_cast<double>(c); };
  res.all = mean(sum_all, res.users_all);
  res.advantaged = mean(sum_adv, res.users_advantaged);
  res.protected_ = mean(sum_prot, res.users_protected);
  res.per_user = std::move(per_user);
  return res;
}

inline NdcgResult ndcg_at_k(const Recommendations& lists, const InteractionDataset& test,
                            const GroupAssignment& groups, std::size_t k) {
  return group_ndcg(ndcg_per_user(lists, test, k), groups);
}

// Signed: positive when the advantaged group is served better.
inline double dcf_from_means(double advantaged_mean, double protected_mean) {
  return advantaged_mean - protected_mean;
}

inline double dcf(const NdcgResult& ndcg) {
  if (ndcg.users_advantaged == 0 || ndcg.users_protected == 0)
    throw DataError("DCF undefined: a user group has no evaluated users");
  return dcf_from_means(ndcg.advantaged, ndcg.protected_);
}

struct Exposure {
  double short_fraction = 0;
  double long_fraction = 0;
  double dpf = 0;
  std::size_t slots = 0;
};

inline double dpf_from_fractions(double short_fraction, double long_fraction) {
  return short_fraction - long_fraction;
}

// Share of recommendation slots taken by short-head vs long-tail items.
inline Exposure exposure_and_dpf(const Recommendations& lists, const GroupAssignment& groups) {
  std::size_t short_slots = 0, long_slots = 0;
  for (const auto& row : lists)
    for (auto item : row) {
      if (item < 0 || static_cast<std::size_t>(item) >= groups.num_items())
        throw DataError(detail::concat("recommended item ", item, " has no group label"));
      (groups.item_group[static_cast<std::size_t>(item)] == Group::kAdvantaged ? short_slots : long_slots)++;
    }
  Exposure e;
  e.slots = short_slots + long_slots;
  if (e.slots == 0) throw DataError("exposure undefined: no recommendation slots");
  e.short_fraction = static_cast<double>(short_slots) / static_cast<double>(e.slots);
  e.long_fraction = static_cast<double>(long_slots) / static_cast<double>(e.slots);
  e.dpf = dpf_from_fractions(e.short_fraction, e.long_fraction);
  return e;
}

// Mean self-information -log2(pop_i) over slots, pop_i being the share of
// users who consumed item i in training (floored at 1/n).
inline double novelty(const Recommendations& lists, const InteractionDataset& train) {
  const double n = static_cast<double>(train.num_users());
  if (n == 0) return 0.0;
  auto deg = item_degrees(train);
  double total = 0;
  std::size_t slots = 0;
  for (const auto& row : lists)
    for (auto item : row) {
      auto users = std::max<std::size_t>(deg.at(static_cast<std::size_t>(item)), 1);
      total += -std::log2(static_cast<double>(users) / n);
      ++slots;
    }
  return slots == 0 ? 0.0 : total / static_cast<double>(slots);
}

inline double coverage(const Recommendations& lists, std::size_t catalog_size) {
  if (catalog_size == 0) return 0.0;
  std::vector<char> seen(catalog_size, 0);
  std::size_t distinct = 0;
  for (const auto& row : lists)
    for (auto item : row)
      if (!seen.at(static_cast<std::size_t>(item))++) ++distinct;
  return static_cast<double>(distinct) / static_cast<double>(catalog_size);
}

inline double mcpf(double dcf_value, double dpf_value, double w = 0.5) {
  if (!(w >= 0 && w <= 1)) throw UsageError("mCPF weight must lie in [0, 1]");
  return w * dpf_value + (1 - w) * dcf_value;
}

// Relative mCPF improvement over a reference, in percent (absolute value).
inline double delta_pct(double mcpf_reference, double mcpf_value) {
  if (mcpf_reference == 0) throw DataError("delta undefined: reference mCPF is zero");
  return std::abs((mcpf_reference - mcpf_value) / mcpf_reference) * 100.0;
}

struct EvaluationReport {
  std::string dataset;
  std::string ranker;
  std::string mode = "N";
  double lambda1 = 0;
  double lambda2 = 0;
  std::string user_method = "activity_ug1";
  std::string item_method = "popularity_ig";
  std::size_t k = 10;
  double w = 0.5;

  double ndcg_all = 0;
  double ndcg_advantaged = 0;
  double ndcg_protected = 0;
  double dcf = 0;
  double novelty = 0;
  double coverage = 0;
  double exposure_short = 0;
  double exposure_long = 0;
  double dpf = 0;
  double mcpf = 0;
  std::optional<double> mcpf_over_all;
  std::optional<double> delta_pct;
  std::size_t users_evaluated = 0;

  nlohmann::json to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
    return {{"dataset", dataset}, {"ranker", ranker}, {"mode", mode},
            {"lambda1", lambda1}, {"lambda2", lambda2}, {"user_method", user_method},
            {"item_method", item_method}, {"K", k}, {"w", w},
            {"ndcg_all", ndcg_all}, {"ndcg_advantaged", ndcg_advantaged},
            {"ndcg_protected", ndcg_protected}, {"dcf", dcf}, {"novelty", novelty},
            {"coverage", coverage}, {"exposure_short", exposure_short},
            {"exposure_long", exposure_long}, {"dpf", dpf}, {"mcpf", mcpf},
            {"mcpf_over_all", opt(mcpf_over_all)}, {"delta_pct", opt(delta_pct)},
            {"users_evaluated", users_evaluated}};
  }

  static EvaluationReport from_json(const nlohmann::json& j) {
    EvaluationReport r;
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
      return j.at(key).get<double>();
    };
    r.dataset = j.value("dataset", "");
    r.ranker = j.value("ranker", "");
    r.mode = j.value("mode", "N");
    r.lambda1 = j.value("lambda1", 0.0);
    r.lambda2 = j.value("lambda2", 0.0);
    r.user_method = j.value("user_method", r.user_method);
    r.item_method = j.value("item_method", r.item_method);
    r.k = j.value("K", r.k);
    r.w = j.value("w", r.w);
    r.ndcg_all = j.at("ndcg_all").get<double>();
    r.ndcg_advantaged = j.at("ndcg_advantaged").get<double>();
    r.ndcg_protected = j.at("ndcg_protected").get<double>();
    r.dcf = j.at("dcf").get<double>();
    r.novelty = j.value("novelty", 0.0);
    r.coverage = j.value("coverage", 0.0);
    r.exposure_short = j.at("exposure_short").get<double>();
    r.exposure_long = j.at("exposure_long").get<double>();
    r.dpf = j.at("dpf").get<double>();
    r.mcpf = j.at("mcpf").get<double>();
    r.mcpf_over_all = opt("mcpf_over_all");
    r.delta_pct = opt("delta_pct");
    r.users_evaluated = j.value("users_evaluated", std::size_t{0});
    return r;
  }
};

inline EvaluationReport evaluate(const Recommendations& lists, const InteractionDataset& train,
                                 const InteractionDataset& test, const GroupAssignment& groups,
                                 std::size_t k, double w = 0.5) {
  EvaluationReport rep;
  rep.k = k;
  rep.w = w;
  rep.user_method = to_string(groups.user_method);
  auto nd = ndcg_at_k(lists, test, groups, k);
  rep.ndcg_all = nd.all;
  rep.ndcg_advantaged = nd.advantaged;
  rep.ndcg_protected = nd.protected_;
  rep.users_evaluated = nd.users_all;
  rep.dcf = dcf(nd);
  auto ex = exposure_and_dpf(lists, groups);
  rep.exposure_short = ex.short_fraction;
  rep.exposure_long = ex.long_fraction;
  rep.dpf = ex.dpf;
  rep.novelty = novelty(lists, train);
  rep.coverage = coverage(lists, train.num_items());
  rep.mcpf = mcpf(rep.dcf, rep.dpf, w);
  if (rep.ndcg_all != 0) rep.mcpf_over_all = rep.mcpf / rep.ndcg_all;
  return rep;
}

// Tab-separated summary laid out like the accuracy / exposure / both
// column groups of a results table.
inline void write_report_header(std::ostream& out) {
  out << "dataset\tranker\tmode\tlambda1\tlambda2\tndcg_all\tndcg_advantaged\tndcg_protected\tdcf"
         "\tnovelty\tcoverage\texposure_short\texposure_long\tdpf\tmcpf\tmcpf_over_all\tdelta_pct"
         "\tselected\n";
}

inline void write_report_row(std::ostream& out, const EvaluationReport& r, bool selected = false) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  out << r.dataset << '\t' << r.ranker << '\t' << r.mode << '\t' << format_double(r.lambda1) << '\t'
      << format_double(r.lambda2) << '\t' << format_double(r.ndcg_all) << '\t'
      << format_double(r.ndcg_advantaged) << '\t' << format_double(r.ndcg_protected) << '\t'
      << format_double(r.dcf) << '\t' << format_double(r.novelty) << '\t' << format_double(r.coverage)
      << '\t' << format_double(r.exposure_short) << '\t' << format_double(r.exposure_long) << '\t'
      << format_double(r.dpf) << '\t' << format_double(r.mcpf) << '\t' << opt(r.mcpf_over_all) << '\t'
      << opt(r.delta_pct) << '\t' << (selected ? 1 : 0) << '\n';
}

}  // namespace fairrank
