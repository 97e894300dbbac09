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
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fairrank/baserank.hpp"
#include "fairrank/common.hpp"
#include "fairrank/segmentation.hpp"
#include "json.hpp"

// Fair re-ranking of top-N candidate lists into top-K lists.
//
// Each user's list is chosen to maximize
//
//   sum_i S_ui A_ui + lambda1 * sum_i CF_ui A_ui + lambda2 * sum_i PF_ui A_ui
//   subject to sum_i A_ui = K,
//
// where CF_ui = UG_u * MC(u, i) and PF_ui = PG_i * MP(u, i) are signed gains
// (+1 for protected users / long-tail items, -1 otherwise). The problem
// separates per user into a unit-weight knapsack of capacity K, so taking
// the K largest adjusted scores is optimal, and the LP relaxation has an
// integral optimum except when the K-th adjusted score is tied.

namespace fairrank {

enum class Mode { kNone, kConsumer, kProducer, kBoth };
enum class Solver { kGreedy, kLp };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kNone: return "N";
    case Mode::kConsumer: return "C";
    case Mode::kProducer: return "P";
    case Mode::kBoth: return "CP";
  }
  return "?";
}

inline Mode mode_from_string(std::string_view s) {
  if (s == "N") return Mode::kNone;
  if (s == "C") return Mode::kConsumer;
  if (s == "P") return Mode::kProducer;
  if (s == "CP") return Mode::kBoth;
  throw UsageError("unknown fairness mode '" + std::string(s) + "' (expected N, C, P or CP)");
}

inline const char* to_string(Solver s) { return s == Solver::kGreedy ? "greedy" : "lp"; }

inline Solver solver_from_string(std::string_view s) {
  if (s == "greedy") return Solver::kGreedy;
  if (s == "lp") return Solver::kLp;
  throw UsageError("unknown solver '" + std::string(s) + "' (expected greedy or lp)");
}

struct RerankConfig {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t k = 10;
  Mode mode = Mode::kBoth;
  Solver solver = Solver::kGreedy;

  double effective_lambda1() const {
    return (mode == Mode::kConsumer || mode == Mode::kBoth) ? lambda1 : 0.0;
  }
  double effective_lambda2() const {
    return (mode == Mode::kProducer || mode == Mode::kBoth) ? lambda2 : 0.0;
  }

  void validate() const {
    if (k < 1) throw UsageError("K must be >= 1");
    if (!(std::isfinite(lambda1) && lambda1 >= 0) || !(std::isfinite(lambda2) && lambda2 >= 0))
      throw UsageError("lambda1 and lambda2 must be finite and non-negative");
  }

  // Weights above 1 are accepted for ablations but flagged.
  bool outside_unit_range() const { return lambda1 > 1.0 || lambda2 > 1.0; }

  nlohmann::json to_json() const {
    return {{"mode", to_string(mode)}, {"lambda1", lambda1}, {"lambda2", lambda2},
            {"effective_lambda1", effective_lambda1()}, {"effective_lambda2", effective_lambda2()},
            {"K", k}, {"solver", to_string(solver)}};
  }
};

// Signed per-candidate gains aligned with ScoreMatrix::entries().
struct GainTables {
  std::vector<double> consumer;
  std::vector<double> producer;
  std::string definition_tag;
};

inline constexpr const char* kDiscountedScoreTag = "mc=discounted_score/ideal_dcg@K;mp=slot_exposure";

// DCG of the first k base scores of a row (rows are already score-sorted).
inline double ideal_dcg(std::span<const Candidate> row, std::size_t k) {
  double dcg = 0;
  for (std::size_t r = 0; r < std::min(k, row.size()); ++r)
    dcg += row[r].score / std::log2(static_cast<double>(r) + 2.0);
  return dcg;
}

// UG_u * S_ui / log2(rank + 1) / |ideal DCG@K of u|, with rank 1-based.
// Zero when the user's ideal DCG is zero.
inline double consumer_gain(const ScoreMatrix& scores, const GroupAssignment& groups, Index u,
                            std::size_t rank, std::size_t k) {
  auto row = scores.row(u);
  if (rank < 1 || rank > row.size()) throw UsageError("candidate rank out of range");
  double norm = std::abs(ideal_dcg(row, k));
  if (norm == 0) return 0.0;
  double mc = row[rank - 1].score / std::log2(static_cast<double>(rank) + 1.0) / norm;
  return groups.user_sign(u) * mc;
}

// One slot of exposure, signed by the item's group.
inline double producer_gain(const GroupAssignment& groups, Index item) {
  if (item < 0 || static_cast<std::size_t>(item) >= groups.item_group.size())
    throw DataError(detail::concat("item ", item, " has no group label"));
  return groups.item_sign(item);
}

inline GainTables build_gain_tables(const ScoreMatrix& scores, const GroupAssignment& groups,
                                    std::size_t k) {
  if (groups.num_users() != scores.num_users())
    throw DataError(detail::concat("group labels cover ", groups.num_users(), " users, score matrix has ",
                                   scores.num_users()));
  GainTables g;
  g.definition_tag = kDiscountedScoreTag;
  g.consumer.resize(scores.total_entries());
  g.producer.resize(scores.total_entries());
  for (std::size_t u = 0; u < scores.num_users(); ++u) {
    auto uid = static_cast<Index>(u);
    auto row = scores.row(uid);
    auto base = scores.row_offset(uid);
    double norm = std::abs(ideal_dcg(row, k));
    int sign = groups.user_sign(uid);
    for (std::size_t r = 0; r < row.size(); ++r) {
      g.consumer[base + r] =
          norm == 0 ? 0.0 : sign * (row[r].score / std::log2(static_cast<double>(r) + 2.0) / norm);
      g.producer[base + r] = producer_gain(groups, row[r].item);
    }
  }
  return g;
}

inline void check_dimensions(const ScoreMatrix& scores, const GainTables& gains) {
  if (gains.consumer.size() != scores.total_entries() || gains.producer.size() != scores.total_entries())
    throw DataError("gain tables do not match the score matrix");
}

namespace detail {

// Adjusted scores of one user's row written into `out`.
inline void adjust_row(const ScoreMatrix& scores, const GainTables& gains, double l1, double l2,
                       Index u, std::vector<double>& out) {
  auto row = scores.row(u);
  auto base = scores.row_offset(u);
  out.resize(row.size());
  for (std::size_t r = 0; r < row.size(); ++r) {
    double v = row[r].score + l1 * gains.consumer[base + r] + l2 * gains.producer[base + r];
    if (!std::isfinite(v))
      throw DataError(concat("non-finite adjusted score for user ", u, " at rank ", r + 1));
    out[r] = v;
  }
}

}  // namespace detail

// S + lambda1 * CF + lambda2 * PF per candidate, with mode gating.
inline std::vector<double> adjusted_scores(const ScoreMatrix& scores, const GainTables& gains,
                                           const RerankConfig& cfg) {
  check_dimensions(scores, gains);
  std::vector<double> out, row;
  out.reserve(scores.total_entries());
  for (std::size_t u = 0; u < scores.num_users(); ++u) {
    detail::adjust_row(scores, gains, cfg.effective_lambda1(), cfg.effective_lambda2(),
                       static_cast<Index>(u), row);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

struct RankedItem {
  Index item = 0;
  std::size_t candidate_rank = 0;  // 1-based position in the base list
  double adjusted = 0;

  bool operator==(const RankedItem&) const = default;
};

class RankedLists {
 public:
  RankedLists() = default;
  explicit RankedLists(const RerankConfig& cfg) : config(cfg) {}

  RerankConfig config;
  double objective_value = 0;
  std::vector<Index> short_users;  // fewer than K candidates

  std::size_t num_users() const { return offsets_.size() - 1; }
  std::span<const RankedItem> row(Index u) const {
    auto uu = static_cast<std::size_t>(u);
    return {entries_.data() + offsets_.at(uu), offsets_.at(uu + 1) - offsets_[uu]};
  }
  void push_row(std::span<const RankedItem> row) {
    entries_.insert(entries_.end(), row.begin(), row.end());
    offsets_.push_back(entries_.size());
  }
  void reserve(std::size_t users, std::size_t k) {
    offsets_.reserve(users + 1);
    entries_.reserve(users * k);
  }

  std::vector<std::vector<Index>> item_lists() const {
    std::vector<std::vector<Index>> out(num_users());
    for (std::size_t u = 0; u < out.size(); ++u)
      for (const auto& e : row(static_cast<Index>(u))) out[u].push_back(e.item);
    return out;
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<RankedItem> entries_;
};

namespace detail {

// Positions of one row ordered by adjusted score desc, item asc. Only the
// first `k` positions are guaranteed sorted.
inline void order_row(std::span<const Candidate> row, std::span<const double> adjusted,
                      std::size_t k, std::vector<std::size_t>& order) {
  order.resize(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    if (adjusted[a] != adjusted[b]) return adjusted[a] > adjusted[b];
    return row[a].item < row[b].item;
  };
  auto take = std::min(k, order.size());
  auto mid = order.begin() + static_cast<std::ptrdiff_t>(take);
  if (take < order.size()) std::nth_element(order.begin(), mid, order.end(), before);
  std::sort(order.begin(), mid, before);
}

}  // namespace detail

inline RankedLists greedy_rerank(const ScoreMatrix& scores, const GainTables& gains,
                                 const RerankConfig& cfg) {
  cfg.validate();
  check_dimensions(scores, gains);
  RankedLists out(cfg);
  out.reserve(scores.num_users(), cfg.k);
  std::vector<std::size_t> order;
  std::vector<double> adj;
  std::vector<RankedItem> picked;
  double objective = 0;
  for (std::size_t u = 0; u < scores.num_users(); ++u) {
    auto uid = static_cast<Index>(u);
    auto row = scores.row(uid);
    detail::adjust_row(scores, gains, cfg.effective_lambda1(), cfg.effective_lambda2(), uid, adj);
    detail::order_row(row, adj, cfg.k, order);
    if (row.size() < cfg.k) out.short_users.push_back(uid);
    picked.clear();
    for (std::size_t r = 0; r < std::min(cfg.k, row.size()); ++r) {
      auto pos = order[r];
      picked.push_back({row[pos].item, pos + 1, adj[pos]});
      objective += adj[pos];
    }
    out.push_row(picked);
  }
  out.objective_value = objective;
  return out;
}

struct FractionalEntry {
  Index user = 0;
  Index item = 0;
  double value = 0;  // strictly between 0 and 1
};

struct LpResult {
  RankedLists lists;                        // integral lists after tie rounding
  double lp_optimum = 0;                    // value of the relaxed optimum
  std::vector<FractionalEntry> fractional;  // non-integral variables
  std::size_t tied_users = 0;               // users with a tie at the K-th slot
};

// Exact optimum of the relaxation 0 <= A_ui <= 1, sum_i A_ui = K. Candidates
// strictly above the K-th adjusted score get 1; if the candidates tied with
// it outnumber the remaining slots, the slots are shared equally among them.
// Rounding keeps tied candidates with the lowest item index.
inline LpResult lp_rerank(const ScoreMatrix& scores, const GainTables& gains, const RerankConfig& cfg) {
  cfg.validate();
  auto adjusted = adjusted_scores(scores, gains, cfg);
  LpResult res{RankedLists(cfg), 0.0, {}, 0};
  res.lists.reserve(scores.num_users(), cfg.k);
  std::vector<std::size_t> order;
  std::vector<RankedItem> picked;
  double objective = 0;
  double lp_value = 0;
  for (std::size_t u = 0; u < scores.num_users(); ++u) {
    auto uid = static_cast<Index>(u);
    auto row = scores.row(uid);
    std::span<const double> adj(adjusted.data() + scores.row_offset(uid), row.size());
    picked.clear();
    if (row.size() <= cfg.k) {
      if (row.size() < cfg.k) res.lists.short_users.push_back(uid);
      detail::order_row(row, adj, row.size(), order);
      for (auto pos : order) {
        picked.push_back({row[pos].item, pos + 1, adj[pos]});
        objective += adj[pos];
        lp_value += adj[pos];
      }
      res.lists.push_row(picked);
      continue;
    }
    detail::order_row(row, adj, row.size(), order);
    const double threshold = adj[order[cfg.k - 1]];
    std::size_t above = 0;
    std::vector<std::size_t> tied;
    for (auto pos : order) {
      if (adj[pos] > threshold) ++above;
      else if (adj[pos] == threshold) tied.push_back(pos);
    }
    const std::size_t slots = cfg.k - above;
    double row_value = 0;
    for (std::size_t r = 0; r < above; ++r) row_value += adj[order[r]];
    if (tied.size() == slots) {
      for (auto pos : tied) row_value += adj[pos];
    } else {
      ++res.tied_users;
      double share = static_cast<double>(slots) / static_cast<double>(tied.size());
      for (auto pos : tied) {
        row_value += share * adj[pos];
        res.fractional.push_back({uid, row[pos].item, share});
      }
    }
    lp_value += row_value;
    for (std::size_t r = 0; r < cfg.k; ++r) {
      auto pos = order[r];
      picked.push_back({row[pos].item, pos + 1, adj[pos]});
      objective += adj[pos];
    }
    res.lists.push_row(picked);
  }
  res.lists.objective_value = objective;
  res.lp_optimum = lp_value;
  return res;
}

inline RankedLists rerank(const ScoreMatrix& scores, const GainTables& gains, const RerankConfig& cfg) {
  return cfg.solver == Solver::kGreedy ? greedy_rerank(scores, gains, cfg)
                                       : lp_rerank(scores, gains, cfg).lists;
}

// The three linear parts of the re-ranking objective for a given selection.
struct ObjectiveTerms {
  double relevance = 0;           // sum S * A
  double consumer_deviation = 0;  // sum -CF * A
  double producer_deviation = 0;  // sum -PF * A
};

inline ObjectiveTerms objective_terms(const ScoreMatrix& scores, const GainTables& gains,
                                      const RankedLists& lists) {
  check_dimensions(scores, gains);
  if (lists.num_users() != scores.num_users())
    throw DataError("ranked lists and score matrix cover different users");
  ObjectiveTerms t;
  for (std::size_t u = 0; u < scores.num_users(); ++u) {
    auto uid = static_cast<Index>(u);
    auto row = scores.row(uid);
    auto picks = lists.row(uid);
    if (picks.size() != std::min(lists.config.k, row.size()))
      throw DataError(detail::concat("user ", u, ": list has ", picks.size(), " items, expected ",
                                     std::min(lists.config.k, row.size())));
    std::vector<char> used(row.size(), 0);
    for (const auto& p : picks) {
      if (p.candidate_rank < 1 || p.candidate_rank > row.size() ||
          row[p.candidate_rank - 1].item != p.item)
        throw DataError(detail::concat("user ", u, ": item ", p.item, " is not in the candidate list"));
      auto pos = p.candidate_rank - 1;
      if (used[pos]++) throw DataError(detail::concat("user ", u, ": item ", p.item, " selected twice"));
      auto e = scores.row_offset(uid) + pos;
      t.relevance += row[pos].score;
      t.consumer_deviation -= gains.consumer[e];
      t.producer_deviation -= gains.producer[e];
    }
  }
  return t;
}

// sum S*A - lambda1 * consumer deviation - lambda2 * producer deviation.
inline double objective_value(const ScoreMatrix& scores, const GainTables& gains,
                              const RerankConfig& cfg, const RankedLists& lists) {
  auto t = objective_terms(scores, gains, lists);
  return t.relevance - cfg.effective_lambda1() * t.consumer_deviation -
         cfg.effective_lambda2() * t.producer_deviation;
}

// ---------------------------------------------------------------------------
// Ranked-list file: "user<TAB>item<TAB>rank<TAB>adjusted" rows plus a JSON
// manifest next to it.

inline nlohmann::json ranked_manifest(const RankedLists& lists, std::size_t fractional_ties = 0) {
  auto j = lists.config.to_json();
  j["objective_value"] = lists.objective_value;
  j["fractional_ties"] = fractional_ties;
  j["users"] = lists.num_users();
  j["short_users"] = lists.short_users.size();
  return j;
}

inline void write_ranked_lists(const std::string& path, const RankedLists& lists,
                               const InteractionDataset& ds, std::size_t fractional_ties = 0) {
  {
    auto out = open_output(path);
    for (std::size_t u = 0; u < lists.num_users(); ++u) {
      auto row = lists.row(static_cast<Index>(u));
      for (std::size_t r = 0; r < row.size(); ++r)
        out << ds.users.token(static_cast<Index>(u)) << '\t' << ds.items.token(row[r].item) << '\t'
            << r + 1 << '\t' << format_double(row[r].adjusted) << '\n';
    }
  }
  auto out = open_output(path + ".json");
  out << ranked_manifest(lists, fractional_ties).dump(2) << '\n';
}

// Reads the item lists back (rank order taken from the rank column).
inline std::vector<std::vector<Index>> read_ranked_items(const std::string& path,
                                                         const InteractionDataset& ds) {
  auto in = open_input(path);
  std::vector<std::vector<std::pair<std::int64_t, Index>>> rows(ds.num_users());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split_line(line, '\t');
    std::int64_t rank = 0;
    if (f.size() < 3 || !parse_int64(trim(f[2]), rank) || rank < 1)
      throw DataError(detail::concat(path, ": line ", line_no, ": malformed ranked-list row"));
    auto u = ds.users.find(trim(f[0]));
    auto i = ds.items.find(trim(f[1]));
    if (!u || !i) throw DataError(detail::concat(path, ": line ", line_no, ": unknown user or item"));
    rows[static_cast<std::size_t>(*u)].emplace_back(rank, *i);
  }
  std::vector<std::vector<Index>> out(ds.num_users());
  for (std::size_t u = 0; u < rows.size(); ++u) {
    std::sort(rows[u].begin(), rows[u].end());
    for (auto [r, i] : rows[u]) out[u].push_back(i);
  }
  return out;
}

}  // namespace fairrank
