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
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fairrank/baserank.hpp"
#include "fairrank/dataio.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/rerank.hpp"
#include "fairrank/segmentation.hpp"
#include "json.hpp"

namespace fairrank {

struct DatasetSpec {
  std::string name;
  std::string path;  // empty when synthetic
  TextFormat format;
  std::optional<ZipfSpec> synthetic;
  int kcore = 10;
  std::uint64_t split_seed = 42;
  SplitRatios ratios;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"name", name}, {"kcore", kcore}, {"split_seed", split_seed},
                        {"ratios", {ratios.train, ratios.validation, ratios.test}}};
    if (synthetic) {
      j["synthetic"] = synthetic->to_json();
    } else {
      j["path"] = path;
      j["format"] = format.to_json();
    }
    return j;
  }

  static DatasetSpec from_json(const nlohmann::json& j) {
    DatasetSpec d;
    d.name = j.at("name").get<std::string>();
    if (j.contains("synthetic")) d.synthetic = ZipfSpec::from_json(j.at("synthetic"));
    else d.path = j.at("path").get<std::string>();
    if (j.contains("format")) d.format = TextFormat::from_json(j.at("format"));
    d.kcore = j.value("kcore", d.kcore);
    d.split_seed = j.value("split_seed", d.split_seed);
    if (j.contains("ratios")) {
      const auto& r = j.at("ratios");
      if (r.size() != 3) throw UsageError("ratios must have three entries");
      d.ratios = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
    }
    return d;
  }
};

struct RerankGrid {
  std::vector<Mode> modes = {Mode::kNone, Mode::kConsumer, Mode::kProducer, Mode::kBoth};
  std::vector<double> lambda1 = {0.05};
  std::vector<double> lambda2 = {0.05};
  std::size_t k = 10;
  Solver solver = Solver::kGreedy;

  nlohmann::json to_json() const {
    std::vector<std::string> m;
    for (auto mode : modes) m.emplace_back(to_string(mode));
    return {{"modes", m}, {"lambda1", lambda1}, {"lambda2", lambda2}, {"K", k},
            {"solver", to_string(solver)}};
  }

  static RerankGrid from_json(const nlohmann::json& j) {
    RerankGrid g;
    if (j.contains("modes")) {
      g.modes.clear();
      for (const auto& m : j.at("modes")) g.modes.push_back(mode_from_string(m.get<std::string>()));
    }
    if (j.contains("lambda1")) g.lambda1 = j.at("lambda1").get<std::vector<double>>();
    if (j.contains("lambda2")) g.lambda2 = j.at("lambda2").get<std::vector<double>>();
    g.k = j.value("K", g.k);
    if (j.contains("solver")) g.solver = solver_from_string(j.at("solver").get<std::string>());
    return g;
  }

  // (lambda1, lambda2) settings for one mode: N runs once, C and P sweep
  // their own weight, CP takes the cross product.
  std::vector<std::pair<double, double>> cells(Mode mode) const {
    std::vector<std::pair<double, double>> out;
    switch (mode) {
      case Mode::kNone: out.emplace_back(0.0, 0.0); break;
      case Mode::kConsumer: for (auto l1 : lambda1) out.emplace_back(l1, 0.0); break;
      case Mode::kProducer: for (auto l2 : lambda2) out.emplace_back(0.0, l2); break;
      case Mode::kBoth:
        for (auto l1 : lambda1)
          for (auto l2 : lambda2) out.emplace_back(l1, l2);
        break;
    }
    return out;
  }
};

enum class SweptLambda { kConsumer, kProducer };

struct SweepSpec {
  SweptLambda lambda = SweptLambda::kProducer;
  std::vector<double> grid;
  double fixed_other = 0.05;

  nlohmann::json to_json() const {
    return {{"lambda", lambda == SweptLambda::kConsumer ? "lambda1" : "lambda2"},
            {"grid", grid}, {"fixed_other", fixed_other}};
  }

  static SweepSpec from_json(const nlohmann::json& j) {
    SweepSpec s;
    auto which = j.value("lambda", std::string("lambda2"));
    if (which == "lambda1") s.lambda = SweptLambda::kConsumer;
    else if (which == "lambda2") s.lambda = SweptLambda::kProducer;
    else throw UsageError("sweep lambda must be lambda1 or lambda2");
    s.grid = j.at("grid").get<std::vector<double>>();
    s.fixed_other = j.value("fixed_other", s.fixed_other);
    return s;
  }
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  SegmentationSpec segmentation;
  std::vector<RankerSpec> rankers;
  RerankGrid grid;
  double w = 0.5;
  std::size_t eval_k = 10;
  bool delta = true;  // report delta_pct against mode N
  std::vector<SweepSpec> sweeps;
  std::string output_dir = "run";

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["datasets"] = nlohmann::json::array();
    for (const auto& d : datasets) j["datasets"].push_back(d.to_json());
    j["segmentation"] = segmentation.to_json();
    j["rankers"] = nlohmann::json::array();
    for (const auto& r : rankers) j["rankers"].push_back(r.to_json());
    j["rerank"] = grid.to_json();
    j["metrics"] = {{"w", w}, {"K", eval_k}, {"delta", delta}};
    j["sweeps"] = nlohmann::json::array();
    for (const auto& s : sweeps) j["sweeps"].push_back(s.to_json());
    j["output_dir"] = output_dir;
    return j;
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
      for (const auto& d : j.at("datasets")) c.datasets.push_back(DatasetSpec::from_json(d));
      if (j.contains("segmentation")) c.segmentation = SegmentationSpec::from_json(j.at("segmentation"));
      for (const auto& r : j.at("rankers")) c.rankers.push_back(RankerSpec::from_json(r));
      if (j.contains("rerank")) c.grid = RerankGrid::from_json(j.at("rerank"));
      if (j.contains("metrics")) {
        c.w = j["metrics"].value("w", c.w);
        c.eval_k = j["metrics"].value("K", c.eval_k);
        c.delta = j["metrics"].value("delta", c.delta);
      }
      if (j.contains("sweeps"))
        for (const auto& s : j.at("sweeps")) c.sweeps.push_back(SweepSpec::from_json(s));
      c.output_dir = j.value("output_dir", c.output_dir);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("invalid experiment config: ") + e.what());
    }
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    auto in = open_input(path);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw UsageError(path + ": invalid JSON");
    return from_json(j);
  }

  void validate() const {
    if (datasets.empty() || rankers.empty() || grid.modes.empty())
      throw UsageError("config needs at least one dataset, ranker and mode");
    for (auto mode : grid.modes)
      if (grid.cells(mode).empty())
        throw UsageError(std::string("lambda grid for mode ") + to_string(mode) + " is empty");
    if (delta && std::find(grid.modes.begin(), grid.modes.end(), Mode::kNone) == grid.modes.end())
      throw UsageError("mode N is required as the reference for delta_pct");
    if (grid.k < 1 || eval_k < 1) throw UsageError("K must be >= 1");
    if (!(w >= 0 && w <= 1)) throw UsageError("w must lie in [0, 1]");
    std::vector<std::string> names;
    for (const auto& d : datasets) names.push_back(d.name);
    for (const auto& r : rankers) names.push_back("ranker:" + r.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
      throw UsageError("dataset and ranker names must be unique");
  }
};

// ---------------------------------------------------------------------------

struct SweepRow {
  double lambda = 0;
  double ndcg_all = 0;
  double ndcg_advantaged = 0;
  double ndcg_protected = 0;
  double dcf = 0;
  double exposure_short = 0;
  double exposure_long = 0;
  double dpf = 0;
  double mcpf = 0;
};

// Re-ranks in CP mode for each grid value of one lambda, the other held at
// `fixed_other`, and records group accuracy and exposure per step.
inline std::vector<SweepRow> sweep_lambdas(const ScoreMatrix& scores, const GainTables& gains,
                                           const InteractionDataset& train, const InteractionDataset& test,
                                           const GroupAssignment& groups, const SweepSpec& spec,
                                           std::size_t k, double w = 0.5, Solver solver = Solver::kGreedy) {
  for (std::size_t i = 1; i < spec.grid.size(); ++i)
    if (!(spec.grid[i] > spec.grid[i - 1])) throw UsageError("sweep grid must be strictly increasing");
  std::vector<SweepRow> rows;
  for (double value : spec.grid) {
    RerankConfig cfg;
    cfg.mode = Mode::kBoth;
    cfg.k = k;
    cfg.solver = solver;
    cfg.lambda1 = spec.lambda == SweptLambda::kConsumer ? value : spec.fixed_other;
    cfg.lambda2 = spec.lambda == SweptLambda::kProducer ? value : spec.fixed_other;
    auto lists = rerank(scores, gains, cfg).item_lists();
    auto rep = evaluate(lists, train, test, groups, k, w);
    rows.push_back({value, rep.ndcg_all, rep.ndcg_advantaged, rep.ndcg_protected, rep.dcf,
                    rep.exposure_short, rep.exposure_long, rep.dpf, rep.mcpf});
  }
  return rows;
}

inline void write_sweep(const std::string& path, const std::vector<SweepRow>& rows) {
  auto out = open_output(path);
  out << "lambda\tndcg_all\tndcg_advantaged\tndcg_protected\tdcf\texposure_short\texposure_long\tdpf\tmcpf\n";
  for (const auto& r : rows)
    out << format_double(r.lambda) << '\t' << format_double(r.ndcg_all) << '\t'
        << format_double(r.ndcg_advantaged) << '\t' << format_double(r.ndcg_protected) << '\t'
        << format_double(r.dcf) << '\t' << format_double(r.exposure_short) << '\t'
        << format_double(r.exposure_long) << '\t' << format_double(r.dpf) << '\t'
        << format_double(r.mcpf) << '\n';
}

// Pearson correlation; nullopt for fewer than two points or zero variance.
inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

struct CrossStatsRow {
  std::string ranker;
  std::string mode;
  std::size_t reports = 0;
  std::optional<double> corr_accuracy_dcf;
  std::optional<double> corr_accuracy_dpf;
  std::optional<double> mean_dcf_over_accuracy;
  std::optional<double> mean_dpf_over_accuracy;

  nlohmann::json to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
    return {{"ranker", ranker}, {"mode", mode}, {"reports", reports},
            {"corr_accuracy_dcf", opt(corr_accuracy_dcf)}, {"corr_accuracy_dpf", opt(corr_accuracy_dpf)},
            {"mean_dcf_over_accuracy", opt(mean_dcf_over_accuracy)},
            {"mean_dpf_over_accuracy", opt(mean_dpf_over_accuracy)}};
  }
};

// Groups reports by (ranker, mode); statistics run across the reports of a
// group, typically one per dataset.
inline std::vector<CrossStatsRow> cross_stats(const std::vector<EvaluationReport>& reports) {
  std::map<std::pair<std::string, std::string>, std::vector<const EvaluationReport*>> groups;
  for (const auto& r : reports) groups[{r.ranker, r.mode}].push_back(&r);
  std::vector<CrossStatsRow> rows;
  for (const auto& [key, members] : groups) {
    CrossStatsRow row{key.first, key.second, members.size(), {}, {}, {}, {}};
    std::vector<double> acc, dcf_v, dpf_v;
    double sum_dcf = 0, sum_dpf = 0;
    bool ratios_defined = true;
    for (const auto* r : members) {
      acc.push_back(r->ndcg_all);
      dcf_v.push_back(r->dcf);
      dpf_v.push_back(r->dpf);
      if (r->ndcg_all == 0) ratios_defined = false;
      else {
        sum_dcf += r->dcf / r->ndcg_all;
        sum_dpf += r->dpf / r->ndcg_all;
      }
    }
    row.corr_accuracy_dcf = pearson(acc, dcf_v);
    row.corr_accuracy_dpf = pearson(acc, dpf_v);
    if (ratios_defined) {
      row.mean_dcf_over_accuracy = sum_dcf / static_cast<double>(members.size());
      row.mean_dpf_over_accuracy = sum_dpf / static_cast<double>(members.size());
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_cross_stats(const std::string& path, const std::vector<CrossStatsRow>& rows) {
  auto out = open_output(path);
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  out << "ranker\tmode\treports\tcorr_accuracy_dcf\tcorr_accuracy_dpf\tmean_dcf_over_accuracy"
         "\tmean_dpf_over_accuracy\n";
  for (const auto& r : rows)
    out << r.ranker << '\t' << r.mode << '\t' << r.reports << '\t' << opt(r.corr_accuracy_dcf) << '\t'
        << opt(r.corr_accuracy_dpf) << '\t' << opt(r.mean_dcf_over_accuracy) << '\t'
        << opt(r.mean_dpf_over_accuracy) << '\n';
}

// ---------------------------------------------------------------------------

struct Failure {
  std::string dataset;
  std::string ranker;
  std::string mode;
  std::string stage;
  std::string message;
};

struct RunResult {
  std::filesystem::path directory;
  std::vector<EvaluationReport> reports;
  std::vector<std::string> report_names;
  std::vector<char> selected;  // parallel to reports
  std::vector<Failure> failures;
};

inline std::string cell_name(const std::string& dataset, const std::string& ranker, Mode mode,
                             double lambda1, double lambda2) {
  return dataset + "__" + ranker + "__" + to_string(mode) + "__l1_" + format_double(lambda1) + "__l2_" +
         format_double(lambda2);
}

// Prepared data for one dataset.
struct PreparedDataset {
  SplitDataset split;
  GroupAssignment groups;
};

inline PreparedDataset prepare_dataset(const DatasetSpec& spec, const SegmentationSpec& seg) {
  InteractionDataset raw =
      spec.synthetic ? make_zipf_dataset(*spec.synthetic) : load_interactions(spec.path, spec.format);
  auto filtered = kcore_filter(raw, spec.kcore);
  if (filtered.interactions.empty())
    throw DataError("dataset '" + spec.name + "' is empty after k-core filtering");
  auto parts = split(filtered, spec.ratios, spec.split_seed);
  auto groups = segment(parts.train, seg);
  return {std::move(parts), std::move(groups)};
}

namespace detail {

struct UnitOutput {
  std::vector<EvaluationReport> reports;
  std::vector<std::string> names;
  std::vector<Failure> failures;
};

inline void write_user_ndcg(const std::filesystem::path& path, const Recommendations& lists,
                            const PreparedDataset& data, std::size_t k) {
  auto per_user = ndcg_per_user(lists, data.split.test, k);
  auto out = open_output(path.string());
  out << "user\tgroup\tndcg\n";
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    if (!per_user[u]) continue;
    out << data.split.train.users.token(static_cast<Index>(u)) << '\t'
        << (data.groups.user_group[u] == Group::kAdvantaged ? "advantaged" : "protected") << '\t'
        << format_double(*per_user[u]) << '\n';
  }
}

// All cells of one (dataset, ranker) pair.
inline UnitOutput run_unit(const ExperimentConfig& cfg, const DatasetSpec& ds_spec, const RankerSpec& rk,
                           const PreparedDataset& data, const std::filesystem::path& root) {
  UnitOutput out;
  const auto& train = data.split.train;
  ScoreMatrix scores;
  GainTables gains;
  try {
    scores = build_scores(rk, train, ds_spec.name);
    write_scores((root / "scores" / (ds_spec.name + "__" + rk.name + ".tsv")).string(), scores, train);
    gains = build_gain_tables(scores, data.groups, cfg.grid.k);
  } catch (const std::exception& e) {
    for (auto mode : cfg.grid.modes) out.failures.push_back({ds_spec.name, rk.name, to_string(mode), "rank", e.what()});
    return out;
  }

  for (auto mode : cfg.grid.modes) {
    for (auto [l1, l2] : cfg.grid.cells(mode)) {
      try {
        RerankConfig rc{l1, l2, cfg.grid.k, mode, cfg.grid.solver};
        auto lists = rerank(scores, gains, rc);
        auto name = cell_name(ds_spec.name, rk.name, mode, l1, l2);
        write_ranked_lists((root / "reranked" / (name + ".tsv")).string(), lists, train);
        auto items = lists.item_lists();
        auto rep = evaluate(items, train, data.split.test, data.groups, cfg.eval_k, cfg.w);
        rep.dataset = ds_spec.name;
        rep.ranker = rk.name;
        rep.mode = to_string(mode);
        rep.lambda1 = rc.effective_lambda1();
        rep.lambda2 = rc.effective_lambda2();
        write_user_ndcg(root / "reports" / (name + ".users.tsv"), items, data, cfg.eval_k);
        out.reports.push_back(rep);
        out.names.push_back(name);
      } catch (const std::exception& e) {
        out.failures.push_back({ds_spec.name, rk.name, to_string(mode), "rerank/evaluate", e.what()});
      }
    }
  }

  for (std::size_t s = 0; s < cfg.sweeps.size(); ++s) {
    try {
      auto rows = sweep_lambdas(scores, gains, train, data.split.test, data.groups, cfg.sweeps[s],
                                cfg.grid.k, cfg.w, cfg.grid.solver);
      auto which = cfg.sweeps[s].lambda == SweptLambda::kConsumer ? "lambda1" : "lambda2";
      write_sweep((root / "tables" / ("sweep_" + ds_spec.name + "__" + rk.name + "__" + which + "_" +
                                      std::to_string(s) + ".tsv")).string(), rows);
    } catch (const std::exception& e) {
      out.failures.push_back({ds_spec.name, rk.name, "CP", "sweep", e.what()});
    }
  }
  return out;
}

}  // namespace detail

// load -> k-core -> split -> segment -> rank -> re-rank -> evaluate, for
// every (dataset, ranker, mode, lambda) cell. A failing cell is logged in
// failures.log and the rest of the grid proceeds. Output is a pure
// function of the config, independent of `jobs`.
inline RunResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  namespace fs = std::filesystem;
  RunResult result;
  result.directory = cfg.output_dir;
  const fs::path root = cfg.output_dir;
  for (const char* sub : {"datasets", "segments", "scores", "reranked", "reports", "tables"})
    fs::create_directories(root / sub);
  {
    auto out = open_output((root / "config.json").string());
    out << cfg.to_json().dump(2) << '\n';
  }

  // Datasets are prepared serially; units below run in parallel.
  std::vector<std::optional<PreparedDataset>> prepared(cfg.datasets.size());
  std::vector<Failure> dataset_failures;
  for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
    const auto& spec = cfg.datasets[d];
    try {
      prepared[d] = prepare_dataset(spec, cfg.segmentation);
      nlohmann::json pre = {{"kcore", spec.kcore}, {"kcore_before_split", true}};
      write_split_dataset(root / "datasets" / spec.name, prepared[d]->split, pre);
      write_groups(root / "segments" / spec.name, prepared[d]->groups);
    } catch (const std::exception& e) {
      prepared[d].reset();
      for (const auto& rk : cfg.rankers)
        for (auto mode : cfg.grid.modes)
          dataset_failures.push_back({spec.name, rk.name, to_string(mode), "prepare", e.what()});
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> units;
  for (std::size_t d = 0; d < cfg.datasets.size(); ++d)
    if (prepared[d])
      for (std::size_t r = 0; r < cfg.rankers.size(); ++r) units.emplace_back(d, r);
  std::vector<detail::UnitOutput> outputs(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      auto [d, r] = units[i];
      outputs[i] = detail::run_unit(cfg, cfg.datasets[d], cfg.rankers[r], *prepared[d], root);
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, units.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  // Single-threaded reduction in config order.
  result.failures = dataset_failures;
  for (auto& o : outputs) {
    for (std::size_t i = 0; i < o.reports.size(); ++i) {
      result.reports.push_back(o.reports[i]);
      result.report_names.push_back(o.names[i]);
    }
    result.failures.insert(result.failures.end(), o.failures.begin(), o.failures.end());
  }

  // Delta against the N report of the same (dataset, ranker).
  std::map<std::pair<std::string, std::string>, double> reference;
  for (const auto& r : result.reports)
    if (r.mode == "N") reference[{r.dataset, r.ranker}] = r.mcpf;
  if (cfg.delta)
    for (auto& r : result.reports) {
      auto it = reference.find({r.dataset, r.ranker});
      if (it != reference.end() && it->second != 0) r.delta_pct = delta_pct(it->second, r.mcpf);
    }

  // Per (dataset, ranker, mode): flag the cell maximizing ndcg_all - mcpf.
  result.selected.assign(result.reports.size(), 0);
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> best;
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    auto key = std::make_tuple(r.dataset, r.ranker, r.mode);
    auto it = best.find(key);
    auto score = [](const EvaluationReport& x) { return x.ndcg_all - x.mcpf; };
    if (it == best.end() || score(r) > score(result.reports[it->second])) best[key] = i;
  }
  for (const auto& [key, idx] : best) result.selected[idx] = 1;

  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    auto j = result.reports[i].to_json();
    j["selected"] = static_cast<bool>(result.selected[i]);
    auto out = open_output((root / "reports" / (result.report_names[i] + ".json")).string());
    out << j.dump(2) << '\n';
  }
  {
    auto out = open_output((root / "tables" / "summary.tsv").string());
    write_report_header(out);
    for (std::size_t i = 0; i < result.reports.size(); ++i)
      write_report_row(out, result.reports[i], result.selected[i]);
  }
  std::vector<EvaluationReport> selected_reports;
  for (std::size_t i = 0; i < result.reports.size(); ++i)
    if (result.selected[i]) selected_reports.push_back(result.reports[i]);
  write_cross_stats((root / "tables" / "cross_stats.tsv").string(), cross_stats(selected_reports));
  {
    auto out = open_output((root / "failures.log").string());
    for (const auto& f : result.failures)
      out << "dataset=" << f.dataset << "\tranker=" << f.ranker << "\tmode=" << f.mode
          << "\tstage=" << f.stage << "\terror=" << f.message << '\n';
  }
  {
    nlohmann::json manifest = {{"reports", result.reports.size()},
                               {"failures", result.failures.size()},
                               {"report_files", result.report_names}};
    auto out = open_output((root / "manifest.json").string());
    out << manifest.dump(2) << '\n';
  }
  return result;
}

}  // namespace fairrank
