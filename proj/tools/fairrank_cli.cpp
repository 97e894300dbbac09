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

// fairrank: command-line front end for each pipeline stage.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairrank/fairrank.hpp"

namespace fs = std::filesystem;
using namespace fairrank;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct Globals {
  bool json = false;
  std::optional<std::uint64_t> seed;
};

std::string default_output_root() {
  const char* env = std::getenv("FAIRRANK_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string("fairrank-out");
}

std::string or_default(const std::string& value, const std::string& leaf) {
  return value.empty() ? (fs::path(default_output_root()) / leaf).string() : value;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (auto part : split_line(text, ',')) {
    double v = 0;
    if (!parse_double(trim(part), v)) throw UsageError(std::string("invalid number in ") + what + ": '" +
                                                       std::string(trim(part)) + "'");
    out.push_back(v);
  }
  return out;
}

// Prints the one-line summary, or a single JSON document with --json.
void emit(const Globals& g, const std::string& command, const std::string& summary, nlohmann::json details,
          const std::vector<std::string>& artifacts) {
  if (g.json) {
    details["command"] = command;
    details["status"] = "ok";
    details["artifacts"] = artifacts;
    std::cout << details.dump() << '\n';
    return;
  }
  std::cout << command << ": " << summary << '\n';
  for (const auto& a : artifacts) std::cout << "  " << a << '\n';
}

struct FormatArgs {
  std::string delimiter = ",";
  int user_col = 0, item_col = 1, weight_col = 2, timestamp_col = -1;
  bool skip_header = false;

  void add(CLI::App* sub) {
    sub->add_option("--delimiter", delimiter, "Field delimiter (a single character, or 'tab')")
        ->capture_default_str();
    sub->add_option("--user-col", user_col, "Zero-based user column")->capture_default_str();
    sub->add_option("--item-col", item_col, "Zero-based item column")->capture_default_str();
    sub->add_option("--weight-col", weight_col, "Weight column, -1 for none")->capture_default_str();
    sub->add_option("--timestamp-col", timestamp_col, "Timestamp column, -1 for none")->capture_default_str();
    sub->add_flag("--skip-header", skip_header, "First line is a header");
  }

  TextFormat format() const {
    return TextFormat::from_json({{"delimiter", delimiter}, {"user_col", user_col}, {"item_col", item_col},
                                  {"weight_col", weight_col}, {"timestamp_col", timestamp_col},
                                  {"skip_header", skip_header}});
  }
};

// Interactions of all three partitions of a prepared dataset.
InteractionDataset union_of(const SplitDataset& s) {
  InteractionDataset out = s.train.empty_like();
  for (const auto* part : {&s.train, &s.validation, &s.test})
    out.interactions.insert(out.interactions.end(), part->interactions.begin(), part->interactions.end());
  return out;
}

// N recorded in a score file header, if any.
std::size_t score_file_n(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  std::getline(in, line);
  for (auto field : split_line(trim(line), '\t')) {
    std::int64_t n = 0;
    if (field.starts_with("N=") && parse_int64(field.substr(2), n) && n > 0) return static_cast<std::size_t>(n);
  }
  return 100;
}

int fail(const Globals& g, int code, const char* label, const std::string& message) {
  std::cerr << label << ": " << message << '\n';
  if (g.json) std::cout << nlohmann::json{{"status", "error"}, {"exit_code", code}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sided fairness-aware re-ranking of top-K recommendations", "fairrank"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_flag("--json", g.json, "Print a machine-readable JSON summary");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for every random choice");

  auto add_sub = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->set_version_flag("--version", std::string(kVersion));
    return sub;
  };

  // prepare -----------------------------------------------------------------
  auto* prepare = add_sub("prepare", "Load or synthesize interactions, apply k-core, split, write a dataset directory");
  std::string prep_input, prep_out, prep_ratios = "0.7,0.1,0.2";
  int prep_kcore = 10;
  bool prep_synthetic = false;
  ZipfSpec zipf;
  FormatArgs prep_fmt;
  prepare->add_option("--input", prep_input, "Interaction file");
  prepare->add_flag("--synthetic", prep_synthetic, "Generate a Zipf-distributed dataset instead");
  prepare->add_option("--users", zipf.users, "Synthetic users")->capture_default_str();
  prepare->add_option("--items", zipf.items, "Synthetic items")->capture_default_str();
  prepare->add_option("--min-degree", zipf.min_degree, "Synthetic minimum user degree")->capture_default_str();
  prepare->add_option("--max-degree", zipf.max_degree, "Synthetic maximum user degree")->capture_default_str();
  prepare->add_option("--kcore", prep_kcore, "k-core threshold")->capture_default_str();
  prepare->add_option("--ratios", prep_ratios, "train,validation,test ratios")->capture_default_str();
  prepare->add_option("--out", prep_out, "Output directory");
  prep_fmt.add(prepare);

  // segment -----------------------------------------------------------------
  auto* seg = add_sub("segment", "Assign advantaged/protected user and item groups from the training split");
  std::string seg_data, seg_out, seg_method = "activity";
  std::optional<double> seg_user_fraction;
  double seg_item_fraction = 0.2;
  seg->add_option("--data", seg_data, "Dataset directory")->required();
  seg->add_option("--user-method", seg_method, "activity or mainstream")->capture_default_str();
  seg->add_option("--user-fraction", seg_user_fraction, "Advantaged user fraction (0.05 activity, 0.2 mainstream)");
  seg->add_option("--item-fraction", seg_item_fraction, "Short-head item fraction")->capture_default_str();
  seg->add_option("--out", seg_out, "Output directory");

  // rank --------------------------------------------------------------------
  auto* rank = add_sub("rank", "Produce top-N candidate lists with a base ranker");
  std::string rank_data, rank_out, rank_import;
  RankerSpec rk;
  rank->add_option("--data", rank_data, "Dataset directory")->required();
  rank->add_option("--ranker", rk.type, "mostpop, random, itemknn or import")->capture_default_str();
  rank->add_option("--n", rk.n, "Candidates per user")->capture_default_str();
  rank->add_option("--neighbors", rk.neighbors, "Item-kNN neighborhood size")->capture_default_str();
  rank->add_option("--import", rank_import, "Score file for --ranker import");
  rank->add_option("--out", rank_out, "Score file to write");

  // rerank ------------------------------------------------------------------
  auto* rr = add_sub("rerank", "Re-rank candidate lists under consumer/producer fairness weights");
  std::string rr_data, rr_groups, rr_scores, rr_out, rr_mode = "CP", rr_solver = "greedy";
  double rr_l1 = 0.05, rr_l2 = 0.05;
  std::int64_t rr_k = 10;
  rr->add_option("--data", rr_data, "Dataset directory")->required();
  rr->add_option("--groups", rr_groups, "Group directory")->required();
  rr->add_option("--scores", rr_scores, "Score file")->required();
  rr->add_option("--mode", rr_mode, "N, C, P or CP")->capture_default_str();
  rr->add_option("--lambda1", rr_l1, "Consumer fairness weight")->capture_default_str();
  rr->add_option("--lambda2", rr_l2, "Producer fairness weight")->capture_default_str();
  rr->add_option("--k", rr_k, "List length")->capture_default_str();
  rr->add_option("--solver", rr_solver, "greedy or lp")->capture_default_str();
  rr->add_option("--out", rr_out, "Ranked-list file to write");

  // evaluate ----------------------------------------------------------------
  auto* ev = add_sub("evaluate", "Compute accuracy, beyond-accuracy and fairness metrics for ranked lists");
  std::string ev_data, ev_groups, ev_lists, ev_out, ev_reference, ev_ranker = "unknown";
  std::int64_t ev_k = 10;
  double ev_w = 0.5;
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--groups", ev_groups, "Group directory")->required();
  ev->add_option("--lists", ev_lists, "Ranked-list file")->required();
  ev->add_option("--k", ev_k, "Cutoff")->capture_default_str();
  ev->add_option("--w", ev_w, "mCPF weight on DPF")->capture_default_str();
  ev->add_option("--reference", ev_reference, "Report JSON whose mCPF is the delta reference");
  ev->add_option("--ranker", ev_ranker, "Ranker label for the report")->capture_default_str();
  ev->add_option("--out", ev_out, "Report JSON to write");

  // sweep -------------------------------------------------------------------
  auto* sw = add_sub("sweep", "Sweep one fairness weight with the other held fixed");
  std::string sw_data, sw_groups, sw_scores, sw_out, sw_lambda = "lambda2", sw_grid, sw_solver = "greedy";
  double sw_fixed = 0.05, sw_w = 0.5;
  std::int64_t sw_k = 10;
  sw->add_option("--data", sw_data, "Dataset directory")->required();
  sw->add_option("--groups", sw_groups, "Group directory")->required();
  sw->add_option("--scores", sw_scores, "Score file")->required();
  sw->add_option("--lambda", sw_lambda, "lambda1 or lambda2")->capture_default_str();
  sw->add_option("--grid", sw_grid, "Comma-separated increasing values")->required();
  sw->add_option("--fixed-other", sw_fixed, "Value of the other weight")->capture_default_str();
  sw->add_option("--k", sw_k, "List length")->capture_default_str();
  sw->add_option("--w", sw_w, "mCPF weight on DPF")->capture_default_str();
  sw->add_option("--solver", sw_solver, "greedy or lp")->capture_default_str();
  sw->add_option("--out", sw_out, "Sweep table to write");

  // run ---------------------------------------------------------------------
  auto* run = add_sub("run", "Run a full experiment from a JSON config");
  std::string run_config, run_out;
  std::size_t run_jobs = 1;
  run->add_option("--config", run_config, "Experiment config JSON")->required();
  run->add_option("--jobs", run_jobs, "Parallel (dataset, ranker) units")->capture_default_str();
  run->add_option("--out", run_out, "Override the config's output directory");

  // stats -------------------------------------------------------------------
  auto* st = add_sub("stats", "Dataset statistics: size, sparsity, degree thresholds");
  std::string st_input, st_data, st_thresholds = "10,20,50,100";
  FormatArgs st_fmt;
  st->add_option("--input", st_input, "Interaction file");
  st->add_option("--data", st_data, "Dataset directory");
  st->add_option("--thresholds", st_thresholds, "Degree thresholds")->capture_default_str();
  st_fmt.add(st);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (*prepare) {
      if (prep_synthetic == !prep_input.empty()) throw UsageError("give exactly one of --input or --synthetic");
      auto r = parse_list(prep_ratios, "--ratios");
      if (r.size() != 3) throw UsageError("--ratios needs three values");
      SplitRatios ratios{r[0], r[1], r[2]};
      ratios.validate();
      const std::uint64_t seed = g.seed.value_or(42);
      InteractionDataset raw;
      nlohmann::json pre = {{"kcore", prep_kcore}, {"kcore_before_split", true}};
      if (prep_synthetic) {
        zipf.seed = seed;
        raw = make_zipf_dataset(zipf);
        pre["synthetic"] = zipf.to_json();
      } else {
        raw = load_interactions(prep_input, prep_fmt.format());
        pre["source"] = prep_input;
        pre["format"] = prep_fmt.format().to_json();
      }
      auto filtered = kcore_filter(raw, prep_kcore);
      if (filtered.interactions.empty()) throw DataError("dataset is empty after k-core filtering");
      auto parts = split(filtered, ratios, seed);
      auto out = or_default(prep_out, "dataset");
      write_split_dataset(out, parts, pre);
      auto stats = dataset_stats(filtered);
      emit(g, "prepare",
           detail::concat(stats.num_users, " users, ", stats.num_items, " items, ", stats.num_interactions,
                          " interactions (", parts.train.size(), "/", parts.validation.size(), "/",
                          parts.test.size(), ")"),
           {{"stats", stats.to_json()},
            {"train", parts.train.size()},
            {"validation", parts.validation.size()},
            {"test", parts.test.size()}},
           {out});
    } else if (*seg) {
      auto data = read_split_dataset(seg_data);
      SegmentationSpec spec;
      spec.user_method = user_method_from_string(seg_method);
      spec.user_fraction = seg_user_fraction.value_or(spec.user_method == UserMethod::kActivity ? 0.05 : 0.2);
      spec.item_fraction = seg_item_fraction;
      auto groups = segment(data.train, spec);
      auto out = or_default(seg_out, "groups");
      write_groups(out, groups);
      std::size_t adv_users = 0, adv_items = 0;
      for (auto x : groups.user_group) adv_users += x == Group::kAdvantaged;
      for (auto x : groups.item_group) adv_items += x == Group::kAdvantaged;
      emit(g, "segment",
           detail::concat(adv_users, "/", groups.num_users(), " advantaged users, ", adv_items, "/",
                          groups.num_items(), " short-head items"),
           {{"advantaged_users", adv_users}, {"advantaged_items", adv_items}, {"spec", spec.to_json()}}, {out});
    } else if (*rank) {
      auto data = read_split_dataset(rank_data);
      rk.name = rk.type;
      rk.seed = g.seed.value_or(1);
      if (rk.type == "import") {
        if (rank_import.empty()) throw UsageError("--ranker import needs --import");
        rk.import_paths["cli"] = rank_import;
      }
      if (rk.n < 1) throw UsageError("--n must be >= 1");
      auto scores = build_scores(rk, data.train, "cli");
      validate_score_matrix(scores, data.train);
      auto out = or_default(rank_out, "scores.tsv");
      if (auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
      write_scores(out, scores, data.train);
      emit(g, "rank",
           detail::concat(scores.ranker_tag(), ", N=", scores.n(), ", ", scores.num_users(), " users, ",
                          scores.short_rows().size(), " short rows"),
           {{"ranker", scores.ranker_tag()}, {"N", scores.n()}, {"short_rows", scores.short_rows().size()}},
           {out});
    } else if (*rr) {
      if (rr_k < 1) throw UsageError("--k must be >= 1");
      RerankConfig cfg{rr_l1, rr_l2, static_cast<std::size_t>(rr_k), mode_from_string(rr_mode),
                       solver_from_string(rr_solver)};
      cfg.validate();
      auto data = read_split_dataset(rr_data);
      auto groups = read_groups(rr_groups);
      auto scores = import_scores(rr_scores, data.train, score_file_n(rr_scores));
      auto gains = build_gain_tables(scores, groups, cfg.k);
      std::size_t ties = 0;
      RankedLists lists;
      if (cfg.solver == Solver::kLp) {
        auto res = lp_rerank(scores, gains, cfg);
        ties = res.tied_users;
        lists = std::move(res.lists);
      } else {
        lists = greedy_rerank(scores, gains, cfg);
      }
      auto out = or_default(rr_out, "reranked.tsv");
      if (auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
      write_ranked_lists(out, lists, data.train, ties);
      if (cfg.outside_unit_range()) std::cerr << "warning: lambda above 1\n";
      emit(g, "rerank",
           detail::concat("mode ", to_string(cfg.mode), ", K=", cfg.k, ", objective ",
                          format_double(lists.objective_value)),
           ranked_manifest(lists, ties), {out, out + ".json"});
    } else if (*ev) {
      if (ev_k < 1) throw UsageError("--k must be >= 1");
      auto data = read_split_dataset(ev_data);
      auto groups = read_groups(ev_groups);
      auto lists = read_ranked_items(ev_lists, data.train);
      auto rep = evaluate(lists, data.train, data.test, groups, static_cast<std::size_t>(ev_k), ev_w);
      rep.ranker = ev_ranker;
      rep.dataset = fs::path(ev_data).filename().string();
      if (fs::exists(ev_lists + ".json")) {
        auto in = open_input(ev_lists + ".json");
        auto m = nlohmann::json::parse(in, nullptr, false);
        if (!m.is_discarded()) {
          rep.mode = m.value("mode", rep.mode);
          rep.lambda1 = m.value("effective_lambda1", 0.0);
          rep.lambda2 = m.value("effective_lambda2", 0.0);
        }
      }
      if (!ev_reference.empty()) {
        auto in = open_input(ev_reference);
        auto ref = nlohmann::json::parse(in, nullptr, false);
        if (ref.is_discarded() || !ref.contains("mcpf")) throw DataError(ev_reference + ": not a report");
        rep.delta_pct = delta_pct(ref.at("mcpf").get<double>(), rep.mcpf);
      }
      auto out = or_default(ev_out, "report.json");
      if (auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
      {
        auto f = open_output(out);
        f << rep.to_json().dump(2) << '\n';
      }
      emit(g, "evaluate",
           detail::concat("nDCG ", format_double(rep.ndcg_all), ", DCF ", format_double(rep.dcf), ", DPF ",
                          format_double(rep.dpf), ", mCPF ", format_double(rep.mcpf)),
           {{"report", rep.to_json()}}, {out});
    } else if (*sw) {
      if (sw_k < 1) throw UsageError("--k must be >= 1");
      SweepSpec spec;
      if (sw_lambda == "lambda1") spec.lambda = SweptLambda::kConsumer;
      else if (sw_lambda == "lambda2") spec.lambda = SweptLambda::kProducer;
      else throw UsageError("--lambda must be lambda1 or lambda2");
      spec.grid = parse_list(sw_grid, "--grid");
      spec.fixed_other = sw_fixed;
      auto data = read_split_dataset(sw_data);
      auto groups = read_groups(sw_groups);
      auto scores = import_scores(sw_scores, data.train, score_file_n(sw_scores));
      auto gains = build_gain_tables(scores, groups, static_cast<std::size_t>(sw_k));
      auto rows = sweep_lambdas(scores, gains, data.train, data.test, groups, spec,
                                static_cast<std::size_t>(sw_k), sw_w, solver_from_string(sw_solver));
      auto out = or_default(sw_out, "sweep.tsv");
      if (auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
      write_sweep(out, rows);
      emit(g, "sweep", detail::concat(rows.size(), " rows over ", sw_lambda), {{"rows", rows.size()}}, {out});
    } else if (*run) {
      auto cfg = ExperimentConfig::load(run_config);
      if (!run_out.empty()) cfg.output_dir = run_out;
      else if (std::getenv("FAIRRANK_OUTPUT_DIR") && fs::path(cfg.output_dir).is_relative())
        cfg.output_dir = (fs::path(default_output_root()) / cfg.output_dir).string();
      if (run_jobs < 1) throw UsageError("--jobs must be >= 1");
      auto res = run_experiment(cfg, run_jobs);
      emit(g, "run",
           detail::concat(res.reports.size(), " reports, ", res.failures.size(), " failed cells"),
           {{"reports", res.reports.size()}, {"failures", res.failures.size()}},
           {res.directory.string(), (res.directory / "tables" / "summary.tsv").string()});
      if (res.reports.empty() && !res.failures.empty()) return kData;
    } else if (*st) {
      if (st_input.empty() == st_data.empty()) throw UsageError("give exactly one of --input or --data");
      auto ds = st_input.empty() ? union_of(read_split_dataset(st_data)) : load_interactions(st_input, st_fmt.format());
      std::vector<std::size_t> thresholds;
      for (double t : parse_list(st_thresholds, "--thresholds")) {
        if (!(t >= 0) || t != std::floor(t)) throw UsageError("thresholds must be non-negative integers");
        thresholds.push_back(static_cast<std::size_t>(t));
      }
      auto stats = dataset_stats(ds, thresholds);
      emit(g, "stats",
           detail::concat(stats.num_users, " users, ", stats.num_items, " items, ", stats.num_interactions,
                          " interactions, sparsity ", format_double(100 * stats.sparsity), "%"),
           {{"stats", stats.to_json()}}, {});
    }
  } catch (const UsageError& e) {
    return fail(g, kUsage, "usage error", e.what());
  } catch (const DataError& e) {
    return fail(g, kData, "error", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(g, kData, "error", std::string("malformed JSON input: ") + e.what());
  } catch (const std::exception& e) {
    return fail(g, kInternal, "internal error", e.what());
  }
  return kOk;
}
