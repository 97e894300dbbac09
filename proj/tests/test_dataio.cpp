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
#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "fairrank/dataio.hpp"
#include "oracles.hpp"

namespace fairrank {
namespace {

InteractionDataset parse(const std::string& text, TextFormat fmt = {}) {
  std::istringstream in(text);
  return read_interactions(in, fmt);
}

TEST(LoadInteractions, CountsUsersItemsAndRecords) {
  auto ds = parse("u1,i1,5\nu1,i2,3\nu2,i1,4\n");
  EXPECT_EQ(ds.num_users(), 2u);
  EXPECT_EQ(ds.num_items(), 2u);
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.users.token(0), "u1");
  EXPECT_EQ(ds.items.token(1), "i2");
}

TEST(LoadInteractions, DuplicateKeepsHighestWeight) {
  auto ds = parse("u1,i1,5\nu1,i1,2\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.interactions[0].weight, 5.0);
}

TEST(LoadInteractions, DuplicateTieKeepsLatestTimestamp) {
  TextFormat fmt;
  fmt.timestamp_col = 3;
  auto ds = parse("u1,i1,3,100\nu1,i1,3,300\nu1,i1,3,200\n", fmt);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.interactions[0].timestamp, 300);
}

TEST(LoadInteractions, HeaderAndCustomColumns) {
  TextFormat fmt;
  fmt.delimiter = '\t';
  fmt.user_col = 1;
  fmt.item_col = 0;
  fmt.weight_col = -1;
  fmt.skip_header = true;
  auto ds = parse("item\tuser\ni9\tu3\ni8\tu3\n", fmt);
  EXPECT_EQ(ds.num_users(), 1u);
  EXPECT_EQ(ds.num_items(), 2u);
  EXPECT_EQ(ds.interactions[1].weight, 1.0);
}

TEST(LoadInteractions, MalformedRecordNamesLine) {
  try {
    parse("u1,i1,5\nu2\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("u1,i1,abc\n"), DataError);
  EXPECT_THROW(parse("u1,i1,-1\n"), DataError);
  EXPECT_THROW(parse("u1,,1\n"), DataError);
}

TEST(LoadInteractions, EmptyFileIsAnError) {
  EXPECT_THROW(parse(""), DataError);
  EXPECT_THROW(parse("\n\n"), DataError);
}

TEST(KcoreFilter, StarGraphVanishes) {
  auto ds = parse("u1,i1,1\nu1,i2,1\nu1,i3,1\nu1,i4,1\nu1,i5,1\n");
  auto out = kcore_filter(ds, 2);
  EXPECT_EQ(out.size(), 0u);
  EXPECT_EQ(out.num_users(), 0u);
  EXPECT_EQ(out.num_items(), 0u);
}

TEST(KcoreFilter, CompleteBipartiteUnchanged) {
  std::string text;
  for (int u = 0; u < 3; ++u)
    for (int i = 0; i < 3; ++i) text += "u" + std::to_string(u) + ",i" + std::to_string(i) + ",1\n";
  auto ds = parse(text);
  auto out = kcore_filter(ds, 3);
  EXPECT_EQ(out.interactions, ds.interactions);
  EXPECT_EQ(out.users, ds.users);
}

TEST(KcoreFilter, RejectsNonPositiveK) {
  auto ds = parse("u1,i1,1\n");
  EXPECT_THROW(kcore_filter(ds, 0), UsageError);
}

TEST(KcoreFilter, MatchesNaiveRescanOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Interaction> recs;
    std::bernoulli_distribution keep(0.12 + 0.01 * trial);
    for (Index u = 0; u < 50; ++u)
      for (Index i = 0; i < 50; ++i)
        if (keep(rng)) recs.push_back({u, i, 1.0, std::nullopt});
    auto ds = make_dataset(50, 50, recs);
    auto out = kcore_filter(ds, 5);

    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& r : ds.interactions) edges.emplace(ds.users.token(r.user), ds.items.token(r.item));
    auto expected = testing::naive_kcore(edges, 5);
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& r : out.interactions) got.emplace(out.users.token(r.user), out.items.token(r.item));
    EXPECT_EQ(got, expected) << "trial " << trial;

    // Fixed point: degrees >= k and the filter is idempotent.
    for (auto d : user_degrees(out)) EXPECT_GE(d, 5u);
    for (auto d : item_degrees(out)) EXPECT_GE(d, 5u);
    EXPECT_EQ(kcore_filter(out, 5).interactions, out.interactions);
  }
}

TEST(KcoreFilter, SurvivorsKeepRelativeOrder) {
  auto ds = parse("a,x,1\nb,x,1\na,y,1\nb,y,1\nc,z,1\n");
  auto out = kcore_filter(ds, 2);
  ASSERT_EQ(out.num_users(), 2u);
  EXPECT_EQ(out.users.token(0), "a");
  EXPECT_EQ(out.users.token(1), "b");
  EXPECT_EQ(out.items.token(0), "x");
}

InteractionDataset uniform_users(std::size_t users, std::size_t per_user) {
  std::vector<Interaction> recs;
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t i = 0; i < per_user; ++i)
      recs.push_back({static_cast<Index>(u), static_cast<Index>((u * 7 + i) % (per_user * 3)), 1.0, std::nullopt});
  return make_dataset(users, per_user * 3, recs);
}

TEST(Split, TenInteractionsSplitSevenOneTwo) {
  auto ds = uniform_users(1, 10);
  auto s = split(ds, {}, 3);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 2u);
}

TEST(Split, RemaindersGoToTrainThenTest) {
  EXPECT_EQ(split_sizes(4, {}), (std::array<std::size_t, 3>{3, 0, 1}));
  EXPECT_EQ(split_sizes(3, {}), (std::array<std::size_t, 3>{3, 0, 0}));
  EXPECT_EQ(split_sizes(2, {}), (std::array<std::size_t, 3>{2, 0, 0}));
  EXPECT_EQ(split_sizes(19, {}), (std::array<std::size_t, 3>{14, 1, 4}));
}

TEST(Split, DeterministicPerSeed) {
  auto ds = make_zipf_dataset({.users = 60, .items = 80, .min_degree = 5, .max_degree = 30});
  auto a = split(ds, {}, 99);
  auto b = split(ds, {}, 99);
  auto c = split(ds, {}, 100);
  EXPECT_EQ(a.train.interactions, b.train.interactions);
  EXPECT_EQ(a.test.interactions, b.test.interactions);
  EXPECT_NE(a.test.interactions, c.test.interactions);
}

TEST(Split, PartitionsParentAndSharesVocabulary) {
  auto ds = make_zipf_dataset({.users = 80, .items = 100, .min_degree = 2, .max_degree = 40});
  auto s = split(ds, {}, 5);
  EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size(), ds.size());
  std::multiset<std::pair<Index, Index>> parent, parts;
  for (const auto& r : ds.interactions) parent.emplace(r.user, r.item);
  for (const auto* p : {&s.train, &s.validation, &s.test}) {
    EXPECT_EQ(p->users, ds.users);
    EXPECT_EQ(p->items, ds.items);
    for (const auto& r : p->interactions) parts.emplace(r.user, r.item);
  }
  EXPECT_EQ(parent, parts);  // disjoint and union-complete since pairs are unique
}

TEST(Split, GlobalProportionsNearTargets) {
  auto ds = uniform_users(50, 20);  // 1,000 interactions
  auto s = split(ds, {}, 17);
  const double total = static_cast<double>(ds.size());
  EXPECT_NEAR(s.train.size() / total, 0.7, 0.02);
  EXPECT_NEAR(s.validation.size() / total, 0.1, 0.02);
  EXPECT_NEAR(s.test.size() / total, 0.2, 0.02);
}

TEST(Split, RejectsBadRatios) {
  auto ds = uniform_users(2, 10);
  EXPECT_THROW(split(ds, {0.7, 0.2, 0.2}, 1), UsageError);
  EXPECT_THROW(split(ds, {1.0, 0.0, 0.0}, 1), UsageError);
}

TEST(DatasetStats, SparsityOfDenseMatrixIsZero) {
  auto ds = parse("a,x,1\na,y,1\nb,x,1\nb,y,1\n");
  EXPECT_DOUBLE_EQ(dataset_stats(ds).sparsity, 0.0);
}

TEST(DatasetStats, MovieLensTriple) {
  EXPECT_NEAR(100 * sparsity(943, 1349, 99287), 92.19, 0.01);
}

TEST(DatasetStats, EmptyMatrixIsAnError) { EXPECT_THROW(sparsity(0, 10, 0), DataError); }

TEST(DatasetStats, ThresholdFractionsMatchDegreeHistogram) {
  auto ds = make_zipf_dataset({.users = 300, .items = 200, .min_degree = 5, .max_degree = 150, .seed = 3});
  std::vector<std::size_t> ts = {10, 20, 50, 100};
  auto st = dataset_stats(ds, ts);
  std::map<std::string, int> udeg, ideg;
  for (const auto& r : ds.interactions) {
    ++udeg[ds.users.token(r.user)];
    ++ideg[ds.items.token(r.item)];
  }
  for (std::size_t t = 0; t < ts.size(); ++t) {
    int uh = 0, ih = 0;
    for (auto& [k, v] : udeg) uh += v >= static_cast<int>(ts[t]);
    for (auto& [k, v] : ideg) ih += v >= static_cast<int>(ts[t]);
    EXPECT_DOUBLE_EQ(st.user_fraction_at_least[t].second, static_cast<double>(uh) / ds.num_users());
    EXPECT_DOUBLE_EQ(st.item_fraction_at_least[t].second, static_cast<double>(ih) / ds.num_items());
  }
}

TEST(SplitDatasetFiles, RoundTrip) {
  auto ds = make_zipf_dataset({.users = 40, .items = 60, .min_degree = 3, .max_degree = 20});
  auto s = split(ds, {}, 8);
  auto dir = std::filesystem::temp_directory_path() / "fairrank_dataio_roundtrip";
  std::filesystem::remove_all(dir);
  write_split_dataset(dir, s, {{"kcore", 1}});
  auto back = read_split_dataset(dir);
  EXPECT_EQ(back.train.interactions, s.train.interactions);
  EXPECT_EQ(back.validation.interactions, s.validation.interactions);
  EXPECT_EQ(back.test.interactions, s.test.interactions);
  EXPECT_EQ(back.train.users, s.train.users);
  EXPECT_EQ(back.split_seed, 8u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace fairrank
