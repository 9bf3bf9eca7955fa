#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "revdetect/corpus.hpp"
#include "revdetect/error.hpp"
#include "test_support.hpp"

using namespace revdetect;

namespace {

// Largest remainder in exact integer arithmetic; fractions given in percent.
std::array<std::size_t, 3> oracle_apportion(std::size_t n, std::array<std::size_t, 3> pct) {
  std::array<std::size_t, 3> out{};
  std::array<std::size_t, 3> rem{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    out[i] = n * pct[i] / 100;
    rem[i] = n * pct[i] % 100;
    used += out[i];
  }
  for (std::size_t left = n - used; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (rem[i] > rem[best]) best = i;
    ++out[best];
    rem[best] = 0;
  }
  return out;
}

std::vector<ReviewRecord> make_records(std::size_t n, double positive_share = 0.5, std::uint64_t seed = 3) {
  std::mt19937_64 g(seed);
  std::bernoulli_distribution coin(positive_share);
  std::vector<ReviewRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = "r" + std::to_string(i);
    out[i].text = "text";
    out[i].image_path = out[i].id + ".jpg";
    out[i].label = coin(g) ? 1 : 0;
  }
  return out;
}

}  // namespace

TEST_CASE("apportion matches the integer oracle") {
  CHECK(apportion(10, {}) == std::array<std::size_t, 3>{6, 2, 2});
  CHECK(apportion(20144, {}) == std::array<std::size_t, 3>{12086, 4029, 4029});
  CHECK(oracle_apportion(20144, {60, 20, 20}) == std::array<std::size_t, 3>{12086, 4029, 4029});
  for (std::size_t n = 1; n < 3000; n += 7) {
    auto a = apportion(n, {});
    CHECK(a == oracle_apportion(n, {60, 20, 20}));
    CHECK(a[0] + a[1] + a[2] == n);
  }
  CHECK(apportion(7, {0.5, 0.25, 0.25}) == oracle_apportion(7, {50, 25, 25}));
}

TEST_CASE("make_splits sizes, coverage and determinism") {
  auto recs = make_records(20144);
  SplitOptions opts;
  opts.seed = 42;
  auto a = make_splits(recs, opts);
  CHECK(a.sizes() == std::array<std::size_t, 3>{12086, 4029, 4029});
  REQUIRE(a.assignment.size() == recs.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(a.assignment[i].first == recs[i].id);
    ids.insert(a.assignment[i].first);
  }
  CHECK(ids.size() == recs.size());

  auto b = make_splits(recs, opts);
  CHECK(a.as_map() == b.as_map());

  opts.seed = 43;
  auto c = make_splits(recs, opts);
  CHECK(c.sizes() == a.sizes());
  CHECK(c.as_map() != a.as_map());

  auto small = make_records(10);
  for (std::uint64_t s : {0ull, 1ull, 999ull})
    CHECK(make_splits(small, SplitOptions{s}).sizes() == std::array<std::size_t, 3>{6, 2, 2});
}

TEST_CASE("label proportions per split track the global share") {
  for (bool stratify : {false, true}) {
    auto recs = make_records(5000, 0.3, 11);
    SplitOptions opts;
    opts.seed = 7;
    opts.stratify = stratify;
    auto a = make_splits(recs, opts);
    const double global =
        std::count_if(recs.begin(), recs.end(), [](auto& r) { return r.label == 1; }) / 5000.0;
    std::array<double, 3> pos{}, tot{};
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const int s = static_cast<int>(a.assignment[i].second);
      tot[s] += 1;
      pos[s] += recs[i].label;
    }
    for (int s = 0; s < 3; ++s) CHECK(std::abs(pos[s] / tot[s] - global) <= 0.03);
    if (stratify) CHECK(a.sizes()[0] + a.sizes()[1] + a.sizes()[2] == 5000);
  }
}

TEST_CASE("preassigned splits are kept when requested") {
  auto recs = make_records(100);
  for (int i = 0; i < 10; ++i) recs[i].split = Split::Test;
  SplitOptions opts;
  opts.respect_preassigned = true;
  auto a = make_splits(recs, opts).as_map();
  for (int i = 0; i < 10; ++i) CHECK(a.at(recs[i].id) == Split::Test);
}

TEST_CASE("make_splits rejects bad input") {
  CHECK_THROWS_AS(make_splits(std::span<const ReviewRecord>{}, {}), Error);
  auto recs = make_records(5);
  SplitOptions opts;
  opts.fractions = {0.5, 0.2, 0.2};
  CHECK_THROWS_AS(make_splits(recs, opts), Error);
}

TEST_CASE("split CSV round trip") {
  TempDir dir;
  auto recs = make_records(37);
  auto a = make_splits(recs, SplitOptions{5});
  write_split_csv(dir / "splits.csv", a);
  CHECK(read_split_csv(dir / "splits.csv") == a.as_map());
  CHECK(slurp(dir / "splits.csv").rfind("# seed=5", 0) == 0);
}

TEST_CASE("load_manifest") {
  TempDir dir;
  SUBCASE("well-formed rows pass through in order") {
    auto p = dir.write("m.csv",
                       "id,text,image_path,label,rating\n"
                       "b,\"Great, really \"\"great\"\" food\",b.jpg,0,5\n"
                       "a,Fine.,a.png,1,\n"
                       "c,Okay,sub/c.jpg,1.0,3\n");
    auto m = load_manifest(p, dir.path());
    REQUIRE(m.records.size() == 3);
    CHECK(m.diagnostics.empty());
    CHECK(m.records[0].id == "b");
    CHECK(m.records[0].text == "Great, really \"great\" food");
    CHECK(m.records[0].rating == 5);
    CHECK_FALSE(m.records[1].rating.has_value());
    CHECK(m.records[2].label == 1);
    CHECK(m.image_file(m.records[2]) == dir.path() / "sub/c.jpg");
  }
  SUBCASE("invalid rows are skipped with diagnostics") {
    auto p = dir.write("m.csv",
                       "id,text,image_path,label,split\n"
                       "1,ok,1.jpg,0,train\n"
                       "2,bad label,2.jpg,2,\n"
                       "3,   ,3.jpg,1,\n"
                       "4,x,4.jpg,yes,\n"
                       "1,dup,1.jpg,0,\n"
                       "5,x,5.jpg,1,holdout\n"
                       "6,x,6.jpg,1,validation\n");
    auto m = load_manifest(p, dir.path());
    REQUIRE(m.records.size() == 2);
    CHECK(m.records[1].split == Split::Val);
    REQUIRE(m.diagnostics.size() == 5);
    CHECK(m.diagnostics[0].message == "label out of {0,1}");
    CHECK(m.diagnostics[0].line == 3);
    CHECK(m.diagnostics[1].message.find("empty") != std::string::npos);
    CHECK(m.diagnostics[2].message == "unparsable label");
    CHECK(m.diagnostics[3].message.find("duplicate") != std::string::npos);
    CHECK(m.diagnostics[4].message.find("split") != std::string::npos);
  }
  SUBCASE("missing column names the column") {
    auto p = dir.write("m.csv", "id,text,label\n1,x,0\n");
    CHECK_THROWS_WITH_AS(load_manifest(p, dir.path()), doctest::Contains("image_path"), Error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_manifest(dir / "nope.csv", dir.path()), Error);
  }
  SUBCASE("column mapping") {
    auto p = dir.write("m.csv", "review_id,body,photo,is_fake\nq,hello,q.jpg,1\n");
    auto map = dir.write("map.json", R"({"id":"review_id","text":"body","image_path":"photo","label":"is_fake"})");
    auto m = load_manifest(p, dir.path(), load_column_mapping(map));
    REQUIRE(m.records.size() == 1);
    CHECK(m.records[0].text == "hello");
    CHECK(m.records[0].label == 1);
  }
}
