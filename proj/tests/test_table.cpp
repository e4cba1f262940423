#include <doctest.h>

#include <random>
#include <sstream>

#include "tabinr/rng.hpp"
#include "tabinr/table.hpp"

using namespace tabinr;

namespace {

TableSchema xc_schema() {
  TableSchema s;
  s.columns.push_back({"x", ColumnKind::numeric, {}});
  s.columns.push_back({"c", ColumnKind::categorical, {"a", "b"}});
  return s;
}

EncodedTable load_text(const std::string& csv, const TableSchema& schema) {
  std::istringstream in(csv);
  return load_table(in, schema);
}

}  // namespace

TEST_CASE("one-hot expansion of a 2-row table") {
  auto t = load_text("x,c\n1.0,a\n2.0,b\n", xc_schema());
  REQUIRE(t.rows() == 2);
  REQUIRE(t.cols() == 3);
  CHECK(t.values(0, 0) == 1.0);
  CHECK(t.values(0, 1) == 1.0);
  CHECK(t.values(0, 2) == 0.0);
  CHECK(t.values(1, 0) == 2.0);
  CHECK(t.values(1, 1) == 0.0);
  CHECK(t.values(1, 2) == 1.0);
  CHECK(t.observed.all());
  CHECK(t.groups.size() == 2);
  CHECK(t.groups[1] == std::vector<int>{1, 2});
}

TEST_CASE("empty categorical cell marks the whole group missing") {
  auto t = load_text("x,c\n1.0,a\n2.0,\n", xc_schema());
  CHECK(t.observed(1, 0));
  CHECK_FALSE(t.observed(1, 1));
  CHECK_FALSE(t.observed(1, 2));
}

TEST_CASE("categories inferred in first-appearance order") {
  TableSchema s;
  s.columns.push_back({"c", ColumnKind::categorical, {}});
  auto t = load_text("c\nz\ny\nz\nx\n", s);
  CHECK(t.schema.columns[0].categories == std::vector<std::string>{"z", "y", "x"});
  CHECK(t.values(0, 0) == 1.0);
  CHECK(t.values(3, 2) == 1.0);
}

TEST_CASE("load errors") {
  CHECK_THROWS(load_text("x,c\n1.0,q\n", xc_schema()));     // unknown category
  CHECK_THROWS(load_text("x,c\nfoo,a\n", xc_schema()));     // non-numeric
  CHECK_THROWS(load_text("x,y,c\n1,2,a\n", xc_schema()));   // header mismatch
  CHECK_THROWS(load_text("x,c\n", xc_schema()));            // no data rows
  std::istringstream empty("");
  CHECK_THROWS(load_table(empty, xc_schema()));
}

TEST_CASE("min-max scaling") {
  TableSchema s;
  s.columns.push_back({"x", ColumnKind::numeric, {}});
  auto t = fit_scaling(load_text("x\n0\n5\n10\n", s));
  CHECK(t.values(0, 0) == 0.0);
  CHECK(t.values(1, 0) == 0.5);
  CHECK(t.values(2, 0) == 1.0);
  CHECK(t.scale[0]->min == 0.0);
  CHECK(t.scale[0]->max == 10.0);
}

TEST_CASE("constant column scales to 0 and inverts to the constant") {
  TableSchema s;
  s.columns.push_back({"x", ColumnKind::numeric, {}});
  auto t = fit_scaling(load_text("x\n3\n3\n3\n", s));
  CHECK(t.values.col(0).isZero());
  CHECK(t.scale[0]->min == 3.0);
  CHECK(t.scale[0]->max == 3.0);
  Matrix back = unscale(t, t.values);
  CHECK(back(0, 0) == 3.0);
}

TEST_CASE("unscale closed-form points") {
  TableSchema s;
  s.columns.push_back({"x", ColumnKind::numeric, {}});
  auto t = fit_scaling(load_text("x\n0\n10\n", s));
  Matrix v(2, 1);
  v << 0.5, 0.0;
  Matrix back = unscale(t, v);
  CHECK(back(0, 0) == doctest::Approx(5.0));
  CHECK(back(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("scale round trip over random values") {
  auto gen = rng::engine(11, "test.roundtrip");
  std::uniform_real_distribution<double> unif(-100.0, 100.0);
  std::ostringstream csv;
  csv << "a,b\n";
  for (int i = 0; i < 50; ++i) csv << unif(gen) << "," << unif(gen) << "\n";
  TableSchema s;
  s.columns.push_back({"a", ColumnKind::numeric, {}});
  s.columns.push_back({"b", ColumnKind::numeric, {}});
  auto raw = load_text(csv.str(), s);
  auto scaled = fit_scaling(raw);
  Matrix back = unscale(scaled, scaled.values);
  for (int j = 0; j < 2; ++j) {
    double range = scaled.scale[j]->max - scaled.scale[j]->min;
    for (int i = 0; i < 50; ++i)
      CHECK(std::abs(back(i, j) - raw.values(i, j)) <= 1e-9 * range);
  }
}

TEST_CASE("observed_pairs matches brute-force mask scan") {
  auto t = load_text("x,c\n1.0,a\n2.0,\n,b\n", xc_schema());
  auto pairs = observed_pairs(t);
  long expected = t.observed.count();
  CHECK(static_cast<long>(pairs.size()) == expected);
  size_t k = 0;
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j)
      if (t.observed(i, j)) {
        REQUIRE(k < pairs.size());
        CHECK(pairs[k] == std::make_pair(i, j));
        ++k;
      }
}

TEST_CASE("fully observed 2x2 pair order") {
  TableSchema s;
  s.columns.push_back({"a", ColumnKind::numeric, {}});
  s.columns.push_back({"b", ColumnKind::numeric, {}});
  auto t = load_text("a,b\n1,2\n3,4\n", s);
  auto pairs = observed_pairs(t);
  CHECK(pairs == std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

TEST_CASE("group widths sum to expanded width") {
  auto t = load_text("x,c\n1.0,a\n2.0,b\n", xc_schema());
  size_t total = 0;
  for (const auto& g : t.groups) total += g.size();
  CHECK(static_cast<Eigen::Index>(total) == t.cols());
}

TEST_CASE("schema JSON round trip") {
  auto s = schema_from_json(R"({"x":{"kind":"numeric"},"c":{"kind":"categorical","categories":["a","b"]}})");
  REQUIRE(s.columns.size() == 2);
  CHECK(s.columns[0].name == "x");
  CHECK(s.columns[1].categories == std::vector<std::string>{"a", "b"});
  auto s2 = schema_from_json(schema_to_json(s));
  CHECK(s2.columns[1].name == "c");
}

TEST_CASE("mask CSV round trip and original-shape expansion") {
  auto t = load_text("x,c\n1.0,a\n2.0,b\n", xc_schema());
  BoolMask m = BoolMask::Constant(2, 3, false);
  m(0, 0) = true;
  m(1, 1) = m(1, 2) = true;
  std::ostringstream out;
  write_mask_csv(out, m);
  std::istringstream in(out.str());
  BoolMask m2 = read_mask_csv(in, t, false);
  CHECK((m2 == m).all());

  std::istringstream orig("1,0\n0,1\n");
  BoolMask m3 = read_mask_csv(orig, t, true);
  CHECK((m3 == m).all());
}

TEST_CASE("column permutation round trip") {
  auto t = load_text("x,c\n1.5,a\n2.0,b\n", xc_schema());
  auto p = permute_columns(t, {1, 0});
  CHECK(p.schema.columns[0].name == "c");
  CHECK(p.values(0, 2) == 1.5);
  CHECK(p.group_ids == std::vector<std::uint64_t>{1, 0});
  auto back = permute_columns(p, {1, 0});
  CHECK(back.values == t.values);
  CHECK(back.group_ids == t.group_ids);
}
