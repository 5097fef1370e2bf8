#include "helpers.hpp"

#include <doctest.h>

using namespace crfd;
using namespace crfd::testing;

TEST_CASE("make_degree builds Delta^3_4((4,1),(2))") {
  LabeledDegree deg = make_degree(3, 4, {4, 1}, {2});
  CHECK(deg.size() == 19);
  IVec sum = ivec_zero(3);
  int w2_down = 0, w1_down = 0, w1_up = 0;
  for (const auto& e : deg.ends) {
    sum = ivec_add(sum, e.dir);
    if (e.dir == IVec{0, 0, -2}) ++w2_down;
    if (e.dir == IVec{0, 0, -1}) ++w1_down;
    if (e.dir == IVec{0, 0, 1}) ++w1_up;
  }
  CHECK(ivec_is_zero(sum));
  CHECK(w2_down == 1);
  CHECK(w1_down == 4);
  CHECK(w1_up == 2);
  // block labeling: e_0 block, then -e_1, -e_2, then alpha by weight, beta
  for (int i = 0; i < 4; ++i) CHECK(deg.ends[static_cast<size_t>(i)].dir == IVec{1, 1, 1});
  CHECK(deg.ends[4].dir == IVec{-1, 0, 0});
  CHECK(deg.ends[8].dir == IVec{0, -1, 0});
  CHECK(deg.ends[12].dir == IVec{0, 0, -1});
  CHECK(deg.ends[16].dir == IVec{0, 0, -2});
  CHECK(deg.ends[17].dir == IVec{0, 0, 1});
  for (size_t i = 0; i < deg.ends.size(); ++i)
    CHECK(deg.ends[i].label == static_cast<int>(i) + 1);
}

TEST_CASE("make_degree rejects the empty degree") {
  CHECK_THROWS_AS(make_degree(3, 0, {}, {}), ProblemError);
}

TEST_CASE("make_degree plain plane degree") {
  LabeledDegree deg = make_degree(2, 1, {}, {});
  REQUIRE(deg.size() == 3);
  CHECK(deg.ends[0].dir == IVec{1, 1});
  CHECK(deg.ends[1].dir == IVec{-1, 0});
  CHECK(deg.ends[2].dir == IVec{0, -1});
}

TEST_CASE("make_degree balance violation is named") {
  try {
    make_degree(3, 4, {1}, {});
    FAIL("expected rejection");
  } catch (const ProblemError& e) {
    CHECK(std::string(e.what()).find("balance") != std::string::npos);
    CHECK(std::string(e.what()).find("3") != std::string::npos);  // failing sum
  }
}

TEST_CASE("dimension check on the worked fixture") {
  Problem p = load_fixture_problem("paper-example-F.json");
  DimensionReport rep = check_dimension(p);
  CHECK(rep.lhs == 19);
  CHECK(rep.rhs == 19);
  CHECK(rep.pass);
}

TEST_CASE("dimension check for the line instance") {
  Problem p = load_fixture_problem("tiny-line.json");
  DimensionReport rep = check_dimension(p);
  CHECK(rep.lhs == 4);
  CHECK(rep.rhs == 4);
  CHECK(rep.pass);
}

TEST_CASE("dimension check failure reports both sides") {
  LabeledDegree deg = make_degree(3, 2, {2}, {});
  std::vector<CrossRatio> crs;
  for (int i = 0; i < 3; ++i) crs.push_back(CrossRatio::make({1, 2, 9, 10}));
  Problem p = assemble_problem(deg, 2, {}, {}, {}, {}, {}, std::move(crs), 0);
  DimensionReport rep = check_dimension(p);
  CHECK(rep.lhs == 8);
  CHECK(rep.rhs == 7);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("sampled positions are deterministic and stretched") {
  Problem p = load_fixture_problem("paper-example-F.json");
  PositionedConditions a = sample_positions(p, 0);
  PositionedConditions b = sample_positions(p, 0);
  CHECK(a.point_pos == b.point_pos);
  CHECK(a.proj_point_pos == b.proj_point_pos);
  REQUIRE(a.point_pos.size() == 2);
  const RVec& p1 = a.point_pos.at(1);
  const RVec& p2 = a.point_pos.at(2);
  for (int j = 0; j < 2; ++j) {
    CHECK(abs(p1[static_cast<size_t>(j)]) < 1);
    CHECK(abs(p2[static_cast<size_t>(j)]) < 1);
  }
  CHECK(p2[2] - p1[2] >= Rat(1000));  // far beyond 1000 * epsilon
  for (const auto& [l, v] : a.proj_point_pos) {
    CHECK(abs(v[0]) < 1);
    CHECK(abs(v[1]) < 1);
  }
  PositionedConditions c = sample_positions(p, 1);
  CHECK(a.point_pos != c.point_pos);
}

TEST_CASE("problem invariants") {
  Problem p = load_fixture_problem("paper-example-F.json");
  CHECK(p.standard_labels());
  CHECK(p.n_points() == 2);
  CHECK(p.total_ends() == 21);
  // eta labels carry conditions on the matching side
  CHECK(p.end_by_label(8)->cond == CondKind::ProjPoint);
  CHECK(p.end_by_label(8)->dir == IVec{0, 0, -2});
  // entry 7 carries both a tangency and a cross-ratio entry: flagged
  REQUIRE(p.dual_use_labels.size() >= 2);
  CHECK(std::find(p.dual_use_labels.begin(), p.dual_use_labels.end(), 7) !=
        p.dual_use_labels.end());
}

TEST_CASE("tangency on the wrong side is rejected") {
  LabeledDegree deg = make_degree(3, 1, {1}, {});
  CHECK_THROWS_AS(assemble_problem(deg, 2, {}, {6}, {}, {}, {}, {}, 0), ProblemError);
}
