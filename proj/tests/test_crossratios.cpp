#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace crfd;
using namespace crfd::testing;

namespace {

// Quadratic oracle: vertex sets of the two endpoint paths intersect in
// exactly one vertex; entries sitting at the same vertex are fine because
// their "path" is that single vertex.
std::optional<int> path_oracle(const TreeTopology& t, std::array<int, 4> vtx, int partner) {
  auto path_set = [&](int a, int b) {
    auto pv = t.path_vertices(a, b);
    return std::set<int>(pv.begin(), pv.end());
  };
  std::array<int, 2> restidx{};
  int k = 0;
  for (int i = 1; i < 4; ++i)
    if (i != partner) restidx[static_cast<size_t>(k++)] = i;
  auto s1 = path_set(vtx[0], vtx[static_cast<size_t>(partner)]);
  auto s2 = path_set(vtx[static_cast<size_t>(restidx[0])], vtx[static_cast<size_t>(restidx[1])]);
  std::vector<int> inter;
  std::set_intersection(s1.begin(), s1.end(), s2.begin(), s2.end(), std::back_inserter(inter));
  if (inter.size() == 1) return inter[0];
  return std::nullopt;
}

TreeTopology random_tree(std::mt19937_64& rng, int n) {
  TreeTopology t;
  t.n_vertices = n;
  for (int v = 1; v < n; ++v)
    t.edges.push_back({static_cast<int>(rng() % static_cast<unsigned>(v)), v});
  return t;
}

}  // namespace

TEST_CASE("satisfied vertex on a star and a path") {
  TreeTopology star;
  star.n_vertices = 1;
  star.ends = {{1, 0}, {2, 0}, {3, 0}, {4, 0}};
  auto v = satisfied_vertex(star, {0, 0, 0, 0});
  REQUIRE(v.has_value());
  CHECK(*v == 0);

  // path a - b - c, two entries on each far side: the paths meet in a
  // whole segment, not one vertex
  TreeTopology path;
  path.n_vertices = 3;
  path.edges = {{0, 1}, {1, 2}};
  CHECK_FALSE(satisfied_vertex(path, {0, 0, 2, 2}).has_value());
}

TEST_CASE("worked diagram assignment lands at the first vertex") {
  TreeTopology skel;
  skel.n_vertices = 2;
  skel.edges = {{0, 1}};
  std::map<int, int> endpoint{{1, 0}, {2, 1}, {3, 0}, {7, 0}};
  auto assign = assign_crossratios(skel, {CrossRatio::make({1, 2, 3, 7})}, endpoint);
  REQUIRE(assign.valid());
  CHECK(assign.lambda_at[0] == std::vector<int>{0});
  CHECK(assign.lambda_at[1].empty());
}

TEST_CASE("path criterion agrees with the quadratic oracle for all pairings") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    int n = 2 + static_cast<int>(rng() % 7);
    TreeTopology t = random_tree(rng, n);
    std::array<int, 4> vtx{};
    for (auto& v : vtx) v = static_cast<int>(rng() % static_cast<unsigned>(n));
    auto got = satisfied_vertex(t, vtx);
    for (int partner = 1; partner <= 3; ++partner) {
      auto expect = path_oracle(t, vtx, partner);
      CHECK(got == expect);
    }
  }
}

namespace {

LocalStar sixvalent_star(const std::array<int, 3>& order) {
  // cross-ratios (12|56), (34|56), (12|34) on edges 1..6
  std::vector<StarCrossRatio> crs(3);
  crs[0].exit_edges = {1, 2, 5, 6};
  crs[1].exit_edges = {3, 4, 5, 6};
  crs[2].exit_edges = {1, 2, 3, 4};
  for (auto& c : crs) c.pairing_partner = 1;
  LocalStar star;
  star.edge_ids = {1, 2, 3, 4, 5, 6};
  for (int i : order) star.crossratios.push_back(crs[static_cast<size_t>(i)]);
  return star;
}

}  // namespace

TEST_CASE("six-valent worked star has exactly two total resolutions") {
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end());
  do {
    CHECK(cr_mult(sixvalent_star(order)) == 2);
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("trivalent star counts one empty resolution") {
  LocalStar star;
  star.edge_ids = {1, 2, 3};
  CHECK(cr_mult(star) == 1);
}

TEST_CASE("four-valent star with one cross-ratio") {
  LocalStar star;
  star.edge_ids = {1, 2, 3, 4};
  StarCrossRatio cr;
  cr.exit_edges = {1, 2, 3, 4};
  cr.pairing_partner = 1;  // (12|34)
  star.crossratios.push_back(cr);
  // of the three resolutions of a 4-valent vertex exactly one separates
  // {1,2} from {3,4}
  CHECK(cr_mult(star) == 1);
}

TEST_CASE("an uncovered edge forces multiplicity zero") {
  // 5-valent star, both cross-ratios exit through 1,2,3,4; edge 5 uncovered
  LocalStar star;
  star.edge_ids = {1, 2, 3, 4, 5};
  StarCrossRatio a, b;
  a.exit_edges = {1, 2, 3, 4};
  a.pairing_partner = 1;
  b.exit_edges = {1, 3, 2, 4};
  b.pairing_partner = 1;  // (13|24)
  star.crossratios = {a, b};
  CHECK(cr_mult(star) == 0);
}

TEST_CASE("valence mismatch is rejected") {
  LocalStar star;
  star.edge_ids = {1, 2, 3, 4};
  CHECK_THROWS(cr_mult(star));
}

TEST_CASE("cr_mult ignores both order and pairing choices") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    int r = 2 + static_cast<int>(rng() % 2);  // 2 or 3 cross-ratios
    int k = 3 + r;
    LocalStar base;
    for (int i = 0; i < k; ++i) base.edge_ids.push_back(i + 1);
    for (int c = 0; c < r; ++c) {
      StarCrossRatio cr;
      std::vector<int> pool = base.edge_ids;
      std::shuffle(pool.begin(), pool.end(), rng);
      for (int i = 0; i < 4; ++i) cr.exit_edges[static_cast<size_t>(i)] = pool[static_cast<size_t>(i)];
      cr.pairing_partner = 1;
      base.crossratios.push_back(cr);
    }
    Int ref = cr_mult(base);
    // order independence
    LocalStar rev = base;
    std::reverse(rev.crossratios.begin(), rev.crossratios.end());
    CHECK(cr_mult(rev) == ref);
    // pairing independence
    for (int partner = 2; partner <= 3; ++partner) {
      LocalStar alt = base;
      for (auto& c : alt.crossratios) c.pairing_partner = partner;
      CHECK(cr_mult(alt) == ref);
    }
  }
}

TEST_CASE("adapting cross-ratios under a cut") {
  CrossRatio cr = CrossRatio::make({1, 2, 3, 7});
  std::set<int> kept{1, 3, 7, 4, 5, 6, 8};
  CrossRatio adapted = adapt_crossratio(cr, kept, 22);
  CHECK(adapted.entries == std::array<int, 4>{1, 3, 7, 22});

  CrossRatio same = adapt_crossratio(cr, {1, 2, 3, 7}, 99);
  CHECK(same.entries == cr.entries);

  CHECK_THROWS(adapt_crossratio(cr, {1, 2}, 99));
}

namespace {

TreeTopology caterpillar4() {
  // ends 1,2 at vertex 0; ends 3,4 at vertex 1
  TreeTopology t;
  t.n_vertices = 2;
  t.edges = {{0, 1}};
  t.ends = {{1, 0}, {2, 0}, {3, 1}, {4, 1}};
  return t;
}

}  // namespace

TEST_CASE("length rows of non-degenerated cross-ratios") {
  TreeTopology t = caterpillar4();
  CrossRatio cr = CrossRatio::make({1, 2, 3, 4}, 1, Rat(5));
  auto row = cr_length_row(t, cr);
  REQUIRE(row.has_value());
  CHECK(row->edges == std::vector<int>{0});
  CHECK(row->rhs == 5);

  CrossRatio wrong = CrossRatio::make({1, 2, 3, 4}, 2, Rat(5));  // (13|24)
  CHECK_FALSE(cr_length_row(t, wrong).has_value());
}

TEST_CASE("a longer separating path sums its lengths") {
  // 1,2 at vertex 0 ... chain ... 3,4 at vertex 3
  TreeTopology t;
  t.n_vertices = 4;
  t.edges = {{0, 1}, {1, 2}, {2, 3}};
  t.ends = {{1, 0}, {2, 0}, {3, 3}, {4, 3}};
  // the middle vertices need a third adjacent edge to be honest trees, give
  // them spectator ends
  t.ends.push_back({5, 1});
  t.ends.push_back({6, 2});
  CrossRatio cr = CrossRatio::make({1, 2, 3, 4}, 1, Rat(9, 2));
  auto row = cr_length_row(t, cr);
  REQUIRE(row.has_value());
  CHECK(row->edges == std::vector<int>{0, 1, 2});
  // metric check: any positive lengths summing to 9/2 satisfy the row
  Rat a(1), b(2), c = row->rhs - a - b;
  CHECK(a + b + c == row->rhs);
}
