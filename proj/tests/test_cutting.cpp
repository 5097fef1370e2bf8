#include "helpers.hpp"

#include <doctest.h>

using namespace crfd;
using namespace crfd::testing;

namespace {

Problem small_instance() {
  InstanceSpec s;  // Delta^3_1((0,1),(1)), two points, L on the up end
  s.d = 1;
  s.alpha = {0, 1};
  s.beta = {1};
  s.n = 2;
  s.kappa_idx = {1};
  return make_instance(s);
}

}  // namespace

TEST_CASE("cutting splits conditions and re-glues to the original") {
  Problem p = small_instance();
  CountResult r = direct_count(p);
  REQUIRE(!r.solutions.empty());
  for (const auto& sol : r.solutions) {
    FloorResult fr = detect_floors(sol.map, p);
    REQUIRE(fr.decomposition.has_value());
    for (const auto& el : fr.decomposition->elevators) {
      CutResult cut = cut_elevator(sol.map, p, r.positions, el.edge);
      // a 2/0 cut hands a projected point to exactly one side
      int p_sides = 0, l_sides = 0;
      for (int s = 0; s < 2; ++s) {
        const ProblemEnd* e =
            cut.piece[static_cast<size_t>(s)].problem.end_by_label(cut.piece[static_cast<size_t>(s)].cut_end_label);
        REQUIRE(e != nullptr);
        p_sides += e->cond == CondKind::ProjPoint;
        l_sides += e->cond == CondKind::ProjLine;
      }
      if (cut.is_11()) {
        CHECK(l_sides == 2);
      } else {
        CHECK(p_sides == 1);
      }
      EmbeddedMap glued = glue_pieces(cut);
      CHECK(embedded_map_signature(glued, p) == embedded_map_signature(sol.map, p));
    }
  }
}

TEST_CASE("cut identities hold on every elevator of a small instance") {
  Problem p = small_instance();
  CountResult r = direct_count(p);
  REQUIRE(!r.solutions.empty());
  int checked = 0;
  for (const auto& sol : r.solutions) {
    FloorResult fr = detect_floors(sol.map, p);
    REQUIRE(fr.decomposition.has_value());
    for (const auto& el : fr.decomposition->elevators) {
      CutIdentityReport rep = check_cut_identity(sol.map, p, r.positions, el.edge);
      CHECK(rep.identity_ok);
      if (rep.is_11) {
        CHECK(rep.relation_ok[0]);
        CHECK(rep.relation_ok[1]);
      }
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("decoration signs follow the worked four-contribution pattern") {
  auto decos = enumerate_decorations(2);
  REQUIRE(decos.size() == 4);
  CHECK(decos[0].second == 0);
  CHECK(decos[1].second == 1);
  CHECK(decos[2].second == 1);
  CHECK(decos[3].second == 2);
  CHECK(enumerate_decorations(0).size() == 1);
  CHECK(enumerate_decorations(0)[0].second == 0);
}

TEST_CASE("graphical contributions recover the multiplicity") {
  Problem p = small_instance();
  CountResult r = direct_count(p);
  REQUIRE(!r.solutions.empty());
  for (const auto& sol : r.solutions) {
    GraphicalSum gs = graphical_contributions_sum(sol.map, p, r.positions);
    CHECK(gs.contributions.size() == (size_t{1} << gs.n_11));
    CHECK(gs.matches);
  }
}

TEST_CASE("free families on cut 1/1 sides move in standard directions") {
  // Delta^3_2((2,1),(0,1)) with P on the weight-one downs and L on the
  // weight-two verticals: its two-floor diagrams carry a 1/1 elevator
  InstanceSpec s;
  s.d = 2;
  s.alpha = {2, 1};
  s.beta = {0, 1};
  s.n = 2;
  s.eta_idx = {0, 1};
  s.kappa_idx = {2, 3};
  Problem p = make_instance(s);
  REQUIRE(check_dimension(p).pass);
  CountResult r = direct_count(p);
  int traced = 0;
  for (const auto& sol : r.solutions) {
    FloorResult fr = detect_floors(sol.map, p);
    REQUIRE(fr.decomposition.has_value());
    for (const auto& el : fr.decomposition->elevators) {
      if (!(el.flow_into_lower == 1 && el.flow_into_upper == 1)) continue;
      CutIdentityReport rep = check_cut_identity(sol.map, p, r.positions, el.edge);
      CHECK(rep.is_11);
      CHECK(rep.identity_ok);
      CHECK(rep.relation_ok[0]);
      CHECK(rep.relation_ok[1]);
      CutResult cut = cut_elevator(sol.map, p, r.positions, el.edge);
      for (int side = 0; side < 2; ++side) {
        // remove the cut line condition: one degree of freedom remains
        CutPiece piece = cut.piece[static_cast<size_t>(side)];
        Problem free = piece.problem;
        for (auto& e : free.ends)
          if (e.label == piece.cut_end_label) e.cond = CondKind::None;
        PositionedConditions pos = piece.positions;
        pos.line_pos.erase(piece.cut_end_label);
        FamilyTrace tr = trace_free_family(free, pos, piece.cut_end_label);
        CHECK(tr.all_standard);
        if (tr.families_seen > 0) ++traced;
      }
    }
  }
  CHECK(traced > 0);
}
