// crfd command line: count curves via cross-ratio floor diagrams, count them
// directly by brute force, enumerate diagrams, resolve vertex
// multiplicities, and verify the structural identities.
//
// Exit codes: 0 success, 1 verification mismatch, 2 validation error,
// 3 feasibility refusal.

#include "crfd/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace crfd;

struct CommonFlags {
  std::string input;
  std::string table_path;
  std::string format = "table";
  int workers = 0;  // 0 = available parallelism
  int max_ends = 10;
  std::uint64_t max_types = 0;
  std::uint64_t max_assignments = 10'000'000;
  std::optional<std::uint64_t> seed;
  bool no_flow_pruning = false;
  std::string dump_path;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_table = true) {
  cmd->add_option("input", f.input, "problem file (JSON)")->required();
  if (with_table) cmd->add_option("--table", f.table_path, "multiplicity table file");
  cmd->add_option("--format", f.format, "output format: table|json|dot")
      ->check(CLI::IsMember({"table", "json", "dot"}));
  cmd->add_option("--workers", f.workers, "worker threads (0 = hardware)");
  cmd->add_option("--seed", f.seed, "override the problem seed");
  cmd->add_option("--max-ends", f.max_ends, "refuse instances with more ends");
  cmd->add_option("--max-types", f.max_types, "cap on enumerated topologies (0 = none)");
  cmd->add_option("--max-diagrams", f.max_assignments, "cap on diagram assignments");
  cmd->add_flag("--no-flow-pruning", f.no_flow_pruning, "disable condition-flow pruning");
  cmd->add_option("--dump-maps", f.dump_path, "write solved maps as JSON");
}

int effective_workers(const CommonFlags& f) {
  if (f.workers > 0) return f.workers;
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

CountOptions count_options(const CommonFlags& f, EnumMode mode, bool keep) {
  CountOptions co;
  co.mode = mode;
  co.flow_pruning = !f.no_flow_pruning;
  co.max_ends = f.max_ends;
  co.max_types = f.max_types;
  co.keep_solutions = keep;
  co.workers = effective_workers(f);
  co.seed_override = f.seed;
  return co;
}

MultProvider make_provider(const CommonFlags& f) {
  MultProvider mp;
  if (!f.table_path.empty()) mp.table = load_mult_table(f.table_path, std::cerr);
  mp.brute_max_ends = f.max_ends;
  mp.max_types = f.max_types;
  mp.workers = effective_workers(f);
  return mp;
}

void emit(const Json& j) { std::cout << json_to_string(j); }

int run_direct(const CommonFlags& f, EnumMode mode) {
  Problem p = load_problem_file(f.input);
  CountResult r = direct_count(p, count_options(f, mode, true));
  if (!f.dump_path.empty()) {
    std::ofstream out(f.dump_path);
    out << json_to_string(dump_solutions(r, p));
  }
  Json j;
  j["command"] = "direct";
  j["mode"] = mode == EnumMode::Degenerate ? "degenerate" : "lengths";
  j["dimension_check"] = check_dimension(p).detail;
  if (!p.dual_use_labels.empty()) j["dual_use_labels"] = p.dual_use_labels;
  Json body = count_result_to_json(r, p, f.format == "json");
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  if (f.format == "json") {
    emit(j);
  } else {
    std::cout << "N = " << r.total.str() << "  (" << r.solutions.size() << " solutions, "
              << r.types_enumerated << " types, " << r.types_flow_pruned << " flow-pruned, "
              << r.resamples << " resamples)\n";
  }
  return 0;
}

int run_count(const CommonFlags& f) {
  Problem p = load_problem_file(f.input);
  MultProvider provider = make_provider(f);
  FloorCount fc = floor_count(p, provider, {f.max_assignments});
  Json j;
  j["command"] = "count";
  j["n_floor"] = fc.total.str();
  j["resolved"] = fc.resolved;
  Json ds = Json::array();
  for (size_t i = 0; i < fc.diagrams.size(); ++i) {
    Json dj = diagram_to_json(fc.diagrams[i], p);
    const DiagramMult& dm = fc.mults[i];
    dj["edge_weight_factor"] = dm.edge_factor.str();
    Json vm = Json::array();
    for (const auto& v : dm.vertex_mults) {
      Json e;
      e["value"] = v.value.str();
      e["provenance"] = v.provenance;
      vm.push_back(e);
    }
    dj["vertex_mults"] = vm;
    dj["mult"] = dm.total.str();
    if (!dm.resolved) dj["unresolved_vertices"] = dm.unresolved_vertices;
    ds.push_back(dj);
  }
  j["diagrams"] = ds;
  if (f.format == "json") {
    emit(j);
  } else if (f.format == "dot") {
    for (const auto& d : fc.diagrams) std::cout << diagram_to_dot(d, p);
  } else {
    std::cout << "N_floor = " << fc.total.str() << "  (" << fc.diagrams.size() << " diagrams"
              << (fc.resolved ? "" : ", UNRESOLVED vertex multiplicities") << ")\n";
    for (size_t i = 0; i < fc.diagrams.size(); ++i)
      std::cout << "  diagram " << i + 1 << ": mult = " << fc.mults[i].total.str() << "\n";
  }
  if (!fc.resolved) {
    std::cerr << "some vertex multiplicities could not be resolved; provide a table\n";
    return 2;
  }
  return 0;
}

int run_diagrams(const CommonFlags& f) {
  Problem p = load_problem_file(f.input);
  auto diagrams = enumerate_diagrams(p, {f.max_assignments});
  if (f.format == "dot") {
    for (const auto& d : diagrams) std::cout << diagram_to_dot(d, p);
    return 0;
  }
  Json j;
  j["command"] = "diagrams";
  j["count"] = diagrams.size();
  Json ds = Json::array();
  for (const auto& d : diagrams) ds.push_back(diagram_to_json(d, p));
  j["diagrams"] = ds;
  if (f.format == "json") {
    emit(j);
  } else {
    std::cout << diagrams.size() << " diagrams\n";
  }
  return 0;
}

int run_vertex_mult(const CommonFlags& f, int diagram_idx, int vertex_idx, bool emit_key) {
  Problem p = load_problem_file(f.input);
  auto diagrams = enumerate_diagrams(p, {f.max_assignments});
  if (diagram_idx < 1 || diagram_idx > static_cast<int>(diagrams.size()))
    throw ProblemError("diagram index out of range (1.." + std::to_string(diagrams.size()) + ")");
  const auto& d = diagrams[static_cast<size_t>(diagram_idx - 1)];
  if (vertex_idx < 1 || vertex_idx > static_cast<int>(d.vertices.size()))
    throw ProblemError("vertex index out of range");
  LocalVertexProblem lvp = vertex_local_problem(d, p, vertex_idx - 1);
  Json j;
  j["command"] = "vertex-mult";
  j["diagram"] = diagram_idx;
  j["vertex"] = vertex_idx;
  j["key"] = canonical_problem_key(lvp.problem);
  if (!emit_key) {
    MultProvider provider = make_provider(f);
    auto vm = provider.resolve(lvp.problem);
    if (!vm) {
      std::cerr << "vertex multiplicity unresolved; key:\n"
                << canonical_problem_key(lvp.problem) << "\n";
      return 3;
    }
    j["value"] = vm->value.str();
    j["provenance"] = vm->provenance;
  }
  if (f.format == "json") {
    emit(j);
  } else if (emit_key) {
    std::cout << j["key"].get<std::string>() << "\n";
  } else {
    std::cout << "mult(v" << vertex_idx << ") = " << j["value"].get<std::string>() << "  ["
              << j["provenance"].get<std::string>() << "]\n";
  }
  return 0;
}

int run_verify_theorem(const CommonFlags& f) {
  Problem p = load_problem_file(f.input);
  CountResult direct = direct_count(p, count_options(f, EnumMode::Degenerate, false));
  MultProvider provider = make_provider(f);
  FloorCount fc = floor_count(p, provider, {f.max_assignments});
  Json j;
  j["command"] = "verify-theorem";
  j["direct"] = direct.total.str();
  j["n_floor"] = fc.total.str();
  j["resolved"] = fc.resolved;
  bool ok = fc.resolved && direct.total == fc.total;
  j["equal"] = ok;
  if (f.format == "json") {
    emit(j);
  } else {
    std::cout << "direct = " << direct.total.str() << ", floor = " << fc.total.str() << " -> "
              << (ok ? "EQUAL" : "MISMATCH") << "\n";
  }
  return ok ? 0 : 1;
}

int run_verify_cutting(const CommonFlags& f, const std::string& maps_path) {
  Problem p = load_problem_file(f.input);
  CountResult r;
  if (!maps_path.empty()) {
    std::ifstream in(maps_path);
    if (!in) throw ParseError("cannot open " + maps_path);
    Json dump = Json::parse(in);
    r.solutions = load_solutions(dump, p);
    // positions travel with the dump
    CountResult fresh = direct_count(p, count_options(f, EnumMode::Degenerate, false));
    r.positions = fresh.positions;
  } else {
    r = direct_count(p, count_options(f, EnumMode::Degenerate, true));
  }
  Json j;
  j["command"] = "verify-cutting";
  Json checks = Json::array();
  bool all_ok = true;
  for (const auto& s : r.solutions) {
    FloorResult fr = detect_floors(s.map, p);
    if (!fr.decomposition) {
      all_ok = false;
      Json c;
      c["type_index"] = s.type_index;
      c["error"] = "not floor decomposed: " + fr.reason;
      checks.push_back(c);
      continue;
    }
    for (const auto& el : fr.decomposition->elevators) {
      CutIdentityReport rep = check_cut_identity(s.map, p, r.positions, el.edge);
      Json c;
      c["type_index"] = s.type_index;
      c["ray_index"] = s.ray_index;
      c["edge"] = el.edge;
      c["kind"] = rep.is_11 ? "1/1" : "2/0";
      c["weight"] = rep.weight;
      c["mult"] = rep.mult_whole.str();
      c["identity_rhs"] = rep.identity_rhs.str();
      c["identity_ok"] = rep.identity_ok;
      if (rep.is_11) {
        c["relation_ok"] = Json::array({rep.relation_ok[0], rep.relation_ok[1]});
        all_ok = all_ok && rep.relation_ok[0] && rep.relation_ok[1];
      }
      all_ok = all_ok && rep.identity_ok;
      checks.push_back(c);
    }
    GraphicalSum gs = graphical_contributions_sum(s.map, p, r.positions);
    Json g;
    g["type_index"] = s.type_index;
    g["graphical_contributions"] = gs.contributions.size();
    g["graphical_sum"] = gs.sum.str();
    g["matches_mult"] = gs.matches;
    all_ok = all_ok && gs.matches;
    checks.push_back(g);
  }
  j["checks"] = checks;
  j["all_ok"] = all_ok;
  if (f.format == "json") {
    emit(j);
  } else {
    std::cout << "cutting identities on " << r.solutions.size() << " solutions: "
              << (all_ok ? "OK" : "MISMATCH") << "\n";
  }
  return all_ok ? 0 : 1;
}

int run_crmult(const std::string& star_path, const std::string& format) {
  std::ifstream in(star_path);
  if (!in) throw ParseError("cannot open " + star_path);
  Json sj = Json::parse(in);
  LocalStar star;
  for (const auto& e : sj.at("edges")) star.edge_ids.push_back(e.get<int>());
  for (const auto& cj : sj.at("crossratios")) {
    StarCrossRatio scr;
    if (cj.contains("pairing")) {
      const Json& pj = cj["pairing"];
      scr.exit_edges = {pj[0][0].get<int>(), pj[0][1].get<int>(), pj[1][0].get<int>(),
                        pj[1][1].get<int>()};
      scr.pairing_partner = 1;
    } else {
      int i = 0;
      for (const auto& e : cj.at("entries")) scr.exit_edges[static_cast<size_t>(i++)] = e.get<int>();
      scr.pairing_partner = 1;
    }
    star.crossratios.push_back(scr);
  }
  Int m = cr_mult(star);
  if (format == "json") {
    Json j;
    j["command"] = "crmult";
    j["value"] = m.str();
    emit(j);
  } else {
    std::cout << m.str() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact counts of rational tropical space curves via cross-ratio floor diagrams"};
  app.require_subcommand(1);

  CommonFlags fc_count, fc_direct, fc_lengths, fc_diagrams, fc_vm, fc_vt, fc_vc;
  std::string star_path, star_format = "table", maps_path;
  int vm_diagram = 1, vm_vertex = 1;
  bool vm_emit_key = false;

  auto* c_count = app.add_subcommand("count", "floor-diagram count N^floor");
  add_common(c_count, fc_count);
  auto* c_direct = app.add_subcommand("direct", "brute-force count N over stable maps");
  add_common(c_direct, fc_direct);
  bool lengths_mode = false;
  c_direct->add_flag("--lengths", lengths_mode, "treat cross-ratios with nonzero lengths");
  auto* c_diagrams = app.add_subcommand("diagrams", "enumerate cross-ratio floor diagrams");
  add_common(c_diagrams, fc_diagrams, false);
  auto* c_vm = app.add_subcommand("vertex-mult", "resolve one vertex multiplicity");
  add_common(c_vm, fc_vm);
  c_vm->add_option("--diagram", vm_diagram, "diagram index (1-based)");
  c_vm->add_option("--vertex", vm_vertex, "vertex index (1-based)");
  c_vm->add_flag("--emit-key", vm_emit_key, "print the canonical table key only");
  auto* c_vt = app.add_subcommand("verify-theorem", "check N^floor = N on this instance");
  add_common(c_vt, fc_vt);
  auto* c_vc = app.add_subcommand("verify-cutting", "check the cutting and graphical identities");
  add_common(c_vc, fc_vc);
  c_vc->add_option("--maps", maps_path, "solved-map dump to verify instead of recomputing");
  auto* c_cr = app.add_subcommand("crmult", "cross-ratio multiplicity of a local star");
  c_cr->add_option("--star", star_path, "star file (JSON)")->required();
  c_cr->add_option("--format", star_format, "table|json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_count->parsed()) return run_count(fc_count);
    if (c_direct->parsed())
      return run_direct(fc_direct, lengths_mode ? EnumMode::Lengths : EnumMode::Degenerate);
    if (c_diagrams->parsed()) return run_diagrams(fc_diagrams);
    if (c_vm->parsed()) return run_vertex_mult(fc_vm, vm_diagram, vm_vertex, vm_emit_key);
    if (c_vt->parsed()) return run_verify_theorem(fc_vt);
    if (c_vc->parsed()) return run_verify_cutting(fc_vc, maps_path);
    if (c_cr->parsed()) return run_crmult(star_path, star_format);
  } catch (const BudgetError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ProblemError& e) {
    std::cerr << "invalid problem: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
