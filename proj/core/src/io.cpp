#include "crfd/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace crfd {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

long long get_ll(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

Rat get_rat(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rat(j.get<long long>());
  if (j.is_string()) {
    try {
      return rat_parse(j.get<std::string>());
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
  fail(where, "expected an integer or a \"p/q\" string");
}

std::vector<long long> get_seq(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<long long> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(get_ll(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> get_labels(const Json& j, const std::string& where) {
  std::vector<int> out;
  for (long long v : get_seq(j, where)) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

Problem parse_problem_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const std::exception& e) {
    fail("document", e.what());
  }
  if (!doc.is_object()) fail("document", "expected a JSON object");
  int m = static_cast<int>(doc.contains("dimension") ? get_ll(doc["dimension"], "dimension") : 3);
  if (!doc.contains("degree")) fail("degree", "missing field");
  if (!doc.contains("n_points")) fail("n_points", "missing field");
  int n_points = static_cast<int>(get_ll(doc["n_points"], "n_points"));
  if (n_points < 0) fail("n_points", "must be nonnegative");

  std::uint64_t seed = 0;
  if (doc.contains("seed")) seed = static_cast<std::uint64_t>(get_ll(doc["seed"], "seed"));

  LabeledDegree degree;
  const Json& dj = doc["degree"];
  if (dj.contains("ends")) {
    degree.m = m;
    if (!dj["ends"].is_array()) fail("degree.ends", "expected an array");
    for (size_t i = 0; i < dj["ends"].size(); ++i) {
      const Json& ej = dj["ends"][i];
      std::string where = "degree.ends[" + std::to_string(i) + "]";
      if (!ej.contains("label") || !ej.contains("direction")) fail(where, "needs label and direction");
      ProblemEnd e;
      e.label = static_cast<int>(get_ll(ej["label"], where + ".label"));
      for (long long c : get_seq(ej["direction"], where + ".direction")) e.dir.push_back(c);
      if (static_cast<int>(e.dir.size()) != m) fail(where + ".direction", "arity != dimension");
      if (ivec_is_zero(e.dir)) fail(where + ".direction", "degree ends must be non-contracted");
      degree.ends.push_back(std::move(e));
    }
    // explicit labels must be exactly n+1..n+#degree, in any order
    std::vector<int> labels;
    for (const auto& e : degree.ends) labels.push_back(e.label);
    std::sort(labels.begin(), labels.end());
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != n_points + 1 + static_cast<int>(i))
        fail("degree.ends", "labels must form the range " + std::to_string(n_points + 1) + ".." +
                                std::to_string(n_points + static_cast<int>(labels.size())));
    // shift back to degree-local labels; assemble_problem re-shifts
    for (auto& e : degree.ends) e.label -= n_points;
    IVec sum = ivec_zero(m);
    for (const auto& e : degree.ends) sum = ivec_add(sum, e.dir);
    if (!ivec_is_zero(sum)) fail("degree.ends", "directions do not sum to zero");
  } else {
    if (!dj.contains("d")) fail("degree.d", "missing field");
    std::vector<long long> alpha, beta;
    if (dj.contains("alpha")) alpha = get_seq(dj["alpha"], "degree.alpha");
    if (dj.contains("beta")) beta = get_seq(dj["beta"], "degree.beta");
    try {
      degree = make_degree(m, static_cast<int>(get_ll(dj["d"], "degree.d")), alpha, beta);
    } catch (const ProblemError& e) {
      fail("degree", e.what());
    }
  }

  auto side = [&](const char* key, const char* sub) -> std::vector<int> {
    if (!doc.contains(key) || !doc[key].contains(sub)) return {};
    return get_labels(doc[key][sub], std::string(key) + "." + sub);
  };
  std::map<int, long long> weights;
  if (doc.contains("line_end_weights")) {
    for (auto it = doc["line_end_weights"].begin(); it != doc["line_end_weights"].end(); ++it)
      weights[std::stoi(it.key())] = get_ll(it.value(), "line_end_weights." + it.key());
  }
  std::vector<CrossRatio> crs;
  if (doc.contains("crossratios")) {
    if (!doc["crossratios"].is_array()) fail("crossratios", "expected an array");
    for (size_t i = 0; i < doc["crossratios"].size(); ++i) {
      const Json& cj = doc["crossratios"][i];
      std::string where = "crossratios[" + std::to_string(i) + "]";
      if (!cj.contains("entries")) fail(where, "needs entries");
      auto ent = get_labels(cj["entries"], where + ".entries");
      if (ent.size() != 4) fail(where + ".entries", "needs exactly 4 entries");
      std::array<int, 4> entries{ent[0], ent[1], ent[2], ent[3]};
      std::optional<int> partner;
      if (cj.contains("pairing")) {
        const Json& pj = cj["pairing"];
        if (!pj.is_array() || pj.size() != 2) fail(where + ".pairing", "expected two pairs");
        auto p0 = get_labels(pj[0], where + ".pairing[0]");
        auto p1 = get_labels(pj[1], where + ".pairing[1]");
        if (p0.size() != 2 || p1.size() != 2) fail(where + ".pairing", "expected two pairs");
        std::array<int, 4> flat{p0[0], p0[1], p1[0], p1[1]};
        std::array<int, 4> check = flat;
        std::sort(check.begin(), check.end());
        std::array<int, 4> sorted = entries;
        std::sort(sorted.begin(), sorted.end());
        if (check != sorted) fail(where + ".pairing", "pairing does not partition the entries");
        entries = flat;
        partner = 1;
      }
      std::optional<Rat> length;
      if (cj.contains("length")) length = get_rat(cj["length"], where + ".length");
      if (length && *length <= 0) fail(where + ".length", "length must be positive");
      try {
        crs.push_back(CrossRatio::make(entries, partner, length));
      } catch (const ProblemError& e) {
        fail(where, e.what());
      }
    }
  }
  try {
    Problem p = assemble_problem(degree, n_points, side("eta", "alpha"), side("eta", "beta"),
                                 side("kappa", "alpha"), side("kappa", "beta"), weights,
                                 std::move(crs), seed);
    DimensionReport rep = check_dimension(p);
    if (!rep.pass) fail("dimension", rep.detail);
    return p;
  } catch (const ProblemError& e) {
    fail("problem", e.what());
  }
}

Problem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

Json problem_to_json(const Problem& p) {
  Json j;
  j["dimension"] = p.m;
  Json ends = Json::array();
  for (const auto& e : p.ends) {
    if (e.contracted()) continue;
    Json ej;
    ej["label"] = e.label;
    ej["direction"] = e.dir;
    ends.push_back(ej);
  }
  j["degree"]["ends"] = ends;
  j["n_points"] = p.n_points();
  Json eta_a = Json::array(), eta_b = Json::array(), kap_a = Json::array(), kap_b = Json::array();
  Json weights = Json::object();
  for (const auto& e : p.ends) {
    if (e.contracted()) continue;
    long long z = e.dir[static_cast<size_t>(p.m - 1)];
    if (e.cond == CondKind::ProjPoint) (z < 0 ? eta_a : eta_b).push_back(e.label);
    if (e.cond == CondKind::ProjLine) {
      (z < 0 ? kap_a : kap_b).push_back(e.label);
      if (e.line.weight != 1) weights[std::to_string(e.label)] = e.line.weight;
    }
  }
  j["eta"] = {{"alpha", eta_a}, {"beta", eta_b}};
  j["kappa"] = {{"alpha", kap_a}, {"beta", kap_b}};
  if (!weights.empty()) j["line_end_weights"] = weights;
  Json crs = Json::array();
  for (const auto& cr : p.crossratios) {
    Json cj;
    cj["entries"] = cr.entries;
    if (cr.pairing_partner) {
      auto pr = cr.pairs();
      cj["pairing"] = {{pr[0][0], pr[0][1]}, {pr[1][0], pr[1][1]}};
    }
    if (cr.length) cj["length"] = rat_str(*cr.length);
    crs.push_back(cj);
  }
  j["crossratios"] = crs;
  j["seed"] = p.seed;
  return j;
}

std::map<std::string, Int> load_mult_table(const std::string& path, std::ostream& warnings) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open table " + path);
  std::map<std::string, Int> table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      warnings << "table " << path << ":" << lineno << ": no tab separator, line ignored\n";
      continue;
    }
    std::string key = line.substr(0, tab);
    std::string val = line.substr(tab + 1);
    try {
      table[key] = Int(val);
    } catch (...) {
      warnings << "table " << path << ":" << lineno << ": bad value, line ignored\n";
    }
  }
  return table;
}

namespace {

Json labels_json(const std::vector<int>& v) {
  Json j = Json::array();
  for (int x : v) j.push_back(x);
  return j;
}

}  // namespace

Json diagram_to_json(const CrossRatioFloorDiagram& d, const Problem& p) {
  Json j;
  Json vs = Json::array();
  for (size_t i = 0; i < d.vertices.size(); ++i) {
    const auto& v = d.vertices[i];
    Json vj;
    vj["index"] = i + 1;
    vj["size"] = v.size();
    vj["delta_e0"] = labels_json(v.e0_ends);
    vj["delta_e1"] = labels_json(v.e1_ends);
    vj["delta_e2"] = labels_json(v.e2_ends);
    vj["delta_alpha"] = labels_json(v.alpha_ends);
    vj["delta_beta"] = labels_json(v.beta_ends);
    Json pa = Json::array(), pb = Json::array(), la = Json::array(), lb = Json::array();
    for (int l : v.alpha_ends) {
      CondKind k = p.end_by_label(l)->cond;
      if (k == CondKind::ProjPoint) pa.push_back(l);
      if (k == CondKind::ProjLine) la.push_back(l);
    }
    for (int l : v.beta_ends) {
      CondKind k = p.end_by_label(l)->cond;
      if (k == CondKind::ProjPoint) pb.push_back(l);
      if (k == CondKind::ProjLine) lb.push_back(l);
    }
    vj["delta_alpha_P"] = pa;
    vj["delta_beta_P"] = pb;
    vj["delta_alpha_L"] = la;
    vj["delta_beta_L"] = lb;
    vj["lambda"] = labels_json(v.lambda);
    vj["leak"] = v.leak;
    if (v.leak_overridden) vj["flags"] = Json::array({"size0-leak-override"});
    vs.push_back(vj);
  }
  j["vertices"] = vs;
  Json es = Json::array();
  for (const auto& e : d.edges) {
    Json ej;
    ej["u"] = e.u + 1;
    ej["v"] = e.v + 1;
    ej["weight"] = e.weight;
    ej["label"] = e.label;
    ej["flow"] = std::to_string(e.flow_into_u) + "/" + std::to_string(e.flow_into_v);
    es.push_back(ej);
  }
  j["edges"] = es;
  return j;
}

std::string diagram_to_dot(const CrossRatioFloorDiagram& d, const Problem& p) {
  (void)p;
  std::ostringstream os;
  os << "graph diagram {\n  rankdir=LR;\n";
  for (size_t i = 0; i < d.vertices.size(); ++i) {
    os << "  v" << i + 1 << " [label=\"v" << i + 1 << " s=" << d.vertices[i].size() << " leak="
       << d.vertices[i].leak << "\"];\n";
  }
  for (const auto& e : d.edges) {
    os << "  v" << e.u + 1 << " -- v" << e.v + 1 << " [label=\"w=" << e.weight << " "
       << e.flow_into_u << "/" << e.flow_into_v << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

Json ev_matrix_to_json(const EvMatrix& m) {
  Json j;
  Json rows = Json::array();
  for (const auto& r : m.a) {
    Json row = Json::array();
    for (const auto& x : r) row.push_back(x.str());
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["row_tags"] = m.row_tag;
  j["col_tags"] = m.col_tag;
  Json rhs = Json::array();
  for (const auto& x : m.rhs) rhs.push_back(rat_str(x));
  j["rhs"] = rhs;
  return j;
}

Json solution_to_json(const Solution& s, const Problem& p) {
  Json j;
  j["type_index"] = s.type_index;
  j["ray_index"] = s.ray_index;
  Json tree;
  tree["vertices"] = s.map.cmap.tree.n_vertices;
  Json edges = Json::array();
  for (size_t e = 0; e < s.map.cmap.tree.edges.size(); ++e) {
    Json ej;
    ej["u"] = s.map.cmap.tree.edges[e][0];
    ej["v"] = s.map.cmap.tree.edges[e][1];
    ej["direction"] = s.map.cmap.edge_dir[e];
    ej["weight"] = s.map.cmap.edge_weight[e];
    ej["length"] = rat_str(s.map.lengths[e]);
    edges.push_back(ej);
  }
  tree["edges"] = edges;
  Json ends = Json::array();
  for (const auto& x : s.map.cmap.tree.ends) {
    Json xe;
    xe["label"] = x.label;
    xe["vertex"] = x.vertex;
    ends.push_back(xe);
  }
  tree["ends"] = ends;
  j["tree"] = tree;
  j["root"] = s.map.root;
  Json rp = Json::array();
  for (const auto& x : s.map.root_pos) rp.push_back(rat_str(x));
  j["root_position"] = rp;
  Json rays = Json::object();
  for (const auto& [l, r] : s.map.ray_choice) rays[std::to_string(l)] = r;
  j["ray_choices"] = rays;
  Json lam = Json::array();
  for (const auto& ls : s.map.cmap.lambda_at) lam.push_back(labels_json(ls));
  j["lambda_at"] = lam;
  j["ev_det"] = s.mult.ev_det.str();
  j["cr_factor"] = s.mult.cr_factor.str();
  j["line_factor"] = s.mult.line_factor.str();
  j["mult"] = s.mult.total.str();
  (void)p;
  return j;
}

Json count_result_to_json(const CountResult& r, const Problem& p, bool include_solutions) {
  Json j;
  j["count"] = r.total.str();
  j["types_enumerated"] = r.types_enumerated;
  j["types_flow_pruned"] = r.types_flow_pruned;
  j["embeddings_solved"] = r.embeddings_solved;
  j["resamples"] = r.resamples;
  j["n_solutions"] = r.solutions.size();
  if (include_solutions) {
    Json sols = Json::array();
    for (const auto& s : r.solutions) sols.push_back(solution_to_json(s, p));
    j["solutions"] = sols;
  }
  return j;
}

Json dump_solutions(const CountResult& r, const Problem& p) {
  Json j;
  j["problem"] = problem_to_json(p);
  Json pos;
  {
    Json pts = Json::object();
    for (const auto& [l, v] : r.positions.point_pos) {
      Json a = Json::array();
      for (const auto& x : v) a.push_back(rat_str(x));
      pts[std::to_string(l)] = a;
    }
    pos["points"] = pts;
    Json pp = Json::object();
    for (const auto& [l, v] : r.positions.proj_point_pos) {
      Json a = Json::array();
      for (const auto& x : v) a.push_back(rat_str(x));
      pp[std::to_string(l)] = a;
    }
    pos["proj_points"] = pp;
    Json ln = Json::object();
    for (const auto& [l, v] : r.positions.line_pos) {
      Json a;
      a["vertex"] = {rat_str(v.vertex[0]), rat_str(v.vertex[1])};
      a["weight"] = v.weight;
      a["degenerate"] = v.degenerate;
      a["kind"] = v.kind == DegLineKind::Vertical ? "10" : v.kind == DegLineKind::Horizontal ? "01" : "1-1";
      ln[std::to_string(l)] = a;
    }
    pos["lines"] = ln;
  }
  j["positions"] = pos;
  Json sols = Json::array();
  for (const auto& s : r.solutions) sols.push_back(solution_to_json(s, p));
  j["solutions"] = sols;
  return j;
}

std::vector<Solution> load_solutions(const Json& dump, const Problem& p) {
  std::vector<Solution> out;
  for (const auto& sj : dump.at("solutions")) {
    Solution s;
    s.type_index = sj.at("type_index").get<std::uint64_t>();
    s.ray_index = sj.at("ray_index").get<std::uint64_t>();
    const Json& tree = sj.at("tree");
    s.map.cmap.tree.n_vertices = tree.at("vertices").get<int>();
    for (const auto& ej : tree.at("edges")) {
      s.map.cmap.tree.edges.push_back({ej.at("u").get<int>(), ej.at("v").get<int>()});
      IVec dir;
      for (const auto& c : ej.at("direction")) dir.push_back(c.get<long long>());
      s.map.cmap.edge_dir.push_back(dir);
      s.map.cmap.edge_weight.push_back(ej.at("weight").get<long long>());
      s.map.lengths.push_back(rat_parse(ej.at("length").get<std::string>()));
    }
    for (const auto& xe : tree.at("ends"))
      s.map.cmap.tree.ends.push_back({xe.at("label").get<int>(), xe.at("vertex").get<int>()});
    s.map.root = sj.at("root").get<int>();
    for (const auto& x : sj.at("root_position"))
      s.map.root_pos.push_back(rat_parse(x.get<std::string>()));
    for (auto it = sj.at("ray_choices").begin(); it != sj.at("ray_choices").end(); ++it)
      s.map.ray_choice[std::stoi(it.key())] = it.value().get<int>();
    for (const auto& ls : sj.at("lambda_at")) {
      std::vector<int> lam;
      for (const auto& c : ls) lam.push_back(c.get<int>());
      s.map.cmap.lambda_at.push_back(lam);
    }
    s.mult.ev_det = Int(sj.at("ev_det").get<std::string>());
    s.mult.cr_factor = Int(sj.at("cr_factor").get<std::string>());
    s.mult.line_factor = Int(sj.at("line_factor").get<std::string>());
    s.mult.total = Int(sj.at("mult").get<std::string>());
    out.push_back(std::move(s));
  }
  (void)p;
  return out;
}

std::string json_to_string(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace crfd
