#pragma once

#include "crfd/io.hpp"

#include <fstream>
#include <string>

namespace crfd::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(CRFD_FIXTURE_DIR) + "/" + name;
}

inline Problem load_fixture_problem(const std::string& name) {
  return load_problem_file(fixture_path(name));
}

// Encoded map fixtures: problem + tree + exact embedding + pinned positions.
struct MapFixture {
  Problem problem;
  PositionedConditions positions;
  EmbeddedMap map;
};

inline MapFixture load_map_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  Json j = Json::parse(in);
  MapFixture fx;
  fx.problem = parse_problem_text(j.at("problem").dump());
  const Json& tree = j.at("tree");
  CombinatorialMap& cm = fx.map.cmap;
  cm.tree.n_vertices = tree.at("vertices").get<int>();
  for (const auto& ej : tree.at("edges"))
    cm.tree.edges.push_back({ej.at("u").get<int>(), ej.at("v").get<int>()});
  for (const auto& xe : tree.at("ends"))
    cm.tree.ends.push_back({xe.at("label").get<int>(), xe.at("vertex").get<int>()});
  if (!derive_edge_data(fx.problem, cm)) throw std::runtime_error("fixture has a contracted edge");
  cm.lambda_at.assign(static_cast<size_t>(cm.tree.n_vertices), {});
  fx.map.root = j.at("root").get<int>();
  for (const auto& x : j.at("root_position"))
    fx.map.root_pos.push_back(rat_parse(x.get<std::string>()));
  for (const auto& x : j.at("lengths")) fx.map.lengths.push_back(rat_parse(x.get<std::string>()));
  for (auto it = j.at("ray_choices").begin(); it != j.at("ray_choices").end(); ++it)
    fx.map.ray_choice[std::stoi(it.key())] = it.value().get<int>();
  const Json& pj = j.at("positions");
  for (auto it = pj.at("points").begin(); it != pj.at("points").end(); ++it) {
    RVec v;
    for (const auto& c : it.value()) v.push_back(rat_parse(c.get<std::string>()));
    fx.positions.point_pos[std::stoi(it.key())] = v;
  }
  for (auto it = pj.at("proj_points").begin(); it != pj.at("proj_points").end(); ++it) {
    RVec v;
    for (const auto& c : it.value()) v.push_back(rat_parse(c.get<std::string>()));
    fx.positions.proj_point_pos[std::stoi(it.key())] = v;
  }
  for (auto it = pj.at("lines").begin(); it != pj.at("lines").end(); ++it) {
    LineInstance li;
    for (const auto& c : it.value().at("vertex")) li.vertex.push_back(rat_parse(c.get<std::string>()));
    li.weight = it.value().at("weight").get<long long>();
    fx.positions.line_pos[std::stoi(it.key())] = li;
  }
  return fx;
}

// Compact builder for test instances over Delta^3_d(alpha, beta).
struct InstanceSpec {
  int m = 3;
  int d = 1;
  std::vector<long long> alpha, beta;
  int n = 2;
  // tangency conditions by index into the sorted vertical-label list
  std::vector<int> eta_idx, kappa_idx;
  std::map<int, long long> kappa_weights;  // by vertical index
  // cross-ratios: entries mixing point labels (1..n) and vertical indices
  // offset by 1000 (1000 = first vertical, ...)
  std::vector<std::array<int, 4>> crossratios;
  std::uint64_t seed = 7;
};

inline Problem make_instance(const InstanceSpec& s) {
  LabeledDegree deg = make_degree(s.m, s.d, s.alpha, s.beta);
  std::vector<int> vertical_labels;  // final labels, ascending
  for (const auto& e : deg.ends) {
    IVec p = ivec_primitive(e.dir);
    bool vertical = true;
    for (int j = 0; j + 1 < s.m; ++j) vertical &= p[static_cast<size_t>(j)] == 0;
    if (vertical) vertical_labels.push_back(e.label + s.n);
  }
  std::vector<int> eta_a, eta_b, kap_a, kap_b;
  std::map<int, long long> weights;
  auto side_of = [&](int label) {
    // final label -> alpha (-z) or beta (+z)
    for (const auto& e : deg.ends)
      if (e.label + s.n == label) return e.dir[static_cast<size_t>(s.m - 1)] < 0;
    throw std::runtime_error("bad vertical index");
  };
  for (int idx : s.eta_idx) {
    int label = vertical_labels.at(static_cast<size_t>(idx));
    (side_of(label) ? eta_a : eta_b).push_back(label);
  }
  for (int idx : s.kappa_idx) {
    int label = vertical_labels.at(static_cast<size_t>(idx));
    (side_of(label) ? kap_a : kap_b).push_back(label);
    auto it = s.kappa_weights.find(idx);
    if (it != s.kappa_weights.end()) weights[label] = it->second;
  }
  std::vector<CrossRatio> crs;
  for (const auto& raw : s.crossratios) {
    std::array<int, 4> entries{};
    for (int i = 0; i < 4; ++i) {
      int x = raw[static_cast<size_t>(i)];
      entries[static_cast<size_t>(i)] =
          x >= 1000 ? vertical_labels.at(static_cast<size_t>(x - 1000)) : x;
    }
    crs.push_back(CrossRatio::make(entries));
  }
  return assemble_problem(deg, s.n, eta_a, eta_b, kap_a, kap_b, weights, std::move(crs), s.seed);
}

}  // namespace crfd::testing
