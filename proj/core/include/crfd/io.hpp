#pragma once

// Problem files, map dumps, diagram reports, multiplicity tables and DOT
// rendering. All JSON output uses insertion-ordered keys so identical runs
// produce identical bytes.

#include "crfd/cutting.hpp"
#include "crfd/floordiagrams.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace crfd {

using Json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problem document: {"dimension", "degree": {d, alpha, beta} | {ends:
// [{label, direction}]}, "n_points", "eta": {alpha, beta}, "kappa":
// {alpha, beta}, "line_end_weights": {label: weight}, "crossratios":
// [{entries, pairing?, length?}], "seed"}.
Problem parse_problem_text(const std::string& text);
Problem load_problem_file(const std::string& path);
Json problem_to_json(const Problem& p);

// Multiplicity tables: `canonical-key<TAB>decimal`, one per line; malformed
// lines are skipped with a warning on the given stream.
std::map<std::string, Int> load_mult_table(const std::string& path, std::ostream& warnings);

Json diagram_to_json(const CrossRatioFloorDiagram& d, const Problem& p);
std::string diagram_to_dot(const CrossRatioFloorDiagram& d, const Problem& p);

Json solution_to_json(const Solution& s, const Problem& p);
Json count_result_to_json(const CountResult& r, const Problem& p, bool include_solutions);

// Map dump round-trip (solutions consumed by the cutting verifier).
Json dump_solutions(const CountResult& r, const Problem& p);
std::vector<Solution> load_solutions(const Json& dump, const Problem& p);

Json ev_matrix_to_json(const EvMatrix& m);

std::string json_to_string(const Json& j);

}  // namespace crfd
