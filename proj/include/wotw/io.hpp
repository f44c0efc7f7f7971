#pragma once

#include <stdexcept>
#include <string>

#include "wotw/measures.hpp"

namespace wotw {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Measure files are plain JSON:
//   depth > 1: {"depth": N, "weights": [...], "children": [<node>, ...]}
//   depth = 1: {"depth": 1, "weights": [...], "points": [[x...], ...]}
// Serialization uses shortest round-trip doubles, so save/load is exact and
// repeated saves are byte-identical.
std::string nested_to_json(const NestedMeasure& P, int indent = 2);
NestedMeasure nested_from_json(const std::string& text);

// Scenario trees: {"stages": N, "dim": d, "roots": [<node>, ...]} with
// <node> = {"value": [x...], "weight": w, "children": [<node>, ...]}.
std::string tree_to_json(const ProcessTree& tree, int indent = 2);
ProcessTree tree_from_json(const std::string& text);

// Scenario CSV with header  w,x1_1,...,x1_d,x2_1,...,xN_d.
std::string paths_to_csv(const std::vector<Path>& paths, int stages, int dim);
std::vector<Path> paths_from_csv(const std::string& text, int* stages_out, int* dim_out);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace wotw
