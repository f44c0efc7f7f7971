#include "wotw/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace wotw {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

json nested_to_json_obj(const NestedMeasure& P) {
  json j;
  j["depth"] = P.depth;
  j["weights"] = P.weights;
  if (P.depth == 1) {
    j["points"] = P.points;
  } else {
    json kids = json::array();
    for (const NestedMeasure& c : P.children) kids.push_back(nested_to_json_obj(c));
    j["children"] = kids;
  }
  return j;
}

NestedMeasure nested_from_json_obj(const json& j) {
  if (!j.is_object() || !j.contains("depth") || !j.contains("weights"))
    throw ParseError("measure node must have depth and weights");
  NestedMeasure P;
  P.depth = j.at("depth").get<int>();
  P.weights = j.at("weights").get<std::vector<double>>();
  if (P.depth == 1) {
    if (!j.contains("points")) throw ParseError("depth-1 node must have points");
    P.points = j.at("points").get<std::vector<Vec>>();
  } else {
    if (!j.contains("children")) throw ParseError("nested node must have children");
    for (const json& c : j.at("children")) P.children.push_back(nested_from_json_obj(c));
  }
  return P;
}

json tree_node_to_json(const ProcessTree& tree, int idx, double weight) {
  const ProcessNode& n = tree.nodes[idx];
  json j;
  j["value"] = n.value;
  j["weight"] = weight;
  if (!n.children.empty()) {
    json kids = json::array();
    for (std::size_t c = 0; c < n.children.size(); ++c)
      kids.push_back(tree_node_to_json(tree, n.children[c], n.weights[c]));
    j["children"] = kids;
  }
  return j;
}

int tree_node_from_json(const json& j, int stage, ProcessTree& tree, double* weight) {
  if (!j.is_object() || !j.contains("value") || !j.contains("weight"))
    throw ParseError("tree node must have value and weight");
  ProcessNode n;
  n.stage = stage;
  n.value = j.at("value").get<Vec>();
  *weight = j.at("weight").get<double>();
  const int idx = int(tree.nodes.size());
  tree.nodes.push_back(n);
  if (j.contains("children")) {
    for (const json& c : j.at("children")) {
      double w = 0.0;
      const int child = tree_node_from_json(c, stage + 1, tree, &w);
      tree.nodes[idx].children.push_back(child);
      tree.nodes[idx].weights.push_back(w);
    }
  }
  return idx;
}

}  // namespace

std::string nested_to_json(const NestedMeasure& P, int indent) {
  return nested_to_json_obj(P).dump(indent) + "\n";
}

NestedMeasure nested_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    NestedMeasure P = nested_from_json_obj(j);
    Validation v = validate(P);
    if (!v.ok) throw ParseError("invalid measure, " + v.message);
    return P;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed measure: ") + e.what());
  }
}

std::string tree_to_json(const ProcessTree& tree, int indent) {
  json j;
  j["stages"] = tree.stages;
  j["dim"] = tree.dim;
  json roots = json::array();
  for (std::size_t r = 0; r < tree.roots.size(); ++r)
    roots.push_back(tree_node_to_json(tree, tree.roots[r], tree.root_weights[r]));
  j["roots"] = roots;
  return j.dump(indent) + "\n";
}

ProcessTree tree_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    ProcessTree tree;
    tree.stages = j.at("stages").get<int>();
    tree.dim = j.at("dim").get<int>();
    for (const json& r : j.at("roots")) {
      double w = 0.0;
      tree.roots.push_back(tree_node_from_json(r, 1, tree, &w));
      tree.root_weights.push_back(w);
    }
    Validation v = validate(tree);
    if (!v.ok) throw ParseError("invalid tree, " + v.message);
    return tree;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed tree: ") + e.what());
  }
}

std::string paths_to_csv(const std::vector<Path>& paths, int stages, int dim) {
  std::ostringstream out;
  out << "w";
  for (int t = 1; t <= stages; ++t)
    for (int k = 1; k <= dim; ++k) out << ",x" << t << "_" << k;
  out << "\n";
  for (const Path& p : paths) {
    out << fmt(p.weight);
    for (double x : p.values) out << "," << fmt(x);
    out << "\n";
  }
  return out.str();
}

std::vector<Path> paths_from_csv(const std::string& text, int* stages_out, int* dim_out) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV");
  // Header tells us stages and dim: columns are w, then x<t>_<k>.
  int stages = 0, dim = 0, cols = 0;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      if (cols == 0) {
        if (cell != "w") throw ParseError("CSV header must start with w");
      } else {
        int t = 0, k = 0;
        if (std::sscanf(cell.c_str(), "x%d_%d", &t, &k) != 2)
          throw ParseError("bad CSV header column: " + cell);
        stages = std::max(stages, t);
        dim = std::max(dim, k);
      }
      ++cols;
    }
  }
  if (stages < 1 || dim < 1 || cols != 1 + stages * dim)
    throw ParseError("CSV header does not describe a full stage grid");
  std::vector<Path> paths;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    Path p;
    int c = 0;
    while (std::getline(ls, cell, ',')) {
      double x = 0.0;
      const char* b = cell.data();
      auto [ptr, ec] = std::from_chars(b, b + cell.size(), x);
      if (ec != std::errc() || ptr != b + cell.size())
        throw ParseError("bad CSV number: " + cell);
      if (c == 0)
        p.weight = x;
      else
        p.values.push_back(x);
      ++c;
    }
    if (c != cols) throw ParseError("CSV row has wrong number of columns");
    paths.push_back(std::move(p));
  }
  if (paths.empty()) throw ParseError("CSV has no data rows");
  if (stages_out) *stages_out = stages;
  if (dim_out) *dim_out = dim;
  return paths;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace wotw
