#include "wotw.h"

#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "wotw/adapted.hpp"
#include "wotw/convexity.hpp"
#include "wotw/instances.hpp"
#include "wotw/io.hpp"
#include "wotw/measures.hpp"
#include "wotw/nested.hpp"
#include "wotw/ot.hpp"
#include "wotw/regularity.hpp"
#include "wotw/samplers.hpp"

using json = nlohmann::json;

struct wotw_nested {
  wotw::NestedMeasure m;
};
struct wotw_tree {
  wotw::ProcessTree t;
};
struct wotw_table {
  wotw::FunctionalTable f;
};

namespace {

thread_local std::string g_error;

constexpr const char* kVersion = "0.1.0";

int fail(int code, const std::string& message) {
  g_error = message;
  return code;
}

// Exceptions out of the core map onto the three error codes: bad input data,
// missing files, everything else.
template <class F>
int guard(F&& f) {
  try {
    f();
    g_error.clear();
    return WOTW_OK;
  } catch (const wotw::ParseError& e) {
    return fail(WOTW_ERR_VALIDATION, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(WOTW_ERR_VALIDATION, e.what());
  } catch (const json::exception& e) {
    return fail(WOTW_ERR_VALIDATION, e.what());
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    const bool io = what.rfind("cannot open", 0) == 0 || what.rfind("cannot write", 0) == 0;
    return fail(io ? WOTW_ERR_IO : WOTW_ERR_INTERNAL, what);
  } catch (const std::exception& e) {
    return fail(WOTW_ERR_INTERNAL, e.what());
  }
}

char* to_cstring(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json meta_block() {
  return json{{"version", kVersion}, {"marginalTol", wotw::kMarginalTol}};
}

// Shortest round-trip decimal text, same as the JSON writer produces.
std::string num(double x) { return json(x).dump(); }

wotw::DiscreteMeasure as_flat(const wotw_nested* p, const char* who) {
  if (p->m.depth != 1)
    throw std::invalid_argument(std::string(who) + ": expected a depth-1 measure");
  return p->m.as_discrete();
}

json coupling_entries(const wotw::Coupling& c) {
  json entries = json::array();
  for (int i = 0; i < c.rows; ++i)
    for (int j = 0; j < c.cols; ++j)
      if (c.at(i, j) > 0.0) entries.push_back({i, j, c.at(i, j)});
  return entries;
}

wotw::FunctionalTable table_from_json(const json& j) {
  if (!j.is_object() || !j.contains("depth") || !j.contains("entries"))
    throw wotw::ParseError("functional table needs depth and entries");
  wotw::FunctionalTable f;
  f.depth = j.at("depth").get<int>();
  for (const json& e : j.at("entries")) {
    if (!e.contains("support") || !e.contains("value"))
      throw wotw::ParseError("table entry needs support and value");
    f.supports.push_back(wotw::nested_from_json(e.at("support").dump()));
    if (e.at("value").is_string()) {
      if (e.at("value").get<std::string>() != "inf")
        throw wotw::ParseError("table value must be a number or \"inf\"");
      f.values.push_back(wotw::FunctionalTable::inf);
    } else {
      f.values.push_back(e.at("value").get<double>());
    }
  }
  const wotw::Validation v = wotw::validate(f);
  if (!v.ok) throw wotw::ParseError(v.message);
  return f;
}

}  // namespace

extern "C" {

const char* wotw_version(void) { return kVersion; }

const char* wotw_last_error(void) { return g_error.c_str(); }

void wotw_string_free(char* s) { delete[] s; }

int wotw_nested_parse(const char* text, wotw_nested** out) {
  return guard([&] {
    auto* h = new wotw_nested{wotw::nested_from_json(text)};
    *out = h;
  });
}

int wotw_nested_read(const char* path, wotw_nested** out) {
  return guard([&] {
    auto* h = new wotw_nested{wotw::nested_from_json(wotw::read_file(path))};
    *out = h;
  });
}

int wotw_nested_to_json(const wotw_nested* p, char** json_out) {
  return guard([&] { *json_out = to_cstring(wotw::nested_to_json(p->m)); });
}

void wotw_nested_free(wotw_nested* p) { delete p; }

int wotw_tree_parse(const char* text, wotw_tree** out) {
  return guard([&] {
    auto* h = new wotw_tree{wotw::tree_from_json(text)};
    *out = h;
  });
}

int wotw_tree_read(const char* path, wotw_tree** out) {
  return guard([&] {
    auto* h = new wotw_tree{wotw::tree_from_json(wotw::read_file(path))};
    *out = h;
  });
}

int wotw_tree_to_json(const wotw_tree* t, char** json_out) {
  return guard([&] { *json_out = to_cstring(wotw::tree_to_json(t->t)); });
}

void wotw_tree_free(wotw_tree* t) { delete t; }

int wotw_table_parse(const char* text, wotw_table** out) {
  return guard([&] {
    auto* h = new wotw_table{table_from_json(json::parse(text))};
    *out = h;
  });
}

int wotw_table_read(const char* path, wotw_table** out) {
  return guard([&] {
    auto* h = new wotw_table{table_from_json(json::parse(wotw::read_file(path)))};
    *out = h;
  });
}

void wotw_table_free(wotw_table* t) { delete t; }

int wotw_ot(const wotw_nested* mu, const wotw_nested* nu, const char* cost,
            int maximize, int want_plan, char** json_out) {
  return guard([&] {
    const wotw::DiscreteMeasure a = as_flat(mu, "ot");
    const wotw::DiscreteMeasure b = as_flat(nu, "ot");
    const std::string kind = cost ? cost : "sqdist";
    std::vector<double> c;
    if (kind == "sqdist")
      c = wotw::squared_cost_matrix(a, b);
    else if (kind == "dot")
      c = wotw::inner_product_cost_matrix(a, b);
    else
      throw std::invalid_argument("ot: cost must be sqdist or dot");
    const wotw::Sense sense = maximize ? wotw::Sense::Max : wotw::Sense::Min;
    const wotw::OTSolution sol =
        wotw::solve_exact_ot(a.weights, b.weights, c, a.size(), b.size(), sense);
    json out = meta_block();
    out["cost"] = kind;
    out["sense"] = maximize ? "max" : "min";
    out["value"] = sol.value;
    out["dualPhi"] = sol.dual_phi;
    out["dualPsi"] = sol.dual_psi;
    if (want_plan) out["plan"] = coupling_entries(sol.coupling);
    const wotw::MongeMap mm = wotw::extract_monge(sol.coupling);
    out["monge"] = mm.is_monge;
    if (mm.is_monge) out["map"] = mm.map;
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_nested_mc(const wotw_nested* p, const wotw_nested* q, char** json_out) {
  return guard([&] {
    json out = meta_block();
    out["depth"] = p->m.depth;
    out["value"] = wotw::nested_mc(p->m, q->m);
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_nested_w2(const wotw_nested* p, const wotw_nested* q, char** json_out) {
  return guard([&] {
    const wotw::NestedW2Result r = wotw::nested_w2(p->m, q->m);
    json out = meta_block();
    out["depth"] = p->m.depth;
    out["value"] = r.value;
    out["valueSq"] = r.value_sq;
    out["identityResidual"] = r.identity_residual;
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_adapted_aw2(const wotw_tree* a, const wotw_tree* b, double merge_tol,
                     int threads, int check_isometry, char** json_out) {
  return guard([&] {
    const wotw::CanonicalAdaptedLaw ca = wotw::adapted_law(a->t, merge_tol);
    const wotw::CanonicalAdaptedLaw cb = wotw::adapted_law(b->t, merge_tol);
    const wotw::Aw2Result r = wotw::aw2(ca.tree, cb.tree, threads);
    json out = meta_block();
    out["value"] = r.value;
    out["valueSq"] = r.value_sq;
    out["mergeTol"] = merge_tol;
    out["nodesA"] = {int(a->t.nodes.size()), int(ca.tree.nodes.size())};
    out["nodesB"] = {int(b->t.nodes.size()), int(cb.tree.nodes.size())};
    const wotw::BiadaptedMonge mm = wotw::extract_biadapted_monge(ca.tree, cb.tree, r);
    out["monge"] = mm.is_monge;
    out["biadapted"] = mm.is_biadapted;
    if (mm.is_monge) {
      json stages = json::array();
      for (const auto& m : mm.stage_map) {
        json pairs = json::array();
        for (const auto& [from, to] : m) pairs.push_back({from, to});
        stages.push_back(pairs);
      }
      out["map"] = stages;
    }
    if (check_isometry) {
      const wotw::IsometryReport iso = wotw::verify_isometry(ca.tree, cb.tree, threads);
      out["isometryResidual"] = iso.residual;
    }
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_adapted_canon(const wotw_tree* t, double merge_tol, char** json_out) {
  return guard([&] {
    const wotw::CanonicalAdaptedLaw c = wotw::adapted_law(t->t, merge_tol);
    json out = meta_block();
    out["mergeTol"] = merge_tol;
    out["nodesBefore"] = int(t->t.nodes.size());
    out["nodesAfter"] = int(c.tree.nodes.size());
    out["tree"] = json::parse(wotw::tree_to_json(c.tree));
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_convexity_transform(const wotw_table* phi, char** json_out) {
  return guard([&] {
    const wotw::ConvexityReport r = wotw::mc_convexity_residual(phi->f);
    json out = meta_block();
    out["transform"] = r.transform;
    out["biconjugate"] = r.biconjugate;
    out["oneSidedExcess"] = r.one_sided_excess;
    out["biconjugationResidual"] = r.biconjugation_residual;
    out["tripleResidual"] = r.triple_residual;
    json pairs = json::array();
    for (const auto& [i, j] : wotw::mc_subdifferential_pairs(phi->f))
      pairs.push_back({i, j});
    out["subdifferentialPairs"] = pairs;
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_convexity_order(const wotw_nested* p, const wotw_nested* q, int probes,
                         uint64_t seed, char** json_out) {
  return guard([&] {
    const wotw::OrderReport r = wotw::mc_order_test(p->m, q->m, probes, seed);
    json out = meta_block();
    out["dominated"] = r.dominated;
    out["witnessProbe"] = r.witness_probe;
    out["witnessGap"] = r.witness_gap;
    out["probes"] = r.probes;
    out["seed"] = r.seed;
    *json_out = to_cstring(out.dump(2));
  });
}

namespace {

json tau_json(const wotw::TauResult& r, const wotw::TauOptions& opt) {
  json out = meta_block();
  out["tau"] = r.value;
  out["rawValue"] = r.raw_value;
  out["gap"] = r.gap;
  out["iterations"] = r.iterations;
  out["monge"] = r.monge;
  out["transportValue"] = r.transport_value;
  out["tolerances"] = {{"faceTol", opt.face_tol},
                       {"gapTol", opt.gap_tol},
                       {"zeroTol", opt.zero_tol}};
  return out;
}

}  // namespace

int wotw_tau(const wotw_nested* mu, const wotw_nested* nu, char** json_out) {
  return guard([&] {
    const wotw::TauOptions opt;
    const wotw::TauResult r =
        wotw::tau_squared_cost(as_flat(mu, "tau"), as_flat(nu, "tau"), opt);
    *json_out = to_cstring(tau_json(r, opt).dump(2));
  });
}

int wotw_tau_r(const wotw_nested* mu, double radius, int targets, uint64_t seed,
               char** json_out) {
  return guard([&] {
    const wotw::TauOptions opt;
    const wotw::TauRResult r =
        wotw::tau_r(as_flat(mu, "tau_r"), radius, targets, seed, {}, opt);
    json out = meta_block();
    out["tauR"] = r.value;
    out["radius"] = radius;
    out["candidates"] = r.candidates;
    out["admitted"] = r.admitted;
    out["seed"] = seed;
    out["tolerances"] = {{"faceTol", opt.face_tol},
                         {"gapTol", opt.gap_tol},
                         {"zeroTol", opt.zero_tol}};
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_experiment(const char* config_json, char** json_out) {
  return guard([&] {
    wotw::ExperimentConfig cfg;
    const json j = json::parse(config_json && *config_json ? config_json : "{}");
    cfg.n_samples = j.value("samples", cfg.n_samples);
    cfg.targets = j.value("targets", cfg.targets);
    cfg.grid = j.value("grid", cfg.grid);
    cfg.sheet_params = j.value("params", cfg.sheet_params);
    cfg.dim = j.value("dim", cfg.dim);
    cfg.target_atoms = j.value("atoms", cfg.target_atoms);
    cfg.seed = j.value("seed", cfg.seed);
    const std::string kind = j.value("kind", std::string("random"));
    if (kind == "random")
      cfg.target_kind = wotw::ExperimentConfig::TargetKind::Random;
    else if (kind == "dirac")
      cfg.target_kind = wotw::ExperimentConfig::TargetKind::Dirac;
    else
      throw std::invalid_argument("experiment: kind must be random or dirac");
    const wotw::ExperimentResult r = wotw::monge_rate_experiment(cfg);
    json out = meta_block();
    out["mongeRate"] = r.monge_rate;
    out["seed"] = cfg.seed;
    out["config"] = {{"samples", cfg.n_samples}, {"targets", cfg.targets},
                     {"grid", cfg.grid},         {"params", cfg.sheet_params},
                     {"dim", cfg.dim},           {"atoms", cfg.target_atoms},
                     {"kind", kind}};
    out["tolerances"] = {{"faceTol", cfg.tau.face_tol},
                         {"gapTol", cfg.tau.gap_tol},
                         {"zeroTol", cfg.tau.zero_tol}};
    json records = json::array();
    for (const auto& rec : r.records)
      records.push_back({{"sample", rec.sample},
                         {"target", rec.target},
                         {"tau", rec.tau},
                         {"monge", rec.monge}});
    out["records"] = records;
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_sample_sheet(int params, int dim, int grid, uint64_t seed,
                      uint64_t stream, char** json_out) {
  return guard([&] {
    const wotw::SheetSample s = wotw::sample_sheet(params, dim, grid, seed, stream);
    json out = meta_block();
    out["params"] = params;
    out["dim"] = dim;
    out["grid"] = grid;
    out["seed"] = seed;
    out["stream"] = stream;
    out["values"] = s.values;
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_sample_occupation(int params, int dim, int grid, const int* blocks,
                           int n_blocks, uint64_t seed, uint64_t stream,
                           char** json_out) {
  return guard([&] {
    const wotw::SheetSample s = wotw::sample_sheet(params, dim, grid, seed, stream);
    wotw::NestedMeasure m;
    if (n_blocks > 0) {
      m = wotw::nested_occupation(s, std::vector<int>(blocks, blocks + n_blocks));
    } else {
      const wotw::DiscreteMeasure occ = wotw::occupation_measure(s);
      m = wotw::NestedMeasure::discrete(occ.points, occ.weights);
    }
    json out = json::parse(wotw::nested_to_json(m));
    out["meta"] = {{"version", kVersion}, {"seed", seed},   {"stream", stream},
                   {"params", params},    {"grid", grid},   {"dim", dim}};
    *json_out = to_cstring(out.dump(2));
  });
}

int wotw_sample_qwiener(int grid, int modes, uint64_t seed, char** csv_out) {
  return guard([&] {
    wotw::QSpec spec;
    spec.modes = modes;
    const wotw::QWienerPath p = wotw::sample_q_wiener(spec, grid, seed);
    std::string csv = "# qwiener version=" + std::string(kVersion) +
                      " seed=" + std::to_string(seed) +
                      " modes=" + std::to_string(modes) +
                      " trace=" + std::to_string(spec.trace()) + "\n";
    csv += "t";
    for (int k = 1; k <= modes; ++k) csv += ",c" + std::to_string(k);
    csv += "\n";
    for (int i = 0; i <= grid; ++i) {
      csv += num(double(i) / grid);
      for (double c : p.values[i]) csv += "," + num(c);
      csv += "\n";
    }
    *csv_out = to_cstring(csv);
  });
}

int wotw_two_to_one(int n, int m, int threads, char** json_out) {
  return guard([&] {
    const wotw::TwoToOneReport r = wotw::two_to_one_report(n, m, threads);
    json out = meta_block();
    out["n"] = r.n;
    out["m"] = r.m;
    out["spacing"] = r.spacing;
    out["aw2"] = r.aw2_value;
    out["aw2Sq"] = r.aw2_sq;
    out["analyticSq"] = r.analytic_sq;
    out["mapExtracted"] = r.map_extracted;
    out["t1MaxError"] = r.t1_max_error;
    out["dualResidual"] = r.dual_residual;
    out["forwardTwoToOne"] = r.forward_two_to_one;
    out["reverseMongeWitness"] = r.reverse_monge_witness;
    json map = json::array();
    for (std::size_t i = 0; i < r.map_x.size(); ++i)
      map.push_back({r.map_x[i], r.map_y[i]});
    out["map"] = map;
    *json_out = to_cstring(out.dump(2));
  });
}

}  // extern "C"
