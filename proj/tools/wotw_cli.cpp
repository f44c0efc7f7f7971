// Command-line front end.  Everything numerical happens behind the C API in
// libwotw; this file only parses flags, moves JSON around and maps error
// codes to exit codes.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wotw.h"

using json = nlohmann::json;

namespace {

enum ExitCode {
  kOk = 0,
  kInternal = 1,
  kValidation = 2,
  kUsage = 64,
  kMissingFile = 66,
};

struct Ctx {
  std::string out_path;
  std::string config_path;
  int threads = 1;
  json config = json::object();
  int exit_code = kOk;
};

struct StringOut {
  char* s = nullptr;
  ~StringOut() { wotw_string_free(s); }
};

struct Nested {
  wotw_nested* h = nullptr;
  ~Nested() { wotw_nested_free(h); }
};
struct Tree {
  wotw_tree* h = nullptr;
  ~Tree() { wotw_tree_free(h); }
};
struct Table {
  wotw_table* h = nullptr;
  ~Table() { wotw_table_free(h); }
};

int to_exit(int rc) {
  switch (rc) {
    case WOTW_OK:
      return kOk;
    case WOTW_ERR_VALIDATION:
      return kValidation;
    case WOTW_ERR_IO:
      return kMissingFile;
    default:
      return kInternal;
  }
}

// Machine-readable diagnostic on stderr, exit code recorded in the context.
bool check(Ctx& ctx, int rc) {
  if (rc == WOTW_OK) return true;
  json diag{{"error", to_exit(rc)}, {"message", wotw_last_error()}};
  std::cerr << diag.dump() << "\n";
  ctx.exit_code = to_exit(rc);
  return false;
}

void emit(Ctx& ctx, const std::string& text) {
  std::string body = text;
  if (body.empty() || body.back() != '\n') body += '\n';
  if (ctx.out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(ctx.out_path, std::ios::binary);
  if (!out) {
    json diag{{"error", int(kMissingFile)}, {"message", "cannot write " + ctx.out_path}};
    std::cerr << diag.dump() << "\n";
    ctx.exit_code = kMissingFile;
    return;
  }
  out << body;
}

// --config FILE supplies defaults for flags the command line leaves unset.
template <class T>
void from_config(Ctx& ctx, const CLI::Option* opt, const char* key, T& var) {
  if (opt != nullptr && opt->count() > 0) return;
  if (ctx.config.contains(key)) var = ctx.config.at(key).get<T>();
}

std::string num(double x) { return json(x).dump(); }

}  // namespace

int main(int argc, char** argv) {
  Ctx ctx;
  if (const char* tv = std::getenv("WOTW_THREADS")) {
    const int t = std::atoi(tv);
    if (t >= 1) ctx.threads = t;
  }

  // The config file must be live before subcommand callbacks fire, so pick it
  // up in a pre-pass rather than from the parsed option.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") ctx.config_path = argv[i + 1];
  }
  if (!ctx.config_path.empty()) {
    std::ifstream in(ctx.config_path, std::ios::binary);
    if (!in) {
      std::cerr << json{{"error", int(kMissingFile)},
                        {"message", "cannot open " + ctx.config_path}}
                       .dump()
                << "\n";
      return kMissingFile;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      ctx.config = json::parse(ss.str());
    } catch (const json::exception& e) {
      std::cerr << json{{"error", int(kValidation)}, {"message", e.what()}}.dump() << "\n";
      return kValidation;
    }
  }

  CLI::App app{"nested and adapted optimal transport toolkit"};
  app.set_version_flag("--version", wotw_version());
  app.add_option("--config", ctx.config_path, "JSON file with default flag values");
  auto* out_opt = app.add_option("--out", ctx.out_path, "write output here instead of stdout");
  auto* threads_opt =
      app.add_option("--threads", ctx.threads, "worker threads (default WOTW_THREADS or 1)");
  app.require_subcommand(1);

  auto config_common = [&] {
    from_config(ctx, out_opt, "out", ctx.out_path);
    from_config(ctx, threads_opt, "threads", ctx.threads);
  };

  // ---- ot ----------------------------------------------------------------
  auto* ot = app.add_subcommand("ot", "exact transport between two flat measures");
  {
    static std::string mu_path, nu_path, cost = "sqdist";
    static bool maximize = false, want_plan = false;
    ot->add_option("mu", mu_path, "source measure JSON")->required();
    ot->add_option("nu", nu_path, "target measure JSON")->required();
    auto* cost_opt = ot->add_option("--cost", cost, "sqdist or dot");
    ot->add_flag("--max", maximize, "maximize instead of minimize");
    ot->add_flag("--plan", want_plan, "include the full plan");
    ot->callback([&, cost_opt] {
      config_common();
      from_config(ctx, cost_opt, "cost", cost);
      Nested mu, nu;
      if (!check(ctx, wotw_nested_read(mu_path.c_str(), &mu.h))) return;
      if (!check(ctx, wotw_nested_read(nu_path.c_str(), &nu.h))) return;
      StringOut s;
      if (!check(ctx, wotw_ot(mu.h, nu.h, cost.c_str(), maximize, want_plan, &s.s))) return;
      emit(ctx, s.s);
    });
  }

  // ---- nested ------------------------------------------------------------
  auto* nested = app.add_subcommand("nested", "iterated transport between nested measures");
  nested->require_subcommand(1);
  {
    static std::string p_path, q_path;
    auto* mc = nested->add_subcommand("mc", "iterated max-covariance");
    mc->add_option("P", p_path, "nested measure JSON")->required();
    mc->add_option("Q", q_path, "nested measure JSON")->required();
    mc->callback([&] {
      config_common();
      Nested p, q;
      if (!check(ctx, wotw_nested_read(p_path.c_str(), &p.h))) return;
      if (!check(ctx, wotw_nested_read(q_path.c_str(), &q.h))) return;
      StringOut s;
      if (!check(ctx, wotw_nested_mc(p.h, q.h, &s.s))) return;
      emit(ctx, s.s);
    });
    auto* w2 = nested->add_subcommand("w2", "nested distance with identity cross-check");
    w2->add_option("P", p_path, "nested measure JSON")->required();
    w2->add_option("Q", q_path, "nested measure JSON")->required();
    w2->callback([&] {
      config_common();
      Nested p, q;
      if (!check(ctx, wotw_nested_read(p_path.c_str(), &p.h))) return;
      if (!check(ctx, wotw_nested_read(q_path.c_str(), &q.h))) return;
      StringOut s;
      if (!check(ctx, wotw_nested_w2(p.h, q.h, &s.s))) return;
      emit(ctx, s.s);
    });
  }

  // ---- adapted -----------------------------------------------------------
  auto* adapted = app.add_subcommand("adapted", "adapted distance between scenario trees");
  adapted->require_subcommand(1);
  static double merge_tol = 0.0;
  static int ex_n = 200, ex_m = 0;
  {
    static std::string a_path, b_path;
    static bool no_isometry = false;
    auto* aw2 = adapted->add_subcommand("aw2", "adapted distance via backward recursion");
    aw2->add_option("A", a_path, "scenario tree JSON")->required();
    aw2->add_option("B", b_path, "scenario tree JSON")->required();
    auto* mt = aw2->add_option("--merge-tol", merge_tol, "sibling merge tolerance");
    aw2->add_flag("--no-isometry", no_isometry, "skip the encoding cross-check");
    aw2->callback([&, mt] {
      config_common();
      from_config(ctx, mt, "merge-tol", merge_tol);
      Tree a, b;
      if (!check(ctx, wotw_tree_read(a_path.c_str(), &a.h))) return;
      if (!check(ctx, wotw_tree_read(b_path.c_str(), &b.h))) return;
      StringOut s;
      if (!check(ctx, wotw_adapted_aw2(a.h, b.h, merge_tol, ctx.threads, !no_isometry, &s.s)))
        return;
      emit(ctx, s.s);
    });

    static std::string t_path;
    auto* canon = adapted->add_subcommand("canon", "canonicalize a scenario tree");
    canon->add_option("T", t_path, "scenario tree JSON")->required();
    auto* mt2 = canon->add_option("--merge-tol", merge_tol, "sibling merge tolerance");
    canon->callback([&, mt2] {
      config_common();
      from_config(ctx, mt2, "merge-tol", merge_tol);
      Tree t;
      if (!check(ctx, wotw_tree_read(t_path.c_str(), &t.h))) return;
      StringOut s;
      if (!check(ctx, wotw_adapted_canon(t.h, merge_tol, &s.s))) return;
      emit(ctx, s.s);
    });
  }

  auto example_body = [&](const CLI::Option* n_opt, const CLI::Option* m_opt) {
    config_common();
    from_config(ctx, n_opt, "n", ex_n);
    from_config(ctx, m_opt, "m", ex_m);
    const int m = ex_m > 0 ? ex_m : ex_n;
    StringOut s;
    if (!check(ctx, wotw_two_to_one(ex_n, m, ctx.threads, &s.s))) return;
    emit(ctx, s.s);
  };
  {
    auto* ex = adapted->add_subcommand("example", "two-to-one worked example");
    auto* n_opt = ex->add_option("--n", ex_n, "stage-1 atoms (even)");
    auto* m_opt = ex->add_option("--m", ex_m, "atoms per conditional (default n)");
    ex->callback([&, n_opt, m_opt] { example_body(n_opt, m_opt); });
  }

  // ---- convexity ---------------------------------------------------------
  auto* convexity = app.add_subcommand("convexity", "conjugation and order diagnostics");
  convexity->require_subcommand(1);
  {
    static std::string phi_path;
    auto* transform = convexity->add_subcommand("transform", "conjugation across a table");
    transform->add_option("PHI", phi_path, "functional table JSON")->required();
    transform->callback([&] {
      config_common();
      Table phi;
      if (!check(ctx, wotw_table_read(phi_path.c_str(), &phi.h))) return;
      StringOut s;
      if (!check(ctx, wotw_convexity_transform(phi.h, &s.s))) return;
      emit(ctx, s.s);
    });

    static std::string p_path, q_path;
    static int probes = 64;
    static std::uint64_t seed = 12345;
    auto* order = convexity->add_subcommand("order", "randomized dominance test");
    order->add_option("P", p_path, "nested measure JSON")->required();
    order->add_option("Q", q_path, "nested measure JSON")->required();
    auto* probes_opt = order->add_option("--probes", probes, "number of probe measures");
    auto* seed_opt = order->add_option("--seed", seed, "RNG seed");
    order->callback([&, probes_opt, seed_opt] {
      config_common();
      from_config(ctx, probes_opt, "probes", probes);
      from_config(ctx, seed_opt, "seed", seed);
      Nested p, q;
      if (!check(ctx, wotw_nested_read(p_path.c_str(), &p.h))) return;
      if (!check(ctx, wotw_nested_read(q_path.c_str(), &q.h))) return;
      StringOut s;
      if (!check(ctx, wotw_convexity_order(p.h, q.h, probes, seed, &s.s))) return;
      emit(ctx, s.s);
    });
  }

  // ---- regularity --------------------------------------------------------
  auto* regularity = app.add_subcommand("regularity", "uniqueness diagnostics for transport");
  regularity->require_subcommand(1);
  {
    static std::string mu_path, nu_path;
    static double radius = 0.0;
    static int targets = 16;
    static std::uint64_t seed = 12345;
    auto* tau = regularity->add_subcommand("tau", "spread of the optimal-plan family");
    tau->add_option("mu", mu_path, "source measure JSON")->required();
    auto* nu_opt = tau->add_option("nu", nu_path, "target measure JSON");
    auto* radius_opt = tau->add_option("--radius", radius, "sweep random targets in this ball");
    auto* targets_opt = tau->add_option("--targets", targets, "targets for the sweep");
    auto* seed_opt = tau->add_option("--seed", seed, "RNG seed");
    tau->callback([&, nu_opt, radius_opt, targets_opt, seed_opt] {
      config_common();
      from_config(ctx, radius_opt, "radius", radius);
      from_config(ctx, targets_opt, "targets", targets);
      from_config(ctx, seed_opt, "seed", seed);
      Nested mu;
      if (!check(ctx, wotw_nested_read(mu_path.c_str(), &mu.h))) return;
      StringOut s;
      if (nu_opt->count() > 0) {
        Nested nu;
        if (!check(ctx, wotw_nested_read(nu_path.c_str(), &nu.h))) return;
        if (!check(ctx, wotw_tau(mu.h, nu.h, &s.s))) return;
      } else if (radius > 0.0) {
        if (!check(ctx, wotw_tau_r(mu.h, radius, targets, seed, &s.s))) return;
      } else {
        std::cerr << json{{"error", int(kValidation)},
                          {"message", "tau: need a target measure or --radius"}}
                         .dump()
                  << "\n";
        ctx.exit_code = kValidation;
        return;
      }
      emit(ctx, s.s);
    });

    static int samples = 50, exp_targets = 5, grid = 64, params = 1, dim = 1, atoms = 5;
    static std::uint64_t exp_seed = 12345;
    static std::string kind = "random", format = "csv";
    auto* exp = regularity->add_subcommand("experiment", "deterministic tau sweep");
    auto* samples_opt = exp->add_option("--samples", samples, "sampled source measures");
    auto* targets2_opt = exp->add_option("--targets", exp_targets, "targets per source");
    auto* grid_opt = exp->add_option("--grid", grid, "sampler grid resolution");
    auto* params_opt = exp->add_option("--params", params, "sheet parameter axes");
    auto* dim_opt = exp->add_option("--dim", dim, "state dimension");
    auto* atoms_opt = exp->add_option("--atoms", atoms, "atoms per random target");
    auto* seed2_opt = exp->add_option("--seed", exp_seed, "RNG seed");
    auto* kind_opt = exp->add_option("--kind", kind, "target kind: random or dirac");
    auto* format_opt = exp->add_option("--format", format, "csv or json");
    exp->callback([&, samples_opt, targets2_opt, grid_opt, params_opt, dim_opt, atoms_opt,
                   seed2_opt, kind_opt, format_opt] {
      config_common();
      from_config(ctx, samples_opt, "samples", samples);
      from_config(ctx, targets2_opt, "targets", exp_targets);
      from_config(ctx, grid_opt, "grid", grid);
      from_config(ctx, params_opt, "params", params);
      from_config(ctx, dim_opt, "dim", dim);
      from_config(ctx, atoms_opt, "atoms", atoms);
      from_config(ctx, seed2_opt, "seed", exp_seed);
      from_config(ctx, kind_opt, "kind", kind);
      from_config(ctx, format_opt, "format", format);
      const json cfg{{"samples", samples}, {"targets", exp_targets}, {"grid", grid},
                     {"params", params},   {"dim", dim},             {"atoms", atoms},
                     {"seed", exp_seed},   {"kind", kind}};
      StringOut s;
      if (!check(ctx, wotw_experiment(cfg.dump().c_str(), &s.s))) return;
      if (format == "json") {
        emit(ctx, s.s);
        return;
      }
      if (format != "csv") {
        std::cerr << json{{"error", int(kValidation)},
                          {"message", "experiment: format must be csv or json"}}
                         .dump()
                  << "\n";
        ctx.exit_code = kValidation;
        return;
      }
      const json r = json::parse(s.s);
      std::string csv = "# wotw version=" + r.at("version").get<std::string>() +
                        " seed=" + std::to_string(exp_seed) +
                        " faceTol=" + num(r.at("tolerances").at("faceTol").get<double>()) +
                        " gapTol=" + num(r.at("tolerances").at("gapTol").get<double>()) +
                        " zeroTol=" + num(r.at("tolerances").at("zeroTol").get<double>()) +
                        " mongeRate=" + num(r.at("mongeRate").get<double>()) + "\n";
      csv += "sample,target,tau,monge\n";
      for (const json& rec : r.at("records"))
        csv += std::to_string(rec.at("sample").get<int>()) + "," +
               std::to_string(rec.at("target").get<int>()) + "," +
               num(rec.at("tau").get<double>()) + "," +
               (rec.at("monge").get<bool>() ? "1" : "0") + "\n";
      emit(ctx, csv);
    });
  }

  // ---- sample ------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "seeded generators");
  sample->require_subcommand(1);
  {
    static int params = 1, dim = 1, grid = 64, modes = 16;
    static std::uint64_t seed = 12345, stream = 0;
    static std::vector<int> blocks;

    auto* sheet = sample->add_subcommand("sheet", "grid field sample");
    auto* p1 = sheet->add_option("--params", params, "parameter axes");
    auto* d1 = sheet->add_option("--dim", dim, "value dimension");
    auto* g1 = sheet->add_option("--grid", grid, "grid resolution");
    auto* s1 = sheet->add_option("--seed", seed, "RNG seed");
    auto* t1 = sheet->add_option("--stream", stream, "RNG stream index");
    sheet->callback([&, p1, d1, g1, s1, t1] {
      config_common();
      from_config(ctx, p1, "params", params);
      from_config(ctx, d1, "dim", dim);
      from_config(ctx, g1, "grid", grid);
      from_config(ctx, s1, "seed", seed);
      from_config(ctx, t1, "stream", stream);
      StringOut s;
      if (!check(ctx, wotw_sample_sheet(params, dim, grid, seed, stream, &s.s))) return;
      emit(ctx, s.s);
    });

    auto* occ = sample->add_subcommand("occupation", "occupation measure of a field sample");
    auto* p2 = occ->add_option("--params", params, "parameter axes");
    auto* d2 = occ->add_option("--dim", dim, "value dimension");
    auto* g2 = occ->add_option("--grid", grid, "grid resolution");
    auto* s2 = occ->add_option("--seed", seed, "RNG seed");
    auto* t2 = occ->add_option("--stream", stream, "RNG stream index");
    auto* b2 = occ->add_option("--blocks", blocks, "per-axis block counts for nesting")
                   ->delimiter(',');
    occ->callback([&, p2, d2, g2, s2, t2, b2] {
      config_common();
      from_config(ctx, p2, "params", params);
      from_config(ctx, d2, "dim", dim);
      from_config(ctx, g2, "grid", grid);
      from_config(ctx, s2, "seed", seed);
      from_config(ctx, t2, "stream", stream);
      from_config(ctx, b2, "blocks", blocks);
      StringOut s;
      if (!check(ctx, wotw_sample_occupation(params, dim, grid,
                                             blocks.empty() ? nullptr : blocks.data(),
                                             int(blocks.size()), seed, stream, &s.s)))
        return;
      emit(ctx, s.s);
    });

    auto* qw = sample->add_subcommand("qwiener", "trace-class path sample as CSV");
    auto* g3 = qw->add_option("--grid", grid, "time steps");
    auto* k3 = qw->add_option("--modes", modes, "retained modes");
    auto* s3 = qw->add_option("--seed", seed, "RNG seed");
    qw->callback([&, g3, k3, s3] {
      config_common();
      from_config(ctx, g3, "grid", grid);
      from_config(ctx, k3, "modes", modes);
      from_config(ctx, s3, "seed", seed);
      StringOut s;
      if (!check(ctx, wotw_sample_qwiener(grid, modes, seed, &s.s))) return;
      emit(ctx, s.s);
    });
  }

  // ---- example -----------------------------------------------------------
  auto* example = app.add_subcommand("example", "worked examples");
  example->require_subcommand(1);
  {
    auto* bf = example->add_subcommand(
        "brenier-failure", "adapted transport with a two-to-one optimal map");
    auto* n_opt = bf->add_option("--n", ex_n, "stage-1 atoms (even)");
    auto* m_opt = bf->add_option("--m", ex_m, "atoms per conditional (default n)");
    bf->callback([&, n_opt, m_opt] { example_body(n_opt, m_opt); });
  }

  // Global flags like --out may trail the subcommand arguments; let every
  // subcommand hand unmatched options back up the chain.
  std::function<void(CLI::App*)> allow_trailing_globals = [&](CLI::App* a) {
    for (CLI::App* sub : a->get_subcommands([](CLI::App*) { return true; })) {
      sub->fallthrough();
      allow_trailing_globals(sub);
    }
  };
  allow_trailing_globals(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", int(kUsage)}, {"message", e.what()}}.dump() << "\n";
    return kUsage;
  }
  return ctx.exit_code;
}
