// Command-line front end: enumerate / certify / optimize / sweep / fit / plot.
//
// Exit codes: 0 success, 1 domain failure (e.g. non-convergence), 2 usage or
// config errors. Diagnostics go to stderr as "level=..." lines; data goes to
// files or stdout.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hypercube/config.hpp"
#include "hypercube/diagnostics.hpp"
#include "hypercube/enumeration.hpp"
#include "hypercube/errors.hpp"
#include "hypercube/sweep.hpp"

namespace {

using namespace hypercube;

int g_verbosity = 2;  // 0 errors, 1 +warn, 2 +info, 3 +debug

void logmsg(int level, const std::string& msg) {
  static const char* names[4] = {"error", "warn", "info", "debug"};
  if (level <= g_verbosity)
    std::fprintf(stderr, "level=%s %s\n", names[level], msg.c_str());
}

CayleyTable load_input_table(const std::string& group_spec,
                             const std::string& table_path) {
  if (!group_spec.empty() && !table_path.empty())
    throw Error("give either --group or --table, not both");
  if (!group_spec.empty()) return group_table(group_spec);
  if (table_path.empty()) throw Error("one of --group or --table is required");
  std::ifstream is(table_path);
  if (!is) throw Error("cannot open table file '" + table_path + "'");
  return read_table(is);
}

void write_text_output(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << body;
}

nlohmann::json run_result_json(const RunResult& r, int n, bool tied,
                               int restarts) {
  const double n2 = static_cast<double>(n) * n;
  nlohmann::json j;
  j["n"] = n;
  j["tied"] = tied;
  j["restarts"] = restarts;
  j["H"] = r.H;
  j["B"] = r.B;
  j["R"] = r.R;
  j["H_norm"] = r.H / n2;
  j["B_norm"] = r.B / n2;
  j["R_norm"] = r.R / n2;
  j["feas_residual"] = r.feas_residual;
  j["converged"] = r.converged;
  j["steps_used"] = r.steps_used;
  j["seed"] = r.seed;
  return j;
}

struct CommonOptFlags {
  int restarts = -1;
  int max_steps = -1;
  double step_size = -1.0;
  double feas_tol = -1.0;
  double init_scale = -1.0;

  void apply(OptConfig& oc) const {
    if (restarts > 0) oc.restarts = restarts;
    if (max_steps > 0) oc.max_steps = max_steps;
    if (step_size > 0) oc.step_size = step_size;
    if (feas_tol > 0) oc.feas_tol = feas_tol;
    if (init_scale > 0) oc.init_scale = init_scale;
  }
};

void add_opt_flags(CLI::App* sub, CommonOptFlags& f) {
  sub->add_option("--restarts", f.restarts, "independent random restarts");
  sub->add_option("--max-steps", f.max_steps, "per-restart step budget");
  sub->add_option("--step-size", f.step_size, "base step size");
  sub->add_option("--feas-tol", f.feas_tol, "max entrywise |T - delta| for convergence");
  sub->add_option("--init-scale", f.init_scale, "init entry scale (default 1/sqrt(n))");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator-valued factorization laboratory for finite binary operations"};
  app.require_subcommand(0, 1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  bool show_version = false;
  app.add_option("--config", config_path, "settings file (overrides $HYPERCUBE_CONF)");
  app.add_flag_function("-v,--verbose",
                        [](std::int64_t count) { g_verbosity = 2 + static_cast<int>(count); },
                        "increase verbosity (repeatable)");
  app.add_flag("-q,--quiet", [](std::int64_t) { g_verbosity = 0; },
               "errors only");
  app.add_flag("--version", show_version, "print version and settings fingerprint");

  // --- enumerate ---
  auto* cmd_enum = app.add_subcommand("enumerate", "generate reduced Latin squares / loops");
  EnumConfig ecfg;
  std::string enum_mode = "auto", enum_dedup = "none", enum_out = "-", enum_json;
  cmd_enum->add_option("--order", ecfg.order, "table order")->required();
  cmd_enum->add_option("--mode", enum_mode, "exhaustive | sample | auto")
      ->check(CLI::IsMember({"exhaustive", "sample", "auto"}));
  cmd_enum->add_option("--count", ecfg.sample_count, "samples to draw (sample mode)");
  cmd_enum->add_option("--seed", ecfg.seed, "sampling seed");
  cmd_enum->add_option("--dedup", enum_dedup, "none | iso")
      ->check(CLI::IsMember({"none", "iso"}));
  cmd_enum->add_option("--out", enum_out, "output path ('-' = stdout)");
  cmd_enum->add_option("--json", enum_json, "write a JSON summary here");

  // --- certify ---
  auto* cmd_cert = app.add_subcommand("certify", "exact certificate from the regular representation");
  std::string cert_group, cert_table;
  cmd_cert->add_option("--group", cert_group, "group spec, e.g. Zn:5, S3, Zn:2xZn:4");
  cmd_cert->add_option("--table", cert_table, "table file");

  // --- optimize ---
  auto* cmd_opt = app.add_subcommand("optimize", "minimize the objective over factorizations");
  std::string opt_group, opt_table, opt_json;
  CommonOptFlags opt_flags;
  bool opt_tied = false, opt_diag = false;
  std::uint64_t opt_seed = 0;
  bool opt_seed_set = false;
  int opt_trace = 0;
  cmd_opt->add_option("--group", opt_group, "group spec");
  cmd_opt->add_option("--table", opt_table, "table file");
  add_opt_flags(cmd_opt, opt_flags);
  cmd_opt->add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { opt_seed = s; opt_seed_set = true; },
      "base seed for restarts");
  cmd_opt->add_flag("--tied", opt_tied, "tie the three factor stacks to one map");
  cmd_opt->add_flag("--diagnostics", opt_diag, "embed a structure report in the JSON");
  cmd_opt->add_option("--trace", opt_trace, "record every k-th step in the JSON");
  cmd_opt->add_option("--json", opt_json, "output path ('-' = stdout)");

  // --- sweep ---
  auto* cmd_sweep = app.add_subcommand("sweep", "optimize a loop population and record minima");
  std::string sweep_orders, sweep_out, sweep_json;
  SweepConfig scfg;
  CommonOptFlags sweep_flags;
  bool sweep_strict = false;
  std::uint64_t sweep_seed = 0;
  bool sweep_seed_set = false;
  cmd_sweep->add_option("--orders", sweep_orders, "comma-separated, e.g. 5,6")->required();
  cmd_sweep->add_option("--sample", scfg.sample_count, "samples per order above 6");
  cmd_sweep->add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { sweep_seed = s; sweep_seed_set = true; },
      "base seed (optimizer and samplers)");
  cmd_sweep->add_option("--out", sweep_out, "records CSV path")->required();
  cmd_sweep->add_option("--workers", scfg.workers, "parallel per-loop workers");
  add_opt_flags(cmd_sweep, sweep_flags);
  cmd_sweep->add_flag("--strict", sweep_strict, "exit 1 when any record failed to converge");
  cmd_sweep->add_option("--json", sweep_json, "write a JSON summary here");

  // --- fit ---
  auto* cmd_fit = app.add_subcommand("fit", "fit scaling laws to sweep records");
  std::string fit_in, fit_out = "-";
  bool fit_fixed = false;
  cmd_fit->add_option("--in", fit_in, "records CSV")->required();
  cmd_fit->add_flag("--fixed-intercepts", fit_fixed, "pin intercepts at (0, 3, 3)");
  cmd_fit->add_option("--out", fit_out, "output path ('-' = stdout)");

  // --- plot ---
  auto* cmd_plot = app.add_subcommand("plot", "render the three-panel scatter SVG");
  std::string plot_in, plot_fit, plot_out, plot_json;
  cmd_plot->add_option("--in", plot_in, "records CSV")->required();
  cmd_plot->add_option("--fit", plot_fit, "fit JSON (adds fitted lines)");
  cmd_plot->add_option("--out", plot_out, "SVG path")->required();
  cmd_plot->add_option("--json", plot_json, "write a JSON summary here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "level=error %s\n", e.what());
    return 2;
  }

  try {
    OptConfig base_opt;
    DiagnosticsConfig diag_cfg;
    int config_workers = 0;
    int config_sample = 0;
    if (const auto path = resolve_config_path(config_path); path) {
      logmsg(3, "loading config from " + *path);
      const ConfigMap conf = load_config_file(*path);
      apply_config(conf, base_opt);
      apply_config(conf, diag_cfg);
      config_workers = conf.get_int("workers", 0);
      config_sample = conf.get_int("sample_count", 0);
    }

    if (show_version) {
      std::printf("hypercube %s (settings fingerprint %016llx)\n", kVersion,
                  static_cast<unsigned long long>(
                      settings_fingerprint(base_opt, diag_cfg)));
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::fprintf(stderr, "level=error a subcommand is required (see --help)\n");
      return 2;
    }

    if (cmd_enum->parsed()) {
      if (enum_mode == "auto")
        enum_mode = ecfg.order <= 6 ? "exhaustive" : "sample";
      ecfg.mode = enum_mode == "sample" ? EnumMode::Sample : EnumMode::Exhaustive;
      ecfg.dedup = enum_dedup == "iso" ? DedupMode::Isomorphism : DedupMode::None;
      const std::vector<CayleyTable> tables = run_enumeration(ecfg);
      std::ostringstream body;
      write_tables(body, tables);
      write_text_output(enum_out, body.str());
      logmsg(2, "enumerated " + std::to_string(tables.size()) + " tables");
      if (!enum_json.empty()) {
        nlohmann::json j;
        j["order"] = ecfg.order;
        j["mode"] = enum_mode;
        j["dedup"] = enum_dedup;
        j["count"] = tables.size();
        write_text_output(enum_json, j.dump(2) + "\n");
      }
      return 0;
    }

    if (cmd_cert->parsed()) {
      const CayleyTable t = load_input_table(cert_group, cert_table);
      const FactorSet f = regular_rep_factors(t);
      const DecompositionReport dec = decompose(f, t, /*with_gram=*/false);
      const KappaResult kr = kappa_values(f, t);
      double kmin = kr.kappa.front(), kmax = kr.kappa.front();
      for (double k : kr.kappa) {
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
      }
      nlohmann::json j;
      j["n"] = t.n();
      j["H"] = dec.H;
      j["B"] = dec.B;
      j["R"] = dec.R;
      j["max_T_delta"] = feas_residual_max(contract(f), t);
      j["kappa_min"] = kmin;
      j["kappa_max"] = kmax;
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (cmd_opt->parsed()) {
      const CayleyTable t = load_input_table(opt_group, opt_table);
      OptConfig oc = base_opt;
      opt_flags.apply(oc);
      if (opt_seed_set) oc.seed = opt_seed;
      oc.tied = opt_tied;
      oc.trace_stride = opt_trace;
      const MinimizeOutcome mo = minimize(t, oc);
      nlohmann::json j = run_result_json(mo.best, t.n(), oc.tied, oc.restarts);
      nlohmann::json runs = nlohmann::json::array();
      for (const RunResult& r : mo.runs) {
        nlohmann::json rj;
        rj["seed"] = r.seed;
        rj["H"] = r.H;
        rj["feas_residual"] = r.feas_residual;
        rj["converged"] = r.converged;
        rj["steps_used"] = r.steps_used;
        runs.push_back(rj);
      }
      j["runs"] = runs;
      if (oc.trace_stride > 0) {
        nlohmann::json tr = nlohmann::json::array();
        for (const TracePoint& p : mo.best.trace)
          tr.push_back({{"step", p.step}, {"mu", p.mu}, {"loss", p.loss}, {"feas", p.feas}});
        j["trace"] = tr;
      }
      if (opt_diag)
        j["structure"] = report_to_json(structure_report(mo.best.theta, t, diag_cfg));
      write_text_output(opt_json, j.dump(2) + "\n");
      logmsg(2, std::string("best H = ") + std::to_string(mo.best.H) +
                    (mo.best.converged ? " (converged)" : " (not converged)"));
      return mo.best.converged ? 0 : 1;
    }

    if (cmd_sweep->parsed()) {
      scfg.opt = base_opt;
      sweep_flags.apply(scfg.opt);
      if (sweep_seed_set) scfg.opt.seed = sweep_seed;
      scfg.enum_seed = scfg.opt.seed;
      if (config_workers > 0 && !cmd_sweep->count("--workers"))
        scfg.workers = config_workers;
      if (config_sample > 0 && !cmd_sweep->count("--sample"))
        scfg.sample_count = config_sample;
      scfg.out_path = sweep_out;
      std::stringstream ss(sweep_orders);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) scfg.orders.push_back(std::stoi(tok));
      }
      const SweepSummary sum = run_sweep(scfg);
      int unconverged = 0;
      for (const SweepRecord& r : sum.records)
        if (!r.converged) ++unconverged;
      logmsg(2, "sweep records=" + std::to_string(sum.records.size()) +
                    " computed=" + std::to_string(sum.computed) +
                    " resumed=" + std::to_string(sum.resumed) +
                    " unconverged=" + std::to_string(unconverged));
      if (!sweep_json.empty()) {
        nlohmann::json j;
        j["records"] = sum.records.size();
        j["computed"] = sum.computed;
        j["resumed"] = sum.resumed;
        j["unconverged"] = unconverged;
        j["out"] = sweep_out;
        write_text_output(sweep_json, j.dump(2) + "\n");
      }
      if (sweep_strict && unconverged > 0) return 1;
      return 0;
    }

    if (cmd_fit->parsed()) {
      const std::vector<SweepRecord> rs = read_records(fit_in);
      const FitResult fit = fit_scaling(rs, fit_fixed);
      nlohmann::json j;
      j["c_R"] = fit.c_R;
      j["c_B"] = fit.c_B;
      j["c_H"] = fit.c_H;
      j["intercept_R"] = fit.intercept_R;
      j["intercept_B"] = fit.intercept_B;
      j["intercept_H"] = fit.intercept_H;
      j["c_ratio"] = fit.c_ratio;
      j["r_squared"] = {{"R", fit.r_squared[0]}, {"B", fit.r_squared[1]}, {"H", fit.r_squared[2]}};
      j["n_points"] = fit.n_points;
      j["fixed_intercept_mode"] = fit.fixed_intercept_mode;

      nlohmann::json per_order = nlohmann::json::object();
      std::vector<int> orders;
      for (const SweepRecord& r : rs)
        if (std::find(orders.begin(), orders.end(), r.order) == orders.end())
          orders.push_back(r.order);
      std::sort(orders.begin(), orders.end());
      for (int o : orders) {
        std::vector<SweepRecord> sub;
        for (const SweepRecord& r : rs)
          if (r.order == o) sub.push_back(r);
        try {
          const FitResult fo = fit_scaling(sub, fit_fixed);
          per_order[std::to_string(o)] = {{"c_R", fo.c_R},
                                          {"c_B", fo.c_B},
                                          {"c_H", fo.c_H},
                                          {"n_points", fo.n_points}};
        } catch (const InsufficientData&) {
          per_order[std::to_string(o)] = nullptr;
        }
      }
      j["per_order"] = per_order;

      nlohmann::json quarantine = nlohmann::json::array();
      for (const SweepRecord& r : rs)
        if (!r.converged) {
          char h[32];
          std::snprintf(h, sizeof h, "%016llx",
                        static_cast<unsigned long long>(r.canonical_hash));
          quarantine.push_back({{"order", r.order}, {"canonical_hash", h}});
        }
      j["quarantine"] = quarantine;
      write_text_output(fit_out, j.dump(2) + "\n");
      return 0;
    }

    if (cmd_plot->parsed()) {
      const std::vector<SweepRecord> rs = read_records(plot_in);
      FitResult fit;
      bool have_fit = false;
      if (!plot_fit.empty()) {
        std::ifstream is(plot_fit);
        if (!is) throw Error("cannot open fit file '" + plot_fit + "'");
        nlohmann::json j;
        is >> j;
        fit.c_R = j.at("c_R").get<double>();
        fit.c_B = j.at("c_B").get<double>();
        fit.c_H = j.at("c_H").get<double>();
        fit.intercept_R = j.at("intercept_R").get<double>();
        fit.intercept_B = j.at("intercept_B").get<double>();
        fit.intercept_H = j.at("intercept_H").get<double>();
        have_fit = true;
      }
      emit_scatter_svg(rs, have_fit ? &fit : nullptr, plot_out);
      logmsg(2, "wrote " + plot_out);
      if (!plot_json.empty()) {
        nlohmann::json j;
        j["points"] = rs.size();
        j["panels"] = 3;
        j["out"] = plot_out;
        j["with_fit"] = have_fit;
        write_text_output(plot_json, j.dump(2) + "\n");
      }
      return 0;
    }

    std::fprintf(stderr, "level=error no subcommand handled\n");
    return 2;
  } catch (const InsufficientData& e) {
    std::fprintf(stderr, "level=error %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "level=error %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "level=error %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "level=error %s\n", e.what());
    return 2;
  }
}
