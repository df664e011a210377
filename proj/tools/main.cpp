// omh: batch driver for the verification / simulation library.
// Talks to the core exclusively through the C API in omh/omh.h.

#include <omh/omh.h>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kUsage = 64;

std::string grab(char* s) {
  std::string out = s ? s : "";
  omh_string_free(s);
  return out;
}

[[noreturn]] void die_usage(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(kUsage);
}

int exit_for(int status) {
  switch (status) {
    case OMH_OK:
      return 0;
    case OMH_EDIVERGED:
      return 2;
    case OMH_EUSAGE:
    case OMH_EPARSE:
    case OMH_ECONFIG:
      return kUsage;
    default:
      return 1;
  }
}

[[noreturn]] void die_status(int status) {
  std::fprintf(stderr, "error: %s\n", omh_last_error());
  std::exit(exit_for(status));
}

std::string now_utc() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// rewrite "--tol.NAME[=V]" (value either inline or the next token) into the
// repeatable "--tol NAME=V" option CLI11 can digest
std::vector<std::string> preprocess(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 0; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("--tol.", 0) == 0) {
      std::string rest = a.substr(6);
      if (rest.find('=') == std::string::npos) {
        if (i + 1 >= argc) die_usage("missing value for " + a);
        rest += "=";
        rest += argv[++i];
      }
      out.push_back("--tol");
      out.push_back(rest);
    } else {
      out.push_back(a);
    }
  }
  return out;
}

std::pair<std::string, std::string> split_eq(const std::string& s,
                                             const char* what) {
  auto pos = s.find('=');
  if (pos == std::string::npos || pos == 0)
    die_usage(std::string(what) + " expects name=value, got '" + s + "'");
  return {s.substr(0, pos), s.substr(pos + 1)};
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    die_usage(std::string(what) + ": '" + s + "' is not a number");
  }
}

std::set<std::string> catalog_ids(const json& cat) {
  std::set<std::string> ids;
  for (const auto& m : cat) ids.insert(m.at("id").get<std::string>());
  return ids;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) die_usage("cannot open config file '" + path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    die_usage("config file '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) die_usage("config file must hold a JSON object");
  return cfg;
}

// model selection + overrides shared by verify and simulate
struct ModelArgs {
  std::string target;  // positional: model id or config path
  std::string config_path;
  std::vector<std::string> fn_args;
  std::vector<std::string> param_args;
  std::string gauge;
  double b = 0.0, a = 0.0, b3 = 0.0;
  CLI::Option *ob = nullptr, *oa = nullptr, *ob3 = nullptr, *og = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("model", target, "catalog model id or config file path")
        ->required();
    cmd->add_option("--config", config_path, "config file (JSON, same schema)");
    cmd->add_option("--fn", fn_args,
                    "define a function slot, name=expression (repeatable)");
    cmd->add_option("--param", param_args,
                    "set a model parameter, name=value (repeatable)");
    og = cmd->add_option("--gauge", gauge, "vector potential gauge");
    ob = cmd->add_option("--b", b, "shorthand for --param b=VALUE");
    oa = cmd->add_option("--a", a, "shorthand for --param a=VALUE");
    ob3 = cmd->add_option("--b3", b3, "shorthand for --param b3=VALUE");
  }

  // resolves the positional against the catalog, loads any config file,
  // then lays CLI overrides on top; returns the config object (may be empty)
  json resolve(const json& cat) {
    json cfg = json::object();
    std::set<std::string> ids = catalog_ids(cat);
    if (!config_path.empty()) cfg = load_config(config_path);
    if (ids.count(target)) {
      cfg["model"] = target;
    } else {
      std::ifstream probe(target);
      if (!probe)
        die_usage("'" + target + "' is neither a catalog model id nor a file");
      cfg = load_config(target);
      if (!cfg.contains("model"))
        die_usage("config file '" + target + "' has no \"model\" entry");
    }
    if (!cfg.contains("params") || !cfg["params"].is_object())
      cfg["params"] = json::object();
    if (!cfg.contains("functions") || !cfg["functions"].is_object())
      cfg["functions"] = json::object();
    for (const auto& s : param_args) {
      auto [k, v] = split_eq(s, "--param");
      cfg["params"][k] = to_double(v, "--param");
    }
    if (ob->count()) cfg["params"]["b"] = b;
    if (oa->count()) cfg["params"]["a"] = a;
    if (ob3->count()) cfg["params"]["b3"] = b3;
    for (const auto& s : fn_args) {
      auto [k, v] = split_eq(s, "--fn");
      cfg["functions"][k] = v;
    }
    if (og->count()) cfg["gauge"] = gauge;
    return cfg;
  }
};

omh_model* create_model(const json& cfg) {
  ordered_json spec;
  spec["model"] = cfg.at("model");
  spec["params"] = cfg.at("params");
  spec["functions"] = cfg.at("functions");
  if (cfg.contains("gauge")) spec["gauge"] = cfg["gauge"];
  omh_model* m = nullptr;
  int st = omh_model_create(spec.dump().c_str(), &m);
  if (st != OMH_OK) die_status(st);
  return m;
}

std::string fmt_num(const json& v) {
  if (v.is_null()) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v.get<double>());
  return buf;
}

void print_report_table(const json& rep) {
  std::printf("model %s", rep.at("model").get<std::string>().c_str());
  std::string gauge = rep.value("gauge", std::string());
  if (!gauge.empty()) std::printf("  gauge %s", gauge.c_str());
  std::printf("  seed %llu  samples %d\n",
              static_cast<unsigned long long>(
                  rep.at("options").at("seed").get<std::uint64_t>()),
              rep.at("options").at("samples").get<int>());
  if (rep.value("degenerate", false))
    std::printf("note: degenerate parameter values; some checks skipped\n");
  for (const auto& c : rep.at("checks")) {
    std::printf("%s  %-38s max %-9s mean %-9s tol %-8s\n",
                c.at("passed").get<bool>() ? "PASS" : "FAIL",
                c.at("name").get<std::string>().c_str(),
                fmt_num(c.at("max")).c_str(), fmt_num(c.at("mean")).c_str(),
                fmt_num(c.at("tol")).c_str());
    if (c.contains("note"))
      std::printf("      note: %s\n", c.at("note").get<std::string>().c_str());
  }
  int total = static_cast<int>(rep.at("checks").size());
  int failed = rep.at("summary").at("failed").get<int>();
  std::printf("%d/%d checks passed\n", total - failed, total);
}

int cmd_list(bool as_json) {
  std::string cat_text = grab(omh_catalog_json());
  if (as_json) {
    std::fputs(cat_text.c_str(), stdout);
    if (cat_text.empty() || cat_text.back() != '\n') std::fputc('\n', stdout);
    return 0;
  }
  json cat = json::parse(cat_text);
  for (const auto& m : cat) {
    std::printf("%-12s %s\n", m.at("id").get<std::string>().c_str(),
                m.at("title").get<std::string>().c_str());
    if (!m.at("params").empty()) {
      std::printf("    params:");
      for (auto it = m["params"].begin(); it != m["params"].end(); ++it)
        std::printf(" %s=%g", it.key().c_str(), it.value().get<double>());
      std::printf("\n");
    }
    if (!m.at("functions").empty()) {
      std::printf("    slots:");
      for (const auto& f : m["functions"])
        std::printf(" %s(%s)", f.at("name").get<std::string>().c_str(),
                    f.at("variable").get<std::string>().c_str());
      std::printf("\n");
    }
    if (!m.at("gauges").empty()) {
      std::printf("    gauges:");
      for (const auto& g : m["gauges"])
        std::printf(" %s", g.get<std::string>().c_str());
      std::printf("\n");
    }
  }
  return 0;
}

int cmd_verify(ModelArgs& ma, const json& cat, long long samples,
               long long seed, int threads, bool has_samples, bool has_seed,
               bool has_threads, const std::vector<std::string>& tol_args,
               std::string out_path, bool as_json, bool no_stamp) {
  json cfg = ma.resolve(cat);
  ordered_json opt = ordered_json::object();
  if (has_seed)
    opt["seed"] = seed;
  else if (cfg.contains("seed"))
    opt["seed"] = cfg["seed"];
  if (has_samples)
    opt["samples"] = samples;
  else if (cfg.contains("samples"))
    opt["samples"] = cfg["samples"];
  if (has_threads)
    opt["threads"] = threads;
  else if (cfg.contains("threads"))
    opt["threads"] = cfg["threads"];
  ordered_json tols = ordered_json::object();
  if (cfg.contains("tolerances")) tols = cfg["tolerances"];
  for (const auto& s : tol_args) {
    auto [k, v] = split_eq(s, "--tol");
    tols[k] = to_double(v, "--tol");
  }
  if (!tols.empty()) opt["tolerances"] = tols;
  if (out_path.empty()) out_path = cfg.value("out", std::string());

  omh_model* m = create_model(cfg);
  omh_report* rep = nullptr;
  int st = omh_verify(m, opt.dump().c_str(), &rep);
  if (st != OMH_OK) {
    omh_model_free(m);
    die_status(st);
  }
  std::string stamp = no_stamp ? std::string() : now_utc();
  std::string text =
      grab(omh_report_json(rep, stamp.empty() ? nullptr : stamp.c_str()));
  int passed = omh_report_passed(rep);
  omh_report_free(rep);
  omh_model_free(m);

  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) die_usage("cannot write report to '" + out_path + "'");
    f << text;
  }
  if (as_json) {
    std::fputs(text.c_str(), stdout);
  } else {
    print_report_table(json::parse(text));
    if (!out_path.empty())
      std::printf("report written to %s\n", out_path.c_str());
  }
  return passed ? 0 : 1;
}

void write_plot_file(const std::string& csv_path, const std::string& plot_path) {
  std::ifstream in(csv_path);
  if (!in) die_usage("cannot reopen '" + csv_path + "' for plot data");
  std::ofstream out(plot_path);
  if (!out) die_usage("cannot write plot data to '" + plot_path + "'");
  std::string line;
  bool first = true;
  std::vector<std::size_t> cols;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      cols.push_back(0);  // t
      for (std::size_t i = 7; i < cells.size(); ++i) cols.push_back(i);
      first = false;
    }
    for (std::size_t i = 0; i < cols.size(); ++i)
      out << (i ? "," : "") << cells[cols[i]];
    out << "\n";
  }
}

int cmd_simulate(ModelArgs& ma, const json& cat, double dt, double t_final,
                 double newton_tol, bool has_dt, bool has_tf, bool has_nt,
                 const std::vector<double>& x0, std::string out_path,
                 const std::string& plot_path, bool as_json) {
  json cfg = ma.resolve(cat);
  json sim = cfg.value("simulate", json::object());
  ordered_json opt = ordered_json::object();
  if (has_dt)
    opt["dt"] = dt;
  else if (sim.contains("dt"))
    opt["dt"] = sim["dt"];
  if (has_tf)
    opt["t_final"] = t_final;
  else if (sim.contains("t_final"))
    opt["t_final"] = sim["t_final"];
  if (has_nt)
    opt["newton_tol"] = newton_tol;
  else if (sim.contains("newton_tol"))
    opt["newton_tol"] = sim["newton_tol"];
  if (!x0.empty()) {
    if (x0.size() != 6) die_usage("--x0 expects 6 comma-separated values");
    opt["x0"] = x0;
  } else if (sim.contains("x0")) {
    opt["x0"] = sim["x0"];
  }
  if (out_path.empty()) out_path = sim.value("out", std::string("trajectory.csv"));

  omh_model* m = create_model(cfg);
  char* summary_c = nullptr;
  int st = omh_simulate(m, opt.dump().c_str(), out_path.c_str(), &summary_c);
  if (st != OMH_OK) {
    omh_model_free(m);
    die_status(st);
  }
  std::string summary_text = grab(summary_c);
  omh_model_free(m);

  if (!plot_path.empty()) write_plot_file(out_path, plot_path);
  if (as_json) {
    std::fputs(summary_text.c_str(), stdout);
    if (summary_text.empty() || summary_text.back() != '\n')
      std::fputc('\n', stdout);
    return 0;
  }
  json summary = json::parse(summary_text);
  std::printf("wrote %s (%lld steps, dt=%g, t_final=%g)\n", out_path.c_str(),
              summary.at("steps").get<long long>(),
              summary.at("dt").get<double>(),
              summary.at("t_final").get<double>());
  long long fb = summary.value("fallback_steps", 0LL);
  if (fb > 0)
    std::printf("note: fixed-point fallback used on %lld steps\n", fb);
  std::printf("conservation drift:\n");
  for (const auto& d : summary.at("drift")) {
    std::printf("  %-6s max %-10s slope %-10s (%lld records",
                d.at("name").get<std::string>().c_str(),
                fmt_num(d.at("max")).c_str(), fmt_num(d.at("slope")).c_str(),
                d.at("records").get<long long>());
    long long ex = d.value("excluded", 0LL);
    if (ex > 0) std::printf(", %lld excluded near singular set", ex);
    std::printf(")\n");
  }
  if (!plot_path.empty())
    std::printf("plot data written to %s\n", plot_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args = preprocess(argc, argv);
  std::vector<char*> argp;
  argp.reserve(args.size());
  for (auto& a : args) argp.push_back(a.data());

  CLI::App app{"verification and simulation driver for magnetic-field "
               "Hamiltonian models"};
  app.set_version_flag("--version", std::string(omh_version()));
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "print the model catalog");
  bool list_json = false;
  list_cmd->add_flag("--json", list_json, "machine-readable listing");

  auto* verify_cmd =
      app.add_subcommand("verify", "run the verification suite for a model");
  ModelArgs vargs;
  vargs.attach(verify_cmd);
  long long samples = 0, seed = 0;
  int threads = 0;
  std::vector<std::string> tol_args;
  std::string vout;
  bool vjson = false, no_stamp = false;
  auto* o_samples = verify_cmd->add_option("--samples", samples,
                                           "sample points per check");
  auto* o_seed = verify_cmd->add_option("--seed", seed, "RNG seed");
  auto* o_threads =
      verify_cmd->add_option("--threads", threads, "worker threads");
  verify_cmd->add_option("--tol", tol_args,
                         "tolerance override, class=value (also --tol.class)");
  verify_cmd->add_option("--out", vout, "write the JSON report to this path");
  verify_cmd->add_flag("--json", vjson, "print the JSON report to stdout");
  verify_cmd->add_flag("--no-timestamp", no_stamp,
                       "omit the timestamp field from the report");

  auto* sim_cmd =
      app.add_subcommand("simulate", "integrate a trajectory for a model");
  ModelArgs sargs;
  sargs.attach(sim_cmd);
  double dt = 0.0, t_final = 0.0, newton_tol = 0.0;
  std::vector<double> x0;
  std::string sout, plot;
  bool sjson = false;
  auto* o_dt = sim_cmd->add_option("--dt", dt, "time step");
  auto* o_tf = sim_cmd->add_option("--t-final", t_final, "final time");
  auto* o_nt =
      sim_cmd->add_option("--newton-tol", newton_tol, "implicit solve tol");
  sim_cmd->add_option("--x0", x0, "initial state q1,q2,q3,p1,p2,p3")
      ->delimiter(',')
      ->expected(0, 6);
  sim_cmd->add_option("--out", sout, "trajectory CSV path");
  sim_cmd->add_option("--plot", plot, "write t-vs-integrals plot data here");
  sim_cmd->add_flag("--json", sjson, "print the drift summary as JSON");

  try {
    app.parse(static_cast<int>(argp.size()), argp.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }

  json cat;
  if (verify_cmd->parsed() || sim_cmd->parsed())
    cat = json::parse(grab(omh_catalog_json()));

  if (list_cmd->parsed()) return cmd_list(list_json);
  if (verify_cmd->parsed())
    return cmd_verify(vargs, cat, samples, seed, threads, o_samples->count(),
                      o_seed->count(), o_threads->count(), tol_args, vout,
                      vjson, no_stamp);
  return cmd_simulate(sargs, cat, dt, t_final, newton_tol, o_dt->count(),
                      o_tf->count(), o_nt->count(), x0, sout, plot, sjson);
}
