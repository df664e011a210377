#include "omh/omh.h"

#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "core/dynamics.hpp"
#include "core/errors.hpp"
#include "core/models.hpp"
#include "core/verify.hpp"

using nlohmann::ordered_json;

struct omh_model {
  omh::ModelSpec spec;
};

struct omh_report {
  omh::Report report;
};

namespace {

thread_local std::string g_last_error = "ok";

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(::operator new(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int code_for(const std::exception& e) {
  using namespace omh;
  if (dynamic_cast<const SyntaxError*>(&e) ||
      dynamic_cast<const UnknownFunction*>(&e) ||
      dynamic_cast<const UnknownVariable*>(&e))
    return OMH_EPARSE;
  if (dynamic_cast<const NewtonDivergence*>(&e) ||
      dynamic_cast<const DomainExit*>(&e))
    return OMH_EDIVERGED;
  if (dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const ForbiddenRegion*>(&e))
    return OMH_EDOMAIN;
  if (dynamic_cast<const SingularPoint*>(&e) ||
      dynamic_cast<const SingularStackel*>(&e) ||
      dynamic_cast<const NonRealSpectrum*>(&e))
    return OMH_ESINGULAR;
  if (dynamic_cast<const ConstraintViolation*>(&e) ||
      dynamic_cast<const PeriodicityViolation*>(&e) ||
      dynamic_cast<const NotIgnorable*>(&e) ||
      dynamic_cast<const NotProjectable*>(&e) ||
      dynamic_cast<const NotClassicalForm*>(&e))
    return OMH_ECONSTRAINT;
  if (dynamic_cast<const ConfigError*>(&e)) return OMH_ECONFIG;
  if (dynamic_cast<const ordered_json::exception*>(&e)) return OMH_EPARSE;
  return OMH_EINTERNAL;
}

int fail(const std::exception& e) {
  g_last_error = e.what();
  return code_for(e);
}

ordered_json parse_options(const char* text) {
  if (!text || !*text) return ordered_json::object();
  ordered_json j = ordered_json::parse(text);  // throws on malformed input
  if (!j.is_object()) throw omh::ConfigError("options must be a JSON object");
  return j;
}

}  // namespace

extern "C" {

const char* omh_version(void) { return "0.1.0"; }

const char* omh_last_error(void) { return g_last_error.c_str(); }

void omh_string_free(char* s) { ::operator delete(s); }

char* omh_catalog_json(void) {
  ordered_json out = ordered_json::array();
  for (const auto& m : omh::catalog()) {
    ordered_json e;
    e["id"] = m.id;
    e["title"] = m.title;
    e["params"] = ordered_json::object();
    for (const auto& [k, v] : m.params) e["params"][k] = v;
    e["functions"] = ordered_json::array();
    for (const auto& s : m.slots) {
      ordered_json f;
      f["name"] = s.name;
      f["variable"] = s.var;
      f["default"] = s.fallback;
      e["functions"].push_back(std::move(f));
    }
    e["gauges"] = m.gauges;
    out.push_back(std::move(e));
  }
  return dup_string(out.dump(2) + "\n");
}

int omh_model_create(const char* spec_json, omh_model** out) {
  if (!spec_json || !out) {
    g_last_error = "null argument";
    return OMH_EUSAGE;
  }
  *out = nullptr;
  try {
    ordered_json j = ordered_json::parse(spec_json);
    if (!j.is_object())
      throw omh::ConfigError("model spec must be a JSON object");
    if (!j.contains("model") || !j["model"].is_string())
      throw omh::ConfigError("model spec needs a \"model\" id");
    std::string id = j["model"].get<std::string>();
    std::map<std::string, double> params;
    if (j.contains("params"))
      for (const auto& [k, v] : j["params"].items())
        params[k] = v.get<double>();
    std::map<std::string, std::string> fns;
    if (j.contains("functions"))
      for (const auto& [k, v] : j["functions"].items())
        fns[k] = v.get<std::string>();
    std::string gauge = j.value("gauge", std::string());
    auto* handle = new omh_model{omh::make_model(id, params, fns, gauge)};
    *out = handle;
    return OMH_OK;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

void omh_model_free(omh_model* m) { delete m; }

char* omh_model_info_json(const omh_model* m) {
  if (!m) {
    g_last_error = "null argument";
    return nullptr;
  }
  const omh::ModelSpec& s = m->spec;
  ordered_json j;
  j["model"] = s.id;
  j["title"] = s.title;
  j["gauge"] = s.gauge;
  j["degenerate"] = s.degenerate;
  j["params"] = ordered_json::object();
  for (const auto& [k, v] : s.params) j["params"][k] = v;
  j["functions"] = ordered_json::object();
  for (const auto& f : s.functions) j["functions"][f.name] = f.source;
  j["integrals"] = ordered_json::array();
  for (const auto& f : s.integrals) {
    ordered_json e;
    e["name"] = f.name;
    e["label"] = f.label;
    j["integrals"].push_back(std::move(e));
  }
  j["operators"] = ordered_json::array();
  for (const auto& k : s.operators) {
    ordered_json e;
    e["name"] = k.name;
    e["label"] = k.label;
    e["spectrum_derived"] = k.spectrum_derived;
    j["operators"].push_back(std::move(e));
  }
  j["charts"] = ordered_json::array();
  for (const auto& c : s.charts) j["charts"].push_back(c.name);
  j["attachments"] = ordered_json::array();
  for (const auto& a : s.stackels) j["attachments"].push_back(a.name);
  j["separated_form"] = s.hj.has_value();
  j["simulation"] = {{"x0", s.sim_x0}, {"dt", s.sim_dt},
                     {"t_final", s.sim_tfinal}};
  return dup_string(j.dump(2) + "\n");
}

int omh_verify(const omh_model* m, const char* options_json, omh_report** out) {
  if (!m || !out) {
    g_last_error = "null argument";
    return OMH_EUSAGE;
  }
  *out = nullptr;
  try {
    ordered_json j = parse_options(options_json);
    omh::RunOptions opt;
    if (j.contains("seed")) opt.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("samples")) opt.samples = j["samples"].get<int>();
    if (j.contains("threads")) opt.threads = j["threads"].get<int>();
    if (opt.samples <= 0) throw omh::ConfigError("samples must be positive");
    if (j.contains("tolerances"))
      for (const auto& [k, v] : j["tolerances"].items())
        opt.tol[k] = v.get<double>();
    auto* handle = new omh_report{omh::verify_model(m->spec, opt)};
    *out = handle;
    return OMH_OK;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int omh_report_passed(const omh_report* r) {
  if (!r) {
    g_last_error = "null argument";
    return 0;
  }
  return r->report.passed ? 1 : 0;
}

char* omh_report_json(const omh_report* r, const char* timestamp) {
  if (!r) {
    g_last_error = "null argument";
    return nullptr;
  }
  return dup_string(
      omh::report_json(r->report, timestamp ? timestamp : ""));
}

void omh_report_free(omh_report* r) { delete r; }

int omh_simulate(const omh_model* m, const char* options_json,
                 const char* csv_path, char** summary_json) {
  if (!m) {
    g_last_error = "null argument";
    return OMH_EUSAGE;
  }
  if (summary_json) *summary_json = nullptr;
  try {
    ordered_json j = parse_options(options_json);
    omh::IntegratorConfig cfg;
    cfg.dt = m->spec.sim_dt;
    cfg.t_final = m->spec.sim_tfinal;
    omh::Vec6 x0 = m->spec.sim_x0;
    if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
    if (j.contains("t_final")) cfg.t_final = j["t_final"].get<double>();
    if (j.contains("newton_tol"))
      cfg.newton_tol = j["newton_tol"].get<double>();
    if (j.contains("x0")) {
      auto v = j["x0"].get<std::vector<double>>();
      if (v.size() != 6)
        throw omh::ConfigError("x0 must have exactly 6 components");
      for (int i = 0; i < 6; ++i) x0[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
    }
    omh::Trajectory traj =
        omh::integrate(m->spec.sys, x0, cfg, m->spec.integrals);
    if (csv_path && *csv_path) omh::write_csv(csv_path, traj);
    if (summary_json) {
      ordered_json s;
      s["model"] = m->spec.id;
      s["steps"] = traj.times.size() - 1;
      s["dt"] = cfg.dt;
      s["t_final"] = cfg.t_final;
      s["x0"] = x0;
      s["fallback_steps"] = traj.fallback_steps;
      s["drift"] = ordered_json::array();
      for (const auto& d : omh::conservation_report(traj)) {
        ordered_json e;
        e["name"] = d.name;
        e["max"] = d.max_drift;
        e["slope"] = d.slope;
        e["records"] = d.used;
        e["excluded"] = d.excluded;
        s["drift"].push_back(std::move(e));
      }
      *summary_json = dup_string(s.dump(2) + "\n");
    }
    return OMH_OK;
  } catch (const std::exception& e) {
    return fail(e);
  }
}

}  // extern "C"
