#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "omh/omh.h"

using nlohmann::json;

namespace {

std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  omh_string_free(s);
  return out;
}

omh_model* must_create(const char* spec) {
  omh_model* m = nullptr;
  REQUIRE(omh_model_create(spec, &m) == OMH_OK);
  REQUIRE(m != nullptr);
  return m;
}

}  // namespace

TEST_CASE("version and catalog") {
  REQUIRE(omh_version() != nullptr);
  CHECK(std::strlen(omh_version()) > 0);
  json cat = json::parse(take(omh_catalog_json()));
  REQUIRE(cat.is_array());
  CHECK(cat.size() == 7);
  bool has_uniform = false;
  for (const auto& m : cat) {
    CHECK(m.contains("id"));
    CHECK(m.contains("title"));
    if (m["id"] == "constant-b") {
      has_uniform = true;
      CHECK(m["gauges"].size() == 3);
      CHECK(m["params"]["b"] == 1.0);
    }
    if (m["id"] == "cyl-case1") CHECK(m["functions"].size() == 3);
  }
  CHECK(has_uniform);
}

TEST_CASE("model creation and error reporting") {
  omh_model* m = nullptr;
  CHECK(omh_model_create(nullptr, &m) == OMH_EUSAGE);
  CHECK(omh_model_create("{\"model\": \"constant-b\"", &m) == OMH_EPARSE);
  CHECK(omh_model_create("{\"model\": \"zz\"}", &m) == OMH_ECONFIG);
  CHECK(std::strstr(omh_last_error(), "zz") != nullptr);
  CHECK(omh_model_create("{}", &m) == OMH_ECONFIG);
  CHECK(omh_model_create("{\"model\": \"constant-b\", \"params\": {\"q\": 1}}",
                         &m) == OMH_ECONFIG);
  CHECK(omh_model_create(
            "{\"model\": \"cyl-case1\", \"functions\": {\"Aphi\": \"r*((\"}}",
            &m) == OMH_ECONFIG);

  m = must_create("{\"model\": \"constant-b\", \"params\": {\"b\": 2.0}, "
                  "\"gauge\": \"landau_y\"}");
  json info = json::parse(take(omh_model_info_json(m)));
  CHECK(info["model"] == "constant-b");
  CHECK(info["gauge"] == "landau_y");
  CHECK(info["params"]["b"] == 2.0);
  CHECK(info["simulation"]["x0"].size() == 6);
  omh_model_free(m);
  omh_model_free(nullptr);  // harmless
}

TEST_CASE("verification through the shared interface") {
  omh_model* m = must_create("{\"model\": \"cyl-case2\"}");
  omh_report* r = nullptr;
  REQUIRE(omh_verify(m, "{\"samples\": 4, \"seed\": 11}", &r) == OMH_OK);
  REQUIRE(r != nullptr);
  CHECK(omh_report_passed(r) == 1);
  json j = json::parse(take(omh_report_json(r, "STAMP")));
  CHECK(j["model"] == "cyl-case2");
  CHECK(j["timestamp"] == "STAMP");
  CHECK(j["options"]["samples"] == 4);
  std::string bare = take(omh_report_json(r, nullptr));
  CHECK(!json::parse(bare).contains("timestamp"));
  omh_report_free(r);

  // a hopeless tolerance gives a failing report but a clean status
  REQUIRE(omh_verify(m, "{\"samples\": 2, \"tolerances\": {\"chain\": 1e-30}}",
                     &r) == OMH_OK);
  CHECK(omh_report_passed(r) == 0);
  omh_report_free(r);

  CHECK(omh_verify(m, "{\"tolerances\": {\"zz\": 1}}", &r) == OMH_ECONFIG);
  CHECK(omh_verify(m, "[1,2]", &r) == OMH_ECONFIG);  // valid JSON, wrong shape
  CHECK(omh_verify(m, "{not json", &r) == OMH_EPARSE);
  CHECK(omh_verify(nullptr, "", &r) == OMH_EUSAGE);
  omh_model_free(m);
}

TEST_CASE("simulation writes a trajectory and summarizes drift") {
  omh_model* m = must_create("{\"model\": \"constant-b\"}");
  char* summary = nullptr;
  const char* csv = "capi_traj.csv";
  REQUIRE(omh_simulate(m, "{\"dt\": 0.01, \"t_final\": 0.5}", csv, &summary) ==
          OMH_OK);
  json s = json::parse(take(summary));
  REQUIRE(s["drift"].is_array());
  CHECK(s["steps"] == 50);
  CHECK(s["fallback_steps"] == 0);
  bool has_h = false;
  for (const auto& it : s["drift"]) {
    if (it["name"] == "H") {
      has_h = true;
      CHECK(it["max"].get<double>() < 1e-8);
    }
  }
  CHECK(has_h);
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("t,q1,q2,q3,p1,p2,p3,H", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 51);
  in.close();
  std::remove(csv);

  // no csv requested: summary only
  char* s2 = nullptr;
  REQUIRE(omh_simulate(m, "{\"dt\": 0.01, \"t_final\": 0.1}", nullptr, &s2) ==
          OMH_OK);
  take(s2);
  omh_model_free(m);
}

TEST_CASE("divergence surfaces as a status code with a step index") {
  omh_model* m = must_create("{\"model\": \"cyl-case1\"}");
  char* summary = nullptr;
  // strong inward radial momentum exits the chart long before t_final
  int rc = omh_simulate(
      m, "{\"dt\": 0.01, \"t_final\": 5.0, \"x0\": [0.7, 0.3, 0.1, -2.0, 0.9, 0.9]}",
      nullptr, &summary);
  CHECK(rc == OMH_EDIVERGED);
  CHECK(std::strstr(omh_last_error(), "step") != nullptr);
  omh_model_free(m);
}

TEST_CASE("usage errors on null arguments") {
  omh_model* m = must_create("{\"model\": \"constant-b\"}");
  CHECK(omh_model_info_json(nullptr) == nullptr);
  CHECK(omh_verify(m, "", nullptr) == OMH_EUSAGE);
  CHECK(omh_simulate(nullptr, "", nullptr, nullptr) == OMH_EUSAGE);
  CHECK(omh_report_passed(nullptr) == 0);
  omh_model_free(m);
}
