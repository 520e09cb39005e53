#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "rsos/rsos.h"

namespace fs = std::filesystem;

TEST_CASE("version and status names") {
  CHECK(std::string(rsos_version()).size() > 0);
  CHECK(std::string(rsos_status_name(RSOS_OK)) == "ok");
  CHECK(std::string(rsos_status_name(RSOS_ERR_PARSE)) == "parse error");
  CHECK(std::string(rsos_status_name(static_cast<rsos_status>(99))) == "unknown");
}

TEST_CASE("config errors carry codes and messages") {
  rsos_config* c = nullptr;
  CHECK(rsos_config_new("bogus", &c) == RSOS_ERR_PARSE);
  CHECK(c == nullptr);
  CHECK(std::string(rsos_last_error()).find("bogus") != std::string::npos);
  REQUIRE(rsos_config_new("minpath-check", &c) == RSOS_OK);
  CHECK(std::string(rsos_last_error()).empty());
  CHECK(rsos_config_set(c, "colour", "red") == RSOS_ERR_PARSE);
  CHECK(rsos_config_set(c, nullptr, "1") == RSOS_ERR_INVALID_ARGUMENT);
  CHECK(rsos_config_load("/no/such/file.cfg", &c) == RSOS_ERR_IO);
  rsos_config_free(c);
  rsos_config_free(nullptr);
}

TEST_CASE("run an experiment through handles") {
  rsos_config* c = nullptr;
  REQUIRE(rsos_config_new("minpath-check", &c) == RSOS_OK);
  REQUIRE(rsos_config_set(c, "replications", "5") == RSOS_OK);
  const auto dir = fs::temp_directory_path() / "rsos_capi_run";
  fs::remove_all(dir);
  REQUIRE(rsos_config_set(c, "output_dir", dir.c_str()) == RSOS_OK);
  rsos_result* r = nullptr;
  REQUIRE(rsos_run(c, 1, &r) == RSOS_OK);
  CHECK(rsos_result_passed(r) == 1);
  REQUIRE(rsos_result_check_count(r) >= 1);
  const char* name = nullptr;
  const char* detail = nullptr;
  int passed = 0;
  CHECK(rsos_result_check(r, 0, &name, &passed, &detail) == RSOS_OK);
  CHECK(passed == 1);
  CHECK(rsos_result_check(r, 99, &name, &passed, &detail) == RSOS_ERR_NOT_FOUND);
  const char* csv = nullptr;
  REQUIRE(rsos_result_table(r, 0, &name, &csv) == RSOS_OK);
  CHECK(std::string(csv).rfind("seed,", 0) == 0);
  CHECK(rsos_result_certified(r) == 5);
  CHECK(fs::exists(rsos_result_manifest_path(r)));
  rsos_result_free(r);
  rsos_config_free(c);
}

TEST_CASE("lattice, evolve and dual handles") {
  rsos_lattice* lat = nullptr;
  CHECK(rsos_lattice_generate(1, 0, 1.0, 1.0, 1, "free", &lat) == RSOS_ERR_INVALID_ARGUMENT);
  CHECK(rsos_lattice_generate(1, 3, 1.0, 1.0, 1, "mobius", &lat) == RSOS_ERR_PARSE);
  REQUIRE(rsos_lattice_generate(1, 20, 6.0, 1.0, 4, "free", &lat) == RSOS_OK);
  const auto path = (fs::temp_directory_path() / "rsos_capi_lattice.jsonl").string();
  REQUIRE(rsos_lattice_write(lat, path.c_str()) == RSOS_OK);
  rsos_lattice* back = nullptr;
  REQUIRE(rsos_lattice_read(path.c_str(), &back) == RSOS_OK);
  CHECK(rsos_lattice_size(back) == rsos_lattice_size(lat));

  std::int64_t h = -1, v = -1;
  int exact = 0;
  const int origin[1] = {0};
  REQUIRE(rsos_evolve(lat, "rsos", "zero", 6.0, nullptr, nullptr, &h) == RSOS_OK);
  REQUIRE(rsos_min_weight(lat, 6.0, origin, "rsos", "zero", &v, &exact) == RSOS_OK);
  CHECK(h == v);
  CHECK(exact == 1);
  CHECK(rsos_evolve(lat, "rsos", "explicit:0=5", 6.0, nullptr, nullptr, &h) == RSOS_ERR_INADMISSIBLE);
  CHECK(rsos_evolve(lat, "rsos", "zero", 60.0, nullptr, nullptr, &h) == RSOS_ERR_INVALID_ARGUMENT);

  rsos_lattice* rev = nullptr;
  REQUIRE(rsos_lattice_reverse(lat, &rev) == RSOS_OK);
  rsos_dual* d = nullptr;
  REQUIRE(rsos_dual_run_on(rev, 6.0, &d) == RSOS_OK);
  CHECK(rsos_dual_exact(d) == 1);
  CHECK(rsos_dual_minimum(d) == v);
  double t = -1.0;
  CHECK(rsos_dual_hitting_time(d, 0, &t) == RSOS_OK);
  CHECK(t == 0.0);
  CHECK(rsos_dual_hitting_time(d, 1000, &t) == RSOS_ERR_NOT_FOUND);
  CHECK(rsos_dual_write_hitting(d, "/nonexistent_rsos/h.csv") == RSOS_ERR_IO);
  rsos_dual_free(d);

  REQUIRE(rsos_dual_run(1, 10.0, 3, &d) == RSOS_OK);
  CHECK(rsos_dual_minimum(d) > 0);
  rsos_dual_free(d);
  rsos_lattice_free(rev);
  rsos_lattice_free(back);
  rsos_lattice_free(lat);
  std::remove(path.c_str());
}
