#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "pfcflow/harness.hpp"

using namespace pfcflow;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t parse_error_offset(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  return 0;
}

std::size_t snapshot_error_offset(std::string_view bytes) {
  try {
    decode_snapshot(bytes);
  } catch (const ParseError& e) {
    return e.offset();
  }
  return static_cast<std::size_t>(-1);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pfcflow_test_" + name);
  fs::remove_all(d);
  return d;
}

// 16x16 accuracy-preset run, a few steps long.
RunConfig tiny(SchemeId s, int steps = 4) {
  RunConfig cfg = RunConfig::from_preset("accuracy", 16);
  cfg.scheme = s;
  cfg.dt = 0.05;
  cfg.t_end = steps * cfg.dt;
  cfg.record_timing = false;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing", "[harness]") {
  const RunConfig cfg = parse_config(
      "# crystal run\n"
      "preset = crystal\n"
      "scale = 4   # 64^2\n"
      "scheme = AC-L-SAV\n"
      "\n"
      "dt = 2e-3\n"
      "t_end = 0.01\n"
      "tol = 1e-11\n"
      "preconditioner = none\n"
      "record_timing = false\n");
  CHECK(cfg.scheme == SchemeId::AclSav);
  CHECK(cfg.grid.nx() == 64);
  CHECK(cfg.params.epsilon == 0.325);
  CHECK(cfg.dt == 2e-3);
  CHECK(cfg.step_count() == 5);
  CHECK(cfg.solver.tol == 1e-11);
  CHECK_FALSE(cfg.solver.spectral_preconditioner);
  CHECK_FALSE(cfg.record_timing);
  CHECK(cfg.stability.model == StabilityModel::Lagrange);
  CHECK_THAT(cfg.params.m0, WithinRel(preset("crystal", 4).params.m0, 1e-15));

  const RunConfig cmp = parse_config("schemes = AC-EQ, CH-SAV ,AC-P-EQ\nscale = 16\n");
  REQUIRE(cmp.schemes.size() == 3);
  CHECK(cmp.schemes[1] == SchemeId::ChSav);

  const RunConfig eps = parse_config("scale = 16\nepsilon = 0.2\n");
  CHECK(eps.params.alpha == 1.0 - 0.2);
  CHECK(parse_config("scale = 16\nnx = 20\nny = 24\n").grid.ny() == 24);
  CHECK(parse_config("scale = 16\nnx = 20\n").stability.n == 20);
}

TEST_CASE("config errors carry line numbers", "[harness]") {
  CHECK(parse_error_offset("scale = 16\n\nbogus = 1\n") == 3);
  CHECK(parse_error_offset("scale = 16\ndt = 0.1\ndt = 0.2\n") == 3);
  CHECK(parse_error_offset("scale = 16\nepsilon = 0.1\nalpha = 0.9\n") == 3);
  CHECK(parse_error_offset("scale = 16\ndt = fast\n") == 2);
  CHECK(parse_error_offset("scale = 16\njust words\n") == 2);
  CHECK(parse_error_offset("scale = 16\nnx = 1.5\n") == 2);
  CHECK(parse_error_offset("scale = 16\nrecord_timing = maybe\n") == 2);
  CHECK(parse_error_offset("scale = 16\npreconditioner = ilu\n") == 2);
  CHECK_THROWS_AS(parse_config("scale = 16\ndt = -1\n"), UsageError);
  CHECK_THROWS_AS(parse_config("scale = 16\nscheme = AC-XX\n"), UsageError);
  CHECK_THROWS_AS(parse_config("scale = 16\nlevels = 1\n"), UsageError);
  CHECK_THROWS_AS(load_config("/nonexistent/pfcflow.cfg"), UsageError);
}

TEST_CASE("environment overrides the output directory", "[harness]") {
  RunConfig cfg = tiny(SchemeId::AcEq);
  cfg.output_dir = "from_config";
  ::unsetenv("PFCFLOW_OUTPUT_DIR");
  apply_environment(cfg);
  CHECK(cfg.output_dir == "from_config");
  ::setenv("PFCFLOW_OUTPUT_DIR", "/tmp/from_env", 1);
  apply_environment(cfg);
  CHECK(cfg.output_dir == "/tmp/from_env");
  ::unsetenv("PFCFLOW_OUTPUT_DIR");
}

TEST_CASE("diagnostic records", "[harness]") {
  CHECK(diag_header() == "step,t,mass,energy,aux,L,solver_iters,residual,wall_ms");
  DiagRecord r;
  r.step = 3;
  r.t = 0.1;
  r.mass = -2.5;
  r.energy = 1.0 / 3.0;
  r.solver_iters = 7;
  CHECK(format_diag(r) == "3,0.10000000000000001,-2.5,0.33333333333333331,0,0,7,0,0");
}

TEST_CASE("a single-step run records two rows", "[harness]") {
  RunConfig cfg = tiny(SchemeId::ChSav, 1);
  const RunResult res = run(cfg);
  REQUIRE(res.diagnostics.size() == 2);
  CHECK(res.diagnostics[0].step == 0);
  CHECK(res.diagnostics[1].step == 1);
  CHECK(res.diagnostics[1].t == cfg.dt);
  CHECK(res.diagnostics[1].solver_iters > 0);
  CHECK(res.diagnostics[1].energy <= res.diagnostics[0].energy);
  CHECK(res.snapshot_paths.empty());
  CHECK(res.final_state.n == 1);
}

TEST_CASE("diagnostic cadence", "[harness]") {
  RunConfig cfg = tiny(SchemeId::AcEq, 7);
  cfg.diag_every = 3;
  const RunResult res = run(cfg);
  std::vector<long> steps;
  for (const DiagRecord& r : res.diagnostics) steps.push_back(r.step);
  CHECK(steps == std::vector<long>{0, 3, 6, 7});
}

TEST_CASE("runs are byte-reproducible without timing", "[harness]") {
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  RunConfig cfg = tiny(SchemeId::AclEq, 5);
  cfg.snapshot_every = 2;
  cfg.output_dir = a.string();
  const RunResult ra = run(cfg);
  cfg.output_dir = b.string();
  run(cfg);
  CHECK(ra.snapshot_paths.size() == 4);  // steps 0, 2, 4, 5
  for (const char* name : {"diag_AC-L-EQ.csv", "snap_AC-L-EQ_00000000.pfc", "snap_AC-L-EQ_00000004.pfc",
                           "snap_AC-L-EQ_00000005.pfc"}) {
    INFO(name);
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const std::string diag = slurp(a / "diag_AC-L-EQ.csv");
  CHECK(diag.rfind(std::string(diag_header()) + "\n", 0) == 0);
  CHECK(std::count(diag.begin(), diag.end(), '\n') == 7);

  const Snapshot last = read_snapshot((a / "snap_AC-L-EQ_00000005.pfc").string());
  CHECK(last.field == ra.final_state.phi);
  CHECK(last.t == ra.final_state.t);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("snapshot round trip", "[harness]") {
  const GridSpec g(5, 4, 0.7, 1.0 / 3.0);
  Field f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::sin(1.0 + k) * std::pow(10.0, static_cast<int>(k) - 7);
  f[2] = -0.0;
  f[4] = std::numeric_limits<double>::denorm_min();
  const Snapshot s = decode_snapshot(encode_snapshot(f, 12.5));
  CHECK(s.field.grid() == g);
  CHECK(s.t == 12.5);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::bit_cast<std::uint64_t>(s.field[k]) == std::bit_cast<std::uint64_t>(f[k]));
}

TEST_CASE("golden snapshot file", "[harness]") {
  const std::string path = std::string(PFCFLOW_TEST_DATA) + "/golden_4x4.pfc";
  const Snapshot s = read_snapshot(path);
  CHECK(s.field.grid() == GridSpec(4, 4, 1.0, 2.0));
  CHECK(s.t == 0.125);
  CHECK(std::signbit(s.field[0]));
  CHECK(s.field[0] == 0.0);
  CHECK(s.field[5] == 1e300);
  CHECK(s.field[10] == 5e-324);
  CHECK(s.field[3] == 3 * 0.1 - 1.0 / 3.0);
  CHECK(s.field(3, 3) == 15 * 0.1 - 1.0 / 3.0);
  // Re-encoding reproduces the file byte for byte.
  CHECK(encode_snapshot(s.field, s.t) == slurp(path));
}

TEST_CASE("malformed snapshots", "[harness]") {
  const std::string good = slurp(std::string(PFCFLOW_TEST_DATA) + "/golden_4x4.pfc");
  REQUIRE(good.size() == 25 + 128);
  // Offset of the first incomplete value.
  CHECK(snapshot_error_offset(good.substr(0, 100)) == 25 + 72);
  CHECK(snapshot_error_offset(good + "x") == 25 + 128);
  CHECK(snapshot_error_offset("PFCFELD 1 4 4 1 2 0\n") == 0);
  CHECK(snapshot_error_offset("no newline at all") == 0);
  CHECK(snapshot_error_offset("PFCFIELD 2 4 4 1 2 0\n") == 9);
  CHECK(snapshot_error_offset("PFCFIELD 1 4 4 1 2\n") == 18);
  CHECK(snapshot_error_offset("PFCFIELD 1 4 x 1 2 0\n") == 13);
  CHECK(snapshot_error_offset("PFCFIELD 1 4 4 1 2q 0\n") == 17);
  CHECK_THROWS_AS(read_snapshot("/nonexistent/snap.pfc"), std::runtime_error);
}

TEST_CASE("converge on one level pair", "[harness]") {
  RunConfig cfg = tiny(SchemeId::AcSav, 4);
  cfg.levels = 3;
  const ConvergenceResult c = converge(cfg);
  REQUIRE(c.rows.size() == 2);
  CHECK(std::isnan(c.rows[0].order));
  CHECK(c.rows[1].dt_fine == 0.0125);
  CHECK(c.rows[0].l2_error > c.rows[1].l2_error);
  // The coarsest level is an ordinary run.
  CHECK(c.finals[0].phi == run(cfg).final_state.phi);

  RunConfig bad = cfg;
  bad.t_end = 0.21;
  CHECK_THROWS_AS(converge(bad), UsageError);
}

TEST_CASE("compare matches individual runs", "[harness]") {
  const fs::path d = scratch_dir("compare");
  RunConfig cfg = tiny(SchemeId::AcEq, 3);
  cfg.schemes = {SchemeId::AcEq, SchemeId::AcpSav};
  cfg.output_dir = d.string();
  const CompareResult c = compare(cfg);
  REQUIRE(c.runs.size() == 2);
  RunConfig solo = tiny(SchemeId::AcpSav, 3);
  CHECK(c.runs[1].final_state.phi == run(solo).final_state.phi);
  const std::string csv = slurp(d / "compare.csv");
  CHECK_THAT(csv, ContainsSubstring("step,t,mass_AC-EQ,energy_AC-EQ,mass_AC-P-SAV,energy_AC-P-SAV\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(fs::exists(d / "diag_AC-P-SAV.csv"));
  fs::remove_all(d);
}

TEST_CASE("solver failure flushes the last good state", "[harness]") {
  const fs::path d = scratch_dir("fail");
  RunConfig cfg = tiny(SchemeId::ChEq, 3);
  cfg.solver.maxit = 1;
  cfg.solver.tol = 1e-14;
  cfg.solver.spectral_preconditioner = false;
  cfg.output_dir = d.string();
  CHECK_THROWS_AS(run(cfg), SolverError);
  CHECK(fs::exists(d / "snap_CH-EQ_00000000.pfc"));
  fs::remove_all(d);
}

TEST_CASE("energy guard", "[harness]") {
  // A sloppy tolerance breaks the discrete energy law. The guard must stop the
  // run at the first increase and flush the state before it.
  const fs::path d = scratch_dir("guard");
  RunConfig cfg = RunConfig::from_preset("crystal", 16);
  cfg.scheme = SchemeId::AclEq;
  cfg.dt = 5.0;
  cfg.t_end = 100.0;
  cfg.solver.tol = 0.9;
  cfg.solver.maxit = 1;
  cfg.solver.spectral_preconditioner = false;
  cfg.output_dir = d.string();
  long step = -1;
  try {
    run(cfg);
  } catch (const EnergyGuardError& e) {
    step = e.step();
    CHECK_THAT(e.what(), ContainsSubstring("energy increased"));
  }
  REQUIRE(step >= 1);
  char name[64];
  std::snprintf(name, sizeof name, "snap_AC-L-EQ_%08ld.pfc", step - 1);
  CHECK(fs::exists(d / name));
  fs::remove_all(d);
}

TEST_CASE("shipped configs load", "[harness]") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(PFCFLOW_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    INFO(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path().string()));
    ++count;
  }
  CHECK(count >= 4);
}
