#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fracdecay/csv.hpp"
#include "fracdecay/experiment.hpp"

namespace fs = std::filesystem;
using namespace fracdecay;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Scratch directory per test case, wiped on entry.
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fracdecay_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(const fs::path& dir, const std::string& args) {
  const char* bin = std::getenv("FRACDECAY_BIN");
  REQUIRE(bin != nullptr);
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" + bin + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("specfun eval prints value and bounds") {
  const auto dir = scratch("specfun");
  auto r = run(dir, "specfun eval --alpha 0.5 --m 2 --l 1 --z -1");
  CHECK(r.code == 0);
  double v = 0, lo = 0, hi = 0;
  std::istringstream(r.out) >> v >> lo >> hi;
  CHECK(v == doctest::Approx(0.48571956424).epsilon(1e-10));
  CHECK(lo <= v);
  CHECK(v <= hi);
  CHECK(std::count(r.out.begin(), r.out.end(), '\t') == 2);

  r = run(dir, "specfun eval --alpha 1 --m 2 --l 1 --z 2 --verbose");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "\tnan\tnan"));
  std::istringstream(r.out) >> v;
  CHECK(v == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(contains(r.err, "method="));

  CHECK(run(dir, "specfun eval --alpha 0 --m 2 --l 1 --z 1").code == 2);
  CHECK(run(dir, "specfun eval --alpha 0.5").code == 2);
}

TEST_CASE("solve commands write traces with fixed headers") {
  const auto dir = scratch("solve");
  auto r = run(dir, "ode solve");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "verdict=sandwich_ok"));
  CHECK(first_line(slurp(dir / "results/ode/trace.csv")) == "t,H,sub_envelope,super_envelope");
  CHECK(fs::exists(dir / "results/ode/report.txt"));

  r = run(dir, "--out sd subdiffusion solve --alpha 0.5 --beta 0.5");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "sandwich_ok"));
  const auto trace = slurp(dir / "sd/trace.csv");
  CHECK(first_line(trace) == "t,E,bound_lower,bound_upper");
  CHECK(trace.find('\r') == std::string::npos);
  CHECK(contains(slurp(dir / "sd/report.txt"), "sandwich_ok"));

  r = run(dir, "--out h heat solve --coefficient logarithmic --p 2");
  CHECK(r.code == 0);
  CHECK(first_line(slurp(dir / "h/trace.csv")) == "t,E,bound_lower,bound_upper");

  r = run(dir, "--out nl nonlinear solve --operator p_laplace --p 3 --points 31 --steps 256 --T 10");
  CHECK(r.code == 0);
  CHECK(first_line(slurp(dir / "nl/trace.csv")) == "t,E,predicted_bound");

  r = run(dir, "--out kpp nonlinear fisher-kpp --points 31 --steps 512 --T 100");
  CHECK(r.code == 0);
  CHECK(first_line(slurp(dir / "kpp/trace.csv")) == "t,E,predicted_bound");
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  auto r = run(dir, "--out bad subdiffusion solve --alpha 0.5 --beta -0.5");
  CHECK(r.code == 2);
  CHECK(contains(r.err, "hypothesis (H)"));
  CHECK(contains(r.err, "beta"));
  CHECK_FALSE(fs::exists(dir / "bad"));

  CHECK(run(dir, "subdiffusion solve --bogus 1").code == 2);
  CHECK(run(dir, "--tolerance-profile sloppy specfun eval --alpha 0.5 --m 2 --l 1 --z 0").code == 2);
  CHECK(run(dir, "").code == 2);
  CHECK(run(dir, "--help").code == 0);

  r = run(dir, "--out z subdiffusion solve --u0 zero");
  CHECK(r.code == 4);
  CHECK(contains(r.out, "degenerate"));

  REQUIRE(run(dir, "--out sd subdiffusion solve").code == 0);
  r = run(dir, "decay fit --input sd/trace.csv --exponent 3");
  CHECK(r.code == 3);
  CHECK(contains(first_line(r.out), "violated"));
  r = run(dir, "decay fit --input sd/trace.csv --exponent 1 --scale 1 --two-sided");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "model: power"));
  r = run(dir, "decay fit --input sd/trace.csv");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "fitted_exponent"));
  CHECK(run(dir, "decay fit --input missing.csv").code == 2);
  CHECK(run(dir, "decay fit --input sd/trace.csv --model cubic").code == 2);
}

TEST_CASE("experiment files") {
  const auto dir = scratch("experiments");
  write_file(dir / "single.txt",
             "# single Dirichlet mode\n"
             "out = runs\n"
             "[experiment mode]\n"
             "scenario = subdiffusion\n"
             "alpha = 0.5\n"
             "beta = 0.5\n"
             "u0 = first_mode\n");
  auto r = run(dir, "run single.txt");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "mode\t0\t"));
  CHECK(contains(slurp(dir / "runs/mode/report.txt"), "sandwich_ok"));
  CHECK(fs::exists(dir / "runs/mode/trace.csv"));

  write_file(dir / "empty.txt", "# nothing to do\nout = nothing\n");
  r = run(dir, "run empty.txt");
  CHECK(r.code == 0);
  CHECK_FALSE(fs::exists(dir / "nothing"));

  write_file(dir / "boundary.txt",
             "out = boundary\n[experiment ok]\nscenario = ode\n"
             "[experiment edge]\nscenario = subdiffusion\nalpha = 0.5\nbeta = -0.5\n");
  r = run(dir, "run boundary.txt");
  CHECK(r.code == 2);
  CHECK(contains(r.err, "hypothesis (H)"));
  CHECK_FALSE(fs::exists(dir / "boundary"));

  write_file(dir / "unknown.txt", "[experiment u]\nscenario = ode\nfrobnicate = 3\n");
  r = run(dir, "run unknown.txt");
  CHECK(r.code == 2);
  CHECK(contains(r.err, "frobnicate"));

  write_file(dir / "noscenario.txt", "[experiment u]\nalpha = 0.5\n");
  CHECK(run(dir, "run noscenario.txt").code == 2);
  CHECK(run(dir, "run does_not_exist.txt").code == 2);
}

TEST_CASE("grids, seeds, jobs and determinism") {
  const auto dir = scratch("grid");
  write_file(dir / "grid.txt",
             "out = g\n"
             "[experiment sweep]\n"
             "scenario = subdiffusion\n"
             "alpha = 0.3, 0.7\n"
             "beta = 0.5\n"
             "u0 = random\n"
             "modes = 16\n");
  auto r = run(dir, "--seed 11 run grid.txt");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "g/sweep_000/trace.csv"));
  CHECK(fs::exists(dir / "g/sweep_001/trace.csv"));
  const auto first = slurp(dir / "g/sweep_000/trace.csv");

  r = run(dir, "--seed 11 --jobs 2 --out g2 run grid.txt");
  CHECK(r.code == 0);
  CHECK(slurp(dir / "g2/sweep_000/trace.csv") == first);
  CHECK(slurp(dir / "g2/sweep_001/trace.csv") == slurp(dir / "g/sweep_001/trace.csv"));
  CHECK(slurp(dir / "g2/sweep_000/report.txt") == slurp(dir / "g/sweep_000/report.txt"));

  r = run(dir, "--seed 12 --out g3 run grid.txt");
  CHECK(r.code == 0);
  CHECK(slurp(dir / "g3/sweep_000/trace.csv") != first);

  const auto parsed = app::parse_experiment_text(slurp(dir / "grid.txt"));
  REQUIRE(parsed.experiments.size() == 2);
  CHECK(parsed.experiments[0].name == "sweep_000");
  CHECK(parsed.experiments[1].params.at("alpha") == "0.7");
}

TEST_CASE("csv round trip is lossless") {
  const auto dir = scratch("csv");
  REQUIRE(run(dir, "--out sd subdiffusion solve --alpha 0.4 --beta 0.3").code == 0);
  const auto text = slurp(dir / "sd/trace.csv");
  const auto table = csv::parse(text);
  CHECK(table.header.size() == 4);
  CHECK(table.rows() > 10);
  CHECK(csv::format(table) == text);
  CHECK_FALSE(fs::exists(dir / "sd/trace.csv.tmp"));
}
