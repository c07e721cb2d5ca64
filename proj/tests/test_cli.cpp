#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <fmt/format.h>

#include "doctest.h"
#include "zigev/cli.hpp"
#include "zigev/io.hpp"
#include "zigev/report.hpp"
#include "zigev/simulation.hpp"

using namespace zigev;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "zigev_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A well-identified sample from the first simulation model, written as CSV.
std::string simulated_csv(long n, std::uint64_t seed) {
  const auto sample = sim::simulate_dataset(sim::preset_config("M1", "Scenario1", n, 1, seed), seed);
  std::string csv = "y,x2,x3,z2,z3\n";
  for (Eigen::Index i = 0; i < sample.data.n(); ++i) {
    csv += fmt::format("{},{},{},{},{}\n", sample.data.y(i), sample.data.X(i, 1), sample.data.X(i, 2),
                       sample.data.Z(i, 1), sample.data.Z(i, 2));
  }
  return csv;
}

const fs::path& simulated_file() {
  static const fs::path path = [] {
    const fs::path p = scratch("data") / "sim.csv";
    io::write_file(p, simulated_csv(4000, 3));
    return p;
  }();
  return path;
}

std::vector<std::string> fit_args(const fs::path& out) {
  return {"fit", "--input", simulated_file().string(), "--response", "y", "--x", "x2,x3", "--z", "z2,z3",
          "--seed", "4", "--out", out.string()};
}

}  // namespace

TEST_CASE("fit writes reproducible outputs") {
  const fs::path a = scratch("fit_a"), b = scratch("fit_b");
  const Outcome first = run(fit_args(a));
  CHECK_MESSAGE(first.code == cli::kSuccess, first.err);
  const Outcome second = run(fit_args(b));
  CHECK(second.code == first.code);
  for (const char* f : {"fit.json", "fit_table.txt", "response_curves.csv"}) {
    CHECK(io::read_file(a / f) == io::read_file(b / f));
  }
  CHECK(first.out.find("m2 (zi-gev)") != std::string::npos);

  const auto rep = report::fit_from_json(io::read_file(a / "fit.json"));
  REQUIRE(rep.fits.size() == 3);
  CHECK(rep.seed == 4);
  for (const auto& f : rep.fits) CHECK(f.converged);
}

TEST_CASE("fit exit codes") {
  const fs::path dir = scratch("fit_codes");
  // Shared continuous covariate and no exclusion covariate.
  std::vector<std::string> args{"fit", "--input", simulated_file().string(), "--response", "y", "--x", "x2",
                                "--z", "x2", "--models", "m2", "--out", dir.string()};
  const Outcome lenient = run(args);
  CHECK(lenient.code != cli::kUsageError);
  CHECK(lenient.err.find("warning") != std::string::npos);
  args.push_back("--strict");
  const Outcome strict = run(args);
  CHECK(strict.code == cli::kUsageError);
  CHECK(strict.err.find("identifiab") != std::string::npos);

  CHECK(run({"fit", "--input", (dir / "absent.csv").string(), "--response", "y"}).code == cli::kUsageError);
  CHECK(run({"fit", "--input", simulated_file().string(), "--response", "y", "--models", "m9"}).code ==
        cli::kUsageError);
  CHECK(run({"fit", "--no-such-flag"}).code == cli::kUsageError);
  CHECK(run({}).code == cli::kUsageError);
  CHECK(run({"fit", "--help"}).code == cli::kSuccess);
}

TEST_CASE("a weakly identified fit reports non-convergence") {
  const fs::path dir = scratch("fit_weak");
  io::write_file(dir / "d.csv", cli::synthetic_dengue_csv(1));
  const Outcome o = run({"fit", "--input", (dir / "d.csv").string(), "--response", "y", "--x", "Weight",
                         "--out", dir.string()});
  const auto rep = report::fit_from_json(io::read_file(dir / "fit.json"));
  const bool all = std::all_of(rep.fits.begin(), rep.fits.end(), [](const FitResult& f) { return f.converged; });
  CHECK(o.code == (all ? cli::kSuccess : cli::kNotConverged));
}

TEST_CASE("predict") {
  const fs::path dir = scratch("predict");
  REQUIRE(run(fit_args(dir)).code == cli::kSuccess);
  io::write_file(dir / "new.csv", "x2,x3,z2,z3\n0.5,-1,0.2,1.4\n-0.3,0.1,0,1\n");
  const Outcome o = run({"predict", "--model-file", (dir / "fit.json").string(), "--input",
                         (dir / "new.csv").string(), "--out", dir.string()});
  REQUIRE_MESSAGE(o.code == cli::kSuccess, o.err);
  const auto table = io::read_csv(dir / "predictions.csv");
  CHECK(table.rows.size() == 6);

  const auto rep = report::fit_from_json(io::read_file(dir / "fit.json"));
  const FitResult& zi = rep.fits[2];
  const auto expected = predict_infection(zi, Eigen::Vector3d(1, 0.5, -1), Eigen::Vector3d(1, 0.2, 1.4));
  const auto& row = table.rows[2];
  CHECK(row[0] == "1");
  CHECK(row[1] == "m2");
  CHECK(std::stod(row[2]) == doctest::Approx(expected.susceptible_prob).epsilon(1e-14));
  CHECK(std::stod(row[4]) == doctest::Approx(expected.marginal_infection_prob).epsilon(1e-14));

  io::write_file(dir / "empty.csv", "x2,x3,z2,z3\n");
  const Outcome empty = run({"predict", "--model-file", (dir / "fit.json").string(), "--input",
                             (dir / "empty.csv").string(), "--out", (dir / "e").string()});
  CHECK(empty.code == cli::kSuccess);
  CHECK(io::read_csv(dir / "e" / "predictions.csv").rows.empty());

  io::write_file(dir / "short.csv", "x2,z3\n1,2\n");
  const Outcome missing = run({"predict", "--model-file", (dir / "fit.json").string(), "--input",
                               (dir / "short.csv").string(), "--out", (dir / "m").string()});
  CHECK(missing.code == cli::kUsageError);
  CHECK(missing.err.find("x3") != std::string::npos);
  CHECK(missing.err.find("z2") != std::string::npos);

  // Logistic alone needs no susceptibility covariates.
  io::write_file(dir / "xonly.csv", "x2,x3\n1,2\n");
  CHECK(run({"predict", "--model-file", (dir / "fit.json").string(), "--input", (dir / "xonly.csv").string(),
             "--models", "m0", "--out", (dir / "x").string()})
            .code == cli::kSuccess);
}

TEST_CASE("simulate output does not depend on threads") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const std::string preset = "M1,Scenario1,n=300,N=8,seed=7,estimators=zi-gev/naive-gev";
  const Outcome one = run({"simulate", "--preset", preset, "--threads", "1", "--out", a.string()});
  REQUIRE_MESSAGE(one.code == cli::kSuccess, one.err);
  const Outcome four = run({"simulate", "--preset", preset, "--threads", "4", "--out", b.string()});
  REQUIRE(four.code == cli::kSuccess);
  CHECK(io::read_file(a / "simulation.json") == io::read_file(b / "simulation.json"));
  CHECK(io::read_file(a / "simulation_table.txt") == io::read_file(b / "simulation_table.txt"));

  const auto study = report::study_from_json(io::read_file(a / "simulation.json"));
  CHECK(study.seed == 7);
  CHECK(study.replicates == 8);

  // --seed overrides the preset.
  const fs::path c = scratch("sim_c");
  REQUIRE(run({"simulate", "--preset", preset, "--seed", "8", "--out", c.string()}).code == cli::kSuccess);
  CHECK(io::read_file(a / "simulation.json") != io::read_file(c / "simulation.json"));

  CHECK(run({"simulate", "--preset", "M1,bogus=1"}).code == cli::kUsageError);
}

TEST_CASE("validate") {
  CHECK(run({"validate", "--x", "Weight"}).code == cli::kSuccess);
  CHECK(run({"validate", "--x", "a", "--z", "b"}).code == cli::kSuccess);
  const Outcome shared = run({"validate", "--x", "a", "--z", "a"});
  CHECK(shared.code == cli::kSuccess);
  CHECK(shared.out.find("FAILED") != std::string::npos);
  CHECK(shared.err.find("warning") != std::string::npos);
  CHECK(run({"validate", "--x", "a", "--z", "a", "--strict"}).code == cli::kUsageError);
  CHECK(run({"validate", "--x", "a,b", "--z", "b", "--strict"}).code == cli::kSuccess);
  // A categorical-only exclusion does not identify the model.
  CHECK(run({"validate", "--x", "a,g", "--z", "a", "--categorical", "g", "--strict"}).code == cli::kUsageError);
}

TEST_CASE("synth is deterministic") {
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  REQUIRE(run({"synth", "--seed", "5", "--n", "40", "--out", a.string()}).code == cli::kSuccess);
  REQUIRE(run({"synth", "--seed", "5", "--n", "40", "--out", b.string()}).code == cli::kSuccess);
  const std::string text = io::read_file(a / "synthetic_dengue.csv");
  CHECK(text == io::read_file(b / "synthetic_dengue.csv"));
  const auto t = io::parse_csv(text);
  CHECK(t.header == std::vector<std::string>{"y", "Age", "Weight"});
  CHECK(t.rows.size() == 40);
  CHECK(run({"synth", "--n", "0", "--out", a.string()}).code == cli::kUsageError);
}

TEST_CASE("installed binary exit status") {
  const char* bin = std::getenv("ZIGEV_BIN");
  if (!bin) return;
  const std::string base = std::string("\"") + bin + "\" ";
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status(base + "validate --x a --z b") == 0);
  CHECK(status(base + "validate --x a --z a --strict") == 1);
  CHECK(status(base + "--help") == 0);
  CHECK(status(base + "fit --input /nonexistent.csv --response y") == 1);
}
