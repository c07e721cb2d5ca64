#include <filesystem>
#include <string>

#include "doctest.h"
#include "zigev/io.hpp"

using namespace zigev;

namespace {

template <class F>
std::string message_of(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("csv parsing") {
  const auto t = io::parse_csv("y, w\n0,1.5\n1 ,2\n\n0,3\n");
  REQUIRE(t.header.size() == 2);
  CHECK(t.header[1] == "w");
  CHECK(t.rows.size() == 3);
  CHECK(t.rows[1][0] == "1");
  CHECK(t.column_index("w") == 1);
  CHECK_THROWS_AS(t.column_index("v"), io::ParseError);

  CHECK_THROWS_AS(io::parse_csv(""), io::ParseError);
  CHECK_THROWS_AS(io::parse_csv("a,a\n1,2\n"), io::ParseError);
  try {
    io::parse_csv("a,b\n1,2\n3\n");
    FAIL("ragged row accepted");
  } catch (const io::ParseError& e) {
    CHECK(e.row() == 2);
  }
}

TEST_CASE("three-row numeric dataset") {
  io::LoadOptions opt;
  opt.response = "y";
  opt.x_columns = {"w"};
  const auto d = io::load_dataset(io::parse_csv("y,w\n0,1.5\n1,2\n0,3\n"), opt);
  CHECK(d.data.n() == 3);
  CHECK(d.data.y == Eigen::Vector3d(0, 1, 0));
  REQUIRE(d.data.X.cols() == 2);
  CHECK(d.data.X.col(0) == Eigen::Vector3d::Ones());
  CHECK(d.data.X.col(1) == Eigen::Vector3d(1.5, 2, 3));
  CHECK(d.data.Z.cols() == 1);
  CHECK(d.spec.x_columns == std::vector<std::string>{"Intercept", "w"});
  CHECK(d.validation.ok);
  CHECK(d.validation.exclusion_covariate == std::optional<std::string>("w"));
}

TEST_CASE("response outside {0,1} names the row") {
  io::LoadOptions opt;
  opt.response = "y";
  opt.x_columns = {"w"};
  try {
    io::load_dataset(io::parse_csv("y,w\n0,1\n1,2\n2,3\n"), opt);
    FAIL("accepted y = 2");
  } catch (const io::ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(std::string(e.what()).find('3') != std::string::npos);
  }
  CHECK_THROWS_AS(io::load_dataset(io::parse_csv("y,w\n0,1\n1,x\n"), opt), io::ParseError);
}

TEST_CASE("categorical expansion against hand coding") {
  io::LoadOptions opt;
  opt.response = "y";
  opt.x_columns = {"g"};
  opt.z_columns = {"w"};
  const auto d = io::load_dataset(io::parse_csv("y,g,w\n0,a,1\n1,b,2\n0,a,3\n"), opt);
  REQUIRE(d.x_encodings.size() == 1);
  CHECK(d.x_encodings[0].categorical);
  CHECK(d.x_encodings[0].levels == std::vector<std::string>{"a", "b"});
  CHECK(d.x_encodings[0].design_names() == std::vector<std::string>{"g=b"});

  Eigen::MatrixXd expected(3, 2);
  expected << 1, 0, 1, 1, 1, 0;
  CHECK(d.data.X == expected);
  CHECK_FALSE(d.spec.is_continuous("g=b"));
  CHECK(d.spec.is_continuous("w"));
  CHECK(d.validation.ok);

  // Forcing a numeric column to categorical.
  opt.x_columns = {"w"};
  opt.z_columns = {};
  opt.categorical = {"w"};
  const auto f = io::load_dataset(io::parse_csv("y,w\n0,1\n1,2\n0,1\n"), opt);
  CHECK(f.x_encodings[0].design_names() == std::vector<std::string>{"w=2"});
  CHECK_FALSE(f.validation.ok);
  CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("strict loading turns a failed identifiability check into an error") {
  io::LoadOptions opt;
  opt.response = "y";
  opt.x_columns = {"w"};
  opt.z_columns = {"w"};
  const auto lenient = io::load_dataset(io::parse_csv("y,w\n0,1\n1,2\n"), opt);
  CHECK_FALSE(lenient.validation.ok);
  opt.strict = true;
  CHECK_THROWS_AS(io::load_dataset(io::parse_csv("y,w\n0,1\n1,2\n"), opt), io::ValidationError);
}

TEST_CASE("missing columns") {
  io::LoadOptions opt;
  opt.response = "y";
  opt.x_columns = {"nope"};
  const std::string msg = message_of([&] { io::load_dataset(io::parse_csv("y,w\n0,1\n"), opt); });
  CHECK(msg.find("nope") != std::string::npos);
  opt.response = "r";
  opt.x_columns = {"w"};
  CHECK_THROWS_AS(io::load_dataset(io::parse_csv("y,w\n0,1\n"), opt), io::ParseError);
}

TEST_CASE("build_design under fixed encodings") {
  io::ColumnEncoding num{"w", false, {}};
  io::ColumnEncoding cat{"g", true, {"a", "b", "c"}};
  const auto t = io::parse_csv("g,w\nc,2.5\na,-1\n");
  const Eigen::MatrixXd m = io::build_design(t, {cat, num});
  Eigen::MatrixXd expected(2, 4);
  expected << 1, 0, 1, 2.5, 1, 0, 0, -1;
  CHECK(m == expected);
  CHECK_THROWS_AS(io::build_design(io::parse_csv("g,w\nd,1\n"), {cat, num}), io::ParseError);
  CHECK_THROWS_AS(io::build_design(io::parse_csv("w\n1\n"), {cat}), io::ParseError);
  CHECK(io::build_design(io::parse_csv("w\n"), {num}).rows() == 0);
}

TEST_CASE("preset strings") {
  const auto [plan, seed] = io::parse_preset("M2,Scenario1,Scenario2,n=500/1000,N=50,seed=7,tau=0.5,"
                                             "estimators=zi-gev/naive-gev");
  CHECK(plan.model == "M2");
  CHECK(plan.scenarios == std::vector<std::string>{"Scenario1", "Scenario2"});
  CHECK(plan.n == std::vector<long>{500, 1000});
  CHECK(plan.replicates == 50);
  CHECK(plan.tau_true == 0.5);
  CHECK(plan.estimators == std::vector<ModelKind>{ModelKind::ZiGev, ModelKind::Gev});
  REQUIRE(seed.has_value());
  CHECK(*seed == 7);

  CHECK_FALSE(io::parse_preset("M1").second.has_value());
  CHECK_THROWS(io::parse_preset("M1,foo=1"));
  CHECK_THROWS(io::parse_preset("M7"));
  CHECK_THROWS(io::parse_preset("M1,N=abc"));
}

TEST_CASE("configuration files") {
  const auto cfg = io::parse_run_config(R"({"input": "d.csv", "response": "y", "x_columns": ["w"],
      "seed": 9, "models": ["m2"], "fit": {"multistart": 3, "fixed": {"tau": 0.0}}})");
  CHECK(cfg.input == "d.csv");
  CHECK(cfg.seed == 9);
  CHECK(cfg.fit.seed == 9);
  CHECK(cfg.fit.multistart == 3);
  CHECK(cfg.fit.fixed.at("tau") == 0.0);
  CHECK(cfg.models == std::vector<std::string>{"m2"});

  const std::string msg = message_of([] { io::parse_run_config(R"({"respnse": "y", "sed": 1})"); });
  CHECK(msg.find("respnse") != std::string::npos);
  CHECK(msg.find("sed") != std::string::npos);
  CHECK_THROWS(io::parse_run_config(R"({"fit": {"tolerance": 1e-6, "bogus": 1}})"));
  CHECK_THROWS(io::parse_run_config(R"({"simulation": {"modle": "M1"}})"));
  CHECK_THROWS(io::parse_run_config(R"({"models": ["m5"]})"));
  CHECK_THROWS(io::parse_run_config("{not json"));
}

TEST_CASE("model identifiers") {
  for (auto k : {ModelKind::Logistic, ModelKind::Gev, ModelKind::ZiGev}) {
    CHECK(io::model_kind_from_id(io::model_id(k)) == k);
    CHECK(io::estimator_from_string(io::estimator_name(k)) == k);
  }
  CHECK(io::model_id(ModelKind::ZiGev) == "m2");
  CHECK_THROWS(io::model_kind_from_id("m3"));
}

TEST_CASE("file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "zigev_test_io" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  io::write_file(dir / "a.txt", "hello\n");
  CHECK(io::read_file(dir / "a.txt") == "hello\n");
  CHECK_THROWS(io::read_file(dir / "missing.txt"));
  std::filesystem::remove_all(dir.parent_path());
}
