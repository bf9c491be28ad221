#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fracmvp/io.hpp"

using namespace fracmvp;

namespace {

const std::string kData = FRACMVP_DATA_DIR;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(FRACMVP_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, got);
  const int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data(const char* name) { return kData + "/" + name; }

}  // namespace

TEST(Json, DomainRoundTrip) {
  const std::vector<Domain> ds = {make_ball(Vec{0.5, -1.0, 2.0}, 1.5),
                                  make_union({{Vec(2), 1.0}, {Vec{1.3, 0.0}, 0.6}}),
                                  make_shifted_ball(2.5, 3),
                                  make_slab(1.0, 0.2, 2, 0.3),
                                  dilate(make_union({{Vec(2), 1.0}, {Vec{1.3, 0.0}, 0.6}}), 2.0)};
  for (const auto& d : ds) {
    const json j = domain_to_json(d);
    const Domain back = domain_from_json(json::parse(j.dump()));
    EXPECT_EQ(domain_to_json(back), j);
    EXPECT_EQ(dim(back), dim(d));
    const Vec x = Vec::axis(dim(d), 0, 0.37);
    EXPECT_EQ(signed_dist(back, x), signed_dist(d, x));
  }
}

TEST(Json, DataRoundTrip) {
  const ExteriorData g{{bump_term(Vec{1.6, 0.3}, 0.4, 1.0), constant_term(-0.25),
                        shell_term(Vec(2), 3.0, 5.0, 0.5, 2.0), shell_term(Vec(2), 4.0, INFINITY, 0.0, 1.0)}};
  const ExteriorData back = data_from_json(json::parse(data_to_json(g).dump()));
  EXPECT_EQ(data_to_json(back), data_to_json(g));
  for (const Vec& y : {Vec{1.7, 0.2}, Vec{3.3, 0.0}, Vec{0.0, 6.0}}) EXPECT_EQ(back(y), g(y));
  EXPECT_EQ(data_dim(back), 2);
  EXPECT_EQ(data_dim({{constant_term(1.0)}}), 0);
}

TEST(Json, FixturesParse) {
  EXPECT_EQ(dim(domain_from_json(read_json_file(data("ball1.json")))), 2);
  EXPECT_NEAR(inradius_from_origin(domain_from_json(read_json_file(data("two_ball.json")))), 1.0, 1e-12);
  EXPECT_NEAR(inradius_from_origin(domain_from_json(read_json_file(data("shifted_ball.json")))), 1.0, 1e-12);
  EXPECT_EQ(data_from_json(read_json_file(data("bump.json"))).terms.size(), 1u);
}

TEST(Json, MalformedInputsAreDomainErrors) {
  EXPECT_THROW(read_json_file(data("malformed_syntax.json")), DomainError);
  EXPECT_THROW(read_json_file(data("does_not_exist.json")), DomainError);
  EXPECT_THROW(domain_from_json(read_json_file(data("malformed_type.json"))), DomainError);
  EXPECT_THROW(domain_from_json(read_json_file(data("malformed_radius.json"))), DomainError);
  EXPECT_THROW(data_from_json(read_json_file(data("malformed_data.json"))), DomainError);
  EXPECT_THROW(domain_from_json(json::parse(R"({"type":"union","parts":[]})")), DomainError);
  EXPECT_THROW(domain_from_json(json::parse(R"({"type":"shifted_ball","R":0.5})")), DomainError);
  EXPECT_THROW(domain_from_json(json::parse(R"({"type":"ball","center":[0,"a"],"radius":1})")), DomainError);
  EXPECT_THROW(data_from_json(json::parse(R"({"terms":[{"kind":"bump","center":[3,0],"radius":1,"height":1},
                                                       {"kind":"bump","center":[3,0,0],"radius":1,"height":1}]})")),
               DomainError);
}

TEST(Csv, ManifestHeaderAndRows) {
  std::ostringstream os;
  const RunManifest m{"gap", 2, 0.5, json{{"type", "ball"}}, 7, kToolVersion, "2020-01-01T00:00:00Z"};
  {
    CsvWriter w(os, m, {"a", "b"});
    w.row({0.1, 1.0 / 3.0});
  }
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  ASSERT_EQ(line.rfind("# manifest: ", 0), 0u);
  const json mj = json::parse(line.substr(12));
  EXPECT_EQ(mj.at("seed"), 7);
  EXPECT_EQ(mj.at("command"), "gap");
  std::getline(is, line);
  EXPECT_EQ(line, "a,b");
  std::getline(is, line);
  EXPECT_EQ(std::stod(line.substr(line.find(',') + 1)), 1.0 / 3.0);
}

TEST(Cli, MvpPassesOnBumpData) {
  const CliRun r = run_cli("mvp --domain " + data("ball1.json") + " --data " + data("bump.json") + " --radii 0.3,0.7,1.0");
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j.at("result").at("pass").get<bool>());
  EXPECT_EQ(j.at("manifest").at("command"), "mvp");
  EXPECT_EQ(j.at("manifest").at("tool_version"), kToolVersion);
}

TEST(Cli, ExitCodes) {
  // input errors
  EXPECT_EQ(run_cli("mvp --domain " + data("malformed_syntax.json") + " --data " + data("bump.json")).code, 2);
  EXPECT_EQ(run_cli("mvp --domain " + data("malformed_type.json") + " --data " + data("bump.json")).code, 2);
  EXPECT_EQ(run_cli("wos --domain " + data("ball1.json") + " --data " + data("malformed_data.json")).code, 2);
  EXPECT_EQ(run_cli("mvp --domain " + data("ball1.json") + " --data " + data("bump_inside.json")).code, 2);
  EXPECT_EQ(run_cli("mvp --domain " + data("ball1.json") + " --data " + data("bump.json") + " --radii 1.5").code, 2);
  EXPECT_EQ(run_cli("cfrak --domain " + data("ball1.json") + " --n 3").code, 2);
  EXPECT_EQ(run_cli("cfrak --domain " + data("ball1.json") + " --s 1.5").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("limit --domain " + data("ball1.json") + " --t-grid 0.01,0.1").code, 2);
  // a mean value check that does not pass: far too few quadrature nodes
  EXPECT_EQ(run_cli("mvp --domain " + data("ball1.json") + " --data " + data("bump.json") +
                    " --radial-nodes 4 --angular-nodes 4 --tol 1e-12")
                .code,
            3);
  EXPECT_EQ(run_cli("--version").code, 0);
}

TEST(Cli, WosAndCfrakValues) {
  const CliRun w = run_cli("wos --domain " + data("two_ball.json") + " --data " + data("one.json") + " --paths 1000");
  ASSERT_EQ(w.code, 0);
  EXPECT_DOUBLE_EQ(json::parse(w.out).at("result").at("estimate").at("mean").get<double>(), 1.0);
  const CliRun c = run_cli("cfrak --domain " + data("shifted_ball.json"));
  ASSERT_EQ(c.code, 0);
  EXPECT_NEAR(json::parse(c.out).at("result").at("c_frak").get<double>(), 0.7420256548, 1e-8);
}

// Same seed, same output, apart from the timestamp.
TEST(Cli, ReproducibleModuloTimestamp) {
  const std::string args = "gap --domain " + data("two_ball.json") + " --kind G --steps 2 --paths 5000 --seed 11";
  const CliRun a = run_cli(args), b = run_cli(args);
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  json ja = json::parse(a.out), jb = json::parse(b.out);
  ja["manifest"].erase("timestamp");
  jb["manifest"].erase("timestamp");
  EXPECT_EQ(ja, jb);
  const CliRun c = run_cli("gap --domain " + data("two_ball.json") + " --kind G --steps 2 --paths 5000 --seed 12");
  json jc = json::parse(c.out);
  EXPECT_NE(jc.at("result").at("lower_bound"), ja.at("result").at("lower_bound"));
}

TEST(Cli, SweepWritesCsv) {
  const auto path = std::filesystem::temp_directory_path() / "fracmvp_sweep_test.csv";
  const CliRun r = run_cli("gap --kind Gstar --sweep-delta 0.4,0.2 --ladder-steps 0 --csv " + path.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line.rfind("# manifest: ", 0), 0u);
  std::getline(f, line);
  EXPECT_EQ(line, "delta,mu_comp,target_bound,best_witness_value,stderr");
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 2);
  std::filesystem::remove(path);
}
