#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "effinfer/cli.hpp"
#include "effinfer/models.hpp"

using namespace effinfer::cli;

namespace {

RunConfig config(std::string model, std::string alg, std::uint64_t seed = 1) {
  RunConfig c;
  c.model = std::move(model);
  c.alg = std::move(alg);
  c.seed = seed;
  return c;
}

std::string csv(const Table& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

double column_mean(const Table& t, const std::string& name) {
  std::size_t col = 0;
  while (t.header[col] != name) ++col;
  double s = 0.0;
  for (const auto& row : t.rows) s += *row.fields[col];
  return s / static_cast<double>(t.rows.size());
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(INFER_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("parse_params") {
  auto p = parse_params("heads=8,tails=2");
  CHECK(p.at("heads") == "8");
  CHECK(p.at("tails") == "2");
  CHECK(parse_params("").empty());
  CHECK(parse_params("ys=1:2:3").at("ys") == "1:2:3");
  CHECK_THROWS_AS(parse_params("heads"), UsageError);
  CHECK_THROWS_AS(parse_params("=3"), UsageError);
}

TEST_CASE("ssmh on the coin writes n + 1 rows with the latent column") {
  auto c = config("coinflip", "ssmh");
  c.params = parse_params("heads=8,tails=2");
  c.iters = 20000;
  auto t = run(c);
  CHECK(t.rows.size() == 20001);
  CHECK(t.header.back() == "p#0");
  CHECK(t.header.front() == "lp[p#0]");
  CHECK(std::abs(column_mean(t, "p#0") - 0.75) < 0.03);
  REQUIRE(t.acceptance_rate);
  CHECK(*t.acceptance_rate > 0.0);
  CHECK(*t.acceptance_rate < 1.0);
  CHECK(t.rows.front().index == 0);
  CHECK(t.rows.back().index == 20000);
}

TEST_CASE("simulate writes prior draws with zero weight") {
  auto c = config("coinflip", "simulate");
  c.iters = 5;
  auto t = run(c);
  REQUIRE(t.rows.size() == 5);
  CHECK(t.header == std::vector<std::string>{"log_weight", "p#0"});
  for (const auto& row : t.rows) CHECK(*row.fields[0] == 0.0);
}

TEST_CASE("mpf on a one-step hmm estimates the log evidence") {
  auto c = config("hmm", "mpf", 4);
  c.params = parse_params("T=1");
  c.particles = 1000;
  auto t = run(c);
  CHECK(t.rows.size() == 1000);
  REQUIRE(t.log_evidence);
  CHECK(std::abs(*t.log_evidence - -1.3280) < 0.1);
  CHECK(t.index_name == "particle_index");
}

TEST_CASE("hmm parameters") {
  auto c = config("hmm", "simulate");
  c.iters = 1;
  c.params = parse_params("ys=0.1:0.2:0.3:0.4,q=0.5,r=2");
  CHECK(run(c).latent_columns.size() == 4);
  c.params = parse_params("T=7");
  CHECK(run(c).latent_columns.size() == 7);
}

TEST_CASE("rmpf, im and pmh tables") {
  auto r = config("linregr", "rmpf");
  r.particles = 20;
  r.moves = 2;
  auto tr = run(r);
  CHECK(tr.rows.size() == 20);
  CHECK(tr.header == std::vector<std::string>{"log_weight", "m#0", "c#0"});

  auto i = config("linregr", "im");
  i.iters = 10;
  CHECK(run(i).rows.size() == 11);

  auto p = config("hmm", "pmh");
  p.iters = 4;
  p.particles = 5;
  p.theta = {"x0"};
  CHECK(run(p).rows.size() == 5);
  p.theta.clear();
  CHECK_THROWS_AS(run(p), UsageError);
}

TEST_CASE("burn-in and thinning are applied to the rows afterwards") {
  auto c = config("coinflip", "im");
  c.iters = 20;
  auto full = run(c);
  c.burn_in = 5;
  c.thin = 3;
  auto kept = run(c);
  REQUIRE(kept.rows.size() == 6);
  for (std::size_t i = 0; i < kept.rows.size(); ++i) {
    CHECK(kept.rows[i].index == static_cast<long>(5 + 3 * i));
    CHECK(kept.rows[i].fields == full.rows[5 + 3 * i].fields);
  }
  CHECK(kept.acceptance_rate == full.acceptance_rate);
}

TEST_CASE("identical configs give identical output") {
  for (const std::string alg : {"simulate", "im", "ssmh", "mpf", "rmpf"}) {
    auto c = config("hmm", alg, 42);
    c.iters = 30;
    c.particles = 20;
    CHECK(csv(run(c)) == csv(run(c)));
    auto d = c;
    d.seed = 43;
    CHECK(csv(run(c)) != csv(run(d)));
  }
}

TEST_CASE("csv and jsonl formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  Table t;
  t.index_name = "sample_index";
  t.header = {"log_weight", "p#0"};
  t.rows = {{0, {-1.5, 0.25}}, {1, {std::nullopt, 0.5}}};
  CHECK(csv(t) == "sample_index,log_weight,p#0\n0,-1.5,0.25\n1,,0.5\n");
  std::ostringstream js;
  write_jsonl(t, js);
  CHECK(js.str() == "{\"sample_index\":0,\"log_weight\":-1.5,\"p#0\":0.25}\n"
                    "{\"sample_index\":1,\"log_weight\":null,\"p#0\":0.5}\n");
}

TEST_CASE("usage errors") {
  CHECK_THROWS_AS(run(config("nope", "im")), UsageError);
  CHECK_THROWS_AS(run(config("coinflip", "nope")), UsageError);
  auto c = config("coinflip", "im");
  c.params = parse_params("heads=x");
  CHECK_THROWS_AS(run(c), UsageError);
  c.params = parse_params("bias=2");
  CHECK_THROWS_AS(run(c), UsageError);
  auto t = config("coinflip", "im");
  t.thin = 0;
  CHECK_THROWS_AS(run(t), UsageError);
}

TEST_CASE("loglog_slope") {
  std::vector<BenchRow> linear{{100, 0.01, 0.01}, {200, 0.02, 0.02}, {400, 0.04, 0.04}};
  CHECK(loglog_slope(linear) == doctest::Approx(1.0));
  std::vector<BenchRow> quad{{10, 1.0, 1.0}, {20, 4.0, 4.0}, {40, 16.0, 16.0}};
  CHECK(loglog_slope(quad) == doctest::Approx(2.0));
  CHECK_THROWS(loglog_slope({{10, 1.0, 1.0}}));
}

TEST_CASE("bench produces one row per size") {
  BenchConfig b;
  b.alg = "mpf";
  b.sizes = {10, 20};
  b.repeats = 1;
  auto rows = run_bench(b);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].size == 20);
  CHECK(rows[0].mean_seconds > 0.0);
  b.alg = "im";
  CHECK_THROWS_AS(run_bench(b), UsageError);
}

TEST_CASE("the infer binary: exit codes and byte-identical files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "effinfer_cli_test";
  fs::create_directories(dir);
  const auto a = dir / "a.csv";
  const auto b = dir / "b.csv";
  const std::string args = "--model coinflip --params heads=8,tails=2 --alg ssmh --iters 200 --seed 9";
  CHECK(run_binary(args + " --out " + a.string()) == 0);
  CHECK(run_binary(args + " --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("sample_index,", 0) == 0);

  CHECK(run_binary("--model nope --alg im --seed 1") == 2);
  CHECK(run_binary("--model coinflip --alg nope --seed 1") == 2);
  CHECK(run_binary("--model coinflip --alg im") == 2);
  CHECK(run_binary("--model coinflip --alg im --seed 1 --bogus") == 2);
  // A squared observation scale that underflows makes every weight -inf.
  CHECK(run_binary("--model hmm --params T=2,r=1e-200 --alg mpf --particles 4 --seed 1 --out " + (dir / "c.csv").string()) == 3);
  fs::remove_all(dir);
}
