#pragma once

// Command-line front end: run configurations, record tables, benchmarks.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace effinfer::cli {

/// Bad flags, unknown ids or malformed parameters (exit status 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { csv, jsonl };

struct RunConfig {
  std::string model;
  std::map<std::string, std::string> params;
  std::string alg;
  int iters = 1000;
  int particles = 100;
  int moves = 1;
  std::vector<std::string> theta;
  std::uint64_t seed = 0;
  std::string out = "-";
  Format format = Format::csv;
  int burn_in = 0;
  int thin = 1;
};

/// One output row: the index, then optional numeric fields in header order.
struct Record {
  long index = 0;
  std::vector<std::optional<double>> fields;
};

struct Table {
  std::string index_name;
  std::vector<std::string> header;
  std::vector<Record> rows;
  std::optional<double> acceptance_rate;
  std::optional<double> log_evidence;
  std::vector<std::string> latent_columns;
};

/// "k=v,k=v" into a map. Throws UsageError on malformed pairs.
std::map<std::string, std::string> parse_params(const std::string& text);

/// Runs the configured algorithm. Burn-in and thinning are applied to the
/// rows afterwards.
Table run(const RunConfig& config);

void write_csv(const Table& table, std::ostream& out);
void write_jsonl(const Table& table, std::ostream& out);

/// Per latent column mean and sample standard deviation, plus acceptance
/// rate and log evidence where they apply.
void write_summary(const Table& table, const RunConfig& config, std::ostream& out);

/// 17 significant digits, so values round-trip.
std::string format_double(double x);

struct BenchConfig {
  std::string alg;    // ssmh, mpf or rmpf
  std::string model;  // empty picks the default for the algorithm
  std::map<std::string, std::string> params;
  std::vector<int> sizes;  // iterations, particles or observations
  int repeats = 3;
  int particles = 20;  // rmpf and mpf with a fixed particle count
  int moves = 2;
  std::uint64_t seed = 1;
};

struct BenchRow {
  int size = 0;
  double mean_seconds = 0.0;
  double min_seconds = 0.0;
};

/// Times the algorithm over the size sweep.
std::vector<BenchRow> run_bench(const BenchConfig& config);

/// Least-squares slope of log(mean_seconds) against log(size).
double loglog_slope(const std::vector<BenchRow>& rows);

void write_bench(const std::vector<BenchRow>& rows, std::ostream& out);

/// The `infer` entry point. Returns the process exit status.
int main(int argc, char** argv);

}  // namespace effinfer::cli
