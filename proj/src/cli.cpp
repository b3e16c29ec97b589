#include "effinfer/cli.hpp"

#include <fmt/core.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "effinfer/metropolis.hpp"
#include "effinfer/models.hpp"
#include "effinfer/numerics.hpp"
#include "effinfer/particle_filter.hpp"

namespace effinfer::cli {
namespace {

template <class A>
struct Example {
  Model<A> model;
  std::vector<std::string> columns;
  std::function<std::vector<double>(const A&)> values;
};

class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  double real(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    return to_double(key, it->second);
  }

  int integer(const std::string& key, int fallback) {
    used_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    try {
      std::size_t pos = 0;
      int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw UsageError(fmt::format("parameter {}: expected an integer, got '{}'", key, it->second));
    }
  }

  std::optional<std::vector<double>> list(const std::string& key) {
    used_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ':')) out.push_back(to_double(key, item));
    return out;
  }

  void reject_unused(const std::string& model) const {
    for (const auto& [key, value] : raw_) {
      if (!used_.contains(key)) {
        throw UsageError(fmt::format("model {} has no parameter '{}'", model, key));
      }
    }
  }

 private:
  static double to_double(const std::string& key, const std::string& text) {
    try {
      std::size_t pos = 0;
      double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw UsageError(fmt::format("parameter {}: expected a number, got '{}'", key, text));
    }
  }

  const std::map<std::string, std::string>& raw_;
  std::set<std::string> used_;
};

Example<double> make_coinflip(Params& p) {
  const int heads = p.integer("heads", 8);
  const int tails = p.integer("tails", 2);
  if (heads < 0 || tails < 0) throw UsageError("coinflip: counts must be non-negative");
  return {coin_flip(heads, tails), coin_flip_columns(), coin_flip_values};
}

Example<std::pair<double, double>> make_linregr(Params& p) {
  LinRegrData data;
  auto xs = p.list("xs");
  auto ys = p.list("ys");
  const int n = p.integer("n", 8);
  const double slope = p.real("slope", 3.0);
  const double intercept = p.real("intercept", 0.0);
  if (xs || ys) {
    if (!xs || !ys || xs->size() != ys->size() || xs->empty()) {
      throw UsageError("linregr: xs and ys must both be given with equal, non-zero length");
    }
    data = {*xs, *ys};
  } else {
    if (n < 1) throw UsageError("linregr: n must be positive");
    for (int i = 0; i < n; ++i) {
      data.xs.push_back(i);
      data.ys.push_back(slope * i + intercept);
    }
  }
  return {lin_regr(data), lin_regr_columns(), lin_regr_values};
}

HMMData hmm_data(Params& p) {
  HMMData data;
  data.q_std = p.real("q", 1.0);
  data.r_std = p.real("r", 1.0);
  if (!(data.q_std > 0.0) || !(data.r_std > 0.0)) throw UsageError("hmm: q and r must be positive");
  const int steps = p.integer("T", 5);
  if (auto ys = p.list("ys")) {
    data.ys = *ys;
  } else {
    if (steps < 0) throw UsageError("hmm: T must be non-negative");
    for (int t = 0; t < steps; ++t) data.ys.push_back(0.5 * (t + 1));
  }
  return data;
}

Example<std::vector<double>> make_hmm(Params& p) {
  HMMData data = hmm_data(p);
  return {lin_gauss_hmm(data), hmm_columns(data.ys.size()), hmm_values};
}

template <class F>
Table with_model(const RunConfig& config, F&& f) {
  Params params(config.params);
  if (config.model == "coinflip") {
    auto ex = make_coinflip(params);
    params.reject_unused(config.model);
    return f(ex);
  }
  if (config.model == "linregr") {
    auto ex = make_linregr(params);
    params.reject_unused(config.model);
    return f(ex);
  }
  if (config.model == "hmm") {
    auto ex = make_hmm(params);
    params.reject_unused(config.model);
    return f(ex);
  }
  throw UsageError(fmt::format("unknown model '{}' (expected coinflip, linregr or hmm)", config.model));
}

std::vector<std::optional<double>> with_values(std::vector<std::optional<double>> fields,
                                               const std::vector<double>& values) {
  fields.insert(fields.end(), values.begin(), values.end());
  return fields;
}

template <class W, class A>
double acceptance_rate(const std::vector<ChainNode<W, A>>& oldest_first) {
  if (oldest_first.size() < 2) return 0.0;
  std::size_t moved = 0;
  for (std::size_t i = 1; i < oldest_first.size(); ++i) {
    if (oldest_first[i].trace != oldest_first[i - 1].trace) ++moved;
  }
  return static_cast<double>(moved) / static_cast<double>(oldest_first.size() - 1);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

template <class A>
Table run_example(const Example<A>& ex, const RunConfig& config) {
  RandomSource src(config.seed);
  Table table;
  table.latent_columns = ex.columns;
  table.index_name = "sample_index";
  const auto& alg = config.alg;

  if (alg == "simulate") {
    require(config.iters >= 0, "--iters must be non-negative");
    table.header = {"log_weight"};
    for (int i = 0; i < config.iters; ++i) {
      table.rows.push_back({i, with_values({0.0}, ex.values(simulate(ex.model, src)))});
    }
  } else if (alg == "im" || alg == "pmh") {
    require(config.iters >= 0, "--iters must be non-negative");
    std::vector<ChainNode<LogP, A>> chain;
    if (alg == "im") {
      chain = im(config.iters, ex.model, src);
    } else {
      require(config.particles >= 1, "--particles must be positive");
      require(!config.theta.empty(), "pmh needs --theta");
      std::set<std::string> theta(config.theta.begin(), config.theta.end());
      chain = pmh(config.iters, config.particles, theta, ex.model, src);
    }
    std::reverse(chain.begin(), chain.end());
    table.header = {"log_weight"};
    for (std::size_t i = 0; i < chain.size(); ++i) {
      table.rows.push_back(
          {static_cast<long>(i), with_values({chain[i].weight}, ex.values(chain[i].value))});
    }
    table.acceptance_rate = acceptance_rate(chain);
  } else if (alg == "ssmh") {
    require(config.iters >= 0, "--iters must be non-negative");
    auto chain = ssmh(config.iters, Trace{}, ex.model, src);
    std::reverse(chain.begin(), chain.end());
    std::set<Addr> sites;
    for (const auto& node : chain) {
      for (const auto& entry : node.weight) sites.insert(entry.first);
    }
    for (const auto& addr : sites) table.header.push_back(fmt::format("lp[{}]", to_string(addr)));
    for (std::size_t i = 0; i < chain.size(); ++i) {
      std::vector<std::optional<double>> fields;
      for (const auto& addr : sites) {
        auto it = chain[i].weight.find(addr);
        fields.push_back(it == chain[i].weight.end() ? std::nullopt
                                                     : std::optional<double>(it->second));
      }
      table.rows.push_back({static_cast<long>(i), with_values(fields, ex.values(chain[i].value))});
    }
    table.acceptance_rate = acceptance_rate(chain);
  } else if (alg == "mpf" || alg == "rmpf") {
    require(config.particles >= 1, "--particles must be positive");
    table.index_name = "particle_index";
    table.header = {"log_weight"};
    std::vector<LogP> ws;
    auto emit = [&](const A& x, LogP w) {
      ws.push_back(w);
      table.rows.push_back({static_cast<long>(ws.size() - 1), with_values({w}, ex.values(x))});
    };
    if (alg == "mpf") {
      for (const auto& [x, w] : mulpfilter(config.particles, ex.model, src)) emit(x, w);
    } else {
      require(config.moves >= 0, "--moves must be non-negative");
      for (const auto& [x, s] : rmpf(config.particles, config.moves, ex.model, src)) emit(x, s.weight);
    }
    table.log_evidence = log_mean_exp(ws);
  } else {
    throw UsageError(
        fmt::format("unknown algorithm '{}' (expected simulate, im, ssmh, mpf, rmpf or pmh)", alg));
  }

  for (const auto& name : ex.columns) table.header.push_back(name);

  std::vector<Record> kept;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const long pos = static_cast<long>(i);
    if (pos >= config.burn_in && (pos - config.burn_in) % config.thin == 0) {
      kept.push_back(std::move(table.rows[i]));
    }
  }
  table.rows = std::move(kept);
  return table;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_params(const std::string& text) {
  std::map<std::string, std::string> out;
  for (const auto& pair : split(text, ',')) {
    auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError(fmt::format("malformed parameter '{}' (expected key=value)", pair));
    }
    out[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return out;
}

Table run(const RunConfig& config) {
  if (config.burn_in < 0) throw UsageError("--burn-in must be non-negative");
  if (config.thin < 1) throw UsageError("--thin must be positive");
  return with_model(config, [&](const auto& ex) { return run_example(ex, config); });
}

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

void write_csv(const Table& table, std::ostream& out) {
  out << table.index_name;
  for (const auto& name : table.header) out << ',' << name;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.index;
    for (const auto& field : row.fields) {
      out << ',';
      if (field) out << format_double(*field);
    }
    out << '\n';
  }
}

void write_jsonl(const Table& table, std::ostream& out) {
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    obj[table.index_name] = row.index;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      const auto& field = row.fields[i];
      if (field && std::isfinite(*field)) {
        obj[table.header[i]] = *field;
      } else if (field) {
        obj[table.header[i]] = format_double(*field);
      } else {
        obj[table.header[i]] = nullptr;
      }
    }
    out << obj.dump() << '\n';
  }
}

void write_summary(const Table& table, const RunConfig& config, std::ostream& out) {
  fmt::print(out, "algorithm {} on {}: {} records\n", config.alg, config.model, table.rows.size());
  const std::size_t first_latent = table.header.size() - table.latent_columns.size();
  fmt::print(out, "{:<12} {:>14} {:>14}\n", "column", "mean", "sd");
  for (std::size_t c = 0; c < table.latent_columns.size(); ++c) {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& row : table.rows) {
      if (const auto& v = row.fields[first_latent + c]) {
        sum += *v;
        ++n;
      }
    }
    const double mean = n ? sum / static_cast<double>(n) : std::nan("");
    for (const auto& row : table.rows) {
      if (const auto& v = row.fields[first_latent + c]) sum_sq += (*v - mean) * (*v - mean);
    }
    const double sd = n > 1 ? std::sqrt(sum_sq / static_cast<double>(n - 1)) : 0.0;
    fmt::print(out, "{:<12} {:>14.6f} {:>14.6f}\n", table.latent_columns[c], mean, sd);
  }
  if (table.acceptance_rate) fmt::print(out, "acceptance rate: {:.4f}\n", *table.acceptance_rate);
  if (table.log_evidence) fmt::print(out, "log evidence: {:.6f}\n", *table.log_evidence);
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  if (config.sizes.empty()) throw UsageError("bench: no sizes given");
  if (config.repeats < 1) throw UsageError("bench: --repeats must be positive");
  std::vector<BenchRow> rows;
  RandomSource root(config.seed);
  for (int size : config.sizes) {
    if (size < 1) throw UsageError("bench: sizes must be positive");
    RunConfig run_config;
    run_config.params = config.params;
    run_config.seed = config.seed;
    std::function<void(RandomSource&)> job;
    if (config.alg == "ssmh") {
      run_config.model = config.model.empty() ? "coinflip" : config.model;
      job = [&](RandomSource& src) {
        with_model(run_config, [&](const auto& ex) {
          ssmh(size, Trace{}, ex.model, src);
          return Table{};
        });
      };
    } else if (config.alg == "mpf") {
      run_config.model = config.model.empty() ? "hmm" : config.model;
      job = [&](RandomSource& src) {
        with_model(run_config, [&](const auto& ex) {
          mulpfilter(size, ex.model, src);
          return Table{};
        });
      };
    } else if (config.alg == "rmpf") {
      if (!config.model.empty() && config.model != "hmm") {
        throw UsageError("bench: the rmpf sweep is over hmm observations");
      }
      run_config.model = "hmm";
      run_config.params["T"] = std::to_string(size);
      job = [&](RandomSource& src) {
        with_model(run_config, [&](const auto& ex) {
          rmpf(config.particles, config.moves, ex.model, src);
          return Table{};
        });
      };
    } else {
      throw UsageError(fmt::format("bench: unknown algorithm '{}' (expected ssmh, mpf or rmpf)",
                                   config.alg));
    }
    BenchRow row{size, 0.0, std::numeric_limits<double>::infinity()};
    for (int r = 0; r < config.repeats; ++r) {
      RandomSource src = root.split();
      const auto start = std::chrono::steady_clock::now();
      job(src);
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      row.mean_seconds += took.count() / config.repeats;
      row.min_seconds = std::min(row.min_seconds, took.count());
    }
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<BenchRow>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("loglog_slope: need at least two sizes");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& r : rows) {
    mx += std::log(r.size);
    my += std::log(r.mean_seconds);
  }
  mx /= rows.size();
  my /= rows.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& r : rows) {
    const double dx = std::log(r.size) - mx;
    sxy += dx * (std::log(r.mean_seconds) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

void write_bench(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "size,mean_seconds,min_seconds\n";
  for (const auto& r : rows) {
    out << r.size << ',' << format_double(r.mean_seconds) << ',' << format_double(r.min_seconds)
        << '\n';
  }
  fmt::print(out, "# log-log slope: {:.3f}\n", loglog_slope(rows));
}

int main(int argc, char** argv) {
  CLI::App app{"Run inference algorithms on the example models."};
  app.require_subcommand(0, 1);

  RunConfig config;
  std::string params_text;
  std::string theta_text;
  std::string format_text = "csv";
  std::optional<std::uint64_t> seed;
  app.add_option("--model", config.model, "coinflip, linregr or hmm");
  app.add_option("--params", params_text, "model parameters, k=v,k=v");
  app.add_option("--alg", config.alg, "simulate, im, ssmh, mpf, rmpf or pmh");
  app.add_option("--iters", config.iters, "draws or MH iterations");
  app.add_option("--particles", config.particles, "particle count");
  app.add_option("--moves", config.moves, "MH moves per particle per round (rmpf)");
  app.add_option("--theta", theta_text, "comma-separated sample tags (pmh)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", config.out, "output file, - for stdout");
  app.add_option("--format", format_text, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--burn-in", config.burn_in, "rows dropped from the start");
  app.add_option("--thin", config.thin, "keep every k-th row after burn-in");

  BenchConfig bench;
  std::string sizes_text;
  std::string bench_params;
  auto* bench_cmd = app.add_subcommand("bench", "time an algorithm over a size sweep");
  bench_cmd->add_option("--alg", bench.alg, "ssmh (iterations), mpf (particles) or rmpf (observations)")
      ->required();
  bench_cmd->add_option("--model", bench.model, "model for ssmh and mpf");
  bench_cmd->add_option("--params", bench_params, "model parameters, k=v,k=v");
  bench_cmd->add_option("--sizes", sizes_text, "comma-separated sweep")->required();
  bench_cmd->add_option("--repeats", bench.repeats, "timed runs per size");
  bench_cmd->add_option("--particles", bench.particles, "particles (rmpf)");
  bench_cmd->add_option("--moves", bench.moves, "moves (rmpf)");
  bench_cmd->add_option("--seed", bench.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bench_cmd->parsed()) {
      bench.params = parse_params(bench_params);
      for (const auto& s : split(sizes_text, ',')) {
        try {
          bench.sizes.push_back(std::stoi(s));
        } catch (const std::exception&) {
          throw UsageError(fmt::format("bench: bad size '{}'", s));
        }
      }
      write_bench(run_bench(bench), std::cout);
      return 0;
    }
    if (config.model.empty()) throw UsageError("--model is required");
    if (config.alg.empty()) throw UsageError("--alg is required");
    if (!seed) throw UsageError("--seed is required");
    config.seed = *seed;
    config.params = parse_params(params_text);
    config.theta = split(theta_text, ',');
    config.format = format_text == "jsonl" ? Format::jsonl : Format::csv;

    Table table = run(config);
    const bool to_stdout = config.out == "-";
    std::ofstream file;
    if (!to_stdout) {
      file.open(config.out, std::ios::binary);
      if (!file) throw std::runtime_error(fmt::format("cannot open {} for writing", config.out));
    }
    std::ostream& records = to_stdout ? std::cout : file;
    if (config.format == Format::csv) {
      write_csv(table, records);
    } else {
      write_jsonl(table, records);
    }
    write_summary(table, config, to_stdout ? std::cerr : std::cout);
    return 0;
  } catch (const UsageError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 2;
  } catch (const DegenerateWeights& e) {
    fmt::print(stderr, "numeric error: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}

}  // namespace effinfer::cli
