#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "proxsps/harness/config.hpp"
#include "proxsps/harness/experiment.hpp"
#include "proxsps/harness/summarize.hpp"
#include "proxsps/problems/dataset.hpp"
#include "proxsps/problems/sigma2.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kIoError = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write(out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

int run_or_sweep(const std::string& config_path, const std::string& output, bool sweep) {
  const auto cfg = proxsps::harness::parse_config(read_file(config_path), sweep);
  const auto rows = proxsps::harness::run_experiment(cfg);
  emit(output.empty() ? cfg.output_path : output, [&](std::ostream& out) { proxsps::harness::write_csv(out, rows); });
  return 0;
}

int summarize(const std::string& csv_path, const std::string& window, const std::string& output) {
  std::size_t first = 0, last = 0;
  char colon = 0;
  std::istringstream ws(window);
  if (!(ws >> first >> colon >> last) || colon != ':' || !ws.eof()) {
    throw proxsps::harness::ConfigError("--window expects a:b, got '" + window + "'", 0);
  }
  std::istringstream in(read_file(csv_path));
  std::vector<proxsps::harness::ResultRow> rows;
  try {
    rows = proxsps::harness::read_csv(in);
  } catch (const proxsps::harness::CsvError& e) {
    throw IoError(e.what());
  }
  std::vector<proxsps::harness::SummaryRow> summary;
  try {
    summary = proxsps::harness::summarize(rows, first, last);
  } catch (const std::invalid_argument& e) {
    throw proxsps::harness::ConfigError(e.what(), 0);
  }
  emit(output, [&](std::ostream& out) { proxsps::harness::write_summary(out, summary); });
  return 0;
}

int sigma2(const std::string& config_path, const std::string& output) {
  const auto cfg = proxsps::harness::parse_ridge_problem(read_file(config_path));
  const auto data = proxsps::problems::gen_ridge(cfg);
  emit(output, [&](std::ostream& out) {
    out << "lambda,sigma2\n";
    for (double lambda : cfg.lambda_grid) {
      out << proxsps::harness::format_double(lambda) << ','
          << proxsps::harness::format_double(proxsps::problems::sigma2(data.A, data.b, lambda)) << '\n';
    }
  });
  return 0;
}

int export_data(const std::string& config_path, const std::string& dir) {
  const auto cfg = proxsps::harness::parse_config(read_file(config_path), true);
  if (cfg.problem.kind != proxsps::harness::ProblemKind::matrix_fac) {
    throw proxsps::harness::ConfigError("export-data supports problem = matrix_fac only", 0);
  }
  const auto data = proxsps::problems::gen_matrix_fac(cfg.problem.matrix_fac);
  try {
    proxsps::problems::save_dataset(dir, data.dataset);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic proximal Polyak step experiments"};
  app.require_subcommand(1);

  std::string config, output, csv, window, dir;
  auto* run = app.add_subcommand("run", "Run one configuration over its seeds and write per-epoch CSV");
  run->add_option("config", config, "config file")->required();
  run->add_option("-o,--output", output, "CSV path (overrides [run] output; '-' for stdout)");

  auto* sweep = app.add_subcommand("sweep", "Run every grid point of the [sweep] section");
  sweep->add_option("config", config, "config file")->required();
  sweep->add_option("-o,--output", output, "CSV path (overrides [run] output; '-' for stdout)");

  auto* summ = app.add_subcommand("summarize", "Median over an epoch window, mean and std across seeds");
  summ->add_option("csv", csv, "results CSV")->required();
  summ->add_option("--window", window, "epoch window a:b (inclusive)")->required();
  summ->add_option("-o,--output", output, "output path (default stdout)");

  auto* sig = app.add_subcommand("sigma2", "Interpolation constant of a ridge problem over its lambda_grid");
  sig->add_option("config", config, "ridge config with a [problem] section")->required();
  sig->add_option("-o,--output", output, "output path (default stdout)");

  auto* exp = app.add_subcommand("export-data", "Write the generated matrix factorization dataset as CSV files");
  exp->add_option("config", config, "config file")->required();
  exp->add_option("dir", dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return run_or_sweep(config, output, false);
    if (*sweep) return run_or_sweep(config, output, true);
    if (*summ) return summarize(csv, window, output);
    if (*sig) return sigma2(config, output);
    if (*exp) return export_data(config, dir);
  } catch (const proxsps::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
