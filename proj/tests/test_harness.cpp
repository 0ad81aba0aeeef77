#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "proxsps/harness/config.hpp"
#include "proxsps/harness/experiment.hpp"
#include "proxsps/harness/summarize.hpp"

using namespace proxsps;
using namespace proxsps::harness;

namespace {

const char* kMinimal = R"(# small ridge run
[problem]
problem = ridge
N = 20
n = 4
data_seed = 3

[optimizer]
method = proxsps
schedule = constant
alpha0 = 0.5
lambda = 0.01

[run]
epochs = 5
batch_size = 4
seeds = 1, 2
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos == std::string::npos) throw std::logic_error("replace: '" + from + "' not found");
  return text.replace(pos, from.size(), to);
}

int config_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

}  // namespace

TEST(Config, MinimalRidgeConfig) {
  const RunConfig cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.problem.kind, ProblemKind::ridge);
  EXPECT_EQ(cfg.problem.ridge.N, 20);
  EXPECT_EQ(cfg.problem.ridge.n, 4);
  EXPECT_EQ(cfg.problem.data_seed, 3u);
  EXPECT_EQ(cfg.optimizer.method.method, Method::proxsps);
  EXPECT_EQ(cfg.optimizer.schedule.kind, ScheduleKind::constant);
  EXPECT_EQ(cfg.optimizer.schedule.alpha0, 0.5);
  EXPECT_EQ(cfg.optimizer.lambda, 0.01);
  EXPECT_EQ(cfg.optimizer.regularizer, RegularizerKind::l2);
  EXPECT_EQ(cfg.epochs, 5u);
  EXPECT_EQ(cfg.batch_size, 4u);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_FALSE(cfg.sweep);
}

TEST(Config, UnknownKeyReportsItsLine) {
  const std::string text = replace(kMinimal, "lambda = 0.01\n", "lambda = 0.01\nmomentum = 0.9\n");
  try {
    parse_config(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 13);
    EXPECT_NE(std::string(e.what()).find("momentum"), std::string::npos);
    EXPECT_EQ(std::string(e.what()).rfind("line 13: ", 0), 0u);
  }
}

TEST(Config, MissingKeyTypeErrorsAndStructure) {
  EXPECT_GT(config_error_line(replace(kMinimal, "alpha0 = 0.5\n", "")), 0);
  EXPECT_EQ(config_error_line(replace(kMinimal, "alpha0 = 0.5", "alpha0 = fast")), 11);
  EXPECT_EQ(config_error_line(replace(kMinimal, "epochs = 5", "epochs = 2.5")), 15);
  EXPECT_EQ(config_error_line(replace(kMinimal, "seeds = 1, 2", "seeds = 1, -2")), 17);
  EXPECT_EQ(config_error_line(replace(kMinimal, "[run]", "[runs]")), 14);
  EXPECT_EQ(config_error_line(std::string("N = 3\n") + kMinimal), 1);
  EXPECT_EQ(config_error_line(replace(kMinimal, "batch_size = 4", "batch_size = 21")), 16);
  EXPECT_EQ(config_error_line(replace(kMinimal, "method = proxsps", "method = adam")), 9);
  EXPECT_EQ(config_error_line(replace(kMinimal, "n = 4\n", "n = 4\nn = 5\n")), 6);
  EXPECT_EQ(config_error_line(replace(kMinimal, "alpha0 = 0.5", "alpha0 = -1")), 8);
}

TEST(Config, IncompatibleCombinations) {
  const std::string box = replace(kMinimal, "lambda = 0.01", "lambda = 0\nregularizer = box\nbox_lo = -1\nbox_hi = 1");
  EXPECT_GT(config_error_line(box), 0);  // proxsps has no box closed form
  EXPECT_NO_THROW(parse_config(replace(box, "method = proxsps", "method = proxsps_general")));
  EXPECT_GT(config_error_line(replace(box, "method = proxsps", "method = sps")), 0);
  EXPECT_NO_THROW(parse_config(replace(kMinimal, "method = proxsps", "method = decsps")));
  EXPECT_GT(config_error_line(replace(replace(kMinimal, "method = proxsps", "method = decsps"), "schedule = constant",
                                      "schedule = sqrt_iter")),
            0);
  EXPECT_GT(config_error_line(replace(kMinimal, "lambda = 0.01", "lambda = 0.01\nregularizer = zero")), 0);
  EXPECT_GT(config_error_line(replace(kMinimal, "schedule = constant", "schedule = strong_decay")), 0);
  EXPECT_NO_THROW(parse_config(
      replace(replace(kMinimal, "schedule = constant", "schedule = strong_decay"), "alpha0 = 0.5", "k0 = 10")));
  EXPECT_GT(config_error_line(replace(kMinimal, "schedule = constant", "schedule = sqrt_total")), 0);
  EXPECT_NO_THROW(parse_config(replace(kMinimal, "schedule = constant", "schedule = sqrt_total\nK_total = 25")));
  EXPECT_GT(config_error_line(std::string(kMinimal) + "[sweep]\nlambda = 0, -1\n"), 0);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "[sweep]\nlambda = 0, 1\n", false), ConfigError);
}

TEST(Config, MatrixFac1ConfigValues) {
  const auto path = std::filesystem::path(PROXSPS_SOURCE_DIR) / "tools" / "configs" / "matrix_fac1_constant.cfg";
  const RunConfig cfg = parse_config(read_file(path));
  ASSERT_EQ(cfg.problem.kind, ProblemKind::matrix_fac);
  const auto& m = cfg.problem.matrix_fac;
  EXPECT_EQ(m.p, 6);
  EXPECT_EQ(m.q, 10);
  EXPECT_EQ(m.N, 1000);
  EXPECT_EQ(m.r, 4);
  EXPECT_EQ(m.upsilon, 1e-5);
  EXPECT_EQ(m.epsilon, 0.0);
  EXPECT_EQ(cfg.epochs, 50u);
  EXPECT_EQ(cfg.batch_size, 20u);
  EXPECT_EQ(cfg.seeds.size(), 10u);
  ASSERT_TRUE(cfg.sweep);
  EXPECT_EQ(cfg.sweep->methods, (std::vector<Method>{Method::sgd, Method::sps, Method::proxsps}));
  EXPECT_EQ(cfg.sweep->alpha0s, (std::vector<double>{1.0, 10.0}));
  EXPECT_EQ(cfg.sweep->lambdas, (std::vector<double>{1e-3}));
  EXPECT_EQ(grid_points(cfg).size(), 6u);
}

TEST(Config, RidgeProblemForSigma2) {
  const auto r = parse_ridge_problem("[problem]\nproblem = ridge\nN = 80\nn = 100\ndata_seed = 1\n"
                                     "lambda_grid = 1e-8, 1e-4, 1\n");
  EXPECT_EQ(r.lambda_grid, (std::vector<double>{1e-8, 1e-4, 1.0}));
  EXPECT_THROW(parse_ridge_problem("[problem]\nproblem = ridge\nN = 80\nn = 100\ndata_seed = 1\n"), ConfigError);
  EXPECT_THROW(parse_ridge_problem(kMinimal), ConfigError);
}

TEST(Experiment, OneRowPerSeedAndEpoch) {
  const RunConfig cfg = parse_config(kMinimal);
  const auto rows = run_experiment(cfg);
  ASSERT_EQ(rows.size(), 2u * 5u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].run_id, "proxsps/a0=0.5/lam=0.01");
    EXPECT_EQ(rows[i].seed, i < 5 ? 1u : 2u);
    EXPECT_EQ(rows[i].row.epoch, i % 5 + 1);
  }
  const std::string csv = rows_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
}

TEST(Experiment, RerunIsByteIdentical) {
  const RunConfig cfg = parse_config(std::string(kMinimal) + "[sweep]\nmethod = sgd, sps, proxsps\n");
  EXPECT_EQ(rows_to_csv(run_experiment(cfg)), rows_to_csv(run_experiment(cfg)));
  const auto path = std::filesystem::path(PROXSPS_SOURCE_DIR) / "tools" / "configs" / "matrix_fac1_constant.cfg";
  RunConfig mf = parse_config(read_file(path));
  mf.epochs = 2;
  mf.seeds = {3, 4};
  EXPECT_EQ(rows_to_csv(run_experiment(mf)), rows_to_csv(run_experiment(mf)));
}

TEST(Experiment, MatrixFacSeedsShareInitButNotBatches) {
  const auto path = std::filesystem::path(PROXSPS_SOURCE_DIR) / "tools" / "configs" / "matrix_fac1_constant.cfg";
  const RunConfig cfg = parse_config(read_file(path));
  const ProblemInstance problem(cfg.problem);
  const auto f1 = problem.objective_for(1);
  const auto f2 = problem.objective_for(2);
  EXPECT_EQ(problem.initial_point(*f1), problem.initial_point(*f2));
  const auto o = grid_points(cfg)[4];  // proxsps, alpha0 = 1
  const auto a = run_single(problem, o, 1, cfg.batch_size, 1);
  const auto b = run_single(problem, o, 1, cfg.batch_size, 2);
  EXPECT_NE(a[0].row.objective, b[0].row.objective);
}

TEST(Csv, RoundTripPreservesRows) {
  const auto rows = run_experiment(parse_config(kMinimal));
  std::istringstream in(rows_to_csv(rows));
  const auto back = read_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].run_id, rows[i].run_id);
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(back[i].row.objective, rows[i].row.objective);
    EXPECT_EQ(back[i].row.step_median, rows[i].row.step_median);
  }
  std::istringstream bad(std::string(kCsvHeader) + "\nx,1,1,0.5\n");
  EXPECT_THROW(read_csv(bad), CsvError);
  std::istringstream wrong_header("a,b\n");
  EXPECT_THROW(read_csv(wrong_header), CsvError);
}

TEST(Summarize, SingleSeedHasZeroSpread) {
  std::vector<ResultRow> rows;
  for (std::size_t e = 1; e <= 5; ++e) {
    EpochRow r;
    r.epoch = e;
    r.objective = static_cast<double>(e);
    r.val_metric = 2.0 * static_cast<double>(e);
    r.param_norm = 1.0;
    rows.push_back({"a", 7, r});
  }
  const auto s = summarize(rows, 2, 4);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].seeds, 1u);
  EXPECT_EQ(s[0].objective, 3.0);
  EXPECT_EQ(s[0].val_metric, 6.0);
  EXPECT_EQ(s[0].objective_std, 0.0);
  EXPECT_EQ(s[0].diverged_seeds, 0u);
}

TEST(Summarize, MeanAndStdAcrossSeedsOfWindowMedians) {
  std::vector<ResultRow> rows;
  for (std::uint64_t seed : {1u, 2u}) {
    for (std::size_t e = 1; e <= 3; ++e) {
      EpochRow r;
      r.epoch = e;
      r.objective = seed == 1 ? 1.0 : 3.0;
      rows.push_back({"a", seed, r});
      r.objective = 10.0 * static_cast<double>(e);
      rows.push_back({"b", seed, r});
    }
  }
  const auto s = summarize(rows, 1, 3);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].run_id, "a");
  EXPECT_EQ(s[0].objective, 2.0);
  EXPECT_EQ(s[0].objective_std, 1.0);
  EXPECT_EQ(s[1].run_id, "b");
  EXPECT_EQ(s[1].objective, 20.0);
  EXPECT_EQ(s[1].objective_std, 0.0);
}

TEST(Summarize, DivergedSeedMakesMetricsInfinite) {
  std::vector<ResultRow> rows;
  for (std::uint64_t seed : {1u, 2u}) {
    for (std::size_t e = 1; e <= 3; ++e) {
      EpochRow r;
      r.epoch = e;
      r.objective = 1.0;
      r.diverged = seed == 2 && e == 3;
      rows.push_back({"a", seed, r});
    }
  }
  const auto s = summarize(rows, 1, 3);
  EXPECT_TRUE(std::isinf(s[0].objective));
  EXPECT_EQ(s[0].diverged_seeds, 1u);
  EXPECT_EQ(summarize(rows, 1, 2)[0].objective, 1.0);
  EXPECT_THROW(summarize(rows, 0, 2), std::invalid_argument);
  EXPECT_THROW(summarize(rows, 3, 2), std::invalid_argument);
  EXPECT_THROW(summarize(rows, 1, 4), std::invalid_argument);
}

TEST(Cli, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "proxsps_cli_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string cli = PROXSPS_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  std::ofstream(dir / "ok.cfg") << kMinimal;
  std::ofstream(dir / "bad.cfg") << replace(kMinimal, "lambda = 0.01", "lambda = 0.01\nmomentum = 0.9");
  const std::string out = (dir / "out.csv").string();
  EXPECT_EQ(run("run " + (dir / "ok.cfg").string() + " -o " + out), 0);
  const std::string first = read_file(out);
  EXPECT_EQ(run("run " + (dir / "ok.cfg").string() + " -o " + out), 0);
  EXPECT_EQ(read_file(out), first);
  EXPECT_EQ(run("summarize " + out + " --window 2:5"), 0);
  EXPECT_EQ(run("summarize " + out + " --window 0:5"), 1);
  EXPECT_EQ(run("run " + (dir / "bad.cfg").string()), 1);
  EXPECT_EQ(run("summarize " + (dir / "missing.csv").string() + " --window 1:2"), 2);
  EXPECT_EQ(run("frobnicate"), 1);
  std::filesystem::remove_all(dir);
}
