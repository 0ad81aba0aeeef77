// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "proxsps/diagnostics/brute_force.hpp"
#include "proxsps/diagnostics/envelope.hpp"
#include "proxsps/diagnostics/rate_bounds.hpp"
#include "proxsps/harness/config.hpp"
#include "proxsps/harness/experiment.hpp"
#include "proxsps/problems/linear_models.hpp"
#include "proxsps/problems/matrix_fac.hpp"
#include "proxsps/problems/sigma2.hpp"
#include "proxsps/regularizers.hpp"
#include "proxsps/runner.hpp"
#include "proxsps/step_rules.hpp"

using namespace proxsps;
using namespace proxsps::diagnostics;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ParamVector random_vector(std::size_t n, RngStream& rng, double scale = 1.0) {
  ParamVector v(Layout::flat(n));
  for (double& x : v.values()) x = scale * rng.normal();
  return v;
}

double log_uniform(RngStream& rng, double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); }

std::vector<ParamVector> trajectory(const StochasticObjective& f, const Regularizer& reg, Method m,
                                    const Schedule& s, std::size_t epochs, std::size_t batch, std::uint64_t seed,
                                    const ParamVector& x0) {
  std::vector<ParamVector> xs;
  RunOptions opts;
  opts.keep_steps = false;
  opts.on_step = [&](const ParamVector& x, const StepRecord&) { xs.push_back(x); };
  RngStream rng(seed);
  run_optimizer(f, reg, {m}, s, epochs, batch, rng, x0, opts);
  return xs;
}

// 20-dim ridge shared by the rate checks.
struct RidgeSetup {
  problems::RidgeData data = problems::gen_ridge({96, 20, {}, 5, 0.5});
  problems::RidgeObjective f{data.A, data.b};
  double lambda = 0.1;
  L2Regularizer reg{lambda};
  ParamVector xstar = f.solve_regularized(lambda);
  double psi(const ParamVector& x) const { return f.full_value(x) + reg.value(x); }
};

Outcome update_rule_oracle() {
  RngStream rng(101);
  const ZeroRegularizer zero;
  const char* names[5] = {"sps", "proxsps_l2", "general_l2", "general_zero", "general_box"};
  double worst[5] = {0, 0, 0, 0, 0};
  for (int rule = 0; rule < 5; ++rule) {
    for (int i = 0; i < 200; ++i) {
      const std::size_t n = 1 + rng.below(5);
      const ParamVector x = random_vector(n, rng);
      const ParamVector g = random_vector(n, rng);
      const double fval = rng.uniform(0.0, 5.0);
      const double C = fval - rng.uniform(0.0, 5.0);
      const double alpha = log_uniform(rng, 1e-3, 10.0);
      const double lambda = std::vector<double>{0.0, 1e-3, 1.0}[rng.below(3)];
      const L2Regularizer l2(lambda);
      const double lo = -rng.uniform(0.1, 2.0), hi = rng.uniform(0.1, 2.0);
      const BoxRegularizer box(lo, hi);
      ParamVector y;
      const Regularizer* reg = nullptr;
      switch (rule) {
        case 0: y = sps_step(x, fval, C, g, alpha).x; break;
        case 1: y = proxsps_l2_step(x, fval, C, g, alpha, lambda).x; reg = &l2; break;
        case 2: y = proxsps_general_step(x, fval, C, g, alpha, l2).x; reg = &l2; break;
        case 3: y = proxsps_general_step(x, fval, C, g, alpha, zero).x; reg = &zero; break;
        default: y = proxsps_general_step(x, fval, C, g, alpha, box).x; reg = &box; break;
      }
      const ParamVector ref = brute_force_subproblem_min({ModelKind::truncated, fval, C, g, x, alpha, reg});
      worst[rule] = std::max(worst[rule], distance(y, ref));
    }
  }
  Outcome o{true, ""};
  for (int r = 0; r < 5; ++r) {
    o.pass = o.pass && worst[r] <= 1e-5;
    o.detail += std::string(r ? ", " : "") + names[r] + " " + fmt("%.2e", worst[r]);
  }
  o.detail = "max distance to brute force: " + o.detail + " (tol 1e-5)";
  return o;
}

Outcome closed_form_vs_bisection() {
  RngStream rng(202);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + rng.below(5);
    const ParamVector x = random_vector(n, rng, 2.0);
    const ParamVector g = random_vector(n, rng);
    const double fval = rng.uniform(0.0, 5.0);
    const double C = fval - rng.uniform(0.0, 5.0);
    const double alpha = log_uniform(rng, 1e-3, 10.0);
    const double lambda = std::vector<double>{0.0, 1e-3, 1.0}[rng.below(3)];
    const ParamVector a = proxsps_l2_step(x, fval, C, g, alpha, lambda).x;
    const ParamVector b = proxsps_general_step(x, fval, C, g, alpha, L2Regularizer(lambda)).x;
    worst = std::max(worst, distance(a, b));
  }
  return {worst <= 1e-8, "max distance " + fmt("%.2e", worst) + " over 500 instances (tol 1e-8)"};
}

Outcome lambda_zero_reduction() {
  const auto d = problems::gen_logreg(50, 6, 303);
  const problems::LogisticObjective f(d.A, d.labels);
  const ParamVector x0 = ParamVector::from({0.5, -0.5, 0.2, 0.0, 1.0, -1.0});
  const L2Regularizer reg(0.0);
  const auto a = trajectory(f, reg, Method::proxsps, Schedule::constant(5.0), 20, 10, 7, x0);
  const auto b = trajectory(f, reg, Method::sps, Schedule::constant(5.0), 20, 10, 7, x0);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, max_abs_diff(a[k], b[k]));
  return {a.size() == 100 && worst <= 1e-12,
          std::to_string(a.size()) + " steps, max elementwise difference " + fmt("%.2e", worst) + " (tol 1e-12)"};
}

Outcome folded_vs_prox_sgd() {
  const auto d = problems::gen_logreg(40, 5, 404);
  const problems::LogisticObjective f(d.A, d.labels);
  const ParamVector x0 = ParamVector::from({1.0, -2.0, 0.5, 0.0, 3.0});
  const double lambda = 0.1, beta = 0.01;
  const L2Regularizer reg(lambda);
  const auto a = trajectory(f, reg, Method::sgd, Schedule::constant(beta), 50, 10, 9, x0);
  const auto b = trajectory(f, reg, Method::prox_sgd, Schedule::constant(beta / (1.0 - beta * lambda)), 50, 10, 9, x0);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, max_abs_diff(a[k], b[k]));
  return {a.size() == 200 && worst <= 1e-10,
          std::to_string(a.size()) + " steps, max elementwise difference " + fmt("%.2e", worst) + " (tol 1e-10)"};
}

Outcome constant_step_rate() {
  const RidgeSetup s;
  const RateCheckParams p{*s.f.smoothness_constant(), s.f.strong_convexity(), s.lambda, 0.0, 2.0, 0.0, 1.0};
  const ParamVector x0(s.f.layout());
  const Schedule sched = Schedule::constant(p.max_step());
  const std::size_t N = s.f.dataset_size();
  const auto xs = trajectory(s.f, s.reg, Method::proxsps, sched, 200, N, 1, x0);
  const double D0 = (x0 - s.xstar).squared_norm();
  double worst_ratio = 0.0;
  bool ok = xs.size() == 200;
  for (std::size_t K = 1; K <= xs.size(); ++K) {
    const double bound = rate_bound(RateGuarantee::constant_step, p, {sched, K, D0, {}, 0.0});
    const double measured = (xs[K - 1] - s.xstar).squared_norm();
    worst_ratio = std::max(worst_ratio, measured / bound);
    ok = ok && measured <= bound * (1.0 + 1e-6);
  }
  return {ok, "mu=" + fmt("%.3g", p.mu) + " L=" + fmt("%.3g", p.L) + ", max ||x^K-x*||^2 / bound over K<=200 = " +
                  fmt("%.6f", worst_ratio)};
}

Outcome strongly_convex_decay_rate() {
  const RidgeSetup s;
  const double L = *s.f.smoothness_constant();
  const double theta = 2.0;
  const auto k0 = static_cast<std::size_t>(std::ceil(L / (s.lambda * (1.0 - 1.0 / theta))));
  const Schedule sched = Schedule::strong_decay(s.lambda, k0);
  const ParamVector x0(s.f.layout());
  const double D0 = (x0 - s.xstar).squared_norm();
  const double psi_star = s.psi(s.xstar);
  const std::size_t batch = 8;

  std::vector<std::vector<double>> measured(2);
  std::vector<ParamVector> all_iterates{x0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ParamVector sum = ParamVector::zeros_like(x0);
    std::size_t k = 0;
    RunOptions opts;
    opts.keep_steps = false;
    opts.on_step = [&](const ParamVector& x, const StepRecord&) {
      ++k;
      if (k > 1000) return;
      sum += x;
      if (k % 50 == 0) all_iterates.push_back(x);
      if (k == 100) measured[0].push_back(s.psi(sum / 100.0) - psi_star);
      if (k == 1000) measured[1].push_back(s.psi(sum / 1000.0) - psi_star);
    };
    RngStream rng(seed);
    run_optimizer(s.f, s.reg, {Method::proxsps}, sched, 84, batch, rng, x0, opts);
  }
  // beta: largest batch-gradient variance seen along the runs
  const double beta = estimate_gradient_noise(s.f, all_iterates, batch);
  const RateCheckParams p{L, s.f.strong_convexity(), s.lambda, beta, theta, 0.0, 1.0};
  bool ok = true;
  std::string detail = "k0=" + std::to_string(k0) + " beta=" + fmt("%.3g", beta);
  const std::size_t Ks[2] = {100, 1000};
  for (int i = 0; i < 2; ++i) {
    const auto v = evaluate_rate_bound(RateGuarantee::strongly_convex_decay, p, {sched, Ks[i], D0, measured[i], 0.0});
    ok = ok && measured[i].size() == 10 && v.seeds_holding >= 9;
    detail += "; K=" + std::to_string(Ks[i]) + ": " + std::to_string(v.seeds_holding) + "/10 seeds below bound " +
              fmt("%.3g", v.bound) + " (mean " + fmt("%.3g", v.measured) + ")";
  }
  return {ok, detail};
}

Outcome envelope_decay() {
  // rank-1 factorization of a noisy 6x4 matrix: W1 is 1x4, W2 is 6x1
  const auto data = problems::gen_matrix_fac({4, 6, 100, 0.1, 1, 0.05, 7});
  const problems::MatrixFactorizationObjective f(data.dataset, 1);
  const double lambda = 1e-3;
  const L2Regularizer reg(lambda);
  const ParamVector x0 = f.initial_point(7);
  const double rho = local_smoothness(f, x0);
  const double L = rho;
  const double eta = 1.0 / (2.0 * rho);
  const double theta = 2.0;
  const double alpha = (1.0 - 1.0 / theta) / (L + 1.0 / eta);
  const std::size_t checkpoints[3] = {100, 1000, 10000};

  std::vector<double> mean_min(3, 0.0);
  const int seeds = 3;
  for (int seed = 1; seed <= seeds; ++seed) {
    std::vector<ParamVector> xs{x0};
    const auto rest = trajectory(f, reg, Method::proxsps, Schedule::sqrt_iter(alpha), 1000, 10,
                                 static_cast<std::uint64_t>(seed), x0);
    xs.insert(xs.end(), rest.begin(), rest.end() - 1);
    double running = INFINITY;
    int c = 0;
    for (std::size_t k = 0; k < 10000; ++k) {
      const auto env = moreau_env_grad({&f, &reg}, xs[k], eta, {1e-9, 200000, std::nullopt});
      running = std::min(running, env.norm * env.norm);
      if (k + 1 == checkpoints[c]) mean_min[c++] += running / seeds;
    }
  }
  // least-squares slope of log(min) against log(K)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 3; ++i) {
    const double lx = std::log(static_cast<double>(checkpoints[i])), ly = std::log(mean_min[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  const bool monotone = mean_min[1] < mean_min[0] && mean_min[2] < mean_min[1];
  return {monotone && slope <= -0.3, "rho=L=" + fmt("%.3g", L) + " eta=" + fmt("%.3g", eta) + " alpha=" +
                                         fmt("%.3g", alpha) + "; running min " + fmt("%.3e", mean_min[0]) + ", " +
                                         fmt("%.3e", mean_min[1]) + ", " + fmt("%.3e", mean_min[2]) +
                                         "; slope " + fmt("%.3f", slope) + " (need <= -0.3)"};
}

Outcome gamma_floor() {
  const auto q = problems::QuadraticObjective::random(50, 4, 808);
  const double floor_step = 1.0 / (2.0 * q.max_sample_smoothness());
  std::size_t steps = 0, violations = 0;
  double worst = INFINITY;
  for (const Schedule& s : {Schedule::constant(10.0), Schedule::sqrt_iter(1.0)}) {
    RunOptions opts;
    opts.keep_steps = false;
    opts.on_step = [&](const ParamVector&, const StepRecord& r) {
      ++steps;
      if (r.grad_norm_sq == 0.0) return;
      const double need = std::min(r.alpha, floor_step) - 1e-12;
      worst = std::min(worst, r.applied_step - need);
      if (r.applied_step < need) ++violations;
    };
    RngStream rng(3);
    run_optimizer(q, ZeroRegularizer(), {Method::sps}, s, 10, 1, rng, ParamVector::from({3.0, -1.0, 2.0, 0.5}), opts);
  }
  return {violations == 0 && steps == 1000,
          std::to_string(steps) + " SPS steps, " + std::to_string(violations) + " below min{alpha_k, 1/(2 L_max)}" +
              ", smallest margin " + fmt("%.3e", worst)};
}

Outcome sigma2_behaviour() {
  const auto d = problems::gen_ridge({80, 100, {}, 909, 0.0});
  const std::vector<double> grid{1e-8, 1e-6, 1e-4, 1e-2, 1e-1, 1.0, 10.0};
  bool nonneg = true;
  for (double l : grid) nonneg = nonneg && problems::sigma2(d.A, d.b, l) >= 0.0;
  const double s8 = problems::sigma2(d.A, d.b, 1e-8), s4 = problems::sigma2(d.A, d.b, 1e-4);
  const double s1 = problems::sigma2(d.A, d.b, 1.0);
  return {nonneg && s4 < s1 && s8 < 1e-6 * s1, "sigma2(1e-8)=" + fmt("%.3e", s8) + " sigma2(1e-4)=" + fmt("%.3e", s4) +
                                                   " sigma2(1)=" + fmt("%.3e", s1) +
                                                   (nonneg ? ", nonnegative on grid" : ", NEGATIVE on grid")};
}

Outcome matrix_fac1_comparison() {
  using namespace proxsps::harness;
  const RunConfig cfg = parse_config(R"(
[problem]
problem = matrix_fac
p = 6
q = 10
N = 1000
upsilon = 1e-5
rank = 4
epsilon = 0
data_seed = 2023

[optimizer]
schedule = constant
regularizer = l2

[run]
epochs = 50
batch_size = 20
seeds = 1, 2, 3, 4, 5, 6, 7, 8, 9, 10

[sweep]
method = sgd, sps, proxsps
alpha0 = 1, 10
lambda = 1e-3
)");
  const ProblemInstance problem(cfg.problem);
  auto final_median = [&](const OptimizerConfig& o) {
    std::vector<double> finals;
    for (std::uint64_t seed : cfg.seeds) finals.push_back(run_single(problem, o, cfg.epochs, cfg.batch_size, seed).back().row.objective);
    std::sort(finals.begin(), finals.end());
    return 0.5 * (finals[4] + finals[5]);
  };
  double best = INFINITY, sps10 = 0, prox1 = 0, prox10 = 0;
  std::string detail;
  for (const OptimizerConfig& o : grid_points(cfg)) {
    const double m = final_median(o);
    best = std::min(best, m);
    detail += run_id(o) + "=" + fmt("%.4g", m) + " ";
    if (o.method.method == Method::sps && o.schedule.alpha0 == 10.0) sps10 = m;
    if (o.method.method == Method::proxsps) (o.schedule.alpha0 == 1.0 ? prox1 : prox10) = m;
  }
  const bool gap = std::isinf(sps10) || sps10 >= 10.0 * prox10;
  const bool near_best = prox1 <= 10.0 * best && prox10 <= 10.0 * best;
  return {gap && near_best, "median final objective: " + detail + "| sps/proxsps at alpha0=10: " +
                                fmt("%.3f", sps10 / prox10) + " (need >= 10), proxsps within 10x of best: " +
                                (near_best ? "yes" : "no")};
}

Outcome unit_invariants() {
  const std::string cmd = std::string(PROXSPS_UNIT_TESTS) + " --gtest_brief=1 > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return {status == 0, "unit test suite exit status " + std::to_string(status)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"update-rule oracle equivalence", update_rule_oracle},
      {"closed form vs bisection", closed_form_vs_bisection},
      {"lambda=0 reduction", lambda_zero_reduction},
      {"folded l2 SGD vs prox-SGD", folded_vs_prox_sgd},
      {"constant-step zero-noise rate", constant_step_rate},
      {"strongly convex decaying-step bound", strongly_convex_decay_rate},
      {"envelope gradient decay", envelope_decay},
      {"SPS step floor", gamma_floor},
      {"sigma2 behaviour", sigma2_behaviour},
      {"matrix-fac1 constant-step comparison", matrix_fac1_comparison},
      {"module invariant suites", unit_invariants},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s: %s [%.1fs] %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
