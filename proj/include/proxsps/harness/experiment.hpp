#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "proxsps/harness/config.hpp"
#include "proxsps/problems/linear_models.hpp"
#include "proxsps/problems/matrix_fac.hpp"
#include "proxsps/regularizers.hpp"
#include "proxsps/runner.hpp"

namespace proxsps::harness {

inline constexpr const char* kCsvHeader =
    "run_id,seed,epoch,objective,train_loss,val_metric,param_norm,zeta_median,step_median,diverged";

struct ResultRow {
  std::string run_id;
  std::uint64_t seed = 0;
  EpochRow row;
};

// A problem instance together with its per-seed state.
class ProblemInstance {
 public:
  explicit ProblemInstance(const ProblemConfig& cfg) : cfg_(cfg) {
    switch (cfg.kind) {
      case ProblemKind::matrix_fac: mf_data_ = problems::gen_matrix_fac(cfg.matrix_fac); break;
      case ProblemKind::ridge: {
        auto d = problems::gen_ridge(cfg.ridge);
        objective_ = std::make_unique<problems::RidgeObjective>(std::move(d.A), std::move(d.b));
        break;
      }
      case ProblemKind::logreg: {
        auto d = problems::gen_logreg(cfg.logreg_N, cfg.logreg_n, cfg.data_seed);
        objective_ = std::make_unique<problems::LogisticObjective>(std::move(d.A), std::move(d.labels));
        break;
      }
    }
  }

  // Objective for one seed. Matrix factorization draws a fresh validation set
  // from the noise-free matrix per seed; the training set is shared.
  std::unique_ptr<StochasticObjective> objective_for(std::uint64_t seed) const {
    if (cfg_.kind == ProblemKind::matrix_fac) {
      problems::MatrixFacData data = mf_data_;
      RngStream val_rng = RngStream::derived(seed, 101);
      problems::resample_validation(data, val_rng);
      return std::make_unique<problems::MatrixFactorizationObjective>(std::move(data.dataset), cfg_.matrix_fac.r);
    }
    return nullptr;
  }

  // Shared objective for ridge and logreg.
  const StochasticObjective* shared() const { return objective_.get(); }

  // Shared by all seeds: drawn from the data seed for matrix factorization, zero otherwise.
  ParamVector initial_point(const StochasticObjective& f) const {
    if (const auto* mf = dynamic_cast<const problems::MatrixFactorizationObjective*>(&f)) {
      return mf->initial_point(cfg_.data_seed);
    }
    return ParamVector(f.layout());
  }

 private:
  ProblemConfig cfg_;
  problems::MatrixFacData mf_data_;
  std::unique_ptr<StochasticObjective> objective_;
};

inline std::unique_ptr<Regularizer> make_regularizer(const OptimizerConfig& o) {
  switch (o.regularizer) {
    case RegularizerKind::l2: return std::make_unique<L2Regularizer>(o.lambda);
    case RegularizerKind::zero: return std::make_unique<ZeroRegularizer>();
    case RegularizerKind::box: return std::make_unique<BoxRegularizer>(o.box_lo, o.box_hi);
  }
  return nullptr;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string short_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string run_id(const OptimizerConfig& o) {
  std::string id(to_string(o.method.method));
  if (o.schedule.kind == ScheduleKind::strong_decay) {
    id += "/k0=" + std::to_string(o.schedule.k0);
  } else {
    id += "/a0=" + short_double(o.schedule.alpha0);
  }
  id += "/lam=" + short_double(o.lambda);
  return id;
}

// Every grid point of the config in (method, alpha0, lambda) order.
inline std::vector<OptimizerConfig> grid_points(const RunConfig& cfg) {
  if (!cfg.sweep) return {cfg.optimizer};
  const auto& s = *cfg.sweep;
  const auto& o = cfg.optimizer;
  const auto methods = s.methods.empty() ? std::vector<Method>{o.method.method} : s.methods;
  const auto alphas = s.alpha0s.empty() ? std::vector<double>{o.schedule.alpha0} : s.alpha0s;
  const auto lambdas = s.lambdas.empty() ? std::vector<double>{o.lambda} : s.lambdas;
  std::vector<OptimizerConfig> out;
  for (Method m : methods) {
    for (double a : alphas) {
      for (double l : lambdas) out.push_back(with_grid_point(o, m, a, l));
    }
  }
  return out;
}

// Runs one grid point for one seed. The seed drives the mini-batch order and
// (matrix factorization) the validation sample.
inline std::vector<ResultRow> run_single(const ProblemInstance& problem, const OptimizerConfig& o, std::size_t epochs,
                                         std::size_t batch_size, std::uint64_t seed) {
  std::unique_ptr<StochasticObjective> owned = problem.objective_for(seed);
  const StochasticObjective& f = owned ? *owned : *problem.shared();
  const auto reg = make_regularizer(o);
  RngStream rng = RngStream::derived(seed, 100);
  const ParamVector x0 = problem.initial_point(f);
  RunOptions opts;
  opts.keep_steps = false;
  const RunResult res = run_optimizer(f, *reg, o.method, o.schedule, epochs, batch_size, rng, x0, opts);
  std::vector<ResultRow> rows;
  const std::string id = run_id(o);
  for (const EpochRow& r : res.rows) rows.push_back({id, seed, r});
  return rows;
}

// Rows in (grid point, seed, epoch) order.
inline std::vector<ResultRow> run_experiment(const RunConfig& cfg) {
  const ProblemInstance problem(cfg.problem);
  std::vector<ResultRow> rows;
  for (const OptimizerConfig& o : grid_points(cfg)) {
    for (std::uint64_t seed : cfg.seeds) {
      auto part = run_single(problem, o, cfg.epochs, cfg.batch_size, seed);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  return rows;
}

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    const EpochRow& e = r.row;
    out << r.run_id << ',' << r.seed << ',' << e.epoch << ',' << format_double(e.objective) << ','
        << format_double(e.train_loss) << ',' << format_double(e.val_metric) << ',' << format_double(e.param_norm)
        << ',' << format_double(e.zeta_median) << ',' << format_double(e.step_median) << ',' << (e.diverged ? 1 : 0)
        << '\n';
  }
}

}  // namespace proxsps::harness
