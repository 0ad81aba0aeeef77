#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proxsps/problems/linear_models.hpp"
#include "proxsps/problems/matrix_fac.hpp"
#include "proxsps/runner.hpp"
#include "proxsps/schedule.hpp"

namespace proxsps::harness {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class ProblemKind { matrix_fac, ridge, logreg };
enum class RegularizerKind { l2, zero, box };

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::matrix_fac: return "matrix_fac";
    case ProblemKind::ridge: return "ridge";
    case ProblemKind::logreg: return "logreg";
  }
  return "?";
}

inline std::string_view to_string(RegularizerKind k) {
  switch (k) {
    case RegularizerKind::l2: return "l2";
    case RegularizerKind::zero: return "zero";
    case RegularizerKind::box: return "box";
  }
  return "?";
}

struct ProblemConfig {
  ProblemKind kind = ProblemKind::matrix_fac;
  problems::MatrixFacConfig matrix_fac;
  problems::RidgeConfig ridge;
  int logreg_N = 0;
  int logreg_n = 0;
  std::uint64_t data_seed = 0;
};

struct OptimizerConfig {
  MethodConfig method;
  Schedule schedule;
  double lambda = 0.0;
  RegularizerKind regularizer = RegularizerKind::l2;
  double box_lo = 0.0;
  double box_hi = 0.0;
};

struct SweepGrid {
  std::vector<double> lambdas;
  std::vector<double> alpha0s;
  std::vector<Method> methods;
};

struct RunConfig {
  ProblemConfig problem;
  OptimizerConfig optimizer;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  std::vector<std::uint64_t> seeds;
  std::string output_path;  // empty: caller decides
  std::optional<SweepGrid> sweep;
};

namespace detail {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

struct Document {
  std::map<std::string, Section> sections;
  std::map<std::string, int> section_lines;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline Document parse_document(std::string_view text) {
  static const std::set<std::string> known{"problem", "optimizer", "run", "sweep"};
  Document doc;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(std::string_view(raw).substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      current = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!known.count(current)) throw ConfigError("unknown section [" + current + "]", line);
      if (doc.section_lines.count(current)) throw ConfigError("duplicate section [" + current + "]", line);
      doc.section_lines[current] = line;
      doc.sections[current];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", line);
    if (current.empty()) throw ConfigError("key outside of any section", line);
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line);
    auto& sec = doc.sections[current];
    if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    sec[key] = {value, line, false};
  }
  return doc;
}

class SectionReader {
 public:
  SectionReader(Section* sec, std::string name, int header_line)
      : sec_(sec), name_(std::move(name)), header_line_(header_line) {}

  bool has(const std::string& key) const { return sec_ && sec_->count(key); }

  const Entry& raw(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required key '" + key + "' in [" + name_ + "]", header_line_);
    Entry& e = sec_->at(key);
    e.used = true;
    return e;
  }

  std::string text(const std::string& key) { return raw(key).value; }

  double real(const std::string& key) {
    const Entry& e = raw(key);
    return to_real(e.value, key, e.line);
  }

  long long integer(const std::string& key) {
    const Entry& e = raw(key);
    return to_integer(e.value, key, e.line);
  }

  std::uint64_t unsigned64(const std::string& key) {
    const Entry& e = raw(key);
    return to_unsigned(e.value, key, e.line);
  }

  std::size_t count(const std::string& key) {
    const Entry& e = raw(key);
    const long long v = to_integer(e.value, key, e.line);
    if (v < 1) throw ConfigError("'" + key + "' must be >= 1", e.line);
    return static_cast<std::size_t>(v);
  }

  std::vector<std::string> list(const std::string& key) {
    const Entry& e = raw(key);
    std::vector<std::string> out;
    std::istringstream in(e.value);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError("empty list element in '" + key + "'", e.line);
      out.push_back(item);
    }
    return out;
  }

  std::vector<double> real_list(const std::string& key) {
    const int line = has(key) ? sec_->at(key).line : header_line_;
    std::vector<double> out;
    for (const auto& s : list(key)) out.push_back(to_real(s, key, line));
    return out;
  }

  std::vector<std::uint64_t> unsigned_list(const std::string& key) {
    const int line = has(key) ? sec_->at(key).line : header_line_;
    std::vector<std::uint64_t> out;
    for (const auto& s : list(key)) out.push_back(to_unsigned(s, key, line));
    return out;
  }

  int line_of(const std::string& key) const { return has(key) ? sec_->at(key).line : header_line_; }

  void reject_unused() const {
    if (!sec_) return;
    for (const auto& [key, e] : *sec_) {
      if (!e.used) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]", e.line);
    }
  }

 private:
  static double to_real(const std::string& s, const std::string& key, int line) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
      throw ConfigError("'" + key + "' expects a finite number, got '" + s + "'", line);
    }
    return v;
  }

  static long long to_integer(const std::string& s, const std::string& key, int line) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
      throw ConfigError("'" + key + "' expects an integer, got '" + s + "'", line);
    }
    return v;
  }

  static std::uint64_t to_unsigned(const std::string& s, const std::string& key, int line) {
    char* end = nullptr;
    errno = 0;
    if (s.empty() || s.front() == '-' || s.front() == '+') {
      throw ConfigError("'" + key + "' expects an unsigned integer, got '" + s + "'", line);
    }
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE) {
      throw ConfigError("'" + key + "' expects an unsigned integer, got '" + s + "'", line);
    }
    return static_cast<std::uint64_t>(v);
  }

  Section* sec_;
  std::string name_;
  int header_line_;
};

inline SectionReader reader(Document& doc, const std::string& name, bool required) {
  auto it = doc.sections.find(name);
  if (it == doc.sections.end()) {
    if (required) throw ConfigError("missing section [" + name + "]", 0);
    return {nullptr, name, 0};
  }
  return {&it->second, name, doc.section_lines.at(name)};
}

inline int to_int(long long v, const std::string& key, int line) {
  if (v < 1 || v > 100000000) throw ConfigError("'" + key + "' must be in [1, 1e8]", line);
  return static_cast<int>(v);
}

inline ProblemConfig parse_problem(SectionReader& r) {
  ProblemConfig p;
  const std::string kind = r.text("problem");
  p.data_seed = r.unsigned64("data_seed");
  if (kind == "matrix_fac") {
    p.kind = ProblemKind::matrix_fac;
    auto& m = p.matrix_fac;
    m.p = to_int(r.integer("p"), "p", r.line_of("p"));
    m.q = to_int(r.integer("q"), "q", r.line_of("q"));
    m.N = to_int(r.integer("N"), "N", r.line_of("N"));
    m.r = to_int(r.integer("rank"), "rank", r.line_of("rank"));
    m.upsilon = r.real("upsilon");
    m.epsilon = r.real("epsilon");
    m.seed = p.data_seed;
    try {
      m.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), r.line_of("problem"));
    }
  } else if (kind == "ridge") {
    p.kind = ProblemKind::ridge;
    auto& c = p.ridge;
    c.N = to_int(r.integer("N"), "N", r.line_of("N"));
    c.n = to_int(r.integer("n"), "n", r.line_of("n"));
    c.noise = r.has("noise") ? r.real("noise") : 0.0;
    if (r.has("lambda_grid")) c.lambda_grid = r.real_list("lambda_grid");
    c.seed = p.data_seed;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), r.line_of("problem"));
    }
  } else if (kind == "logreg") {
    p.kind = ProblemKind::logreg;
    p.logreg_N = to_int(r.integer("N"), "N", r.line_of("N"));
    p.logreg_n = to_int(r.integer("n"), "n", r.line_of("n"));
  } else {
    throw ConfigError("unknown problem '" + kind + "' (expected matrix_fac, ridge or logreg)", r.line_of("problem"));
  }
  return p;
}

inline Method parse_method_at(const std::string& s, int line) {
  const auto m = parse_method(s);
  if (!m) {
    throw ConfigError("unknown method '" + s + "' (expected sgd, prox_sgd, sps, spsmax, proxsps, proxsps_general, decsps)",
                      line);
  }
  return *m;
}

// Method / schedule / regularizer compatibility.
inline void check_combination(const OptimizerConfig& o, int line) {
  const Method m = o.method.method;
  if (folds_regularizer(m) && o.regularizer == RegularizerKind::box) {
    throw ConfigError(std::string(to_string(m)) + " folds the regularizer into the loss; box needs prox_sgd or "
                      "proxsps_general", line);
  }
  if (m == Method::proxsps && o.regularizer == RegularizerKind::box) {
    throw ConfigError("proxsps has a closed form only for l2; use proxsps_general for box", line);
  }
  if (m == Method::decsps && o.schedule.kind != ScheduleKind::constant) {
    throw ConfigError("decsps builds its own decreasing steps; use schedule = constant", line);
  }
  if (o.schedule.kind == ScheduleKind::strong_decay && o.regularizer != RegularizerKind::l2) {
    throw ConfigError("strong_decay schedule needs regularizer = l2", line);
  }
  try {
    o.schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), line);
  }
}

}  // namespace detail

// Validates the [optimizer] section once the swept values are substituted.
inline OptimizerConfig with_grid_point(OptimizerConfig o, Method method, double alpha0, double lambda) {
  o.method.method = method;
  o.schedule.alpha0 = alpha0;
  o.lambda = lambda;
  o.schedule.lambda = lambda;
  return o;
}

// Parses the line-oriented config. With allow_sweep = false a [sweep]
// section is an error.
inline RunConfig parse_config(std::string_view text, bool allow_sweep = true) {
  detail::Document doc = detail::parse_document(text);
  RunConfig cfg;

  auto problem = detail::reader(doc, "problem", true);
  cfg.problem = detail::parse_problem(problem);
  problem.reject_unused();

  auto sweep = detail::reader(doc, "sweep", false);
  if (doc.sections.count("sweep")) {
    if (!allow_sweep) throw ConfigError("[sweep] is only valid for the sweep command", doc.section_lines.at("sweep"));
    SweepGrid grid;
    if (sweep.has("lambda")) grid.lambdas = sweep.real_list("lambda");
    if (sweep.has("alpha0")) grid.alpha0s = sweep.real_list("alpha0");
    if (sweep.has("method")) {
      const int line = sweep.line_of("method");
      for (const auto& s : sweep.list("method")) grid.methods.push_back(detail::parse_method_at(s, line));
    }
    sweep.reject_unused();
    cfg.sweep = grid;
  }
  const bool sweeps_lambda = cfg.sweep && !cfg.sweep->lambdas.empty();
  const bool sweeps_alpha = cfg.sweep && !cfg.sweep->alpha0s.empty();
  const bool sweeps_method = cfg.sweep && !cfg.sweep->methods.empty();

  auto opt = detail::reader(doc, "optimizer", true);
  OptimizerConfig& o = cfg.optimizer;
  o.method.method = sweeps_method && !opt.has("method") ? cfg.sweep->methods.front()
                                                         : detail::parse_method_at(opt.text("method"), opt.line_of("method"));
  const std::string sched = opt.text("schedule");
  const auto kind = parse_schedule_kind(sched);
  if (!kind) {
    throw ConfigError("unknown schedule '" + sched +
                          "' (expected constant, sqrt_epoch, sqrt_iter, sqrt_total, strong_decay)",
                      opt.line_of("schedule"));
  }
  o.schedule.kind = *kind;
  o.lambda = sweeps_lambda && !opt.has("lambda") ? cfg.sweep->lambdas.front() : opt.real("lambda");
  if (o.schedule.kind == ScheduleKind::strong_decay) {
    if (opt.has("alpha0")) throw ConfigError("strong_decay does not take alpha0", opt.line_of("alpha0"));
    o.schedule.alpha0 = 1.0;
    const long long k0 = opt.integer("k0");
    if (k0 < 1) throw ConfigError("'k0' must be >= 1", opt.line_of("k0"));
    o.schedule.k0 = static_cast<std::size_t>(k0);
  } else {
    o.schedule.alpha0 = sweeps_alpha && !opt.has("alpha0") ? cfg.sweep->alpha0s.front() : opt.real("alpha0");
  }
  o.schedule.lambda = o.lambda;
  if (o.schedule.kind == ScheduleKind::sqrt_total) o.schedule.total_iterations = opt.count("K_total");
  if (o.lambda < 0.0) throw ConfigError("'lambda' must be >= 0", opt.line_of("lambda"));

  if (opt.has("regularizer")) {
    const std::string reg = opt.text("regularizer");
    if (reg == "l2") o.regularizer = RegularizerKind::l2;
    else if (reg == "zero") o.regularizer = RegularizerKind::zero;
    else if (reg == "box") o.regularizer = RegularizerKind::box;
    else throw ConfigError("unknown regularizer '" + reg + "' (expected l2, zero or box)", opt.line_of("regularizer"));
  }
  if (o.regularizer == RegularizerKind::box) {
    o.box_lo = opt.real("box_lo");
    o.box_hi = opt.real("box_hi");
    if (!(o.box_lo <= o.box_hi)) throw ConfigError("box_lo must not exceed box_hi", opt.line_of("box_hi"));
  }
  if (o.regularizer != RegularizerKind::l2 && o.lambda != 0.0) {
    throw ConfigError("lambda applies only to regularizer = l2; set lambda = 0", opt.line_of("lambda"));
  }
  if (opt.has("c_scale")) {
    o.method.c_scale = opt.real("c_scale");
    if (!(o.method.c_scale > 0.0)) throw ConfigError("'c_scale' must be positive", opt.line_of("c_scale"));
  }
  if (opt.has("decsps_c0")) {
    o.method.decsps_c0 = opt.real("decsps_c0");
    if (!(o.method.decsps_c0 > 0.0)) throw ConfigError("'decsps_c0' must be positive", opt.line_of("decsps_c0"));
  }
  opt.reject_unused();

  const int opt_line = doc.section_lines.at("optimizer");
  if (cfg.sweep) {
    const auto methods = sweeps_method ? cfg.sweep->methods : std::vector<Method>{o.method.method};
    const auto alphas = sweeps_alpha ? cfg.sweep->alpha0s : std::vector<double>{o.schedule.alpha0};
    const auto lambdas = sweeps_lambda ? cfg.sweep->lambdas : std::vector<double>{o.lambda};
    for (Method m : methods) {
      for (double a : alphas) {
        for (double l : lambdas) {
          if (l < 0.0) throw ConfigError("swept lambda must be >= 0", doc.section_lines.at("sweep"));
          if (o.regularizer != RegularizerKind::l2 && l != 0.0) {
            throw ConfigError("swept lambda applies only to regularizer = l2", doc.section_lines.at("sweep"));
          }
          detail::check_combination(with_grid_point(o, m, a, l), doc.section_lines.at("sweep"));
        }
      }
    }
  } else {
    detail::check_combination(o, opt_line);
  }

  auto run = detail::reader(doc, "run", true);
  cfg.epochs = run.count("epochs");
  cfg.batch_size = run.count("batch_size");
  cfg.seeds = run.unsigned_list("seeds");
  if (cfg.seeds.empty()) throw ConfigError("'seeds' must list at least one seed", run.line_of("seeds"));
  if (run.has("output")) cfg.output_path = run.text("output");
  run.reject_unused();

  std::size_t n = 0;
  switch (cfg.problem.kind) {
    case ProblemKind::matrix_fac: n = static_cast<std::size_t>(cfg.problem.matrix_fac.N); break;
    case ProblemKind::ridge: n = static_cast<std::size_t>(cfg.problem.ridge.N); break;
    case ProblemKind::logreg: n = static_cast<std::size_t>(cfg.problem.logreg_N); break;
  }
  if (cfg.batch_size > n) throw ConfigError("batch_size exceeds the dataset size", run.line_of("batch_size"));
  return cfg;
}

// Only the [problem] section of a ridge config, as used by the sigma2 command.
inline problems::RidgeConfig parse_ridge_problem(std::string_view text) {
  detail::Document doc = detail::parse_document(text);
  for (const auto& [name, sec] : doc.sections) {
    if (name != "problem") throw ConfigError("sigma2 reads only [problem]; found [" + name + "]", doc.section_lines.at(name));
  }
  auto problem = detail::reader(doc, "problem", true);
  ProblemConfig p = detail::parse_problem(problem);
  problem.reject_unused();
  if (p.kind != ProblemKind::ridge) throw ConfigError("sigma2 needs problem = ridge", problem.line_of("problem"));
  if (p.ridge.lambda_grid.empty()) throw ConfigError("sigma2 needs lambda_grid", problem.line_of("problem"));
  return p.ridge;
}

}  // namespace proxsps::harness
