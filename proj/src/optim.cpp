#include "qaccel/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "qaccel/errors.hpp"

namespace qaccel {

namespace {

struct BudgetExhausted {};

/// Counts cost units and remembers the best point seen.
class CountedObjective {
public:
  CountedObjective(const std::function<double(std::span<const double>)>& f, int budget)
      : f_(f), budget_(budget) {}

  double operator()(std::span<const double> x) {
    charge(1);
    double v = f_(x);
    note(x, v);
    return v;
  }

  void charge(int units) {
    if (used_ + units > budget_) throw BudgetExhausted{};
    used_ += units;
  }

  void note(std::span<const double> x, double v) {
    if (best_x_.empty() || v > best_value_) {
      best_value_ = v;
      best_x_.assign(x.begin(), x.end());
    }
  }

  int used() const { return used_; }
  const std::vector<double>& best_x() const { return best_x_; }
  double best_value() const { return best_value_; }

private:
  const std::function<double(std::span<const double>)>& f_;
  int budget_;
  int used_ = 0;
  std::vector<double> best_x_;
  double best_value_ = -std::numeric_limits<double>::infinity();
};

// Standard Nelder-Mead on -f with reflection 1, expansion 2, contraction 1/2,
// shrink 1/2. Exits by BudgetExhausted or on collapse of the simplex.
void run_nelder_mead(CountedObjective& f, std::vector<double> x0, double step) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  vals[0] = f(pts[0]);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += step;
    vals[i + 1] = f(pts[i + 1]);
  }

  std::vector<std::size_t> idx(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto blend = [&](const std::vector<double>& base, double t, std::vector<double>& out,
                   const std::vector<double>& worst) {
    for (std::size_t k = 0; k < n; ++k) out[k] = base[k] + t * (base[k] - worst[k]);
  };

  for (;;) {
    std::iota(idx.begin(), idx.end(), 0);
    // Descending by value: idx[0] best, idx[n] worst.
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
    const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];

    double spread = vals[best] - vals[worst];
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(pts[idx[i]][k] - pts[best][k]));
      }
    }
    if (spread <= 1e-13 * (1.0 + std::abs(vals[best])) && diameter < 1e-9) return;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[idx[i]][k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    blend(centroid, 1.0, trial, pts[worst]);
    const double fr = f(trial);
    if (fr > vals[best]) {
      blend(centroid, 2.0, trial2, pts[worst]);
      const double fe = f(trial2);
      if (fe > fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr > vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflection beat the worst, else inside.
    const bool outside = fr > vals[worst];
    blend(centroid, outside ? 0.5 : -0.5, trial2, pts[worst]);
    const double fc = f(trial2);
    if (fc > (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      auto& p = pts[idx[i]];
      for (std::size_t k = 0; k < n; ++k) p[k] = pts[best][k] + 0.5 * (p[k] - pts[best][k]);
      vals[idx[i]] = f(p);
    }
  }
}

OptResult simplex_optimize(const QaoaEvaluator& ev, const ParameterVector& init,
                           int budget, double step_scale) {
  std::function<double(std::span<const double>)> objective =
      [&](std::span<const double> x) {
        return ev.score(ParameterVector(std::vector<double>(x.begin(), x.end())));
      };
  CountedObjective f(objective, budget);
  try {
    run_nelder_mead(f, std::vector<double>(init.values().begin(), init.values().end()),
                    0.1 * step_scale);
  } catch (const BudgetExhausted&) {
  }
  OptResult r;
  r.params = ParameterVector(f.best_x());
  r.score = f.best_value();
  r.evaluations = f.used();
  return r;
}

// BFGS minimizing -score with an Armijo backtracking line search.
OptResult quasi_newton_optimize(const QaoaEvaluator& ev, const ParameterVector& init,
                                int budget, double step_scale) {
  const std::size_t n = init.size();
  int used = 0;
  OptResult r;
  r.params = init;

  if (budget < kGradientCost) {
    r.score = ev.score(init);
    r.evaluations = 1;
    return r;
  }

  std::vector<double> x(init.values().begin(), init.values().end());
  auto sg = ev.score_and_gradient(init);
  used += kGradientCost;
  double fx = -sg.score;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = -sg.gradient[i];
  r.score = sg.score;

  // Inverse Hessian approximation, row-major.
  std::vector<double> h(n * n, 0.0);
  auto reset_h = [&](double scale) {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = scale;
  };
  reset_h(step_scale);
  bool first_step = true;

  std::vector<double> d(n), xn(n), gn(n), s(n), y(n), hy(n);
  while (used + kGradientCost <= budget) {
    double gmax = 0.0;
    for (double gi : g) gmax = std::max(gmax, std::abs(gi));
    if (gmax < 1e-9) break;

    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc -= h[i * n + j] * g[j];
      d[i] = acc;
    }
    double slope = std::inner_product(g.begin(), g.end(), d.begin(), 0.0);
    if (!(slope < 0.0)) {
      reset_h(step_scale);
      for (std::size_t i = 0; i < n; ++i) d[i] = -step_scale * g[i];
      slope = std::inner_product(g.begin(), g.end(), d.begin(), 0.0);
    }

    // The full step is tried with its gradient since it is usually taken;
    // backtracking trials are scored alone and the gradient is computed
    // once a point passes the Armijo test.
    double alpha = 1.0;
    bool accepted = false;
    double fn = 0.0;
    for (int tries = 0; tries < 40; ++tries) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + alpha * d[i];
      const ParameterVector trial(xn);
      bool have_gradient = false;
      if (tries == 0) {
        if (used + kGradientCost > budget) break;
        auto t = ev.score_and_gradient(trial);
        used += kGradientCost;
        fn = -t.score;
        for (std::size_t i = 0; i < n; ++i) gn[i] = -t.gradient[i];
        have_gradient = true;
      } else {
        if (used + 1 > budget) break;
        fn = -ev.score(trial);
        used += 1;
      }
      if (-fn > r.score) {
        r.score = -fn;
        r.params = trial;
      }
      if (fn <= fx + 1e-4 * alpha * slope) {
        if (!have_gradient) {
          if (used + kGradientCost > budget) break;
          auto t = ev.score_and_gradient(trial);
          used += kGradientCost;
          for (std::size_t i = 0; i < n; ++i) gn[i] = -t.gradient[i];
        }
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    const double improvement = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    if (sy > 1e-12) {
      if (first_step) {
        const double yy = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
        reset_h(sy / yy);
        first_step = false;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += h[i * n + j] * y[j];
        hy[i] = acc;
      }
      const double yhy = std::inner_product(y.begin(), y.end(), hy.begin(), 0.0);
      const double rho = 1.0 / sy;
      const double coef = (1.0 + rho * yhy) * rho;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
      }
    }
    if (improvement <= 1e-15 * (1.0 + std::abs(fx))) break;
  }
  r.evaluations = used;
  return r;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::simplex:
      return "derivative-free-simplex";
    case Method::quasi_newton:
      return "quasi-newton-gradient";
  }
  return "unknown";
}

Method parse_method(std::string_view id) {
  if (id == "derivative-free-simplex") return Method::simplex;
  if (id == "quasi-newton-gradient") return Method::quasi_newton;
  throw OptimizerError("unknown optimization method '" + std::string(id) + "'");
}

void OptSchedule::validate() const {
  if (entries.empty()) throw OptimizerError("optimization schedule has no entries");
  for (const auto& e : entries) {
    if (e.max_evaluations < 1) throw OptimizerError("schedule budgets must be positive");
    if (!(e.step_scale > 0.0)) throw OptimizerError("schedule step scales must be positive");
  }
  if (max_rounds < 1) throw OptimizerError("schedule needs at least one round");
  if (!(epsilon >= 0.0)) throw OptimizerError("schedule epsilon must be non-negative");
}

int OptSchedule::budget_per_round() const {
  int total = 0;
  for (const auto& e : entries) total += e.max_evaluations;
  return total;
}

OptSchedule OptSchedule::single(Method m, int budget, double step_scale) {
  OptSchedule s;
  s.entries.push_back({m, budget, step_scale});
  return s;
}

nlohmann::json OptSchedule::to_json() const {
  nlohmann::json methods = nlohmann::json::array();
  nlohmann::json budgets = nlohmann::json::array();
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& e : entries) {
    methods.push_back(std::string(qaccel::to_string(e.method)));
    budgets.push_back(e.max_evaluations);
    rates.push_back(e.step_scale);
  }
  nlohmann::json eps = std::isinf(epsilon) ? nlohmann::json("inf") : nlohmann::json(epsilon);
  return {{"methods", methods}, {"budgets", budgets}, {"learning_rates", rates},
          {"epsilon", eps}, {"rounds", max_rounds}};
}

OptSchedule OptSchedule::from_json(const nlohmann::json& j) {
  OptSchedule s;
  const auto& methods = j.at("methods");
  const auto& budgets = j.at("budgets");
  if (methods.size() != budgets.size()) {
    throw OptimizerError("schedule 'methods' and 'budgets' differ in length");
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    ScheduleEntry e;
    e.method = parse_method(methods[i].get<std::string>());
    e.max_evaluations = budgets[i].get<int>();
    if (j.contains("learning_rates")) e.step_scale = j["learning_rates"].at(i).get<double>();
    s.entries.push_back(e);
  }
  if (j.contains("epsilon")) {
    const auto& eps = j["epsilon"];
    s.epsilon = eps.is_string() && eps.get<std::string>() == "inf"
                    ? std::numeric_limits<double>::infinity()
                    : eps.get<double>();
  }
  if (j.contains("rounds")) s.max_rounds = j["rounds"].get<int>();
  s.validate();
  return s;
}

ParameterVector random_parameters(int depth, std::mt19937_64& rng) {
  if (depth < 1) throw OptimizerError("depth must be >= 1");
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> gamma(-pi, pi);
  std::uniform_real_distribution<double> beta(-pi / 2, pi / 2);
  std::vector<double> v;
  v.reserve(2 * static_cast<std::size_t>(depth));
  for (int l = 0; l < depth; ++l) {
    // Two statements keep the draw order fixed (gamma first).
    double g = gamma(rng);
    double b = beta(rng);
    v.push_back(g);
    v.push_back(b);
  }
  return ParameterVector(std::move(v));
}

OptResult local_optimize(const QaoaEvaluator& evaluator, const ParameterVector& init,
                         Method method, int budget, double step_scale) {
  if (budget < 1) throw OptimizerError("optimization budget must be >= 1");
  OptResult r = method == Method::simplex
                    ? simplex_optimize(evaluator, init, budget, step_scale)
                    : quasi_newton_optimize(evaluator, init, budget, step_scale);
  r.trace.push_back({method, 1, r.score, r.evaluations});
  return r;
}

OptResult local_optimize(const QaoaEvaluator& evaluator, const ParameterVector& init,
                         std::string_view method_id, int budget, double step_scale) {
  return local_optimize(evaluator, init, parse_method(method_id), budget, step_scale);
}

OptResult alternating_optimize(const QaoaEvaluator& evaluator,
                               const ParameterVector& init,
                               const OptSchedule& schedule) {
  schedule.validate();
  OptResult out;
  out.params = init;
  out.score = evaluator.score(init);
  out.evaluations = 1;

  for (int round = 1; round <= schedule.max_rounds; ++round) {
    const double round_start = out.score;
    for (const auto& entry : schedule.entries) {
      OptResult r = local_optimize(evaluator, out.params, entry.method,
                                   entry.max_evaluations, entry.step_scale);
      out.evaluations += r.evaluations;
      if (r.score > out.score) {
        out.score = r.score;
        out.params = r.params;
      }
      out.trace.push_back({entry.method, round, out.score, r.evaluations});
    }
    if (!(out.score - round_start >= schedule.epsilon)) break;
  }
  return out;
}

MaximizeResult nelder_mead_maximize(
    const std::function<double(std::span<const double>)>& objective,
    std::vector<double> x0, double initial_step, int budget) {
  if (budget < 1) throw OptimizerError("optimization budget must be >= 1");
  if (x0.empty()) throw OptimizerError("cannot optimize over zero dimensions");
  CountedObjective f(objective, budget);
  try {
    run_nelder_mead(f, std::move(x0), initial_step);
  } catch (const BudgetExhausted&) {
  }
  return {f.best_x(), f.best_value(), f.used()};
}

}  // namespace qaccel
