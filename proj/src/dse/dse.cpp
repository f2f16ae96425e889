#include "edagent/dse/dse.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace edagent::dse {

namespace {

constexpr std::size_t kMaxGridPoints = std::size_t{1} << 40;

Trial evaluate_point(const EvalFn& eval_fn, ParamPoint point) {
  Trial t;
  t.params = std::move(point);
  try {
    const double v = eval_fn(t.params);
    if (std::isfinite(v)) {
      t.objective = v;
      t.ok = true;
    } else {
      t.fault = "non-finite objective";
    }
  } catch (const TrialFault& e) {
    t.fault = e.what();
  }
  return t;
}

TuneResult reduce(std::vector<Trial> trials) {
  TuneResult r;
  r.evaluations = trials.size();
  bool found = false;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    if (!t.ok) continue;
    if (!found || *t.objective < *r.best.objective) {
      r.best = t;
      r.best_index = i;
      found = true;
    }
  }
  if (!found) throw NoSuccessfulTrial(r.evaluations);
  r.trials = std::move(trials);
  return r;
}

std::size_t evaluation_count(const Grid& grid, std::optional<std::size_t> budget) {
  return budget ? std::min(*budget, grid.size()) : grid.size();
}

}  // namespace

EmptyAxis::EmptyAxis(std::string name, const std::string& reason)
    : DseError("EmptyAxis(\"" + name + "\"): " + reason), name_(std::move(name)) {}

NoSuccessfulTrial::NoSuccessfulTrial(std::size_t evaluations)
    : DseError("NoSuccessfulTrial: all " + std::to_string(evaluations) + " trials failed") {}

ParamSpace::ParamSpace(std::initializer_list<std::pair<std::string, ParamRange>> axes) {
  for (const auto& [name, range] : axes) add(name, range);
}

void ParamSpace::add(std::string name, ParamRange range) {
  for (const auto& axis : axes_) {
    if (axis.first == name) throw InvalidSpace("duplicate parameter \"" + name + "\"");
  }
  axes_.emplace_back(std::move(name), range);
}

std::vector<double> axis_values(const std::string& name, const ParamRange& range) {
  if (!std::isfinite(range.min) || !std::isfinite(range.max) || !std::isfinite(range.step)) {
    throw EmptyAxis(name, "bounds and step must be finite");
  }
  if (!(range.step > 0)) throw EmptyAxis(name, "step must be positive");
  const double tol = 1e-9 * range.step;
  if (range.min > range.max + tol) throw EmptyAxis(name, "min exceeds max");

  const double span = (range.max - range.min) / range.step;
  if (span > 1e9) throw InvalidSpace("axis \"" + name + "\" has too many points");

  std::vector<double> values;
  for (std::size_t k = 0;; ++k) {
    double v = range.min + static_cast<double>(k) * range.step;
    if (v > range.max + tol) break;
    if (std::abs(v - range.max) <= tol) v = range.max;
    values.push_back(v);
  }
  return values;
}

Grid::Grid(const ParamSpace& space) {
  if (space.empty()) throw InvalidSpace("parameter space has no axes");
  size_ = 1;
  for (const auto& [name, range] : space.axes()) {
    names_.push_back(name);
    values_.push_back(axis_values(name, range));
    const std::size_t n = values_.back().size();
    if (size_ > kMaxGridPoints / n) throw InvalidSpace("grid too large");
    size_ *= n;
  }
}

ParamPoint Grid::point(std::size_t index) const {
  ParamPoint p(names_.size());
  for (std::size_t a = names_.size(); a-- > 0;) {
    const auto& axis = values_[a];
    p[a] = {names_[a], axis[index % axis.size()]};
    index /= axis.size();
  }
  return p;
}

Grid enumerate_grid(const ParamSpace& space) { return Grid(space); }

TuneResult tune(const EvalFn& eval_fn, const ParamSpace& space, std::optional<std::size_t> budget) {
  const Grid grid(space);
  const std::size_t n = evaluation_count(grid, budget);
  std::vector<Trial> trials;
  trials.reserve(n);
  for (std::size_t i = 0; i < n; ++i) trials.push_back(evaluate_point(eval_fn, grid.point(i)));
  return reduce(std::move(trials));
}

TuneResult tune_parallel(const EvalFn& eval_fn, const ParamSpace& space, unsigned threads,
                         std::optional<std::size_t> budget) {
  const Grid grid(space);
  const std::size_t n = evaluation_count(grid, budget);
  std::vector<Trial> trials(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        trials[i] = evaluate_point(eval_fn, grid.point(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned count = std::max(1u, threads);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return reduce(std::move(trials));
}

void write_trials_csv(std::ostream& out, const ParamSpace& space, const TuneResult& result) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "trial";
  for (const auto& [name, range] : space.axes()) out << ',' << name;
  out << ",objective,ok\n";
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const Trial& t = result.trials[i];
    out << i;
    for (const auto& [name, value] : t.params) out << ',' << value;
    out << ',';
    if (t.objective) out << *t.objective;
    out << ',' << (t.ok ? "true" : "false") << '\n';
  }
  out.precision(old_precision);
}

}  // namespace edagent::dse
