#pragma once

// Exhaustive grid search: the `tune` builtin generated scripts call.

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace edagent::dse {

struct ParamRange {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
  /// Set when min and step are whole numbers, so callers can present grid
  /// values as integers.
  bool integral = false;
};

class DseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyAxis : public DseError {
 public:
  EmptyAxis(std::string name, const std::string& reason);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class InvalidSpace : public DseError {
 public:
  using DseError::DseError;
};

class NoSuccessfulTrial : public DseError {
 public:
  explicit NoSuccessfulTrial(std::size_t evaluations);
};

/// Thrown by an evaluation function to mark one grid point as failed. Any
/// other exception aborts the search.
class TrialFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named axes in declaration order; the first axis is the outermost loop.
class ParamSpace {
 public:
  ParamSpace() = default;
  ParamSpace(std::initializer_list<std::pair<std::string, ParamRange>> axes);

  void add(std::string name, ParamRange range);  // throws InvalidSpace on duplicates

  const std::vector<std::pair<std::string, ParamRange>>& axes() const noexcept { return axes_; }
  std::size_t size() const noexcept { return axes_.size(); }
  bool empty() const noexcept { return axes_.empty(); }

 private:
  std::vector<std::pair<std::string, ParamRange>> axes_;
};

using ParamPoint = std::vector<std::pair<std::string, double>>;

/// Values of one axis: min + k*step for k = 0, 1, ... while within max.
/// A value within 1e-9*step of max is snapped to max exactly.
std::vector<double> axis_values(const std::string& name, const ParamRange& range);

/// Cartesian product of the axes, addressed by index. The last axis varies
/// fastest. Points are materialized on demand.
class Grid {
 public:
  explicit Grid(const ParamSpace& space);

  std::size_t size() const noexcept { return size_; }
  ParamPoint point(std::size_t index) const;
  const std::vector<std::vector<double>>& axes() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> values_;
  std::size_t size_ = 0;
};

/// Throws EmptyAxis for an axis with no values and InvalidSpace for an empty
/// space or a grid too large to index.
Grid enumerate_grid(const ParamSpace& space);

struct Trial {
  ParamPoint params;
  std::optional<double> objective;
  bool ok = false;
  std::optional<std::string> fault;
};

struct TuneResult {
  Trial best;
  std::size_t best_index = 0;
  std::vector<Trial> trials;
  std::size_t evaluations = 0;
};

using EvalFn = std::function<double(const ParamPoint&)>;

/// Minimizes eval_fn over the grid in enumeration order, stopping after
/// `budget` evaluations when given. Failed points (TrialFault or a
/// non-finite objective) are recorded and skipped. Ties keep the earliest
/// trial. Throws NoSuccessfulTrial when nothing succeeded.
TuneResult tune(const EvalFn& eval_fn, const ParamSpace& space,
                std::optional<std::size_t> budget = std::nullopt);

/// Same result as tune() for a pure eval_fn, evaluated on `threads` workers.
TuneResult tune_parallel(const EvalFn& eval_fn, const ParamSpace& space, unsigned threads,
                         std::optional<std::size_t> budget = std::nullopt);

/// CSV with columns trial,<axis names...>,objective,ok.
void write_trials_csv(std::ostream& out, const ParamSpace& space, const TuneResult& result);

}  // namespace edagent::dse
