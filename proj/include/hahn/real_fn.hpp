#pragma once

#include <functional>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace hahn {

/// Finitely supported description of a function: `points` carry arbitrary
/// values, every other argument maps to `default_value`. Series summation uses
/// it to stop once an orbit can no longer reach a support point.
struct FiniteSupport {
  std::vector<double> points;
  double default_value = 0.0;
};

/// A deterministic real function of one real variable.
class RealFn {
 public:
  using Callable = std::function<double(double)>;

  RealFn() = default;

  template <typename F>
    requires std::is_invocable_r_v<double, F, double> &&
             (!std::is_same_v<std::remove_cvref_t<F>, RealFn>)
  RealFn(F&& f, std::string label = {})  // NOLINT(google-explicit-constructor)
      : fn_(std::make_shared<const Callable>(std::forward<F>(f))), label_(std::move(label)) {}

  RealFn(Callable f, std::shared_ptr<const FiniteSupport> support, std::string label)
      : fn_(std::make_shared<const Callable>(std::move(f))),
        support_(std::move(support)),
        label_(std::move(label)) {}

  double operator()(double t) const { return (*fn_)(t); }

  explicit operator bool() const noexcept { return fn_ != nullptr && static_cast<bool>(*fn_); }

  /// Non-null only for finitely supported functions (lattice tables).
  const FiniteSupport* support() const noexcept { return support_.get(); }

  const std::string& label() const noexcept { return label_; }

 private:
  std::shared_ptr<const Callable> fn_;
  std::shared_ptr<const FiniteSupport> support_;
  std::string label_;
};

}  // namespace hahn
