#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "trajphase/errors.hpp"

namespace trajphase {

/// A time-dependent value that is either constant or piecewise constant on a
/// uniform grid starting at t = 0. Cell k covers [k*spacing, (k+1)*spacing).
template <class T>
class Schedule {
public:
    Schedule() : values_{T{}} {}
    Schedule(T constant) : values_{std::move(constant)} {}  // NOLINT: implicit by intent

    static Schedule piecewise(std::vector<T> values, double spacing) {
        if (values.empty()) throw InvalidArgument("piecewise schedule needs at least one value");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw InvalidArgument("piecewise schedule spacing must be positive");
        Schedule s;
        s.values_ = std::move(values);
        s.spacing_ = spacing;
        return s;
    }

    bool is_constant() const { return spacing_ == 0.0; }
    double spacing() const { return spacing_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<T>& values() const { return values_; }

    /// End of the covered interval (infinite for constants).
    double end() const {
        if (is_constant()) return std::numeric_limits<double>::infinity();
        return spacing_ * static_cast<double>(values_.size());
    }

    bool covers(double t0, double t1) const {
        if (is_constant()) return true;
        const double slack = 1e-12 * std::max(1.0, end());
        return t0 >= -slack && t1 <= end() + slack;
    }

    const T& at(double t) const {
        if (is_constant()) return values_.front();
        const double slack = 1e-12 * std::max(1.0, end());
        if (t < -slack || t > end() + slack)
            throw DomainError("schedule queried at t=" + std::to_string(t) + " outside [0, " +
                              std::to_string(end()) + "]");
        auto idx = static_cast<long>(std::floor(t / spacing_));
        idx = std::clamp(idx, 0L, static_cast<long>(values_.size()) - 1);
        return values_[static_cast<std::size_t>(idx)];
    }

    /// Cell boundaries inside [0, end]; a constant schedule reports {0}.
    std::vector<double> grid_times() const {
        std::vector<double> out;
        if (is_constant()) {
            out.push_back(0.0);
            return out;
        }
        for (std::size_t k = 0; k <= values_.size(); ++k) out.push_back(spacing_ * static_cast<double>(k));
        return out;
    }

    template <class Fn>
    auto map(Fn&& fn) const -> Schedule<std::decay_t<std::invoke_result_t<Fn, const T&>>> {
        using U = std::decay_t<std::invoke_result_t<Fn, const T&>>;
        std::vector<U> out;
        out.reserve(values_.size());
        for (const auto& v : values_) out.push_back(fn(v));
        if (is_constant()) return Schedule<U>(std::move(out.front()));
        return Schedule<U>::piecewise(std::move(out), spacing_);
    }

private:
    std::vector<T> values_;
    double spacing_ = 0.0;
};

/// Combines two schedules cell by cell. Piecewise inputs must share a grid
/// unless one of them is constant.
template <class A, class B, class Fn>
auto zip_schedules(const Schedule<A>& a, const Schedule<B>& b, Fn&& fn)
    -> Schedule<std::decay_t<std::invoke_result_t<Fn, const A&, const B&>>> {
    using U = std::decay_t<std::invoke_result_t<Fn, const A&, const B&>>;
    if (a.is_constant() && b.is_constant()) return Schedule<U>(fn(a.values().front(), b.values().front()));
    if (!a.is_constant() && !b.is_constant()) {
        if (a.size() != b.size() || std::abs(a.spacing() - b.spacing()) > 1e-12 * a.spacing())
            throw InvalidArgument("piecewise schedules live on different grids");
    }
    const std::size_t n = a.is_constant() ? b.size() : a.size();
    const double spacing = a.is_constant() ? b.spacing() : a.spacing();
    std::vector<U> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const A& va = a.is_constant() ? a.values().front() : a.values()[k];
        const B& vb = b.is_constant() ? b.values().front() : b.values()[k];
        out.push_back(fn(va, vb));
    }
    return Schedule<U>::piecewise(std::move(out), spacing);
}

}  // namespace trajphase
