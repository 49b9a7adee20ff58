#pragma once

#include <optional>
#include <vector>

namespace netflat {

// Closed-form per-depth weight rule for tails: constant, geometric
// (scale * ratio^k), or an explicit table continued periodically.
// These three shapes keep series sums and suprema exactly computable.
class Schedule {
public:
    enum class Kind { Constant, Geometric, Table };

    static Schedule constant(double value);
    static Schedule geometric(double scale, double ratio);
    static Schedule table(std::vector<double> values);

    Kind kind() const noexcept { return kind_; }
    double at(int depth) const;

    // Sum_{k >= from} at(k). nullopt when the series diverges.
    std::optional<double> sum_from(int from) const;

    // Multiplicative structure: at(k + period) == period_factor * at(k).
    int period() const noexcept;
    double period_factor() const noexcept;

    bool all_positive() const;
    Schedule scaled(double factor) const;

    // Accessors for serialization.
    double value() const noexcept { return value_; }
    double scale() const noexcept { return scale_; }
    double ratio() const noexcept { return ratio_; }
    const std::vector<double>& table_values() const noexcept { return table_; }

private:
    Kind kind_ = Kind::Constant;
    double value_ = 1.0;
    double scale_ = 1.0;
    double ratio_ = 1.0;
    std::vector<double> table_;
};

// Per-depth values with an irregular head followed by a schedule evaluated at
// the absolute depth. Covers derived vertex weights whose depth-0 value
// depends on attachment edges.
class DepthRule {
public:
    DepthRule() = default;
    DepthRule(std::vector<double> head, Schedule rest)
        : head_(std::move(head)), rest_(std::move(rest)) {}

    static DepthRule pure(Schedule s) { return DepthRule({}, std::move(s)); }

    double at(int depth) const;
    std::optional<double> sum_from(int from) const;

    const std::vector<double>& head() const noexcept { return head_; }
    const Schedule& rest() const noexcept { return rest_; }
    bool all_positive() const;
    DepthRule scaled(double factor) const;

private:
    std::vector<double> head_;
    Schedule rest_ = Schedule::constant(1.0);
};

}  // namespace netflat
