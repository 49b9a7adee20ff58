#include "netflat/schedule.hpp"

#include <cmath>

#include "netflat/errors.hpp"

namespace netflat {

Schedule Schedule::constant(double value) {
    Schedule s;
    s.kind_ = Kind::Constant;
    s.value_ = value;
    return s;
}

Schedule Schedule::geometric(double scale, double ratio) {
    if (!(ratio > 0.0))
        fail(ErrorKind::Validation, "geometric schedule needs ratio > 0");
    Schedule s;
    s.kind_ = Kind::Geometric;
    s.scale_ = scale;
    s.ratio_ = ratio;
    return s;
}

Schedule Schedule::table(std::vector<double> values) {
    if (values.empty())
        fail(ErrorKind::Validation, "table schedule needs at least one entry");
    Schedule s;
    s.kind_ = Kind::Table;
    s.table_ = std::move(values);
    return s;
}

double Schedule::at(int depth) const {
    switch (kind_) {
        case Kind::Constant: return value_;
        case Kind::Geometric: return scale_ * std::pow(ratio_, depth);
        case Kind::Table: return table_[static_cast<size_t>(depth) % table_.size()];
    }
    return value_;
}

std::optional<double> Schedule::sum_from(int from) const {
    switch (kind_) {
        case Kind::Constant:
            if (value_ == 0.0) return 0.0;
            return std::nullopt;
        case Kind::Geometric:
            if (scale_ == 0.0) return 0.0;
            if (ratio_ >= 1.0) return std::nullopt;
            return scale_ * std::pow(ratio_, from) / (1.0 - ratio_);
        case Kind::Table: {
            double period_sum = 0.0;
            for (double v : table_) period_sum += v;
            if (period_sum == 0.0) return 0.0;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

int Schedule::period() const noexcept {
    return kind_ == Kind::Table ? static_cast<int>(table_.size()) : 1;
}

double Schedule::period_factor() const noexcept {
    return kind_ == Kind::Geometric ? ratio_ : 1.0;
}

bool Schedule::all_positive() const {
    switch (kind_) {
        case Kind::Constant: return value_ > 0.0;
        case Kind::Geometric: return scale_ > 0.0 && ratio_ > 0.0;
        case Kind::Table: {
            for (double v : table_)
                if (!(v > 0.0)) return false;
            return true;
        }
    }
    return false;
}

Schedule Schedule::scaled(double factor) const {
    Schedule s = *this;
    switch (kind_) {
        case Kind::Constant: s.value_ *= factor; break;
        case Kind::Geometric: s.scale_ *= factor; break;
        case Kind::Table:
            for (double& v : s.table_) v *= factor;
            break;
    }
    return s;
}

double DepthRule::at(int depth) const {
    if (depth < static_cast<int>(head_.size())) return head_[static_cast<size_t>(depth)];
    return rest_.at(depth);
}

std::optional<double> DepthRule::sum_from(int from) const {
    double head_part = 0.0;
    for (int k = from; k < static_cast<int>(head_.size()); ++k)
        head_part += head_[static_cast<size_t>(k)];
    int rest_from = std::max(from, static_cast<int>(head_.size()));
    auto rest_part = rest_.sum_from(rest_from);
    if (!rest_part) return std::nullopt;
    return head_part + *rest_part;
}

bool DepthRule::all_positive() const {
    for (double v : head_)
        if (!(v > 0.0)) return false;
    return rest_.all_positive();
}

DepthRule DepthRule::scaled(double factor) const {
    DepthRule r = *this;
    for (double& v : r.head_) v *= factor;
    r.rest_ = r.rest_.scaled(factor);
    return r;
}

}  // namespace netflat
