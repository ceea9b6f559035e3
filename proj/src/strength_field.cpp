#include "pinning/strength_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pinning/errors.hpp"

namespace pinning {

namespace {

class ForwardingStrength final : public BoundStrength {
public:
    ForwardingStrength(const StrengthField& field, const TorusGrid& grid) : field_(field), grid_(grid) {}

    void evaluate(std::span<const double> heights, std::span<double> out) override {
        field_.evaluate(grid_, heights, out);
    }

private:
    const StrengthField& field_;
    TorusGrid grid_;
};

}  // namespace

std::unique_ptr<BoundStrength> StrengthField::bind(const TorusGrid& grid) const {
    return std::make_unique<ForwardingStrength>(*this, grid);
}

LateralStrength::LateralStrength(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError("lateral strength: values must be finite and non-negative");
        }
        sup_ = std::max(sup_, v);
    }
}

void LateralStrength::evaluate(const TorusGrid& grid, std::span<const double> /*heights*/,
                               std::span<double> out) const {
    if (values_.size() != grid.size() || out.size() != grid.size()) {
        throw ContractViolation("lateral strength: expected " + std::to_string(grid.size()) + " nodes, have " +
                                std::to_string(values_.size()));
    }
    std::copy(values_.begin(), values_.end(), out.begin());
}

}  // namespace pinning
