#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pfbound {

/// A point in n-dimensional standard-normal space (n >= 1, finite entries).
class ParameterVector {
public:
    explicit ParameterVector(std::vector<double> components);
    ParameterVector(std::initializer_list<double> components);

    [[nodiscard]] static ParameterVector zeros(std::size_t n);

    [[nodiscard]] std::size_t size() const noexcept { return c_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return c_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return c_; }
    [[nodiscard]] const std::vector<double>& vector() const noexcept { return c_; }

    [[nodiscard]] double norm() const noexcept;

    /// Copy with component i replaced by `value`.
    [[nodiscard]] ParameterVector with(std::size_t i, double value) const;

private:
    std::vector<double> c_;
};

[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double norm2(std::span<const double> a);

}  // namespace pfbound
