#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Physical index convention used everywhere: index 0 is spin +1, index 1 is spin -1.
inline constexpr int kLocalDim = 2;

constexpr int spin_value(int index) { return index == 0 ? +1 : -1; }
constexpr int spin_index(int spin) { return spin > 0 ? 0 : 1; }
constexpr int flipped(int index) { return 1 - index; }

/// One site of a classical MPS: X^{+1} and X^{-1}, both Dl x Dr.
using SiteTensor = std::array<Matrix, kLocalDim>;

/// A tensor with an arbitrary physical dimension (blocked cells have d = 4).
using PhysTensor = std::vector<Matrix>;

/// Raised when a numerical routine cannot deliver a trustworthy result.
/// The module tag lets front-ends report e.g. "glauber-evolution: ...".
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

} // namespace mlen
