#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace fixcon {

using Vector = Eigen::VectorXd;

/// Gaussian radial basis s_i(x) = exp(-|x - v_i|^2 / w_i^2).
class RbfBasis {
public:
    RbfBasis(std::vector<Vector> centers, std::vector<double> widths);

    /// `neurons` centers spaced uniformly on [lo, hi] along the diagonal of
    /// the input hypercube, all with the same width.
    static RbfBasis uniform(std::size_t neurons, double lo, double hi, double width, std::size_t input_dim = 1);

    std::size_t size() const { return centers_.size(); }
    std::size_t input_dim() const { return static_cast<std::size_t>(centers_.front().size()); }
    const std::vector<Vector>& centers() const { return centers_; }
    const std::vector<double>& widths() const { return widths_; }

    Vector activations(std::span<const double> input) const;
    /// Writes the activations into `out`, resizing only when needed.
    void activations(std::span<const double> input, Vector& out) const;
    Vector activations(double input) const { return activations(std::span<const double>(&input, 1)); }

    double output(const Vector& weights, std::span<const double> input) const;
    double output(const Vector& weights, double input) const
    {
        return output(weights, std::span<const double>(&input, 1));
    }

private:
    std::vector<Vector> centers_;
    std::vector<double> widths_;
};

}  // namespace fixcon
