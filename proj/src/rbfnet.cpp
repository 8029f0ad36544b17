#include "fixcon/rbfnet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fixcon {

RbfBasis::RbfBasis(std::vector<Vector> centers, std::vector<double> widths)
    : centers_(std::move(centers)), widths_(std::move(widths))
{
    if (centers_.empty())
        throw std::invalid_argument("an RBF basis needs at least one neuron");
    if (widths_.size() != centers_.size())
        throw std::invalid_argument("RBF width count must match center count");
    const auto dim = centers_.front().size();
    if (dim == 0)
        throw std::invalid_argument("RBF centers must have positive dimension");
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        if (centers_[i].size() != dim)
            throw std::invalid_argument("RBF centers must share one dimension");
        if (!(widths_[i] > 0.0))
            throw std::invalid_argument("RBF widths must be strictly positive");
    }
}

RbfBasis RbfBasis::uniform(std::size_t neurons, double lo, double hi, double width, std::size_t input_dim)
{
    if (neurons == 0 || input_dim == 0)
        throw std::invalid_argument("uniform RBF basis needs neurons >= 1 and input_dim >= 1");
    if (hi < lo)
        throw std::invalid_argument("uniform RBF basis needs lo <= hi");
    std::vector<Vector> centers;
    centers.reserve(neurons);
    for (std::size_t i = 0; i < neurons; ++i) {
        const double c = neurons == 1 ? 0.5 * (lo + hi)
                                      : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(neurons - 1);
        centers.push_back(Vector::Constant(static_cast<Eigen::Index>(input_dim), c));
    }
    return RbfBasis(std::move(centers), std::vector<double>(neurons, width));
}

Vector RbfBasis::activations(std::span<const double> input) const
{
    Vector s;
    activations(input, s);
    return s;
}

void RbfBasis::activations(std::span<const double> input, Vector& out) const
{
    if (input.size() != input_dim())
        throw std::invalid_argument("RBF input has dimension " + std::to_string(input.size()) + ", basis expects " +
                                    std::to_string(input_dim()));
    const Eigen::Map<const Vector> x(input.data(), static_cast<Eigen::Index>(input.size()));
    out.resize(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i)
        out(static_cast<Eigen::Index>(i)) = std::exp(-(x - centers_[i]).squaredNorm() / (widths_[i] * widths_[i]));
}

double RbfBasis::output(const Vector& weights, std::span<const double> input) const
{
    if (static_cast<std::size_t>(weights.size()) != size())
        throw std::invalid_argument("weight vector length " + std::to_string(weights.size()) +
                                    " does not match " + std::to_string(size()) + " neurons");
    return weights.dot(activations(input));
}

}  // namespace fixcon
