#include "pel/tape.hpp"

#include <algorithm>
#include <stdexcept>

namespace pel {

const std::vector<double> &GradTape::adjoints(const Var &output) {
    adjoints_.assign(nodes_.size(), 0.0);
    if (output.is_constant()) {
        return adjoints_;
    }
    if (output.tape != this) {
        throw std::invalid_argument("output was not recorded on this tape");
    }
    adjoints_[static_cast<std::size_t>(output.index)] = 1.0;
    for (std::int32_t i = output.index; i >= 0; --i) {
        double adj = adjoints_[static_cast<std::size_t>(i)];
        if (adj == 0.0) {
            continue;
        }
        const Node &n = nodes_[static_cast<std::size_t>(i)];
        if (n.a >= 0) {
            adjoints_[static_cast<std::size_t>(n.a)] += n.da * adj;
        }
        if (n.b >= 0) {
            adjoints_[static_cast<std::size_t>(n.b)] += n.db * adj;
        }
    }
    return adjoints_;
}

std::vector<double> GradTape::gradient(const Var &output, std::span<const Var> leaves) {
    const auto &adj = adjoints(output);
    std::vector<double> out(leaves.size(), 0.0);
    std::transform(leaves.begin(), leaves.end(), out.begin(), [&](const Var &leaf) {
        return leaf.is_constant() ? 0.0 : adj[static_cast<std::size_t>(leaf.index)];
    });
    return out;
}

void GradTape::clear() {
    nodes_.clear();
    first_nonfinite_ = -1;
}

}  // namespace pel
