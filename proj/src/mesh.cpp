#include "pel/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace pel {

double wrap_phase(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(angle, two_pi);
    if (w < 0.0) {
        w += two_pi;
    }
    // fmod of a tiny negative value can round up to exactly 2pi
    return w >= two_pi ? 0.0 : w;
}

MZIParams::MZIParams(double theta_in, double phi_in) {
    if (!std::isfinite(theta_in) || !std::isfinite(phi_in)) {
        throw DomainError("MZI phases must be finite");
    }
    theta = wrap_phase(theta_in);
    phi = wrap_phase(phi_in);
}

MeshLayout MeshLayout::clements(std::size_t n) {
    MeshLayout layout;
    layout.n = n;
    layout.output_phases.assign(n, 0.0);
    if (n < 2) {
        return layout;
    }
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t p = col % 2; p + 1 < n; p += 2) {
            layout.placements.push_back({col, p});
        }
    }
    return layout;
}

void MeshLayout::validate() const {
    if (output_phases.size() != n) {
        throw ShapeError("mesh layout needs one output phase per port");
    }
    if (placements.size() != clements_mzi_count(n)) {
        throw ShapeError("mesh layout on " + std::to_string(n) + " ports needs " +
                         std::to_string(clements_mzi_count(n)) + " MZIs, got " +
                         std::to_string(placements.size()));
    }
    for (const auto &pl : placements) {
        if (pl.top_port + 1 >= n) {
            throw ShapeError("MZI top port " + std::to_string(pl.top_port) + " out of range");
        }
    }
}

ComplexMatrix mzi_transfer(const MZIParams &params) {
    auto t = mzi_entries(params.theta, params.phi);
    ComplexMatrix m(2, 2);
    m(0, 0) = t[0];
    m(0, 1) = t[1];
    m(1, 0) = t[2];
    m(1, 1) = t[3];
    return m;
}

namespace {

std::vector<double> pack_phases(std::span<const MZIParams> phases) {
    std::vector<double> packed;
    packed.reserve(2 * phases.size());
    for (const auto &p : phases) {
        packed.push_back(p.theta);
        packed.push_back(p.phi);
    }
    return packed;
}

void check_phase_count(const MeshLayout &layout, std::span<const MZIParams> phases) {
    layout.validate();
    if (phases.size() != layout.mzi_count()) {
        throw ShapeError("expected " + std::to_string(layout.mzi_count()) + " MZI phase pairs, got " +
                         std::to_string(phases.size()));
    }
}

}  // namespace

ComplexMatrix mesh_matrix(const MeshLayout &layout, std::span<const MZIParams> phases) {
    check_phase_count(layout, phases);
    auto packed = pack_phases(phases);
    return mesh_matrix<double>(layout.n, layout.placements, packed, layout.output_phases);
}

ComplexVector mesh_forward(const MeshLayout &layout, std::span<const MZIParams> phases,
                           const ComplexVector &input) {
    check_phase_count(layout, phases);
    if (input.size() != layout.n) {
        throw ShapeError("mesh input has " + std::to_string(input.size()) + " entries, expected " +
                         std::to_string(layout.n));
    }
    ComplexVector v = input;
    for (std::size_t k = 0; k < phases.size(); ++k) {
        apply_mzi(mzi_entries(phases[k].theta, phases[k].phi), layout.placements[k].top_port, v);
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = unit_phasor(layout.output_phases[i]) * v[i];
    }
    return v;
}

NonUnitaryError::NonUnitaryError(double defect)
    : ValidationError([defect] {
          std::ostringstream msg;
          msg.precision(6);
          msg << "matrix is not unitary: ||U^dagger U - I||_F = " << defect;
          return msg.str();
      }()),
      defect_(defect) {}

namespace {

struct PendingMZI {
    std::size_t top_port;
    double theta;
    double phi;
};

double arg(const ComplexValue &z) { return std::atan2(z.im, z.re); }

// u <- u T^dagger on columns (m, m+1).
void right_apply_dagger(ComplexMatrix &u, std::size_t m, double theta, double phi) {
    auto t = mzi_entries(theta, phi);
    for (std::size_t r = 0; r < u.rows(); ++r) {
        ComplexValue a = u(r, m);
        ComplexValue b = u(r, m + 1);
        u(r, m) = a * conj(t[0]) + b * conj(t[1]);
        u(r, m + 1) = a * conj(t[2]) + b * conj(t[3]);
    }
}

// u <- T u on rows (m, m+1).
void left_apply(ComplexMatrix &u, std::size_t m, double theta, double phi) {
    auto t = mzi_entries(theta, phi);
    for (std::size_t c = 0; c < u.cols(); ++c) {
        ComplexValue a = u(m, c);
        ComplexValue b = u(m + 1, c);
        u(m, c) = t[0] * a + t[1] * b;
        u(m + 1, c) = t[2] * a + t[3] * b;
    }
}

}  // namespace

MeshDecomposition clements_decompose(const ComplexMatrix &u_in, double tolerance) {
    if (u_in.rows() != u_in.cols()) {
        throw ShapeError("decomposition needs a square matrix");
    }
    double defect = unitarity_defect(u_in);
    if (!(defect < tolerance)) {
        throw NonUnitaryError(defect);
    }
    const std::size_t n = u_in.rows();
    ComplexMatrix u = u_in;
    std::vector<PendingMZI> right;
    std::vector<PendingMZI> left;

    for (std::size_t ii = 0; ii + 1 < n; ++ii) {
        for (std::size_t jj = 0; jj <= ii; ++jj) {
            if (ii % 2 == 0) {
                // zero u(n-1-jj, ii-jj) by mixing columns (m, m+1) from the right
                std::size_t m = ii - jj;
                std::size_t r = n - 1 - jj;
                ComplexValue ua = u(r, m);
                ComplexValue ub = u(r, m + 1);
                double theta = 2.0 * std::atan2(modulus(ub), modulus(ua));
                double phi = arg(ua) - arg(-ub);
                right_apply_dagger(u, m, theta, phi);
                right.push_back({m, theta, phi});
            } else {
                // zero u(m+1, jj) by mixing rows (m, m+1) from the left
                std::size_t m = n + jj - ii - 2;
                ComplexValue ua = u(m, jj);
                ComplexValue ub = u(m + 1, jj);
                double theta = 2.0 * std::atan2(modulus(ua), modulus(ub));
                double phi = arg(ub) - arg(ua);
                left_apply(u, m, theta, phi);
                left.push_back({m, theta, phi});
            }
        }
    }

    // u is now diagonal: L_k..L_1 U R_1^dag..R_m^dag = D. Move each L^dag through
    // D using L^dag D = D' T(theta, phi') with
    //   phi' = arg d_m - arg d_{m+1},  d'_{m+1} = -e^{-i theta} d_{m+1},
    //   d'_m = -e^{-i theta} e^{-i phi} d_{m+1}.
    std::vector<ComplexValue> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = u(i, i);
    }
    std::vector<PendingMZI> moved;
    for (auto it = left.rbegin(); it != left.rend(); ++it) {
        std::size_t m = it->top_port;
        double phi_new = arg(d[m]) - arg(d[m + 1]);
        ComplexValue factor = -unit_phasor(-it->theta);
        ComplexValue dm1 = factor * d[m + 1];
        ComplexValue dm = factor * unit_phasor(-it->phi) * d[m + 1];
        d[m] = dm;
        d[m + 1] = dm1;
        moved.push_back({m, it->theta, phi_new});
    }

    // Physical order: R_1..R_m, then the moved MZIs in the order they were
    // produced (T'_k first), then the output phases.
    std::vector<PendingMZI> sequence = right;
    sequence.insert(sequence.end(), moved.begin(), moved.end());

    // Greedy column assignment, then re-sort into the canonical layout order.
    MeshDecomposition result;
    result.layout = MeshLayout::clements(n);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> slot;
    for (std::size_t k = 0; k < result.layout.placements.size(); ++k) {
        const auto &pl = result.layout.placements[k];
        slot[{pl.column, pl.top_port}] = k;
    }
    result.phases.assign(result.layout.placements.size(), MZIParams{});
    std::vector<std::size_t> next_free(n, 0);
    std::vector<bool> filled(result.layout.placements.size(), false);
    for (const auto &mzi : sequence) {
        std::size_t p = mzi.top_port;
        std::size_t col = std::max(next_free[p], next_free[p + 1]);
        if (col % 2 != p % 2) {
            ++col;
        }
        auto found = slot.find({col, p});
        if (found == slot.end() || filled[found->second]) {
            throw std::logic_error("decomposition produced an MZI outside the rectangular layout");
        }
        filled[found->second] = true;
        result.phases[found->second] = MZIParams(mzi.theta, mzi.phi);
        next_free[p] = col + 1;
        next_free[p + 1] = col + 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        result.layout.output_phases[i] = wrap_phase(arg(d[i]));
    }
    return result;
}

}  // namespace pel
