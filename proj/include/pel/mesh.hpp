#pragma once

// Mach-Zehnder interferometer meshes in the rectangular (Clements) layout.
//
// MZI transfer convention, used everywhere in this library:
//
//   T(theta, phi) = i e^{i theta/2} [ e^{i phi} sin(theta/2)   cos(theta/2) ]
//                                   [ e^{i phi} cos(theta/2)  -sin(theta/2) ]
//
// theta = pi is the bar state, theta = 0 the cross state. A mesh on n ports
// applies n(n-1)/2 MZIs in placement order followed by a diagonal of output
// phases, so U = D T_K ... T_1.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "pel/complex.hpp"
#include "pel/errors.hpp"

namespace pel {

struct MZIParams {
    double theta = 0.0;  // internal phase, radians
    double phi = 0.0;    // external phase, radians

    MZIParams() = default;
    /// Both phases are reduced to [0, 2pi); non-finite input is rejected.
    MZIParams(double theta, double phi);
};

double wrap_phase(double angle);

struct MZIPlacement {
    std::size_t column = 0;
    std::size_t top_port = 0;  // MZI couples ports top_port and top_port + 1

    bool operator==(const MZIPlacement &) const = default;
};

struct MeshLayout {
    std::size_t n = 0;
    std::vector<MZIPlacement> placements;
    std::vector<double> output_phases;

    /// Rectangular layout: column c holds MZIs on ports p with p = c mod 2.
    static MeshLayout clements(std::size_t n);

    std::size_t mzi_count() const { return placements.size(); }
    void validate() const;
};

inline std::size_t clements_mzi_count(std::size_t n) { return n * (n - 1) / 2; }

/// The four entries (row-major) of T(theta, phi).
template <class T>
std::array<BasicComplex<T>, 4> mzi_entries(const T &theta, const T &phi) {
    using std::cos;
    using std::sin;
    T half = theta * T(0.5);
    T s = sin(half);
    T c = cos(half);
    // i e^{i theta/2} = (-sin(theta/2), cos(theta/2))
    BasicComplex<T> g(-s, c);
    BasicComplex<T> e = unit_phasor(phi);
    BasicComplex<T> ge = g * e;
    return {ge * s, g * c, ge * c, g * (-s)};
}

ComplexMatrix mzi_transfer(const MZIParams &params);

/// Applies one MZI to ports (top, top + 1) of `v` in place.
template <class T>
void apply_mzi(const std::array<BasicComplex<T>, 4> &t, std::size_t top, BasicComplexVector<T> &v) {
    BasicComplex<T> a = v[top];
    BasicComplex<T> b = v[top + 1];
    v[top] = t[0] * a + t[1] * b;
    v[top + 1] = t[2] * a + t[3] * b;
}

/// Mesh matrix from packed phases: mzi_phases holds (theta, phi) per
/// placement, output_phases one phase per port.
template <class T>
BasicComplexMatrix<T> mesh_matrix(std::size_t n, std::span<const MZIPlacement> placements,
                                  std::span<const T> mzi_phases, std::span<const T> output_phases) {
    if (mzi_phases.size() != 2 * placements.size() || output_phases.size() != n) {
        throw ShapeError("mesh phase count does not match layout");
    }
    BasicComplexMatrix<T> u = BasicComplexMatrix<T>::identity(n);
    for (std::size_t k = 0; k < placements.size(); ++k) {
        auto t = mzi_entries(mzi_phases[2 * k], mzi_phases[2 * k + 1]);
        std::size_t p = placements[k].top_port;
        for (std::size_t c = 0; c < n; ++c) {
            BasicComplex<T> a = u(p, c);
            BasicComplex<T> b = u(p + 1, c);
            u(p, c) = t[0] * a + t[1] * b;
            u(p + 1, c) = t[2] * a + t[3] * b;
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        BasicComplex<T> d = unit_phasor(output_phases[r]);
        for (std::size_t c = 0; c < n; ++c) {
            u(r, c) = d * u(r, c);
        }
    }
    return u;
}

ComplexMatrix mesh_matrix(const MeshLayout &layout, std::span<const MZIParams> phases);

/// U(phases) x, applied MZI by MZI without forming U.
ComplexVector mesh_forward(const MeshLayout &layout, std::span<const MZIParams> phases,
                           const ComplexVector &input);

struct MeshDecomposition {
    MeshLayout layout;
    std::vector<MZIParams> phases;
};

class NonUnitaryError : public ValidationError {
  public:
    explicit NonUnitaryError(double defect);
    double defect() const { return defect_; }

  private:
    double defect_;
};

/// Rectangular-mesh decomposition of a unitary; the rebuilt mesh matrix
/// reproduces `u`. Throws NonUnitaryError when ||u^dagger u - I||_F >= tolerance.
MeshDecomposition clements_decompose(const ComplexMatrix &u, double tolerance = 1e-8);

}  // namespace pel
