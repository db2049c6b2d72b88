#include "pel/complex.hpp"

namespace pel {

double frobenius_norm(const ComplexMatrix &a) {
    double acc = 0.0;
    for (const auto &z : a.data()) {
        acc += modulus_sq(z);
    }
    return std::sqrt(acc);
}

double frobenius_distance(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("frobenius distance between matrices of different shape");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        acc += modulus_sq(a.data()[i] - b.data()[i]);
    }
    return std::sqrt(acc);
}

double unitarity_defect(const ComplexMatrix &a) {
    return frobenius_distance(adjoint(a) * a, ComplexMatrix::identity(a.cols()));
}

}  // namespace pel
