// povm.cpp — IC-POVM construction and factorization.

#include "qhl/povm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace qhl {

namespace {

// Λ = ¼(I + r·σ).
Matrix element_from_bloch(const Eigen::Vector3d& r) {
    Matrix lambda = pauli(PauliCode::I);
    lambda += r.x() * pauli(PauliCode::X);
    lambda += r.y() * pauli(PauliCode::Y);
    lambda += r.z() * pauli(PauliCode::Z);
    return 0.25 * lambda;
}

// Smallest singular value of R = [1-row; r_0 r_1 r_2 r_3] — informational
// completeness means R has rank 4.
double frame_smallest_singular_value(const std::array<Eigen::Vector3d, 4>& bloch) {
    Eigen::Matrix4d r_frame;
    for (int m = 0; m < 4; ++m) {
        r_frame(0, m) = 1.0;
        r_frame.block<3, 1>(1, m) = bloch[m];
    }
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(r_frame);
    return svd.singularValues().minCoeff();
}

SingleQubitPOVM assemble(const std::array<Eigen::Vector3d, 4>& bloch) {
    SingleQubitPOVM povm;
    povm.bloch = bloch;
    for (int m = 0; m < 4; ++m) {
        povm.elements[m] = element_from_bloch(bloch[m]);
        povm.scores[m] = 0.5 * (1.0 - bloch[m].z());
    }
    return povm;
}

}  // namespace

SingleQubitPOVM build_default_icpovm() {
    const double s3 = std::sqrt(3.0) / 2.0;
    const double s2 = 1.0 / std::sqrt(2.0);
    return assemble({Eigen::Vector3d(0.5, 0.0, s3), Eigen::Vector3d(-0.5, -s2, 0.5),
                     Eigen::Vector3d(-0.5, s2, -0.5), Eigen::Vector3d(0.5, 0.0, -s3)});
}

SingleQubitPOVM build_icpovm_from_angles(const std::array<double, 4>& alphas,
                                         const TransverseChoice& xy) {
    for (double a : alphas)
        if (!(a >= 0.0 && a <= M_PI))
            throw UsageError("build_icpovm_from_angles: angles must lie in [0, pi]");

    std::array<double, 4> cz, sz;
    for (int m = 0; m < 4; ++m) {
        cz[m] = std::cos(alphas[m]);
        sz[m] = std::sin(alphas[m]);  // ≥ 0 on [0, π]
    }

    // Zero-sum in z is a property of the angles alone.
    if (std::abs(cz[0] + cz[1] + cz[2] + cz[3]) > 1e-10)
        throw ConstructionInfeasible(
            "build_icpovm_from_angles: z-components of the requested angles do not sum to zero");

    // Outer pair (0, 3): equal x = sin α, zero y. Inner pair (1, 2): shared
    // x solving the zero-sum, opposite y from the unit-norm residual.
    const double x0 = sz[0];
    const double x3 = sz[3];
    const double sum_outer = x0 + x3;

    double x1, x2;
    if (sum_outer > 1e-12) {
        // x1 + x2 = −sum_outer and x1² − x2² = sin²α_1 − sin²α_2.
        const double diff = (sz[1] * sz[1] - sz[2] * sz[2]) / (-sum_outer);
        x1 = 0.5 * (-sum_outer + diff);
        x2 = 0.5 * (-sum_outer - diff);
    } else {
        // Outer transverse parts vanish (α_0 = 0, α_3 = π); the inner pair
        // must cancel on its own.
        if (std::abs(sz[1] * sz[1] - sz[2] * sz[2]) > 1e-10)
            throw ConstructionInfeasible(
                "build_icpovm_from_angles: inner angles cannot cancel transversally");
        x1 = 0.0;
        x2 = 0.0;
    }

    const double y1sq = sz[1] * sz[1] - x1 * x1;
    const double y2sq = sz[2] * sz[2] - x2 * x2;
    if (y1sq < -1e-12 || y2sq < -1e-12)
        throw ConstructionInfeasible(
            "build_icpovm_from_angles: no real transverse solution for these angles");
    double y1 = -std::sqrt(std::max(0.0, y1sq));
    double y2 = std::sqrt(std::max(0.0, y2sq));
    if (xy.swap_inner_y) std::swap(y1, y2);

    std::array<Eigen::Vector3d, 4> bloch = {
        Eigen::Vector3d(x0, 0.0, cz[0]), Eigen::Vector3d(x1, y1, cz[1]),
        Eigen::Vector3d(x2, y2, cz[2]), Eigen::Vector3d(x3, 0.0, cz[3])};

    if (xy.rotation != 0.0) {
        const double c = std::cos(xy.rotation), s = std::sin(xy.rotation);
        for (auto& r : bloch) {
            const double x = r.x(), y = r.y();
            r.x() = c * x - s * y;
            r.y() = s * x + c * y;
        }
    }

    if (frame_smallest_singular_value(bloch) <= 1e-8)
        throw ConstructionInfeasible(
            "build_icpovm_from_angles: frame matrix R is rank-deficient (not informationally "
            "complete)");

    return assemble(bloch);
}

SingleQubitPOVM build_sic_povm() {
    // Regular tetrahedron: apex at +z, three legs at z = −1/3.
    const double a = 2.0 * std::sqrt(2.0) / 3.0;
    const double b = std::sqrt(2.0) / 3.0;
    const double c = std::sqrt(6.0) / 3.0;
    return assemble({Eigen::Vector3d(0.0, 0.0, 1.0), Eigen::Vector3d(a, 0.0, -1.0 / 3.0),
                     Eigen::Vector3d(-b, c, -1.0 / 3.0), Eigen::Vector3d(-b, -c, -1.0 / 3.0)});
}

std::array<double, 4> expression_scores(const SingleQubitPOVM& povm) {
    return povm.scores;
}

Rank1Factor rank1_factor(const SingleQubitPOVM& povm) {
    Rank1Factor factor;
    for (int m = 0; m < 4; ++m) {
        const Eigen::Vector3d& r = povm.bloch[m];
        if (r.norm() < 1.0 - 1e-8)
            throw NotRankOne("rank1_factor: Bloch vector shorter than unit length");
        factor.weights[m] = 0.5;

        // +1 eigenvector of r·σ: (cos(α/2), e^{iβ} sin(α/2)) with
        // cos α = r_z and β = atan2(r_y, r_x).
        const double ca = std::clamp(r.z(), -1.0, 1.0);
        const double half = 0.5 * std::acos(ca);
        const double beta = std::atan2(r.y(), r.x());
        factor.vectors[m] =
            Eigen::Vector2cd(std::cos(half), std::polar(std::sin(half), beta));
    }
    return factor;
}

Matrix joint_element(const SingleQubitPOVM& povm, const std::vector<int>& m) {
    const int n = static_cast<int>(m.size());
    if (n > 10) throw UsageError("joint_element: n > 10 exceeds the dense-memory guard");
    Matrix out = Matrix::Ones(1, 1);
    for (int q = 0; q < n; ++q) {
        if (m[q] < 0 || m[q] > 3) throw DataError("joint_element: outcome label out of range");
        out = kron(out, povm.elements[m[q]]);
    }
    return out;
}

PovmValidation validate_povm(const SingleQubitPOVM& povm) {
    PovmValidation v;
    Matrix sum = Matrix::Zero(2, 2);
    Eigen::Vector3d bloch_sum = Eigen::Vector3d::Zero();
    for (int m = 0; m < 4; ++m) {
        sum += povm.elements[m];
        bloch_sum += povm.bloch[m];
        v.bloch_norms[m] = povm.bloch[m].norm();
        Eigen::SelfAdjointEigenSolver<Matrix> es(povm.elements[m]);
        v.min_eigenvalues[m] = es.eigenvalues().minCoeff();
    }
    v.completeness_residual = (sum - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff();
    v.bloch_sum_norm = bloch_sum.norm();
    v.smallest_singular_value = frame_smallest_singular_value(povm.bloch);
    v.scores = povm.scores;
    return v;
}

}  // namespace qhl
