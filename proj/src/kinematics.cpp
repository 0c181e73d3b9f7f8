#include "nonsimple/kinematics.hpp"

#include "nonsimple/errors.hpp"

namespace nonsimple {

MetricResult metric(const Tensor32& F) {
    MetricResult out;
    out.C = F.transpose() * F;
    // Gram determinant via the cross product is exact-zero for parallel columns
    // and avoids cancellation in C11*C22 - C12^2.
    const Vec3 m = F.col(0).cross(F.col(1));
    out.J = m.norm();
    return out;
}

Vec3 unit_normal(const Tensor32& F, double J) {
    if (!(J > kJFloor))
        throw DegenerateMetric(J);
    return F.col(0).cross(F.col(1)) / J;
}

Tensor32 dual_basis(const Tensor32& F) {
    const Mat2 C = F.transpose() * F;
    const double det = C.determinant();
    if (!(det > kJFloor * kJFloor))
        throw DegenerateMetric(std::sqrt(std::max(det, 0.0)));
    Mat2 Cinv;
    Cinv << C(1, 1), -C(0, 1), -C(1, 0), C(0, 0);
    Cinv /= det;
    return F * Cinv;
}

CurvatureSplit curvature_split(const SymThirdTensor& G, const Tensor32& F) {
    const double J = metric(F).J;
    const Vec3 n = unit_normal(F, J);
    const Tensor32 dual = dual_basis(F);

    CurvatureSplit out;
    const Eigen::RowVector3d kn = n.transpose() * G.c;
    out.K << kn(0), kn(2), kn(2), kn(1);
    out.christoffel.c = dual.transpose() * G.c;
    return out;
}

SymThirdTensor recompose(const CurvatureSplit& split, const Tensor32& F) {
    const Vec3 n = unit_normal(F, metric(F).J);
    SymThirdTensor G;
    const Eigen::RowVector3d k(split.K(0, 0), split.K(1, 1), split.K(0, 1));
    G.c = n * k + F * split.christoffel.c;
    return G;
}

Minors minors(const SymThirdTensor& G) {
    // g(i, a, b) with 1-based indices to keep the listing readable.
    auto g = [&](int i, int a, int b) { return G(i - 1, a - 1, b - 1); };
    Minors d{};
    for (int l = 1; l <= 3; ++l)
        d[l - 1] = g(l, 1, 1) * g(l, 2, 2) - g(l, 1, 2) * g(l, 1, 2);
    for (int l = 4; l <= 5; ++l)
        d[l - 1] = g(1, 1, 1) * g(l - 2, 1, 2) - g(1, 1, 2) * g(l - 2, 1, 1);
    for (int l = 6; l <= 7; ++l)
        d[l - 1] = g(1, 1, 1) * g(l - 4, 2, 2) - g(1, 1, 2) * g(l - 4, 1, 2);
    for (int l = 8; l <= 9; ++l)
        d[l - 1] = g(1, 1, 2) * g(l - 6, 1, 2) - g(1, 2, 2) * g(l - 6, 1, 1);
    for (int l = 10; l <= 11; ++l)
        d[l - 1] = g(1, 1, 2) * g(l - 8, 2, 2) - g(1, 2, 2) * g(l - 8, 1, 2);
    for (int l = 12; l <= 13; ++l)
        d[l - 1] = g(2, 1, 1) * g(3, l - 11, 2) - g(2, 1, 2) * g(3, 1, l - 11);
    for (int l = 14; l <= 15; ++l)
        d[l - 1] = g(2, 1, 2) * g(3, l - 13, 2) - g(2, 2, 2) * g(3, 1, l - 13);
    return d;
}

double gaussian_curvature(const Mat2& K, double J) {
    if (!(J > kJFloor))
        throw DegenerateMetric(J);
    return K.determinant() / (J * J);
}

double gaussian_from_minors(const Vec3& n, const Minors& d, double J) {
    if (!(J > kJFloor))
        throw DegenerateMetric(J);
    auto dl = [&](int l) { return d[l - 1]; };
    const double num = n(0) * n(0) * dl(1) + n(1) * n(1) * dl(2) + n(2) * n(2) * dl(3) +
                       n(0) * n(1) * (dl(6) - dl(8)) + n(0) * n(2) * (dl(7) - dl(9)) +
                       n(1) * n(2) * (dl(13) - dl(14));
    return num / (J * J);
}

KinematicState kinematic_state(const SymThirdTensor& G, const Tensor32& F) {
    KinematicState s;
    s.F = F;
    s.G = G;
    const MetricResult m = metric(F);
    s.C = m.C;
    s.J = m.J;
    s.n = unit_normal(F, m.J);
    const CurvatureSplit split = curvature_split(G, F);
    s.K = split.K;
    s.christoffel = split.christoffel;
    s.minors = minors(G);
    s.kappa = gaussian_curvature(s.K, s.J);
    return s;
}

} // namespace nonsimple
