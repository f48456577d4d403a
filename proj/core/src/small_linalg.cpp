#include "rwpm/geometry.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace rwpm {

namespace {

void check_dim(const SmallMat& m, const char* who) {
    if (m.dim < 1 || m.dim > kMaxDim) throw std::invalid_argument(std::string(who) + ": bad dimension");
}

Eigen::MatrixXd to_eigen(const SmallMat& m) {
    Eigen::MatrixXd e(m.dim, m.dim);
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j) e(i, j) = m.a[i][j];
    return e;
}

SmallMat from_eigen(const Eigen::MatrixXd& e) {
    SmallMat m;
    m.dim = static_cast<int>(e.rows());
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j) m.a[i][j] = e(i, j);
    return m;
}

}  // namespace

double determinant(const SmallMat& m) {
    check_dim(m, "determinant");
    return to_eigen(m).determinant();
}

SmallMat inverse(const SmallMat& m) {
    check_dim(m, "inverse");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(m));
    if (!lu.isInvertible()) throw std::invalid_argument("inverse: singular matrix");
    return from_eigen(lu.inverse());
}

SmallMat mat_add(const SmallMat& x, const SmallMat& y) {
    check_dim(x, "mat_add");
    if (x.dim != y.dim) throw std::invalid_argument("mat_add: dimension mismatch");
    SmallMat r;
    r.dim = x.dim;
    for (int i = 0; i < x.dim; ++i)
        for (int j = 0; j < x.dim; ++j) r.a[i][j] = x.a[i][j] + y.a[i][j];
    return r;
}

std::array<double, kMaxDim> mat_vec(const SmallMat& m, const std::array<double, kMaxDim>& v) {
    check_dim(m, "mat_vec");
    std::array<double, kMaxDim> r{};
    for (int i = 0; i < m.dim; ++i) {
        double s = 0;
        for (int j = 0; j < m.dim; ++j) s += m.a[i][j] * v[j];
        r[i] = s;
    }
    return r;
}

bool is_spd(const SmallMat& m) {
    if (m.dim < 1 || m.dim > kMaxDim) return false;
    for (int i = 0; i < m.dim; ++i)
        for (int j = i + 1; j < m.dim; ++j)
            if (std::fabs(m.a[i][j] - m.a[j][i]) > 1e-12) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(m));
    return llt.info() == Eigen::Success;
}

}  // namespace rwpm
