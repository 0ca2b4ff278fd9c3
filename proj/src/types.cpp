#include "ssmgic/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace ssmgic {

namespace {

constexpr double kSymmetryTol = 1e-10;

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

bool asymmetric(const Matrix& m) {
    if (m.rows() != m.cols()) return true;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale;
}

bool differs(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return true;
    const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() > kSymmetryTol * scale;
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InvalidInput("time series must contain at least one observation");
    for (std::size_t n = 0; n < values_.size(); ++n) {
        if (!std::isfinite(values_[n])) {
            throw InvalidInput("observation " + std::to_string(n + 1) + " is not finite");
        }
    }
}

ParameterVector::ParameterVector(Vector theta, std::vector<std::string> names,
                                 std::vector<bool> log_scale)
    : theta_(std::move(theta)), names_(std::move(names)), log_scale_(std::move(log_scale)) {
    const auto p = static_cast<std::size_t>(theta_.size());
    if (p == 0) throw InvalidInput("parameter vector must have at least one entry");
    if (names_.size() != p || log_scale_.size() != p) {
        throw InvalidInput("parameter names/scale flags do not match parameter count");
    }
    if (!theta_.allFinite()) throw InvalidInput("parameter vector contains non-finite entries");
}

ParameterVector ParameterVector::from_natural(const Vector& natural, std::vector<std::string> names,
                                              std::vector<bool> log_scale) {
    if (log_scale.size() != static_cast<std::size_t>(natural.size())) {
        throw InvalidInput("parameter scale flags do not match parameter count");
    }
    Vector theta(natural.size());
    for (Eigen::Index j = 0; j < natural.size(); ++j) {
        if (log_scale[static_cast<std::size_t>(j)]) {
            if (!(natural[j] > 0.0)) {
                throw InvalidInput("variance parameter '" + names.at(static_cast<std::size_t>(j)) +
                                   "' must be positive");
            }
            theta[j] = std::log(natural[j]);
        } else {
            theta[j] = natural[j];
        }
    }
    return ParameterVector(std::move(theta), std::move(names), std::move(log_scale));
}

Vector ParameterVector::natural_scale() const {
    Vector out = theta_;
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        if (log_scale_[static_cast<std::size_t>(j)]) out[j] = std::exp(theta_[j]);
    }
    return out;
}

ParameterVector ParameterVector::with_theta(Vector theta) const {
    return ParameterVector(std::move(theta), names_, log_scale_);
}

std::vector<std::string> validate_model(const ModelSpec& s) {
    std::vector<std::string> out;
    const auto m = static_cast<Eigen::Index>(s.state_dim);
    const auto k = static_cast<Eigen::Index>(s.noise_dim);
    const std::size_t p = s.param_dim;

    if (m == 0) out.emplace_back("state_dim must be positive");
    if (k == 0) out.emplace_back("noise_dim must be positive");
    if (p == 0) out.emplace_back("param_dim must be positive");
    if (!out.empty()) return out;

    auto check_shape = [&](const Matrix& mat, Eigen::Index r, Eigen::Index c, const std::string& name) {
        if (mat.rows() != r || mat.cols() != c) {
            out.push_back(name + " has shape " + dims(mat) + ", expected " + std::to_string(r) + "x" +
                          std::to_string(c));
            return false;
        }
        if (!mat.allFinite()) {
            out.push_back(name + " has non-finite entries");
            return false;
        }
        return true;
    };

    check_shape(s.F, m, m, "F");
    check_shape(s.G, m, k, "G");
    if (s.H.size() != m) {
        out.push_back("H has length " + std::to_string(s.H.size()) + ", expected " + std::to_string(m));
    } else if (!s.H.allFinite()) {
        out.emplace_back("H has non-finite entries");
    }
    if (check_shape(s.Q, k, k, "Q")) {
        if (asymmetric(s.Q)) {
            out.emplace_back("Q is not symmetric");
        } else {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(s.Q, Eigen::EigenvaluesOnly);
            const double floor = -1e-12 * std::max(1.0, s.Q.cwiseAbs().maxCoeff());
            if (eig.eigenvalues().minCoeff() < floor) out.emplace_back("Q is not positive semidefinite");
        }
    }
    if (!std::isfinite(s.R) || s.R < 0.0) out.emplace_back("R must be finite and nonnegative");

    if (s.dF.size() != p) out.push_back("dF has " + std::to_string(s.dF.size()) + " entries, expected p");
    if (s.dQ.size() != p) out.push_back("dQ has " + std::to_string(s.dQ.size()) + " entries, expected p");
    if (s.dR.size() != p) out.push_back("dR has " + std::to_string(s.dR.size()) + " entries, expected p");
    if (s.d2F.size() != p) out.emplace_back("d2F must be p x p");
    if (s.d2Q.size() != p) out.emplace_back("d2Q must be p x p");
    if (s.d2R.size() != p) out.emplace_back("d2R must be p x p");
    if (!out.empty()) return out;

    for (std::size_t j = 0; j < p; ++j) {
        const std::string idx = "[" + std::to_string(j) + "]";
        if (check_shape(s.dF[j], m, m, "dF" + idx) && s.F_is_constant && !s.dF[j].isZero(0.0)) {
            out.push_back("dF" + idx + " is nonzero but F_is_constant is set");
        }
        if (check_shape(s.dQ[j], k, k, "dQ" + idx) && asymmetric(s.dQ[j])) {
            out.push_back("dQ" + idx + " is not symmetric");
        }
        if (!std::isfinite(s.dR[j])) out.push_back("dR" + idx + " is not finite");
        if (s.d2F[j].size() != p || s.d2Q[j].size() != p || s.d2R[j].size() != p) {
            out.push_back("second-derivative row " + idx + " must have p entries");
        }
    }
    if (!out.empty()) return out;

    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const std::string idx = "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
            if (check_shape(s.d2F[i][j], m, m, "d2F" + idx)) {
                if (s.F_is_constant && !s.d2F[i][j].isZero(0.0)) {
                    out.push_back("d2F" + idx + " is nonzero but F_is_constant is set");
                }
                if (j > i && differs(s.d2F[i][j], s.d2F[j][i])) {
                    out.push_back("d2F" + idx + " differs from its transposed index");
                }
            }
            if (check_shape(s.d2Q[i][j], k, k, "d2Q" + idx)) {
                if (asymmetric(s.d2Q[i][j])) out.push_back("d2Q" + idx + " is not symmetric");
                if (j > i && differs(s.d2Q[i][j], s.d2Q[j][i])) {
                    out.push_back("d2Q" + idx + " differs from its transposed index");
                }
            }
            if (!std::isfinite(s.d2R[i][j])) out.push_back("d2R" + idx + " is not finite");
            if (j > i && s.d2R[i][j] != s.d2R[j][i]) {
                out.push_back("d2R" + idx + " differs from its transposed index");
            }
        }
    }

    // Parameter-dependent G or H is not representable (no dG/dH families).
    if (!s.G_is_constant) out.emplace_back("G_is_constant must be set: parameter-dependent G is unsupported");
    if (!s.H_is_constant) out.emplace_back("H_is_constant must be set: parameter-dependent H is unsupported");
    return out;
}

void require_valid(const ModelSpec& spec) {
    const auto violations = validate_model(spec);
    if (violations.empty()) return;
    std::ostringstream os;
    os << "invalid model:";
    for (const auto& v : violations) os << "\n  - " << v;
    throw InvalidInput(os.str());
}

Vector FilterInit::initial_state(std::size_t m) const {
    if (!x0) return Vector::Zero(static_cast<Eigen::Index>(m));
    if (static_cast<std::size_t>(x0->size()) != m) {
        throw InvalidInput("initial state has length " + std::to_string(x0->size()) + ", model needs " +
                           std::to_string(m));
    }
    if (!x0->allFinite()) throw InvalidInput("initial state is not finite");
    return *x0;
}

Matrix FilterInit::initial_covariance(std::size_t m) const {
    const auto mm = static_cast<Eigen::Index>(m);
    if (!V0) {
        if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidInput("kappa must be positive and finite");
        return kappa * Matrix::Identity(mm, mm);
    }
    if (V0->rows() != mm || V0->cols() != mm) {
        throw InvalidInput("initial covariance has shape " + dims(*V0) + ", model needs " +
                           std::to_string(m) + "x" + std::to_string(m));
    }
    if (!V0->allFinite() || asymmetric(*V0)) throw InvalidInput("initial covariance must be finite and symmetric");
    return *V0;
}

}  // namespace ssmgic
