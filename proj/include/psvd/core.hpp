#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace psvd {

// Dense storage is Eigen's default column-major layout throughout; all kernels
// assume it.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Precondition or dimension violation: the caller broke the API contract.
class contract_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The data itself is unusable (non-finite entries, zero start vector, ...).
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& msg, long line = 0)
        : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

/// An iteration hit its sweep/restart cap without meeting its tolerance.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deterministic random source used everywhere randomness is needed.
///
/// A seeded mersenne-twister (mt19937_64) drives everything. Uniforms take
/// the top 53 bits of each draw; standard normals come from the basic
/// Box-Muller transform (pairs generated together, one cached). The same
/// seed always reproduces the same stream, independent of the C++ standard
/// library in use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal draw (Box-Muller).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    Vector normal_vector(Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    /// Unit-norm random direction.
    Vector unit_vector(Index n) {
        Vector v = normal_vector(n);
        double nrm = v.norm();
        while (nrm == 0.0) {  // absurdly unlikely, but normalize must succeed
            v = normal_vector(n);
            nrm = v.norm();
        }
        return v / nrm;
    }

    /// Matrix with iid standard-normal entries, filled column by column.
    Matrix normal_matrix(Index rows, Index cols) {
        Matrix a(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) a(i, j) = normal();
        return a;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

template <class Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (!m.allFinite()) throw validation_error(std::string(what) + ": non-finite entries");
}

/// Largest absolute deviation of Q^T Q from the identity.
double orthonormality_error(const Eigen::Ref<const Matrix>& q);

}  // namespace psvd
