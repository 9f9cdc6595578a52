#ifndef MSG_CORE_HPP
#define MSG_CORE_HPP

#include <Eigen/Core>

#include <charconv>
#include <cstdint>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace msg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Fault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The black box returned a non-finite value.
struct EvaluationFault : Fault {
    explicit EvaluationFault(std::string what, Vector where = {})
        : Fault(std::move(what)), at(std::move(where)) {}
    Vector at;
};

/// A caller broke a documented precondition.
struct ContractViolation : Fault {
    using Fault::Fault;
};

struct ModelBuildFault : Fault {
    using Fault::Fault;
};

struct PairSearchExhausted : Fault {
    using Fault::Fault;
};

struct RhoUndefined : Fault {
    using Fault::Fault;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Deterministic uniform draw from the closed ball B(center; radius).
inline Vector sample_in_ball(std::mt19937_64& rng, const Vector& center, double radius) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = static_cast<int>(center.size());
    Vector dir(n);
    for (int i = 0; i < n; ++i) dir[i] = gauss(rng);
    double nrm = dir.norm();
    if (nrm == 0.0) return center;
    double r = radius * std::pow(unit(rng), 1.0 / n);
    return center + (r / nrm) * dir;
}

/// splitmix64; used to derive independent stream seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace msg

#endif // MSG_CORE_HPP
