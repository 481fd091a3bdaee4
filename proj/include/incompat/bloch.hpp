#ifndef INCOMPAT_BLOCH_HPP
#define INCOMPAT_BLOCH_HPP

#include <cmath>
#include <ostream>

namespace incompat {

/// Default tolerance for validity checks and boundary verdicts.
inline constexpr double kTol = 1e-9;

/// A real Euclidean 3-vector; used for Bloch vectors of states and
/// observables and for the anchor geometry built from them.
struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr BlochVector() = default;
    constexpr BlochVector(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr BlochVector operator+(const BlochVector& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr BlochVector operator-(const BlochVector& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr BlochVector operator-() const { return {-x, -y, -z}; }
    constexpr BlochVector operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr BlochVector operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr BlochVector& operator+=(const BlochVector& o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }
    constexpr BlochVector& operator-=(const BlochVector& o) {
        x -= o.x; y -= o.y; z -= o.z;
        return *this;
    }
    constexpr BlochVector& operator*=(double s) {
        x *= s; y *= s; z *= s;
        return *this;
    }
    constexpr bool operator==(const BlochVector& o) const = default;

    constexpr double dot(const BlochVector& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr BlochVector cross(const BlochVector& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    constexpr double norm2() const { return x * x + y * y + z * z; }

    /// Unit vector in the same direction; the zero vector is returned unchanged.
    BlochVector unit() const {
        const double n = norm();
        return n > 0.0 ? *this / n : *this;
    }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr BlochVector operator*(double s, const BlochVector& v) { return v * s; }

inline double distance(const BlochVector& a, const BlochVector& b) { return (a - b).norm(); }

inline std::ostream& operator<<(std::ostream& os, const BlochVector& v) {
    return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

inline constexpr BlochVector kXAxis{1.0, 0.0, 0.0};
inline constexpr BlochVector kYAxis{0.0, 1.0, 0.0};
inline constexpr BlochVector kZAxis{0.0, 0.0, 1.0};

}  // namespace incompat

#endif  // INCOMPAT_BLOCH_HPP
