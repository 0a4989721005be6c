#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snslab/field.hpp"

namespace snslab {

/// Closed family of measurable sets the kernel estimates work with: balls in
/// the |A.| metric, coordinate halfspaces of Ay, and the trivial sets, each
/// optionally complemented.
struct EventSpec {
    enum class Kind { Full, Empty, ABall, Halfspace };

    Kind kind = Kind::Full;
    bool complement = false;
    std::vector<double> center;  // ABall center coefficients; empty means the origin
    double radius = 0.0;         // ABall: |A(y - c)| <= radius
    std::size_t mode = 0;        // Halfspace: <Ay, h_mode> >= threshold
    double threshold = 0.0;

    static EventSpec full() { return {}; }
    static EventSpec empty() {
        EventSpec e;
        e.kind = Kind::Empty;
        return e;
    }
    static EventSpec a_ball(double radius, std::vector<double> center = {}) {
        EventSpec e;
        e.kind = Kind::ABall;
        e.radius = radius;
        e.center = std::move(center);
        return e;
    }
    static EventSpec halfspace(std::size_t mode, double threshold) {
        EventSpec e;
        e.kind = Kind::Halfspace;
        e.mode = mode;
        e.threshold = threshold;
        return e;
    }
    /// The short-time regularity sublevel set {y : 5 C* (1 + |Ay|)^2 eps <= 1},
    /// an |A.| ball of radius sqrt(1/(5 C* eps)) - 1 about the origin (empty
    /// when that radius is negative).
    static EventSpec regularity_sublevel(double c_star, double eps) {
        const double r = std::sqrt(1.0 / (5.0 * c_star * eps)) - 1.0;
        if (r < 0.0) return empty();
        return a_ball(r);
    }

    EventSpec complemented() const {
        EventSpec e = *this;
        e.complement = !e.complement;
        return e;
    }

    bool contains(const SpectralField& y) const {
        bool in = false;
        switch (kind) {
            case Kind::Full:
                in = true;
                break;
            case Kind::Empty:
                in = false;
                break;
            case Kind::ABall: {
                const auto& lam = y.basis->eigenvalues();
                double s = 0.0;
                for (std::size_t i = 0; i < y.c.size(); ++i) {
                    const double d = y.c[i] - (center.empty() ? 0.0 : center[i]);
                    s += lam[i] * lam[i] * d * d;
                }
                in = s <= radius * radius;
                break;
            }
            case Kind::Halfspace:
                in = y.basis->eigenvalue(mode) * y.c[mode] >= threshold;
                break;
        }
        return complement ? !in : in;
    }

    /// Membership for a path that blew up: it escaped every bounded set, so it
    /// lies in exactly the complemented ones.
    bool contains_blown_up() const {
        switch (kind) {
            case Kind::Full:
                return !complement;
            case Kind::Empty:
                return complement;
            default:
                return complement;
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        switch (kind) {
            case Kind::Full:
                j["kind"] = "full";
                break;
            case Kind::Empty:
                j["kind"] = "empty";
                break;
            case Kind::ABall:
                j["kind"] = "a_ball";
                j["radius"] = radius;
                if (!center.empty()) j["center"] = center;
                break;
            case Kind::Halfspace:
                j["kind"] = "halfspace";
                j["mode"] = mode;
                j["threshold"] = threshold;
                break;
        }
        if (complement) j["complement"] = true;
        return j;
    }
};

/// Bounded test functionals for semigroup differences: either an indicator of
/// an EventSpec or a smooth bump of the |A.| distance (values in [0, 1], so
/// the sup norm is 1 in both cases).
struct Functional {
    enum class Kind { Indicator, GaussianBall };

    Kind kind = Kind::Indicator;
    EventSpec event;
    std::vector<double> center;  // GaussianBall center; empty means the origin
    double scale = 1.0;

    static Functional indicator(EventSpec e) {
        Functional f;
        f.kind = Kind::Indicator;
        f.event = std::move(e);
        return f;
    }
    static Functional gaussian_ball(double scale, std::vector<double> center = {}) {
        Functional f;
        f.kind = Kind::GaussianBall;
        f.scale = scale;
        f.center = std::move(center);
        return f;
    }
    static Functional constant_one() { return indicator(EventSpec::full()); }

    double eval(const SpectralField& y) const {
        if (kind == Kind::Indicator) return event.contains(y) ? 1.0 : 0.0;
        const auto& lam = y.basis->eigenvalues();
        double s = 0.0;
        for (std::size_t i = 0; i < y.c.size(); ++i) {
            const double d = y.c[i] - (center.empty() ? 0.0 : center[i]);
            s += lam[i] * lam[i] * d * d;
        }
        return std::exp(-s / (scale * scale));
    }

    double eval_blown_up() const {
        if (kind == Kind::Indicator) return event.contains_blown_up() ? 1.0 : 0.0;
        return 0.0;  // the bump vanishes at infinity
    }

    double sup_norm() const { return 1.0; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        if (kind == Kind::Indicator) {
            j["kind"] = "indicator";
            j["event"] = event.to_json();
        } else {
            j["kind"] = "gaussian_ball";
            j["scale"] = scale;
            if (!center.empty()) j["center"] = center;
        }
        return j;
    }
};

}  // namespace snslab
