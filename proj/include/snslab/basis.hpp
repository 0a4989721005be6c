#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snslab/rng.hpp"

namespace snslab {

using Vec3i = std::array<int, 3>;
using Vec3d = std::array<double, 3>;

inline Vec3d cross(const Vec3d& a, const Vec3d& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec3d& a, const Vec3d& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3d normalized(const Vec3d& a) {
    const double n = std::sqrt(dot(a, a));
    return {a[0] / n, a[1] / n, a[2] / n};
}

/// One real eigenfunction of the Stokes operator on the periodic box.
///
/// Wavevectors run over the full integer lattice 0 < |k|_inf <= cutoff. A mode
/// whose k is in the positive half-lattice (first nonzero component > 0) is the
/// cosine profile sqrt(2/L^3) e cos(2 pi k.x / L); its mirror entry at -k is the
/// sine partner on the same wavevector pair, so the (k, polarization) labels
/// enumerate an orthonormal real basis without double counting.
struct Mode {
    Vec3i k;             // integer wavevector, never 0
    int polarization;    // 1 or 2
    double eigenvalue;   // (2 pi / L)^2 |k|^2
    Vec3d pol_vector;    // unit vector orthogonal to k
    bool cosine;         // cosine profile if k is in the positive half-lattice
};

inline bool lattice_positive(const Vec3i& k) {
    if (k[0] != 0) return k[0] > 0;
    if (k[1] != 0) return k[1] > 0;
    return k[2] > 0;
}

inline int norm_sq(const Vec3i& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

/// Deterministic polarization frame for wavevector k: e1 = normalized k x a,
/// a the first standard basis vector not parallel to k; e2 = normalized k x e1.
inline std::pair<Vec3d, Vec3d> polarization_frame(const Vec3i& k) {
    const Vec3d kd = {double(k[0]), double(k[1]), double(k[2])};
    const bool k_parallel_ex = (k[1] == 0 && k[2] == 0);
    const Vec3d a = k_parallel_ex ? Vec3d{0.0, 1.0, 0.0} : Vec3d{1.0, 0.0, 0.0};
    const Vec3d e1 = normalized(cross(kd, a));
    const Vec3d e2 = normalized(cross(kd, e1));
    return {e1, e2};
}

/// Divergence-free spectral basis of the Stokes operator A = -Laplace on the
/// torus [0, L]^3 (zero-mean, periodic fields), truncated at |k|_inf <= cutoff.
/// Immutable after construction; shared freely across threads.
class StokesBasis {
  public:
    struct ConvTriple {
        std::int32_t a;    // lattice index contributing the transported factor
        std::int32_t b;    // lattice index contributing the gradient factor
        std::int32_t out;  // positive-half lattice index receiving a + b
    };

    static std::shared_ptr<const StokesBasis> build(double period, int cutoff) {
        if (cutoff < 1) throw std::invalid_argument("StokesBasis: empty basis (cutoff must be >= 1)");
        if (!(period > 0.0)) throw std::invalid_argument("StokesBasis: period must be positive");
        return std::shared_ptr<const StokesBasis>(new StokesBasis(period, cutoff));
    }

    double period() const { return period_; }
    int cutoff() const { return cutoff_; }
    std::size_t size() const { return modes_.size(); }
    const std::vector<Mode>& modes() const { return modes_; }
    const Mode& mode(std::size_t i) const { return modes_[i]; }
    double eigenvalue(std::size_t i) const { return modes_[i].eigenvalue; }
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }

    const std::vector<Vec3i>& lattice() const { return lattice_; }

    /// Index of k in the lattice enumeration, or -1 if outside the truncation.
    int lattice_index(const Vec3i& k) const {
        for (int d = 0; d < 3; ++d)
            if (k[d] < -cutoff_ || k[d] > cutoff_) return -1;
        const int w = 2 * cutoff_ + 1;
        const int flat = (k[0] + cutoff_) * w * w + (k[1] + cutoff_) * w + (k[2] + cutoff_);
        return lattice_lookup_[flat];
    }

    /// For mode i: lattice index of the positive-half representative of its k.
    int mode_lattice_slot(std::size_t i) const { return mode_slot_[i]; }

    const std::vector<ConvTriple>& convolution_plan() const { return plan_; }

    nlohmann::json metadata() const {
        nlohmann::json j;
        j["period_L"] = period_;
        j["cutoff"] = cutoff_;
        j["truncation"] = "sup-norm cube |k|_inf <= cutoff";
        j["mode_count"] = size();
        j["ordering"] = "eigenvalue ascending, ties by lexicographic (k, polarization)";
        nlohmann::json modes = nlohmann::json::array();
        for (const Mode& m : modes_) {
            modes.push_back({{"k", m.k},
                             {"p", m.polarization},
                             {"lambda", m.eigenvalue},
                             {"e", m.pol_vector},
                             {"profile", m.cosine ? "cos" : "sin"}});
        }
        j["modes"] = std::move(modes);
        return j;
    }

    std::uint64_t metadata_hash() const { return fnv1a(metadata().dump()); }

  private:
    StokesBasis(double period, int cutoff) : period_(period), cutoff_(cutoff) {
        const double base = std::pow(2.0 * std::numbers::pi / period_, 2);

        for (int kx = -cutoff; kx <= cutoff; ++kx)
            for (int ky = -cutoff; ky <= cutoff; ++ky)
                for (int kz = -cutoff; kz <= cutoff; ++kz) {
                    const Vec3i k = {kx, ky, kz};
                    if (k == Vec3i{0, 0, 0}) continue;
                    lattice_.push_back(k);
                }
        std::sort(lattice_.begin(), lattice_.end(), [](const Vec3i& a, const Vec3i& b) {
            return std::tie(a[0], a[1], a[2]) < std::tie(b[0], b[1], b[2]);
        });

        const int w = 2 * cutoff + 1;
        lattice_lookup_.assign(std::size_t(w) * w * w, -1);
        for (std::size_t i = 0; i < lattice_.size(); ++i) {
            const Vec3i& k = lattice_[i];
            lattice_lookup_[std::size_t(k[0] + cutoff) * w * w + std::size_t(k[1] + cutoff) * w +
                            std::size_t(k[2] + cutoff)] = int(i);
        }

        for (const Vec3i& k : lattice_) {
            const auto [e1, e2] = polarization_frame(k);
            const double lambda = base * norm_sq(k);
            const bool cosine = lattice_positive(k);
            modes_.push_back({k, 1, lambda, e1, cosine});
            modes_.push_back({k, 2, lambda, e2, cosine});
        }
        std::sort(modes_.begin(), modes_.end(), [](const Mode& a, const Mode& b) {
            const int na = norm_sq(a.k), nb = norm_sq(b.k);
            return std::tie(na, a.k[0], a.k[1], a.k[2], a.polarization) <
                   std::tie(nb, b.k[0], b.k[1], b.k[2], b.polarization);
        });

        eigenvalues_.reserve(modes_.size());
        mode_slot_.reserve(modes_.size());
        for (const Mode& m : modes_) {
            eigenvalues_.push_back(m.eigenvalue);
            const Vec3i kp = m.cosine ? m.k : Vec3i{-m.k[0], -m.k[1], -m.k[2]};
            mode_slot_.push_back(lattice_index(kp));
        }

        // Convolution stencil k + j = m, all three retained, m in the positive
        // half only (the projection back to real modes never reads the mirror).
        for (std::size_t a = 0; a < lattice_.size(); ++a)
            for (std::size_t b = 0; b < lattice_.size(); ++b) {
                const Vec3i m = {lattice_[a][0] + lattice_[b][0], lattice_[a][1] + lattice_[b][1],
                                 lattice_[a][2] + lattice_[b][2]};
                if (m == Vec3i{0, 0, 0} || !lattice_positive(m)) continue;
                const int out = lattice_index(m);
                if (out >= 0) plan_.push_back({std::int32_t(a), std::int32_t(b), out});
            }
        std::sort(plan_.begin(), plan_.end(), [](const ConvTriple& x, const ConvTriple& y) {
            return std::tie(x.out, x.a, x.b) < std::tie(y.out, y.a, y.b);
        });
    }

    double period_;
    int cutoff_;
    std::vector<Vec3i> lattice_;
    std::vector<int> lattice_lookup_;
    std::vector<Mode> modes_;
    std::vector<double> eigenvalues_;
    std::vector<int> mode_slot_;
    std::vector<ConvTriple> plan_;
};

using BasisPtr = std::shared_ptr<const StokesBasis>;

inline BasisPtr build_basis(double period, int cutoff) { return StokesBasis::build(period, cutoff); }

}  // namespace snslab
