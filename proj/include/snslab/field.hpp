#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "snslab/basis.hpp"
#include "snslab/rng.hpp"

namespace snslab {

enum class NormKind { H, V, DA, AHalfImage };

inline NormKind norm_kind_from_string(const std::string& s) {
    if (s == "H") return NormKind::H;
    if (s == "V") return NormKind::V;
    if (s == "DA") return NormKind::DA;
    if (s == "A_half_image") return NormKind::AHalfImage;
    throw std::invalid_argument("unknown norm kind: " + s);
}

/// A velocity field as real coefficients on a StokesBasis. All Sobolev-scale
/// norms are diagonal: |u|_H^2 = sum c_i^2, |A^p u|^2 = sum lambda_i^{2p} c_i^2.
struct SpectralField {
    BasisPtr basis;
    std::vector<double> c;

    SpectralField() = default;
    explicit SpectralField(BasisPtr b) : basis(std::move(b)), c(basis->size(), 0.0) {}
    SpectralField(BasisPtr b, std::vector<double> coeffs) : basis(std::move(b)), c(std::move(coeffs)) {
        if (c.size() != basis->size()) throw std::invalid_argument("coefficient count != basis size");
    }

    std::size_t size() const { return c.size(); }
};

inline void require_same_basis(const SpectralField& u, const SpectralField& v) {
    if (u.basis.get() != v.basis.get()) throw std::invalid_argument("basis mismatch");
}

inline double inner_h(const SpectralField& u, const SpectralField& v) {
    require_same_basis(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.c.size(); ++i) s += u.c[i] * v.c[i];
    return s;
}

inline double norm(const SpectralField& u, NormKind kind) {
    const auto& lam = u.basis->eigenvalues();
    double s = 0.0;
    switch (kind) {
        case NormKind::H:
            for (std::size_t i = 0; i < u.c.size(); ++i) s += u.c[i] * u.c[i];
            break;
        case NormKind::V:
        case NormKind::AHalfImage:
            for (std::size_t i = 0; i < u.c.size(); ++i) s += lam[i] * u.c[i] * u.c[i];
            break;
        case NormKind::DA:
            for (std::size_t i = 0; i < u.c.size(); ++i) s += lam[i] * lam[i] * u.c[i] * u.c[i];
            break;
    }
    return std::sqrt(s);
}

inline double norm_h(const SpectralField& u) { return norm(u, NormKind::H); }
inline double norm_v(const SpectralField& u) { return norm(u, NormKind::V); }
inline double norm_da(const SpectralField& u) { return norm(u, NormKind::DA); }

inline double norm_da_sq(const std::vector<double>& lam, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += lam[i] * lam[i] * c[i] * c[i];
    return s;
}

/// Coefficientwise lambda_i^p scaling; negative powers are fine (lambda_1 > 0).
inline SpectralField apply_spectral_power(const SpectralField& u, double p) {
    SpectralField out(u.basis);
    const auto& lam = u.basis->eigenvalues();
    if (p == 0.0) {
        out.c = u.c;
    } else if (p == 1.0) {
        for (std::size_t i = 0; i < u.c.size(); ++i) out.c[i] = lam[i] * u.c[i];
    } else {
        for (std::size_t i = 0; i < u.c.size(); ++i) out.c[i] = std::pow(lam[i], p) * u.c[i];
    }
    return out;
}

inline SpectralField basis_vector(const BasisPtr& basis, std::size_t i, double amplitude = 1.0) {
    SpectralField u(basis);
    u.c.at(i) = amplitude;
    return u;
}

inline SpectralField scaled(const SpectralField& u, double a) {
    SpectralField out(u.basis);
    for (std::size_t i = 0; i < u.c.size(); ++i) out.c[i] = a * u.c[i];
    return out;
}

inline SpectralField add_scaled(const SpectralField& u, double a, const SpectralField& v) {
    require_same_basis(u, v);
    SpectralField out(u.basis);
    for (std::size_t i = 0; i < u.c.size(); ++i) out.c[i] = u.c[i] + a * v.c[i];
    return out;
}

inline SpectralField gaussian_field(const BasisPtr& basis, RngStream& stream) {
    SpectralField u(basis);
    for (double& x : u.c) x = stream.normal();
    return u;
}

/// Gaussian field rescaled so |Au| equals the requested value.
inline SpectralField random_field_with_da_norm(const BasisPtr& basis, double da_norm, RngStream& stream) {
    SpectralField u = gaussian_field(basis, stream);
    const double cur = norm_da(u);
    return scaled(u, da_norm / cur);
}

}  // namespace snslab
