#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include "snslab/field.hpp"

namespace snslab {

using Cplx = std::complex<double>;

struct CVec3 {
    Cplx x{0.0, 0.0}, y{0.0, 0.0}, z{0.0, 0.0};
};

/// Scratch buffers for the spectral convolution; reuse across steps of one
/// trajectory (one workspace per thread, never shared).
struct BilinearWorkspace {
    std::vector<CVec3> u_hat, v_hat, w_hat;
};

/// Complex lattice representation of a real field: u(x) = sum_k u_hat(k) e^{2 pi i k.x/L}
/// over the full retained lattice, with u_hat(-k) = conj(u_hat(k)).
inline void to_complex_lattice(const SpectralField& u, std::vector<CVec3>& out) {
    const StokesBasis& basis = *u.basis;
    out.assign(basis.lattice().size(), CVec3{});
    const double amp0 = 1.0 / std::sqrt(2.0 * std::pow(basis.period(), 3));
    for (std::size_t i = 0; i < u.c.size(); ++i) {
        if (u.c[i] == 0.0) continue;
        const Mode& m = basis.mode(i);
        const int slot = basis.mode_lattice_slot(i);
        const Vec3i kp = basis.lattice()[std::size_t(slot)];
        const int mirror = basis.lattice_index({-kp[0], -kp[1], -kp[2]});
        // cosine: u_hat(k+) += a e ; sine: u_hat(k+) += -i a e, with a real.
        const Cplx s = m.cosine ? Cplx(u.c[i] * amp0, 0.0) : Cplx(0.0, -u.c[i] * amp0);
        out[std::size_t(slot)].x += s * m.pol_vector[0];
        out[std::size_t(slot)].y += s * m.pol_vector[1];
        out[std::size_t(slot)].z += s * m.pol_vector[2];
        const Cplx sc = std::conj(s);
        out[std::size_t(mirror)].x += sc * m.pol_vector[0];
        out[std::size_t(mirror)].y += sc * m.pol_vector[1];
        out[std::size_t(mirror)].z += sc * m.pol_vector[2];
    }
}

/// Projects a complex lattice field (already divergence-projected) back onto
/// the real modes: c_i = <w, h_i> using only the positive-half entry.
inline void project_to_modes(const StokesBasis& basis, const std::vector<CVec3>& w,
                             std::vector<double>& c) {
    const double scale = std::sqrt(2.0 * std::pow(basis.period(), 3));
    c.assign(basis.size(), 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Mode& m = basis.mode(i);
        const CVec3& wv = w[std::size_t(basis.mode_lattice_slot(i))];
        const Cplx we = wv.x * m.pol_vector[0] + wv.y * m.pol_vector[1] + wv.z * m.pol_vector[2];
        c[i] = m.cosine ? scale * we.real() : -scale * we.imag();
    }
}

/// Galerkin bilinear term: the projection onto the retained divergence-free
/// modes of (u . grad) v. Exact finite convolution over the retained lattice;
/// wavevectors produced outside the truncation are discarded.
inline void bilinear(const SpectralField& u, const SpectralField& v, std::vector<double>& out,
                     BilinearWorkspace& ws) {
    require_same_basis(u, v);
    const StokesBasis& basis = *u.basis;
    to_complex_lattice(u, ws.u_hat);
    to_complex_lattice(v, ws.v_hat);
    ws.w_hat.assign(basis.lattice().size(), CVec3{});

    const auto& lattice = basis.lattice();
    const double two_pi_over_l = 2.0 * std::numbers::pi / basis.period();
    for (const auto& t : basis.convolution_plan()) {
        const CVec3& ua = ws.u_hat[std::size_t(t.a)];
        const CVec3& vb = ws.v_hat[std::size_t(t.b)];
        const Vec3i& j = lattice[std::size_t(t.b)];
        // i (2 pi / L) (u_hat(k) . j) v_hat(j), the transported gradient factor
        const Cplx s = ua.x * double(j[0]) + ua.y * double(j[1]) + ua.z * double(j[2]);
        const Cplx f = Cplx(0.0, two_pi_over_l) * s;
        CVec3& w = ws.w_hat[std::size_t(t.out)];
        w.x += f * vb.x;
        w.y += f * vb.y;
        w.z += f * vb.z;
    }

    // Divergence (Leray) projection at each output wavevector.
    for (std::size_t m = 0; m < lattice.size(); ++m) {
        const Vec3i& k = lattice[m];
        if (!lattice_positive(k)) continue;
        CVec3& w = ws.w_hat[m];
        const double k2 = double(norm_sq(k));
        const Cplx kw = w.x * double(k[0]) + w.y * double(k[1]) + w.z * double(k[2]);
        const Cplx r = kw / k2;
        w.x -= r * double(k[0]);
        w.y -= r * double(k[1]);
        w.z -= r * double(k[2]);
    }

    project_to_modes(basis, ws.w_hat, out);
}

inline SpectralField bilinear(const SpectralField& u, const SpectralField& v) {
    BilinearWorkspace ws;
    SpectralField out(u.basis);
    bilinear(u, v, out.c, ws);
    return out;
}

}  // namespace snslab
