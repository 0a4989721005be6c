#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snslab/bilinear.hpp"
#include "snslab/io.hpp"
#include "snslab/version.hpp"

namespace snslab {

/// Empirical lower estimate of the best constant in
/// |A^{1/2} B(u,v)| <= C0 |Au| |Av| at a fixed truncation.
struct ConstantsEstimate {
    double c0_hat = 0.0;
    double c_star_hat = 0.0;  // 4 c0_hat^2, exactly
    std::size_t sample_count = 0;
    int cutoff = 0;
};

inline ConstantsEstimate estimate_constants(const BasisPtr& basis, std::size_t n_samples,
                                            RngStream stream) {
    if (n_samples < 1) throw std::invalid_argument("estimate_constants: need n_samples >= 1");
    ConstantsEstimate est;
    est.sample_count = n_samples;
    est.cutoff = basis->cutoff();
    BilinearWorkspace ws;
    std::vector<double> b;
    const auto& lam = basis->eigenvalues();
    for (std::size_t s = 0; s < n_samples; ++s) {
        SpectralField u = gaussian_field(basis, stream);
        SpectralField v = gaussian_field(basis, stream);
        double au = norm_da(u), av = norm_da(v);
        while (au == 0.0 || av == 0.0) {  // measure-zero guard, resample
            u = gaussian_field(basis, stream);
            v = gaussian_field(basis, stream);
            au = norm_da(u);
            av = norm_da(v);
        }
        bilinear(u, v, b, ws);
        double vb = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) vb += lam[i] * b[i] * b[i];
        est.c0_hat = std::max(est.c0_hat, std::sqrt(vb) / (au * av));
    }
    est.c_star_hat = 4.0 * est.c0_hat * est.c0_hat;
    return est;
}

/// Calibrated constants every verification run consumes. Estimated once at a
/// declared truncation, appended to a registry, never re-tuned per experiment.
struct FrozenConstants {
    int id = 1;
    double c0 = 0.0;
    double c_star = 0.0;
    double tail_c = 0.0;    // sup-tail envelope prefactor
    double tail_eta = 0.0;  // sup-tail decay rate
    double grad_c = 0.0;    // regularized-gradient constant (rate and prefactor)
    int basis_cutoff = 0;
    double period = 1.0;
    double nu = 1.0;
    double dt = 1e-3;
    double tail_epsilon = 0.0;
    std::uint64_t tail_paths = 0;
    std::uint64_t seed = 0;
    std::string rng;
    std::string version;

    nlohmann::json to_json() const {
        return {{"id", id},
                {"c0", c0},
                {"c_star", c_star},
                {"tail_c", tail_c},
                {"tail_eta", tail_eta},
                {"grad_c", grad_c},
                {"basis_cutoff", basis_cutoff},
                {"period", period},
                {"nu", nu},
                {"dt", dt},
                {"tail_epsilon", tail_epsilon},
                {"tail_paths", tail_paths},
                {"seed", seed},
                {"rng", rng},
                {"version", version}};
    }

    static FrozenConstants from_json(const nlohmann::json& j) {
        FrozenConstants f;
        f.id = j.at("id").get<int>();
        f.c0 = j.at("c0").get<double>();
        f.c_star = j.at("c_star").get<double>();
        f.tail_c = j.at("tail_c").get<double>();
        f.tail_eta = j.at("tail_eta").get<double>();
        f.grad_c = j.at("grad_c").get<double>();
        f.basis_cutoff = j.at("basis_cutoff").get<int>();
        f.period = j.at("period").get<double>();
        f.nu = j.at("nu").get<double>();
        f.dt = j.at("dt").get<double>();
        f.tail_epsilon = j.at("tail_epsilon").get<double>();
        f.tail_paths = j.at("tail_paths").get<std::uint64_t>();
        f.seed = j.at("seed").get<std::uint64_t>();
        f.rng = j.value("rng", "");
        f.version = j.value("version", "");
        return f;
    }
};

/// Registry file layout: {"versions": [v1, v2, ...]}; appended, never rewritten
/// in place, so recalibration keeps the full history.
inline void append_constants(const std::string& path, FrozenConstants& fc) {
    nlohmann::json registry;
    try {
        registry = read_json_file(path);
    } catch (const std::exception&) {
        registry = {{"versions", nlohmann::json::array()}};
    }
    fc.id = int(registry.at("versions").size()) + 1;
    registry["versions"].push_back(fc.to_json());
    write_json_file(path, registry);
}

inline FrozenConstants load_latest_constants(const std::string& path) {
    const nlohmann::json registry = read_json_file(path);
    const auto& versions = registry.at("versions");
    if (versions.empty()) throw std::runtime_error("constants registry is empty: " + path);
    return FrozenConstants::from_json(versions.back());
}

}  // namespace snslab
