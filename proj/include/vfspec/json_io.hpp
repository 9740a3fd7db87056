#pragma once

// JSON views of the report types. Key sets are part of the CLI contract:
// verify emits {lambda, max_abs_residual, max_rel_residual, samples, verdict}
// and norms emits {l2, h1, sup_norm_X, rayleigh, bound_satisfied}. nlohmann's
// default object keeps keys sorted, so equal inputs serialize byte-identically.

#include <json.hpp>

#include "vfspec/analysis.hpp"
#include "vfspec/calculus.hpp"
#include "vfspec/catalog.hpp"
#include "vfspec/spectral.hpp"

namespace vfspec {

inline void to_json(nlohmann::json& j, const EigenpairReport& r) {
    j = nlohmann::json{{"lambda", r.lambda},
                       {"max_abs_residual", r.max_abs_residual},
                       {"max_rel_residual", r.max_rel_residual},
                       {"samples", r.samples},
                       {"verdict", r.verdict}};
}

inline void to_json(nlohmann::json& j, const NormReport& r) {
    j = nlohmann::json{{"l2", r.l2},
                       {"h1", r.h1},
                       {"sup_norm_X", r.sup_norm_x},
                       {"rayleigh", r.rayleigh},
                       {"bound_satisfied", r.bound_satisfied}};
}

inline void to_json(nlohmann::json& j, const ClassificationReport& r) {
    j = nlohmann::json{{"verdict", to_string(r.verdict)},
                       {"killing_residual", r.killing_residual},
                       {"homothetic_residual", r.homothetic_residual},
                       {"fitted_c", r.fitted_c},
                       {"concurrent_residual", r.concurrent_residual},
                       {"length_variance", r.length_variance}};
}

inline void to_json(nlohmann::json& j, const EstimateReport& r) {
    j = nlohmann::json{{"lambda_hat", nullptr},
                       {"regression_rms", r.regression_rms},
                       {"sign_consistent", r.sign_consistent},
                       {"samples", r.samples_used},
                       {"truncated_by_exit", r.truncated_by_exit},
                       {"t_end", r.t_end}};
    if (r.lambda_hat) j["lambda_hat"] = *r.lambda_hat;
}

inline void to_json(nlohmann::json& j, const DimProbeReport& r) {
    j = nlohmann::json{{"rank", r.rank},
                       {"k_max", r.k_max},
                       {"verdict", to_string(r.verdict)},
                       {"in_kernel", r.in_kernel},
                       {"kernel_residual", r.kernel_residual}};
}

inline void to_json(nlohmann::json& j, const ScanEntry& e) {
    j = nlohmann::json{
        {"lambda", e.lambda}, {"verdict", e.verdict}, {"residual", e.residual}};
}

inline void to_json(nlohmann::json& j, const SpectralScanReport& r) {
    j = nlohmann::json{{"domain", r.domain_spec},
                       {"field", r.field_spec},
                       {"function", r.function_spec},
                       {"entries", r.entries},
                       {"violations", r.violations}};
}

inline void to_json(nlohmann::json& j, const IsometryTransportReport& r) {
    j = nlohmann::json{{"pair", r.pair},
                       {"isometry_residual", r.isometry_residual},
                       {"transported_samples", r.transported_samples}};
}

inline void to_json(nlohmann::json& j, const CommutingTransportReport& r) {
    j = nlohmann::json{{"pair", r.pair},
                       {"bracket_residual", r.bracket_residual},
                       {"zero_image", r.zero_image}};
}

inline void to_json(nlohmann::json& j, const CheckResult& r) {
    j = nlohmann::json{{"check", r.name}, {"passed", r.passed}, {"detail", r.detail}};
}

inline void to_json(nlohmann::json& j, const CatalogRunReport& r) {
    j = nlohmann::json{
        {"entry", r.entry}, {"checks", r.checks}, {"mismatches", r.mismatches}};
}

}  // namespace vfspec
