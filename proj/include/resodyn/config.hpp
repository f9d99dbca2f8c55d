#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "resodyn/bath_integrals.hpp"
#include "resodyn/model.hpp"

namespace resodyn {

enum class Scale { Linear, Log };

struct SweepSpec {
    std::string parameter;  ///< sigma | lambda | gamma
    double min = 0.0;
    double max = 0.0;
    int points = 2;
    Scale scale = Scale::Linear;

    std::vector<double> values() const;
};

struct DynamicsSpec {
    std::optional<CMatrix> rho0;   ///< default: |ψ⟩⟨ψ| with ψ uniform
    std::optional<double> t_max;   ///< default: 20 / min Im ε
    int points = 30;
};

/// Parsed run configuration. Sections absent from the file stay empty;
/// the subcommand that needs them reports the missing key.
struct RunConfig {
    std::optional<SystemSpec> system;
    std::optional<FormFactor> form_factor;
    std::optional<BathParams> bath;
    std::optional<CouplingParams> coupling;
    QuadratureConfig quadrature;
    DynamicsSpec dynamics;
    std::optional<SweepSpec> sweep;
    /// spinboson.xi0 overrides the value computed from the bath section.
    std::optional<double> spinboson_xi0;
    int oracle_modes = 2000;
    int oracle_fock_cutoff = 30;

    nlohmann::json source;

    const SystemSpec& require_system() const;
    const FormFactor& require_form_factor() const;
    const BathParams& require_bath() const;
    const CouplingParams& require_coupling() const;
};

/// Throws Error(ConfigError) naming the offending key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// "0.01..100" → {0.01, 100}
std::pair<double, double> parse_range(const std::string& text);
Scale parse_scale(const std::string& text);

}  // namespace resodyn
