// config.hpp - run configuration: strict flat key-value files with unit
// suffixes in every key, builtin presets, validation with key-path errors,
// and a canonical serialization that echoes every applied default.
#pragma once

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "mwmix/constants.hpp"
#include "mwmix/level_scheme.hpp"
#include "mwmix/model_core.hpp"
#include "mwmix/propagation.hpp"
#include "mwmix/reduced.hpp"
#include "mwmix/types.hpp"

namespace mwmix {

/// Configuration errors carry the offending key path; the CLI maps them to
/// exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    std::string command; // gain-spectrum | threshold | reduced-analytic | chi-dump

    MediumSpec medium;
    DriveSpec drive; // fully resolved: Rabi amplitudes and carriers computed

    std::string scheme_builtin; // set when a builtin scheme is used
    std::string scheme_file;    // set when loaded from a file
    LevelScheme scheme;

    double omega0_start = 0, omega0_stop = 0;
    int omega0_count = 0;

    std::string threshold_sweep; // rabi_backward | density | length
    double bracket_low = 0, bracket_high = 0;
    double threshold_tolerance = 1e-9;

    bool mismatch_collinear = true;
    double k11_fixed = 0, k41_fixed = 0;

    int quadrature_order = 64;
    double onset_tolerance = 1e-6;
    int seed_slot = 1;
    double seed_amplitude = 1.0;
    DriveAttenuation attenuation{};
    std::string output_prefix;

    std::vector<double> omega0_grid() const {
        std::vector<double> g;
        g.reserve(omega0_count);
        for (int i = 0; i < omega0_count; ++i)
            g.push_back(omega0_count == 1
                            ? omega0_start
                            : omega0_start +
                                  (omega0_stop - omega0_start) * i / (omega0_count - 1));
        return g;
    }
};

namespace detail {

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "command",
        "medium.number_density_per_m3",
        "medium.slab_length_m",
        "medium.temperature_K",
        "medium.atomic_mass_kg",
        "medium.hyperfine_splitting_rad_s",
        "medium.ground_coherence_decay_rad_s",
        "medium.gamma_ba_rad_s",
        "medium.gamma_ca_rad_s",
        "medium.gamma_bap_rad_s",
        "medium.gamma_cap_rad_s",
        "medium.lambda_ba_m",
        "medium.lambda_ca_m",
        "medium.lambda_bap_m",
        "medium.lambda_cap_m",
        "drive.rabi_forward_rad_s",
        "drive.rabi_forward_phase_rad",
        "drive.power_forward_mW",
        "drive.spot_diameter_forward_mm",
        "drive.dipole_forward_Cm",
        "drive.rabi_backward_rad_s",
        "drive.rabi_backward_phase_rad",
        "drive.power_backward_mW",
        "drive.spot_diameter_backward_mm",
        "drive.dipole_backward_Cm",
        "drive.detuning_forward_rad_s",
        "drive.detuning_backward_rad_s",
        "drive.beam_angle_rad",
        "scheme.builtin",
        "scheme.file",
        "scan.omega0_start_rad_s",
        "scan.omega0_stop_rad_s",
        "scan.omega0_count",
        "threshold.sweep",
        "threshold.bracket_low",
        "threshold.bracket_high",
        "threshold.tolerance",
        "reduced.mismatch",
        "reduced.k11_per_m",
        "reduced.k41_per_m",
        "quadrature.order",
        "tolerance.onset",
        "seed.slot",
        "seed.amplitude",
        "attenuation.enabled",
        "attenuation.alpha_forward_per_m",
        "attenuation.alpha_backward_per_m",
        "attenuation.slabs",
        "output.prefix",
    };
    return keys;
}

inline double need_number(const KeyValueFile& kv, const std::string& key) {
    if (!kv.has(key)) throw ConfigError("missing required key \"" + key + "\"");
    try {
        return kv.number(key);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

inline cplx resolve_rabi(const KeyValueFile& kv, const std::string& side) {
    std::string rabi_key = "drive.rabi_" + side + "_rad_s";
    std::string power_key = "drive.power_" + side + "_mW";
    bool has_rabi = kv.has(rabi_key);
    bool has_power = kv.has(power_key);
    if (has_rabi && has_power)
        throw ConfigError("give either \"" + rabi_key + "\" or \"" + power_key +
                          "\", not both");
    double mag = 0;
    if (has_rabi) {
        mag = kv.number(rabi_key);
    } else if (has_power) {
        double p = kv.number(power_key) * 1e-3;
        double spot = need_number(kv, "drive.spot_diameter_" + side + "_mm") * 1e-3;
        double dip = need_number(kv, "drive.dipole_" + side + "_Cm");
        mag = rabi_from_power(p, spot, dip);
    } else {
        throw ConfigError("missing required key \"" + rabi_key + "\" (or the power route \"" +
                          power_key + "\")");
    }
    if (mag < 0) throw ConfigError("key \"" + rabi_key + "\": magnitude must be >= 0");
    double phase = kv.number_or("drive.rabi_" + side + "_phase_rad", 0.0);
    return std::polar(mag, phase);
}

} // namespace detail

/// Builtin preset texts, expanded through the same parser as user files.
inline std::string preset_text(const std::string& name) {
    if (name == "fig2a") {
        // counter-propagating two-laser configuration: 10 mW forward, 1.5 mm
        // spot, 800 MHz red of the D1 F=3->F'=3 line; 2.5 mW backward, 2 GHz
        // blue of the D2 F=2->F''=3 line; 92 C cell. Density and effective
        // dipole moments are assumptions (near-threshold operation), marked
        // in the comments.
        return R"(command = gain-spectrum
medium.number_density_per_m3 = 2.1e18   # assumed: effective vapor density (near 92 C, above oscillation threshold)
medium.slab_length_m = 0.05
medium.temperature_K = 365.15           # 92 C
medium.atomic_mass_kg = 1.40999e-25     # Rb-85
medium.hyperfine_splitting_rad_s = 1.9074079e10   # 2 pi x 3.035732 GHz
medium.ground_coherence_decay_rad_s = 3.1415927e5 # 2 pi x 50 kHz transit rate
medium.gamma_ba_rad_s = 1.80645e7       # D1 radiative half width
medium.gamma_ca_rad_s = 1.80645e7
medium.gamma_bap_rad_s = 1.90594e7      # D2
medium.gamma_cap_rad_s = 1.90594e7
medium.lambda_ba_m = 7.94979e-7
medium.lambda_ca_m = 7.94979e-7
medium.lambda_bap_m = 7.80241e-7
medium.lambda_cap_m = 7.80241e-7
drive.power_forward_mW = 10.0
drive.spot_diameter_forward_mm = 1.5
drive.dipole_forward_Cm = 2.54e-29      # effective D1 dipole moment (atomic-data assumption)
drive.power_backward_mW = 2.5
drive.spot_diameter_backward_mm = 1.5
drive.dipole_backward_Cm = 2.93e-29     # effective D2 dipole moment (atomic-data assumption)
drive.detuning_forward_rad_s = -5.0265482e9   # 800 MHz red
drive.detuning_backward_rad_s = 1.2566371e10  # 2 GHz blue
drive.beam_angle_rad = 0.0
scheme.builtin = rb85-d1d2
scan.omega0_start_rad_s = 1.9043174e10  # lock region minus 5 MHz
scan.omega0_stop_rad_s = 1.9106006e10   # lock region plus 5 MHz
scan.omega0_count = 201
quadrature.order = 64
)";
    }
    if (name == "fig2a-forward-only") {
        std::string base = preset_text("fig2a");
        base += "drive.rabi_backward_rad_s = 0.0\n";
        return base;
    }
    throw ConfigError("unknown preset \"" + name + "\"");
}

/// Parses and fully validates a configuration. Unknown keys are rejected with
/// the key path; every physical quantity key carries its unit suffix.
inline RunConfig parse_config(const KeyValueFile& kv_in, const KeyValueFile* overlay = nullptr) {
    // merge overlay (file over preset)
    std::map<std::string, std::string> merged = kv_in.entries();
    if (overlay)
        for (const auto& [k, v] : overlay->entries()) merged[k] = v;

    // overlay of the backward power route over a preset rabi route (or vice
    // versa) must not leave both in place
    if (merged.count("drive.rabi_backward_rad_s") && merged.count("drive.power_backward_mW") &&
        overlay) {
        if (overlay->has("drive.rabi_backward_rad_s")) merged.erase("drive.power_backward_mW");
        if (overlay->has("drive.power_backward_mW")) merged.erase("drive.rabi_backward_rad_s");
    }
    if (merged.count("drive.rabi_forward_rad_s") && merged.count("drive.power_forward_mW") &&
        overlay) {
        if (overlay->has("drive.rabi_forward_rad_s")) merged.erase("drive.power_forward_mW");
        if (overlay->has("drive.power_forward_mW")) merged.erase("drive.rabi_forward_rad_s");
    }

    std::ostringstream rebuilt;
    for (const auto& [k, v] : merged) rebuilt << k << " = " << v << "\n";
    std::istringstream in(rebuilt.str());
    KeyValueFile kv = KeyValueFile::parse_stream(in);

    for (const auto& [key, value] : kv.entries())
        if (!detail::known_config_keys().count(key))
            throw ConfigError("unknown key \"" + key + "\"");

    RunConfig rc;
    if (!kv.has("command")) throw ConfigError("missing required key \"command\"");
    rc.command = kv.raw("command");
    if (rc.command != "gain-spectrum" && rc.command != "threshold" &&
        rc.command != "reduced-analytic" && rc.command != "chi-dump")
        throw ConfigError("key \"command\": unknown command \"" + rc.command + "\"");

    // medium
    rc.medium.number_density = detail::need_number(kv, "medium.number_density_per_m3");
    rc.medium.slab_length = detail::need_number(kv, "medium.slab_length_m");
    rc.medium.temperature = detail::need_number(kv, "medium.temperature_K");
    rc.medium.atomic_mass = detail::need_number(kv, "medium.atomic_mass_kg");
    rc.medium.hyperfine_splitting = detail::need_number(kv, "medium.hyperfine_splitting_rad_s");
    rc.medium.ground_coherence_decay =
        detail::need_number(kv, "medium.ground_coherence_decay_rad_s");
    rc.medium.gamma[TR_BA] = detail::need_number(kv, "medium.gamma_ba_rad_s");
    rc.medium.gamma[TR_CA] = detail::need_number(kv, "medium.gamma_ca_rad_s");
    rc.medium.gamma[TR_BAP] = detail::need_number(kv, "medium.gamma_bap_rad_s");
    rc.medium.gamma[TR_CAP] = detail::need_number(kv, "medium.gamma_cap_rad_s");
    rc.medium.lambda[TR_BA] = detail::need_number(kv, "medium.lambda_ba_m");
    rc.medium.lambda[TR_CA] = detail::need_number(kv, "medium.lambda_ca_m");
    rc.medium.lambda[TR_BAP] = detail::need_number(kv, "medium.lambda_bap_m");
    rc.medium.lambda[TR_CAP] = detail::need_number(kv, "medium.lambda_cap_m");
    try {
        rc.medium.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("medium.*: ") + e.what());
    }

    // drive; carriers derive from the primary-leg wavelengths and detunings
    rc.drive.rabi_forward = detail::resolve_rabi(kv, "forward");
    rc.drive.rabi_backward = detail::resolve_rabi(kv, "backward");
    rc.drive.detuning_forward = detail::need_number(kv, "drive.detuning_forward_rad_s");
    rc.drive.detuning_backward = detail::need_number(kv, "drive.detuning_backward_rad_s");
    rc.drive.beam_angle = kv.number_or("drive.beam_angle_rad", 0.0);
    rc.drive.carrier_forward =
        2.0 * M_PI * constants::c / rc.medium.lambda[TR_CA] + rc.drive.detuning_forward;
    rc.drive.carrier_backward =
        2.0 * M_PI * constants::c / rc.medium.lambda[TR_BAP] + rc.drive.detuning_backward;
    try {
        rc.drive.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("drive.*: ") + e.what());
    }

    // scheme
    bool has_builtin = kv.has("scheme.builtin");
    bool has_file = kv.has("scheme.file");
    if (has_builtin == has_file)
        throw ConfigError("give exactly one of \"scheme.builtin\" or \"scheme.file\"");
    if (has_builtin) {
        rc.scheme_builtin = kv.raw("scheme.builtin");
        if (rc.scheme_builtin == "rb85-d1d2")
            rc.scheme = LevelScheme::standard(true);
        else if (rc.scheme_builtin == "rb85-d1d2-single-leg")
            rc.scheme = LevelScheme::standard(false);
        else
            throw ConfigError("key \"scheme.builtin\": unknown scheme \"" + rc.scheme_builtin +
                              "\"");
    } else {
        rc.scheme_file = kv.raw("scheme.file");
        try {
            rc.scheme = LevelScheme::load_file(rc.scheme_file);
        } catch (const std::exception& e) {
            // an unreadable scheme file is a runtime failure, not a config error
            throw std::runtime_error(std::string("scheme.file: ") + e.what());
        }
    }

    bool needs_scan = rc.command == "gain-spectrum" || rc.command == "reduced-analytic" ||
                      rc.command == "chi-dump";
    if (needs_scan) {
        rc.omega0_start = detail::need_number(kv, "scan.omega0_start_rad_s");
        rc.omega0_stop = detail::need_number(kv, "scan.omega0_stop_rad_s");
        double count = detail::need_number(kv, "scan.omega0_count");
        rc.omega0_count = (int)count;
        if (rc.omega0_count < 1 || count != rc.omega0_count)
            throw ConfigError("key \"scan.omega0_count\": need an integer >= 1");
        if (!(rc.omega0_start <= rc.omega0_stop))
            throw ConfigError("key \"scan.omega0_start_rad_s\": start must be <= stop");
    }

    if (rc.command == "threshold") {
        if (!kv.has("threshold.sweep"))
            throw ConfigError("missing required key \"threshold.sweep\"");
        rc.threshold_sweep = kv.raw("threshold.sweep");
        if (rc.threshold_sweep != "rabi_backward" && rc.threshold_sweep != "density" &&
            rc.threshold_sweep != "length")
            throw ConfigError("key \"threshold.sweep\": unknown sweep \"" + rc.threshold_sweep +
                              "\"");
        rc.bracket_low = detail::need_number(kv, "threshold.bracket_low");
        rc.bracket_high = detail::need_number(kv, "threshold.bracket_high");
        if (!(rc.bracket_low < rc.bracket_high))
            throw ConfigError("key \"threshold.bracket_low\": bracket_low must be < bracket_high");
        rc.threshold_tolerance = kv.number_or("threshold.tolerance", 1e-9);
    }

    if (kv.has("reduced.mismatch")) {
        std::string mode = kv.raw("reduced.mismatch");
        if (mode == "collinear")
            rc.mismatch_collinear = true;
        else if (mode == "fixed")
            rc.mismatch_collinear = false;
        else
            throw ConfigError("key \"reduced.mismatch\": expected collinear or fixed");
    }
    rc.k11_fixed = kv.number_or("reduced.k11_per_m", 0.0);
    rc.k41_fixed = kv.number_or("reduced.k41_per_m", 0.0);

    double order = kv.number_or("quadrature.order", 64);
    rc.quadrature_order = (int)order;
    if (rc.quadrature_order < 2 || order != rc.quadrature_order)
        throw ConfigError("key \"quadrature.order\": need an integer >= 2");
    rc.onset_tolerance = kv.number_or("tolerance.onset", 1e-6);
    if (!(rc.onset_tolerance > 0))
        throw ConfigError("key \"tolerance.onset\": must be > 0");

    double seed_slot = kv.number_or("seed.slot", 1);
    rc.seed_slot = (int)seed_slot;
    if (rc.seed_slot < 1 || rc.seed_slot > 4 || seed_slot != rc.seed_slot)
        throw ConfigError("key \"seed.slot\": need an integer in 1..4");
    rc.seed_amplitude = kv.number_or("seed.amplitude", 1.0);
    if (!(rc.seed_amplitude > 0)) throw ConfigError("key \"seed.amplitude\": must be > 0");

    if (kv.has("attenuation.enabled")) {
        std::string v = kv.raw("attenuation.enabled");
        if (v != "true" && v != "false")
            throw ConfigError("key \"attenuation.enabled\": expected true or false");
        rc.attenuation.enabled = v == "true";
    }
    rc.attenuation.alpha_forward = kv.number_or("attenuation.alpha_forward_per_m", 0.0);
    rc.attenuation.alpha_backward = kv.number_or("attenuation.alpha_backward_per_m", 0.0);
    double slabs = kv.number_or("attenuation.slabs", 64);
    rc.attenuation.slabs = (int)slabs;
    if (rc.attenuation.slabs < 1) throw ConfigError("key \"attenuation.slabs\": need >= 1");

    rc.output_prefix = kv.has("output.prefix") ? kv.raw("output.prefix") : rc.command;
    return rc;
}

inline RunConfig load_config(const std::string& path) {
    KeyValueFile kv;
    try {
        kv = KeyValueFile::load(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_config(kv);
}

inline RunConfig load_preset(const std::string& name, const std::string& overlay_path = "") {
    std::istringstream in(preset_text(name));
    KeyValueFile base = KeyValueFile::parse_stream(in);
    if (overlay_path.empty()) return parse_config(base);
    KeyValueFile over;
    try {
        over = KeyValueFile::load(overlay_path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_config(base, &over);
}

/// Canonical serialization: all defaults applied and echoed; reloading the
/// text reproduces the same configuration.
inline std::string serialize_config(const RunConfig& rc) {
    std::ostringstream os;
    auto num = [&](const std::string& key, double v) {
        os << key << " = " << detail::format_double(v) << "\n";
    };
    os << "command = " << rc.command << "\n";
    num("medium.number_density_per_m3", rc.medium.number_density);
    num("medium.slab_length_m", rc.medium.slab_length);
    num("medium.temperature_K", rc.medium.temperature);
    num("medium.atomic_mass_kg", rc.medium.atomic_mass);
    num("medium.hyperfine_splitting_rad_s", rc.medium.hyperfine_splitting);
    num("medium.ground_coherence_decay_rad_s", rc.medium.ground_coherence_decay);
    num("medium.gamma_ba_rad_s", rc.medium.gamma[TR_BA]);
    num("medium.gamma_ca_rad_s", rc.medium.gamma[TR_CA]);
    num("medium.gamma_bap_rad_s", rc.medium.gamma[TR_BAP]);
    num("medium.gamma_cap_rad_s", rc.medium.gamma[TR_CAP]);
    num("medium.lambda_ba_m", rc.medium.lambda[TR_BA]);
    num("medium.lambda_ca_m", rc.medium.lambda[TR_CA]);
    num("medium.lambda_bap_m", rc.medium.lambda[TR_BAP]);
    num("medium.lambda_cap_m", rc.medium.lambda[TR_CAP]);
    num("drive.rabi_forward_rad_s", std::abs(rc.drive.rabi_forward));
    num("drive.rabi_forward_phase_rad",
        std::abs(rc.drive.rabi_forward) > 0 ? std::arg(rc.drive.rabi_forward) : 0.0);
    num("drive.rabi_backward_rad_s", std::abs(rc.drive.rabi_backward));
    num("drive.rabi_backward_phase_rad",
        std::abs(rc.drive.rabi_backward) > 0 ? std::arg(rc.drive.rabi_backward) : 0.0);
    num("drive.detuning_forward_rad_s", rc.drive.detuning_forward);
    num("drive.detuning_backward_rad_s", rc.drive.detuning_backward);
    num("drive.beam_angle_rad", rc.drive.beam_angle);
    if (!rc.scheme_file.empty())
        os << "scheme.file = " << rc.scheme_file << "\n";
    else
        os << "scheme.builtin = " << rc.scheme_builtin << "\n";
    if (rc.command == "gain-spectrum" || rc.command == "reduced-analytic" ||
        rc.command == "chi-dump") {
        num("scan.omega0_start_rad_s", rc.omega0_start);
        num("scan.omega0_stop_rad_s", rc.omega0_stop);
        num("scan.omega0_count", rc.omega0_count);
    }
    if (rc.command == "threshold") {
        os << "threshold.sweep = " << rc.threshold_sweep << "\n";
        num("threshold.bracket_low", rc.bracket_low);
        num("threshold.bracket_high", rc.bracket_high);
        num("threshold.tolerance", rc.threshold_tolerance);
    }
    os << "reduced.mismatch = " << (rc.mismatch_collinear ? "collinear" : "fixed") << "\n";
    num("reduced.k11_per_m", rc.k11_fixed);
    num("reduced.k41_per_m", rc.k41_fixed);
    num("quadrature.order", rc.quadrature_order);
    num("tolerance.onset", rc.onset_tolerance);
    num("seed.slot", rc.seed_slot);
    num("seed.amplitude", rc.seed_amplitude);
    os << "attenuation.enabled = " << (rc.attenuation.enabled ? "true" : "false") << "\n";
    num("attenuation.alpha_forward_per_m", rc.attenuation.alpha_forward);
    num("attenuation.alpha_backward_per_m", rc.attenuation.alpha_backward);
    num("attenuation.slabs", rc.attenuation.slabs);
    os << "output.prefix = " << rc.output_prefix << "\n";
    return os.str();
}

} // namespace mwmix
