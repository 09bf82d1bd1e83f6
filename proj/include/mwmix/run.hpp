// run.hpp - executes a validated RunConfig through the library modules and
// writes the CSV rows, the row-derived JSON summary, and the run manifest.
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>

#include "mwmix/config.hpp"
#include "mwmix/scan_io.hpp"

namespace mwmix {

inline const char* version_string() { return "0.1.0"; }

struct RunManifest {
    std::string command;
    std::string config_echo;
    std::string version;
    std::string timestamp;
    std::vector<std::string> outputs;
    int exit_status = 0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["command"] = command;
        j["version"] = version;
        j["timestamp"] = timestamp;
        j["outputs"] = outputs;
        j["exit_status"] = exit_status;
        j["config"] = config_echo;
        return j;
    }
};

namespace detail {

inline std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content,
                       std::vector<std::string>& outputs) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    os << content;
    outputs.push_back(path);
}

inline MismatchPolicy mismatch_policy(const RunConfig& rc) {
    MismatchPolicy p;
    p.collinear = rc.mismatch_collinear;
    p.fixed_k11 = rc.k11_fixed;
    p.fixed_k41 = rc.k41_fixed;
    return p;
}

inline void run_gain_spectrum(const RunConfig& rc, const std::string& dir,
                              RunManifest& manifest) {
    ScanOptions opt;
    opt.chi.quadrature_order = rc.quadrature_order;
    opt.boundary.tolerance = rc.onset_tolerance;
    opt.seed = {};
    opt.seed[rc.seed_slot - 1] = rc.seed_amplitude;
    opt.attenuation = rc.attenuation;
    auto rows = gain_spectrum(rc.scheme, rc.medium, rc.drive, rc.omega0_grid(), opt);

    std::ostringstream csv;
    write_spectrum_csv(csv, rows);
    detail::write_file(dir + "/" + rc.output_prefix + ".csv", csv.str(), manifest.outputs);
    detail::write_file(dir + "/" + rc.output_prefix + "_summary.json",
                       spectrum_summary(rows).dump(2) + "\n", manifest.outputs);
}

inline void run_threshold(const RunConfig& rc, const std::string& dir, RunManifest& manifest) {
    SweptParameter swept = rc.threshold_sweep == "rabi_backward"
                               ? SweptParameter::RabiBackwardMagnitude
                               : rc.threshold_sweep == "density" ? SweptParameter::NumberDensity
                                                                 : SweptParameter::SlabLength;
    ThresholdOptions opt;
    opt.tolerance = rc.threshold_tolerance;
    opt.mismatch = detail::mismatch_policy(rc);
    auto rep = find_threshold(rc.medium, rc.drive, swept, rc.bracket_low, rc.bracket_high, opt);

    std::ostringstream csv;
    csv << "swept,threshold_value,residual,pulled_omega0_rad_s,bracket_low,bracket_high,"
           "converged\n";
    csv << rc.threshold_sweep << "," << detail::format_double(rep.threshold_parameter_value)
        << "," << detail::format_double(rep.residual_at_threshold) << ","
        << detail::format_double(rep.pulled_frequency_at_threshold) << ","
        << detail::format_double(rep.bracket_low) << ","
        << detail::format_double(rep.bracket_high) << "," << (rep.converged ? 1 : 0) << "\n";
    detail::write_file(dir + "/" + rc.output_prefix + ".csv", csv.str(), manifest.outputs);

    nlohmann::json j;
    j["swept"] = rc.threshold_sweep;
    j["threshold_value"] = rep.threshold_parameter_value;
    j["residual"] = rep.residual_at_threshold;
    j["pulled_omega0_rad_s"] = rep.pulled_frequency_at_threshold;
    j["converged"] = rep.converged;
    detail::write_file(dir + "/" + rc.output_prefix + "_summary.json", j.dump(2) + "\n",
                       manifest.outputs);
    if (!rep.converged) manifest.exit_status = 3; // no threshold in bracket
}

inline void run_reduced_analytic(const RunConfig& rc, const std::string& dir,
                                 RunManifest& manifest) {
    MismatchPolicy mm = detail::mismatch_policy(rc);
    std::ostringstream csv;
    csv << "omega0_rad_s,a11_re,a11_im,a14_re,a14_im,a41_re,a41_im,a44_re,a44_im,"
           "delta_a_re,delta_a_im,s_re,s_im,gain_abs,at_threshold,residual_over_s\n";
    for (double w0 : rc.omega0_grid()) {
        auto c = reduced_coefficients(rc.medium, rc.drive, w0, mm.k11(w0), mm.k41(w0));
        auto g = closed_form_gain(c, rc.medium.slab_length);
        cplx D = oscillation_residual(c, rc.medium.slab_length);
        auto f = detail::format_double;
        csv << f(w0) << "," << f(c.a11.real()) << "," << f(c.a11.imag()) << ","
            << f(c.a14.real()) << "," << f(c.a14.imag()) << "," << f(c.a41.real()) << ","
            << f(c.a41.imag()) << "," << f(c.a44.real()) << "," << f(c.a44.imag()) << ","
            << f(c.delta_a.real()) << "," << f(c.delta_a.imag()) << "," << f(c.s.real()) << ","
            << f(c.s.imag()) << "," << f(std::abs(g.gain)) << "," << (g.at_threshold ? 1 : 0)
            << "," << f(std::abs(D) / (std::abs(c.s) + 1e-300)) << "\n";
    }
    detail::write_file(dir + "/" + rc.output_prefix + ".csv", csv.str(), manifest.outputs);

    nlohmann::json j;
    double eta1 = eta_for_transition(rc.medium, TR_BA);
    j["eta1_per_m_s"] = eta1;
    j["eta4_per_m_s"] = eta_for_transition(rc.medium, TR_CAP);
    j["light_shift_rad_s"] =
        light_shift(rc.drive.rabi_forward, rc.drive.rabi_backward, rc.drive.detuning_backward);
    j["kappa"] = stabilization_coefficient(eta1, rc.drive.rabi_forward);
    j["strong_coupling"] = strong_coupling(rc.medium, rc.drive);
    j["pulled_omega0_rad_s"] =
        pulled_frequency_collinear(rc.medium, rc.drive, j["kappa"].get<double>(),
                                   rc.drive.beam_angle);
    detail::write_file(dir + "/" + rc.output_prefix + "_summary.json", j.dump(2) + "\n",
                       manifest.outputs);
}

inline void run_chi_dump(const RunConfig& rc, const std::string& dir, RunManifest& manifest) {
    ChiOptions opt;
    opt.quadrature_order = rc.quadrature_order;
    std::ostringstream csv;
    csv << "omega0_rad_s";
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            csv << ",chi" << i << j << "_re,chi" << i << j << "_im";
    csv << ",converged\n";
    for (double w0 : rc.omega0_grid()) {
        auto cm = chi_doppler(rc.scheme, rc.medium, rc.drive, w0, opt);
        csv << detail::format_double(w0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                csv << "," << detail::format_double(cm.chi(i, j).real()) << ","
                    << detail::format_double(cm.chi(i, j).imag());
        csv << "," << (cm.converged ? 1 : 0) << "\n";
    }
    detail::write_file(dir + "/" + rc.output_prefix + ".csv", csv.str(), manifest.outputs);
}

} // namespace detail

/// Executes the configured command. Outputs land in out_dir; the manifest
/// (including the resolved config echo) is written last.
inline RunManifest run(const RunConfig& rc, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest manifest;
    manifest.command = rc.command;
    manifest.version = version_string();
    manifest.timestamp = detail::iso_timestamp();
    manifest.config_echo = serialize_config(rc);

    if (rc.command == "gain-spectrum")
        detail::run_gain_spectrum(rc, out_dir, manifest);
    else if (rc.command == "threshold")
        detail::run_threshold(rc, out_dir, manifest);
    else if (rc.command == "reduced-analytic")
        detail::run_reduced_analytic(rc, out_dir, manifest);
    else if (rc.command == "chi-dump")
        detail::run_chi_dump(rc, out_dir, manifest);
    else
        throw ConfigError("unknown command \"" + rc.command + "\"");

    std::ofstream mos(out_dir + "/manifest.json", std::ios::binary);
    if (!mos) throw std::runtime_error("cannot write manifest");
    mos << manifest.to_json().dump(2) << "\n";
    manifest.outputs.push_back(out_dir + "/manifest.json");
    return manifest;
}

} // namespace mwmix
