#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qkd/config.hpp"
#include "qkd/optimize.hpp"
#include "qkd/report.hpp"
#include "qkd/selftest.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string mode = "expectation";
    std::uint64_t seed = 1;
    int n_cut = 9;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON parameter file");
    cmd->add_option("--override", args.overrides,
                    "key.path=value tweak applied after the config file (repeatable)");
    cmd->add_option("--mode", args.mode, "expectation or stochastic")
        ->check(CLI::IsMember({"expectation", "stochastic"}));
    cmd->add_option("--seed", args.seed, "random seed for stochastic mode");
    cmd->add_option("--n-cut", args.n_cut, "photon-number cutoff of the solver bounds")
        ->check(CLI::Range(2, 30));
}

qkd::ProtocolParams resolve_params(const CommonArgs& args) {
    qkd::ProtocolParams params = args.config_path.empty()
                                     ? qkd::default_params()
                                     : qkd::load_params_file(args.config_path);
    for (const std::string& tweak : args.overrides) {
        qkd::apply_override(params, tweak);
    }
    const std::vector<std::string> problems = params.validate();
    if (!problems.empty()) {
        std::string joined = "invalid parameters:";
        for (const std::string& p : problems) joined += "\n  - " + p;
        throw qkd::ConfigError(joined);
    }
    return params;
}

qkd::RunMode run_mode(const CommonArgs& args) {
    return args.mode == "stochastic" ? qkd::RunMode::Stochastic
                                     : qkd::RunMode::Expectation;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

/// Sidecar describing how an output file was produced.  The timestamp lives
/// here so the data file itself stays byte-identical across reruns.
std::string write_manifest(const std::string& output_path, const std::string& command,
                           const qkd::ProtocolParams& params, const CommonArgs& args) {
    const std::string manifest_path = output_path + ".manifest.json";
    json manifest;
    manifest["output"] = output_path;
    manifest["command"] = command;
    manifest["mode"] = args.mode;
    manifest["seed"] = args.seed;
    manifest["n_cut"] = args.n_cut;
    manifest["created_utc"] = utc_now();
    manifest["params"] = json::parse(qkd::params_to_json_text(params));
    write_file(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

json bounds_json(const qkd::VariantResult& v) {
    json out;
    out["method"] = v.bounds.method == qkd::BoundsMethod::Analytic ? "analytic" : "lp";
    out["scope"] = v.bounds.scope == qkd::BoundsScope::AllIntensities
                       ? "all_intensities"
                       : "signal_only";
    out["n0_low"] = v.bounds.n0_low;
    out["n1_low"] = v.bounds.n1_low;
    out["n1_up"] = v.bounds.n1_up;
    out["s_x1_low"] = v.bounds.s_x1_low;
    out["v_x1_up"] = v.bounds.v_x1_up;
    out["eph_up"] = v.bounds.eph_up;
    out["lambda_ec"] = v.lambda;
    out["distill_bits"] = v.distill_bits;
    out["qber"] = v.qber;
    out["secure_len"] = v.secure_len;
    out["key_rate_bps"] = v.key_rate_bps;
    return out;
}

json counts_json(const qkd::SessionCounts& counts) {
    static const char* basis_names[2] = {"z", "x"};
    static const char* intensity_names[qkd::kIntensityCount] = {"u", "v", "w"};
    json out;
    for (int b = 0; b < 2; ++b) {
        json basis;
        for (int k = 0; k < qkd::kIntensityCount; ++k) {
            basis[intensity_names[k]] = {{"sent", counts.cell[b][k].sent},
                                         {"detected", counts.cell[b][k].detected},
                                         {"errors", counts.cell[b][k].errors}};
        }
        out[basis_names[b]] = basis;
    }
    out["discarded"] = counts.discarded;
    return out;
}

json report_json(const qkd::KeyReport& report) {
    json out;
    out["session_seconds"] = report.session_seconds;
    out["qber_z"] = report.qber_z;
    out["v1"] = bounds_json(report.v1);
    out["v2"] = bounds_json(report.v2);
    out["counts"] = counts_json(report.counts);
    return out;
}

std::string join_command(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

int run_rate(const CommonArgs& args, const std::string& json_path,
             const std::string& command) {
    const qkd::ProtocolParams params = resolve_params(args);
    qkd::BoundsOptions options;
    options.n_cut = args.n_cut;

    const qkd::KeyReport report =
        run_mode(args) == qkd::RunMode::Stochastic
            ? qkd::evaluate_stochastic(params, args.seed, options)
            : qkd::evaluate_expectation(params, options);

    json out = report_json(report);
    out["mode"] = args.mode;
    if (args.mode == "stochastic") out["seed"] = args.seed;

    if (!json_path.empty()) {
        out["manifest_path"] = write_manifest(json_path, command, params, args);
        write_file(json_path, out.dump(2) + "\n");
    } else {
        std::cout << out.dump(2) << "\n";
    }
    return 0;
}

int run_sweep(const CommonArgs& args, bool over_distance, double from, double to,
              double step, const std::string& csv_path, const std::string& command) {
    const qkd::ProtocolParams params = resolve_params(args);
    qkd::BoundsOptions options;
    options.n_cut = args.n_cut;

    if (!over_distance) {
        const bool has_data = params.mux.enabled &&
                              std::any_of(params.mux.channels.begin(),
                                          params.mux.channels.end(),
                                          [](const qkd::MuxChannel& ch) {
                                              return ch.role == qkd::ChannelRole::Data &&
                                                     ch.copropagating;
                                          });
        if (!has_data) {
            throw qkd::ConfigError(
                "sweep-power needs mux.enabled=true and a copropagating data channel");
        }
    }

    const std::vector<qkd::SweepPoint> points =
        over_distance ? qkd::sweep_distance(params, from, to, step, run_mode(args),
                                            args.seed, options)
                      : qkd::sweep_power(params, from, to, step, run_mode(args),
                                         args.seed, options);
    const std::string csv = qkd::sweep_csv(points, over_distance ? "km" : "dBm");

    if (!csv_path.empty()) {
        write_manifest(csv_path, command, params, args);
        write_file(csv_path, csv);
    } else {
        std::cout << csv;
    }
    return 0;
}

int run_optimize(const CommonArgs& args, const qkd::OptimizeBox& box,
                 const std::string& json_path, const std::string& command) {
    const qkd::ProtocolParams params = resolve_params(args);
    const qkd::OptimizeResult result = qkd::optimize_params(params, box);

    json out;
    out["key_rate_bps"] = result.key_rate_bps;
    out["passes"] = result.passes;
    out["evaluations"] = result.evaluations;
    out["params"] = json::parse(qkd::params_to_json_text(result.params));

    if (!json_path.empty()) {
        out["manifest_path"] = write_manifest(json_path, command, params, args);
        write_file(json_path, out.dump(2) + "\n");
    } else {
        std::cout << out.dump(2) << "\n";
    }
    return 0;
}

int run_selftest(const CommonArgs& args, int lp_cases, int sandwich_cases) {
    const qkd::ProtocolParams params = resolve_params(args);

    const qkd::SelftestOutcome lp = qkd::lp_cross_check(lp_cases, args.seed);
    std::cout << "lp cross-check: " << lp.cases << " cases, " << lp.failures
              << " failures\n";
    for (const std::string& note : lp.notes) std::cout << "  " << note << "\n";

    const qkd::SelftestOutcome sandwich =
        qkd::bounds_sandwich_check(sandwich_cases, args.seed, params);
    std::cout << "bounds sandwich: " << sandwich.cases << " cases, "
              << sandwich.failures << " failures\n";
    for (const std::string& note : sandwich.notes) std::cout << "  " << note << "\n";

    return lp.passed() && sandwich.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-size key-rate estimator for decoy-state quantum links"};
    app.require_subcommand(1);
    const std::string command = join_command(argc, argv);

    CommonArgs rate_args;
    std::string rate_json;
    CLI::App* rate = app.add_subcommand("rate", "Evaluate one session");
    add_common(rate, rate_args);
    rate->add_option("--json", rate_json, "write the full report to this file");

    CommonArgs dist_args;
    double dist_from = 0, dist_to = 0, dist_step = 0;
    std::string dist_csv;
    CLI::App* dist = app.add_subcommand("sweep-distance", "Evaluate over fiber lengths");
    add_common(dist, dist_args);
    dist->add_option("--from", dist_from, "first length, km")->required();
    dist->add_option("--to", dist_to, "last length, km (inclusive)")->required();
    dist->add_option("--step", dist_step, "length increment, km")->required();
    dist->add_option("--csv", dist_csv, "write CSV to this file");

    CommonArgs power_args;
    double power_from = 0, power_to = 0, power_step = 0;
    std::string power_csv;
    CLI::App* power = app.add_subcommand(
        "sweep-power", "Evaluate over classical receive powers (data channels)");
    add_common(power, power_args);
    power->add_option("--from", power_from, "first receive power, dBm")->required();
    power->add_option("--to", power_to, "last receive power, dBm (inclusive)")->required();
    power->add_option("--step", power_step, "power increment, dB")->required();
    power->add_option("--csv", power_csv, "write CSV to this file");

    CommonArgs opt_args;
    std::string opt_json;
    qkd::OptimizeBox box;
    CLI::App* opt = app.add_subcommand("optimize", "Tune intensities, probabilities and bias");
    add_common(opt, opt_args);
    opt->add_option("--u-min", box.u_min);
    opt->add_option("--u-max", box.u_max);
    opt->add_option("--v-min", box.v_min);
    opt->add_option("--v-max", box.v_max);
    opt->add_option("--pu-min", box.p_u_min);
    opt->add_option("--pu-max", box.p_u_max);
    opt->add_option("--pv-min", box.p_v_min);
    opt->add_option("--pv-max", box.p_v_max);
    opt->add_option("--qz-min", box.qz_min);
    opt->add_option("--qz-max", box.qz_max);
    opt->add_option("--json", opt_json, "write the optimum to this file");

    CommonArgs self_args;
    int lp_cases = 200, sandwich_cases = 100;
    CLI::App* self = app.add_subcommand("selftest", "Cross-check the numerical core");
    add_common(self, self_args);
    self->add_option("--lp-cases", lp_cases, "random programs to cross-check");
    self->add_option("--sandwich-cases", sandwich_cases, "sampled sessions to check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (rate->parsed()) return run_rate(rate_args, rate_json, command);
        if (dist->parsed()) {
            return run_sweep(dist_args, true, dist_from, dist_to, dist_step, dist_csv,
                             command);
        }
        if (power->parsed()) {
            return run_sweep(power_args, false, power_from, power_to, power_step,
                             power_csv, command);
        }
        if (opt->parsed()) return run_optimize(opt_args, box, opt_json, command);
        if (self->parsed()) return run_selftest(self_args, lp_cases, sandwich_cases);
    } catch (const qkd::ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitEstimation;
    }
    return 0;
}
