// softmc: drives retention and access-latency experiments against the
// behavioral DRAM module, and provides offline trace/stream utilities.
//
// Exit codes: 0 success; 1 validate-trace found violations; 2 malformed
// input (CLI usage, config, trace or stream parse); 3 I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softmc/campaign.hpp"
#include "softmc/codec.hpp"
#include "softmc/timing.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw softmc::IoError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw softmc::IoError("read failed for '" + path + "'");
    }
    return buf.str();
}

std::vector<std::uint8_t> read_binary(const std::string& path) {
    const std::string text = read_file(path);
    return std::vector<std::uint8_t>(text.begin(), text.end());
}

softmc::Experiment experiment_from_cli(const std::string& name) {
    if (name == "retention") return softmc::Experiment::kRetention;
    if (name == "trcd") return softmc::Experiment::kTrcd;
    if (name == "tras") return softmc::Experiment::kTras;
    throw softmc::ConfigError("unknown experiment '" + name + "'");
}

softmc::RefreshMode refresh_mode_from_cli(const std::string& name) {
    if (name == "software-clock") return softmc::RefreshMode::kSoftwareClock;
    if (name == "auto") return softmc::RefreshMode::kAuto;
    if (name == "manual") return softmc::RefreshMode::kManual;
    throw softmc::ConfigError("unknown refresh mode '" + name + "'");
}

std::uint8_t pattern_from_cli(const std::string& text) {
    std::size_t pos = 0;
    unsigned long value = 0;
    try {
        value = std::stoul(text, &pos, 0);
    } catch (const std::exception&) {
        throw softmc::ConfigError("bad pattern '" + text + "'");
    }
    if (pos != text.size() || value > 0xFF) {
        throw softmc::ConfigError("bad pattern '" + text +
                                  "' (expected a byte, e.g. 0xAA)");
    }
    return std::uint8_t(value);
}

struct RunArgs {
    std::string experiment;
    std::string config_path;
    std::string profile;
    std::uint64_t seed = 0;
    double temperature = 0;
    std::vector<double> intervals;
    std::vector<std::uint32_t> timing_values;
    std::vector<std::string> patterns;
    std::uint32_t rows = 0;
    std::uint32_t interleave = 0;
    std::string refresh_mode;
    std::string out_dir;
    unsigned jobs = 0;
};

int cmd_run(const RunArgs& args, const CLI::App* sub) {
    softmc::CampaignConfig cfg;
    if (!args.config_path.empty()) {
        cfg = softmc::campaign_from_json_text(read_file(args.config_path));
    }
    cfg.experiment = experiment_from_cli(args.experiment);
    if (sub->count("--profile")) cfg.profile = args.profile;
    if (sub->count("--seed")) cfg.seed = args.seed;
    if (sub->count("--temperature")) cfg.temperature_c = args.temperature;
    if (sub->count("--intervals")) cfg.intervals_ms = args.intervals;
    if (sub->count("--timing-values")) cfg.timing_values = args.timing_values;
    if (sub->count("--patterns")) {
        cfg.patterns.clear();
        for (const std::string& p : args.patterns) {
            cfg.patterns.push_back(pattern_from_cli(p));
        }
    }
    if (sub->count("--rows")) cfg.row_count = args.rows;
    if (sub->count("--interleave")) cfg.interleave_width = args.interleave;
    if (sub->count("--refresh-mode")) {
        cfg.refresh_mode = refresh_mode_from_cli(args.refresh_mode);
    }
    if (sub->count("--out")) cfg.out_dir = args.out_dir;
    if (sub->count("--jobs")) cfg.jobs = args.jobs;

    const softmc::TestResult result = softmc::run_campaign(cfg);
    std::cout << softmc::summarize_result(result);
    return 0;
}

int cmd_validate_trace(const std::string& trace_path,
                       const std::string& params_path) {
    softmc::TimingParams params = softmc::default_ddr3_params();
    if (!params_path.empty()) {
        params = softmc::params_from_json_text(read_file(params_path));
    }
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) {
        throw softmc::IoError("cannot open '" + trace_path + "'");
    }
    const softmc::CommandTrace trace = softmc::parse_trace(in);
    const std::vector<softmc::TimingViolation> violations =
        softmc::validate(trace, params);
    std::cout << softmc::violations_csv(violations);
    return violations.empty() ? 0 : 1;
}

int cmd_disasm(const std::string& stream_path) {
    const std::vector<softmc::Instruction> insts =
        softmc::decode_stream(read_binary(stream_path));
    std::cout << softmc::disassemble(insts);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Software DRAM test controller (behavioral simulator)"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "softmc-sim 1.0.0");

    RunArgs run_args;
    CLI::App* run = app.add_subcommand(
        "run", "Run an experiment campaign and write CSV results");
    run->add_option("experiment", run_args.experiment,
                    "Experiment: retention, trcd or tras")
        ->required()
        ->check(CLI::IsMember({"retention", "trcd", "tras"}));
    run->add_option("--config", run_args.config_path,
                    "Campaign JSON file (flags override it)");
    run->add_option("--profile", run_args.profile,
                    "Module profile: preset name (A/B/C) or JSON path");
    run->add_option("--seed", run_args.seed, "Cell population seed");
    run->add_option("--temperature", run_args.temperature,
                    "Ambient temperature in Celsius");
    run->add_option("--intervals", run_args.intervals,
                    "Idle intervals in ms (comma separated)")
        ->delimiter(',');
    run->add_option("--timing-values", run_args.timing_values,
                    "tRCD/tRAS cycle counts under test (comma separated)")
        ->delimiter(',');
    run->add_option("--patterns", run_args.patterns,
                    "Data patterns, e.g. 0xAA,0xFF (comma separated)")
        ->delimiter(',');
    run->add_option("--rows", run_args.rows, "Number of rows to sample");
    run->add_option("--interleave", run_args.interleave,
                    "Rows driven together between waits");
    run->add_option("--refresh-mode", run_args.refresh_mode,
                    "Refresh mode: software-clock, auto or manual")
        ->check(CLI::IsMember({"software-clock", "auto", "manual"}));
    run->add_option("--out", run_args.out_dir, "Output directory");
    run->add_option("--jobs", run_args.jobs, "Worker threads");

    std::string trace_path, params_path;
    CLI::App* vt = app.add_subcommand(
        "validate-trace",
        "Check a command trace against the DDR timing rules");
    vt->add_option("trace", trace_path, "Trace text file")->required();
    vt->add_option("--params", params_path, "Timing parameter JSON file");

    std::string stream_path;
    CLI::App* da = app.add_subcommand(
        "disasm", "Disassemble a binary instruction stream");
    da->add_option("stream", stream_path, "Binary stream file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            return cmd_run(run_args, run);
        }
        if (vt->parsed()) {
            return cmd_validate_trace(trace_path, params_path);
        }
        if (da->parsed()) {
            return cmd_disasm(stream_path);
        }
        return 2;
    } catch (const softmc::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const softmc::ParseError& e) {
        if (e.line > 0) {
            std::cerr << "error: line " << e.line << ": " << e.what() << '\n';
        } else {
            std::cerr << "error: " << e.what() << '\n';
        }
        return 2;
    } catch (const softmc::CodecError& e) {
        std::cerr << "error: byte offset " << e.byte_offset << ": "
                  << e.what() << '\n';
        return 2;
    } catch (const softmc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
