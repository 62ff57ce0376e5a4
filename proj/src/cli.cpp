#include "studyu/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "studyu/api_client.hpp"
#include "studyu/error.hpp"
#include "studyu/simulator.hpp"
#include "studyu/study_json.hpp"
#include "studyu/study_validate.hpp"

namespace studyu {

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

/// Usage or I/O failure; exits with kUsageError.
struct UsageFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageFailure("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const std::string& path) {
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) throw UsageFailure(path + " is not valid JSON");
    return doc;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw UsageFailure("cannot write " + path);
    }
}

void print_error(std::ostream& err, const Error& e) {
    err << "error: " << error_name(e.code()) << ": " << e.what() << "\n";
    const json& d = e.details();
    if (d.is_object() && d.contains("findings")) {
        for (const json& f : d["findings"]) {
            err << f.value("path", "$") << ": " << f.value("severity", "error") << ": " << f.value("message", "")
                << "\n";
        }
    }
    if (d.is_object() && d.contains("reasons")) {
        for (const json& r : d["reasons"]) err << "  " << r.get<std::string>() << "\n";
    }
}

struct ServerOptions {
    std::string server = "http://127.0.0.1:8080";
    std::string token;
};

void add_server_options(CLI::App& cmd, ServerOptions& o) {
    cmd.add_option("--server", o.server, "Base URL of the API server")->capture_default_str();
    cmd.add_option("--token", o.token, "Researcher token")->envname("STUDYU_RESEARCHER_TOKEN");
}

int cmd_validate(const std::string& path, bool publish_gate, std::ostream& out) {
    const json doc = read_json(path);
    Study study;
    try {
        study = decode_study(doc);
    } catch (const Error& e) {
        const json& d = e.details();
        out << (d.is_object() ? d.value("path", "$") : std::string("$")) << ": error: " << e.what() << "\n";
        return kDomainError;
    }
    const ValidationReport report = validate_study(study.details, study.metadata, publish_gate);
    out << format_report(report);
    return report.ok() ? kOk : kDomainError;
}

int cmd_publish(const std::string& path, const ServerOptions& o, std::ostream& out) {
    const json doc = read_json(path);
    ApiClient client(o.server, o.token);
    out << publish_via_api(client, doc) << "\n";
    return kOk;
}

int cmd_export(const std::string& study_id, const ServerOptions& o, const std::string& out_path,
               std::ostream& out) {
    ApiClient client(o.server, o.token);
    const std::string csv = client.get_text("/api/v1/designer/studies/" + study_id + "/export.csv");
    if (out_path.empty() || out_path == "-") {
        out << csv;
    } else {
        write_file(out_path, csv);
    }
    return kOk;
}

struct SimulateOptions {
    std::string target;
    ServerOptions server;
    bool in_process = false;
    bool server_mode = false;
    bool as_json = false;
    std::string csv_out;
    SimulationParams params;
    double baseline_level = 0.0;
    bool has_baseline_level = false;
};

int cmd_simulate(SimulateOptions& o, std::ostream& out) {
    if (o.has_baseline_level) o.params.baseline_level = o.baseline_level;
    check_params(o.params);
    const bool is_file = std::filesystem::is_regular_file(o.target);
    if (o.in_process && o.server_mode) throw UsageFailure("--in-process and --server are exclusive");
    const bool in_process = o.in_process || !o.server_mode;

    SimulationSummary summary;
    if (in_process) {
        if (!is_file) throw UsageFailure("--in-process needs a study definition file, not an id");
        const Study study = parse_study(read_file(o.target));
        LocalPlatform platform = make_local_platform(study, o.params.seed, o.params.start);
        InProcessTransport transport(platform.store, platform.clock, platform.study_id, true);
        summary = run_simulation(transport, o.params);
        if (!o.csv_out.empty()) write_file(o.csv_out, platform.store->export_csv(platform.study_id));
    } else {
        if (!o.csv_out.empty()) throw UsageFailure("--csv is only available with --in-process");
        std::string study_id = o.target;
        if (is_file) {
            ApiClient client(o.server.server, o.server.token);
            study_id = publish_via_api(client, read_json(o.target));
        }
        HttpTransport transport(o.server.server, o.server.token, study_id);
        summary = run_simulation(transport, o.params);
    }
    if (o.as_json) {
        out << encode_summary(summary).dump(2) << "\n";
    } else {
        out << format_summary(summary);
    }
    return kOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Design, publish and simulate N-of-1 trials", "studyu"};
    app.require_subcommand(1);

    std::string path;
    bool publish_gate = false;
    auto* validate = app.add_subcommand("validate", "Check a study definition file");
    validate->add_option("path", path, "Study definition (JSON)")->required();
    validate->add_flag("--publish-gate", publish_gate, "Also apply the rules checked before publishing");

    ServerOptions server;
    auto* publish = app.add_subcommand("publish", "Create and publish a study on a server");
    publish->add_option("path", path, "Study definition (JSON)")->required();
    add_server_options(*publish, server);

    std::string study_id, out_path;
    auto* exporter = app.add_subcommand("export", "Download the CSV export of a published study");
    exporter->add_option("study_id", study_id)->required();
    exporter->add_option("--out", out_path, "Output file; stdout when omitted");
    add_server_options(*exporter, server);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run seeded simulated participants");
    simulate->add_option("study", sim.target, "Study definition file or published study id")->required();
    simulate->add_option("--participants", sim.params.participants)->capture_default_str()->check(CLI::NonNegativeNumber);
    simulate->add_option("--seed", sim.params.seed)->capture_default_str();
    simulate->add_option("--effect", sim.params.effect, "Outcome shift while the second intervention is active")
        ->capture_default_str();
    simulate->add_option("--noise-sd", sim.params.noise_sd)->capture_default_str();
    simulate->add_option("--adherence", sim.params.adherence, "Probability of completing each task")
        ->capture_default_str();
    auto* level = simulate->add_option("--baseline-level", sim.baseline_level, "Outcome level without effect");
    simulate->add_option("--trend", sim.params.trend, "Outcome change per study day")->capture_default_str();
    simulate->add_flag("--in-process", sim.in_process, "Run against an embedded store (default)");
    simulate->add_option("--server", sim.server.server, "Run against the API server at this URL");
    simulate->add_option("--token", sim.server.token, "Researcher token")->envname("STUDYU_RESEARCHER_TOKEN");
    simulate->add_flag("--json", sim.as_json, "Print the summary as JSON");
    simulate->add_option("--csv", sim.csv_out, "Write the study's CSV export here (in-process only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*validate) return cmd_validate(path, publish_gate, out);
        if (*publish) return cmd_publish(path, server, out);
        if (*exporter) return cmd_export(study_id, server, out_path, out);
        sim.has_baseline_level = level->count() > 0;
        sim.server_mode = simulate->get_option("--server")->count() > 0;
        return cmd_simulate(sim, out);
    } catch (const UsageFailure& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const TransportError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const Error& e) {
        print_error(err, e);
        return e.code() == ErrorCode::BadRequest && !*publish && !*exporter ? kUsageError : kDomainError;
    }
}

} // namespace studyu
