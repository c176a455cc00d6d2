#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobisynth/errors.hpp"
#include "mobisynth/evaluation.hpp"
#include "mobisynth/fs.hpp"
#include "mobisynth/fudger.hpp"
#include "mobisynth/identity.hpp"
#include "mobisynth/osm.hpp"
#include "mobisynth/pipeline.hpp"
#include "mobisynth/snapshot.hpp"
#include "mobisynth/traffic.hpp"
#include "mobisynth/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace mobisynth;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fnv1a_hex(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CivilDate parse_date_arg(const std::string& s) {
    int y = 0, m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
        std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 ||
        d < 1 || d > 31)
        throw DomainError("--date must be YYYY-MM-DD, got \"" + s + "\"");
    CivilDate date{y, m, d};
    // round-trip through the calendar to reject days like February 30th
    if (iso8601_utc(unix_from_civil(date)).substr(0, 10) != s)
        throw DomainError("--date " + s + " is not a real calendar day");
    return date;
}

// Accepts either a snapshot produced by `ingest` or a raw OSM extract,
// told apart by the leading byte.
Snapshot load_graph_input(const std::string& path) {
    std::string text = read_text_file(path);
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '<') {
        Extract ex = parse_extract(text);
        return {std::move(ex.pois), std::move(ex.graph)};
    }
    return parse_snapshot(text);
}

std::vector<std::string> list_route_files(const std::string& dir) {
    std::error_code ec;
    fs::directory_iterator it(dir, ec);
    if (ec) throw Error("cannot list " + dir + ": " + ec.message());
    std::vector<std::string> files;
    for (const auto& entry : it)
        if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DomainError("no .csv route files in " + dir);
    return files;
}

int cmd_ingest(const std::string& extract_path, const std::string& out_path) {
    Extract ex = parse_extract(read_text_file(extract_path));
    for (const std::string& w : ex.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    save_snapshot(out_path, ex.pois, ex.graph);
    std::printf("ingested %zu pois, %zu vertices, %zu edges (%zu stop nodes) -> %s\n",
                ex.pois.size(), ex.graph.vertices.size(), ex.graph.edges.size(),
                ex.graph.stop_nodes.size(), out_path.c_str());
    return 0;
}

int cmd_mkidentity(const std::string& snapshot_path, std::uint64_t seed,
                   const std::string& out_path) {
    Snapshot snap = load_graph_input(snapshot_path);
    UserModel user = build_user_model(snap.pois, default_identity_config(), seed);
    save_user(out_path, user);
    std::printf("built user model: %zu weekday states, %zu weekend states -> %s\n",
                user.weekday.states.size(), user.weekend.states.size(),
                out_path.c_str());
    return 0;
}

struct SynthArgs {
    std::string snapshot;
    std::string identity;
    std::string date;
    std::uint64_t seed = 0;
    std::string provider = "offline";
    std::string base_url;
    std::string cache_dir;
    std::string out_dir;
    std::vector<std::string> formats = {"geojson", "gpx", "csv"};
};

int cmd_synth(const SynthArgs& a) {
    CivilDate date = parse_date_arg(a.date);
    Snapshot snap = load_graph_input(a.snapshot);
    UserModel user = load_user(a.identity);

    std::unique_ptr<TrafficProvider> provider;
    if (a.provider == "offline") {
        provider = std::make_unique<OfflineProvider>(snap.graph);
    } else {
        if (a.base_url.empty())
            throw DomainError("--base-url is required with --provider remote");
        RemoteConfig rc;
        rc.base_url = a.base_url;
        rc.cache_dir = a.cache_dir;
        provider = std::make_unique<RemoteProvider>(rc);
    }

    DayConfig cfg;
    Trajectory traj =
        synthesize_day(pick_machine(user, date), date, snap.graph, *provider, cfg, a.seed);

    std::vector<std::string> formats = a.formats;
    std::sort(formats.begin(), formats.end());
    formats.erase(std::unique(formats.begin(), formats.end()), formats.end());

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw Error("cannot create " + a.out_dir + ": " + ec.message());

    std::printf("synthesized %s (%s): %zu fixes, %zu segments\n", a.date.c_str(),
                traj.identity_ref.c_str(), traj.fixes.size(), traj.segments.size());

    nlohmann::ordered_json outputs;
    for (const std::string& f : formats) {
        std::string name = "trajectory." + f;
        std::string path = (fs::path(a.out_dir) / name).string();
        if (f == "geojson")
            write_text_file(path, to_geojson(traj));
        else if (f == "gpx")
            write_text_file(path, to_gpx(traj));
        else
            write_text_file(path, to_csv(traj));
        outputs[f] = name;
        std::printf("wrote %s\n", path.c_str());
    }

    nlohmann::ordered_json manifest;
    manifest["tool"] = "mobisynth";
    manifest["version"] = kVersion;
    manifest["command"] = "synth";
    manifest["inputs"] = {
        {"snapshot",
         {{"path", a.snapshot}, {"fnv1a", fnv1a_hex(read_text_file(a.snapshot))}}},
        {"identity",
         {{"path", a.identity}, {"fnv1a", fnv1a_hex(read_text_file(a.identity))}}},
    };
    manifest["parameters"] = {{"date", a.date},
                              {"seed", a.seed},
                              {"provider", a.provider},
                              {"formats", formats}};
    manifest["outputs"] = outputs;
    std::string mpath = (fs::path(a.out_dir) / "manifest.json").string();
    write_text_file(mpath, manifest.dump(2) + "\n");
    std::printf("wrote %s\n", mpath.c_str());
    return 0;
}

int cmd_fudge(double grid_m, std::uint64_t seed, const std::string& in_path,
              const std::string& out_path) {
    std::vector<Fix> fixes = parse_fix_csv(read_text_file(in_path));
    FudgerState state =
        make_fudger(grid_m, seed, fixes.empty() ? 0 : fixes.front().t_unix_s);
    for (Fix& f : fixes) f.pos = fudge(f.pos, state, f.t_unix_s);
    Trajectory out;
    out.fixes = std::move(fixes);
    write_text_file(out_path, to_csv(out));
    std::printf("fudged %zu fixes onto the %.0f m grid -> %s\n", out.fixes.size(),
                grid_m, out_path.c_str());
    return 0;
}

int cmd_eval(const std::string& real_dir, const std::string& synth_dir, int k,
             int iterations, std::uint64_t seed) {
    auto load_set = [](const std::string& dir) {
        std::pair<std::vector<std::vector<Fix>>, std::vector<FeatureVector>> set;
        for (const std::string& path : list_route_files(dir)) {
            try {
                std::vector<Fix> fixes = parse_fix_csv(read_text_file(path));
                set.second.push_back(extract_features(fixes));
                set.first.push_back(std::move(fixes));
            } catch (const Error& e) {
                throw Error(path + ": " + e.what());
            }
        }
        return set;
    };

    auto [real_routes, real_feats] = load_set(real_dir);
    auto [synth_routes, synth_feats] = load_set(synth_dir);

    AbsAccelSummary rs = summarize_abs_accel(real_routes);
    AbsAccelSummary ss = summarize_abs_accel(synth_routes);
    std::printf("real: %zu routes, |a| mean %.6f median %.6f std %.6f\n",
                real_routes.size(), rs.mean, rs.median, rs.std);
    std::printf("synthetic: %zu routes, |a| mean %.6f median %.6f std %.6f\n",
                synth_routes.size(), ss.mean, ss.median, ss.std);

    double acc = knn_holdout_accuracy(real_feats, synth_feats, k, 0.9, iterations, seed);
    std::printf("knn k=%d holdout accuracy over %d splits: %.6f\n", k, iterations, acc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic driving-trajectory toolkit"};
    app.set_version_flag("--version", std::string("mobisynth ") + kVersion);
    app.require_subcommand(1);

    std::string extract_path, out_path;
    auto* ingest = app.add_subcommand("ingest", "Parse an OSM extract into a snapshot");
    ingest->add_option("extract", extract_path, "OSM XML extract")->required();
    ingest->add_option("-o,--output", out_path, "snapshot file to write")->required();

    std::string mk_snapshot, mk_out;
    std::uint64_t mk_seed = 0;
    auto* mkid = app.add_subcommand(
        "mkidentity", "Draw a user model from the POIs of a snapshot");
    mkid->add_option("--snapshot", mk_snapshot, "snapshot or extract")->required();
    mkid->add_option("--seed", mk_seed, "model seed")->required();
    mkid->add_option("-o,--output", mk_out, "identity file to write")->required();

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Synthesize one full-day trajectory");
    synth->add_option("--snapshot", sa.snapshot, "snapshot or extract")->required();
    synth->add_option("--identity", sa.identity, "user model file")->required();
    synth->add_option("--date", sa.date, "civil date YYYY-MM-DD")->required();
    synth->add_option("--seed", sa.seed, "day seed")->required();
    synth->add_option("--provider", sa.provider, "traffic source")
        ->check(CLI::IsMember({"offline", "remote"}))
        ->capture_default_str();
    synth->add_option("--base-url", sa.base_url, "directions endpoint (remote)");
    synth->add_option("--cache-dir", sa.cache_dir, "response cache (remote)");
    synth->add_option("-o,--output", sa.out_dir, "output directory")->required();
    synth->add_option("--formats", sa.formats, "subset of geojson,gpx,csv")
        ->delimiter(',')
        ->check(CLI::IsMember({"geojson", "gpx", "csv"}))
        ->capture_default_str();

    double fudge_grid = kDefaultGridM;
    std::uint64_t fudge_seed = 0;
    std::string fudge_in, fudge_out;
    auto* fudge = app.add_subcommand("fudge", "Snap a trajectory onto an offset grid");
    fudge->add_option("--grid", fudge_grid, "grid size in meters (500 or 5000)")
        ->required();
    fudge->add_option("--seed", fudge_seed, "offset seed")->capture_default_str();
    fudge->add_option("--in", fudge_in, "input fix CSV")->required();
    fudge->add_option("-o,--output", fudge_out, "output fix CSV")->required();

    std::string eval_real, eval_synth;
    int eval_k = 1, eval_iterations = 1000;
    std::uint64_t eval_seed = 0;
    auto* eval = app.add_subcommand(
        "eval", "Compare two route sets: |a| statistics and k-NN separability");
    eval->add_option("--real", eval_real, "directory of fix CSVs")->required();
    eval->add_option("--synthetic", eval_synth, "directory of fix CSVs")->required();
    eval->add_option("--k", eval_k, "neighbors")
        ->check(CLI::IsMember({1, 10}))
        ->capture_default_str();
    eval->add_option("--iterations", eval_iterations, "holdout resamples")
        ->capture_default_str();
    eval->add_option("--seed", eval_seed, "split seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "mobisynth: %s\n", e.what());
        return 2;
    }

    try {
        if (*ingest) return cmd_ingest(extract_path, out_path);
        if (*mkid) return cmd_mkidentity(mk_snapshot, mk_seed, mk_out);
        if (*synth) return cmd_synth(sa);
        if (*fudge) return cmd_fudge(fudge_grid, fudge_seed, fudge_in, fudge_out);
        if (*eval) return cmd_eval(eval_real, eval_synth, eval_k, eval_iterations,
                                   eval_seed);
    } catch (const ProviderError& e) {
        std::fprintf(stderr, "mobisynth: provider failure: %s\n", e.what());
        return 4;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "mobisynth: infeasible: %s\n", e.what());
        return 3;
    } catch (const SynthesisError& e) {
        std::fprintf(stderr, "mobisynth: infeasible: %s\n", e.what());
        return 3;
    } catch (const RoutingError& e) {
        std::fprintf(stderr, "mobisynth: infeasible: %s\n", e.what());
        return 3;
    } catch (const ContractError& e) {
        std::fprintf(stderr, "mobisynth: internal error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "mobisynth: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "mobisynth: %s\n", e.what());
        return 1;
    }
    return 0;
}
