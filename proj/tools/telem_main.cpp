// telem: hierarchical ensemble anomaly detection for multivariate telemetry.
//
// Subcommands: train, predict, evaluate, synth, mine-shapelets. Every command
// writes a run manifest (config echo, input digests, timings) before exit,
// on success and on failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>

#include "telem/config.hpp"
#include "telem/ensemble.hpp"
#include "telem/io.hpp"
#include "telem/selection.hpp"
#include "telem/synth.hpp"

namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "telem 1.0.0";

int log_level() {
    const char* env = std::getenv("TELEM_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[telem] " << msg << '\n';
}

struct ManifestWriter {
    nlohmann::json j;
    std::filesystem::path path;
    Clock::time_point started = Clock::now();

    ManifestWriter(const std::filesystem::path& out_dir,
                   const std::string& command) {
        std::filesystem::create_directories(out_dir);
        path = out_dir / "run_manifest.json";
        j["version"] = kVersion;
        j["command"] = command;
        j["status"] = "running";
        j["inputs"] = nlohmann::json::object();
    }

    void add_input(const std::string& name, const std::filesystem::path& file) {
        if (std::filesystem::is_regular_file(file))
            j["inputs"][name] = {{"path", file.string()},
                                 {"digest", telem::file_digest(file)}};
        else
            j["inputs"][name] = {{"path", file.string()}};
    }

    void finish(const std::string& status, const std::string& error = "") {
        j["status"] = status;
        if (!error.empty()) j["error"] = error;
        j["wall_clock_seconds"] =
            std::chrono::duration<double>(Clock::now() - started).count();
        std::ofstream out(path);
        out << j.dump(2) << '\n';
    }
};

telem::MultiChannelDataset load_and_resample(
    const std::filesystem::path& data_dir, std::int64_t grid_step) {
    auto dataset = telem::load_dataset(data_dir / "channels",
                                       data_dir / "groups.csv");
    for (auto& c : dataset.channels) c = telem::resample_zoh(c, grid_step);
    return dataset;
}

int cmd_train(const std::filesystem::path& config_path,
              const std::filesystem::path& data_dir,
              const std::filesystem::path& out_dir, int workers_flag) {
    ManifestWriter manifest(out_dir, "train");
    manifest.add_input("config", config_path);
    try {
        auto config = telem::PipelineConfig::from_file(config_path);
        if (workers_flag > 0) config.workers = workers_flag;
        manifest.j["config"] = config.to_json();
        manifest.add_input("groups", data_dir / "groups.csv");

        const auto dataset = load_and_resample(data_dir, config.grid_step);
        for (const auto& c : dataset.channels)
            manifest.add_input("channel." + c.channel_id,
                               data_dir / "channels" / (c.channel_id + ".csv"));

        nlohmann::json recipe;
        recipe["combiner"] = "or";
        recipe["lengths"] = nlohmann::json::array();
        for (const auto& lc : config.lengths) {
            log_info("training hierarchy for segment length " +
                     std::to_string(lc.seg_len));
            const auto t0 = Clock::now();
            const auto model = telem::train_hierarchy(dataset, config, lc);
            const auto subdir = "len_" + std::to_string(lc.seg_len);
            model.save(out_dir / subdir);
            recipe["lengths"].push_back(
                {{"seg_len", lc.seg_len}, {"dir", subdir}});
            manifest.j["timings"][subdir] =
                std::chrono::duration<double>(Clock::now() - t0).count();
        }
        std::ofstream(out_dir / "combiner.json") << recipe.dump(2) << '\n';
        manifest.finish("ok");
        return 0;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        std::cerr << "train failed: " << e.what() << '\n';
        return 1;
    }
}

int cmd_predict(const std::filesystem::path& model_dir,
                const std::filesystem::path& data_dir,
                const std::filesystem::path& out_dir, double theta_override,
                int workers) {
    ManifestWriter manifest(out_dir, "predict");
    try {
        std::ifstream rin(model_dir / "combiner.json");
        if (!rin)
            throw std::runtime_error("model dir incomplete: missing combiner.json");
        nlohmann::json recipe = nlohmann::json::parse(rin);
        manifest.add_input("combiner", model_dir / "combiner.json");

        std::vector<telem::PredictionFrame> frames;
        bool first = true;
        telem::MultiChannelDataset dataset;
        for (const auto& entry : recipe.at("lengths")) {
            auto model = telem::HierarchicalModel::load(
                model_dir / entry.at("dir").get<std::string>());
            if (theta_override > 0) model.theta = theta_override;
            if (first) {
                dataset = load_and_resample(data_dir, model.grid_step);
                manifest.add_input("groups", data_dir / "groups.csv");
                first = false;
            }
            log_info("predicting with segment length " +
                     std::to_string(model.length_config.seg_len));
            frames.push_back(telem::predict(model, dataset, workers));
        }
        const auto combined = telem::or_combine(frames);
        std::filesystem::create_directories(out_dir);
        combined.save_csv(out_dir / "predictions.csv");
        telem::save_events_csv(combined.to_events(), out_dir / "events.csv");
        manifest.finish("ok");
        return 0;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        std::cerr << "predict failed: " << e.what() << '\n';
        return 1;
    }
}

int cmd_evaluate(const std::filesystem::path& pred_path,
                 const std::filesystem::path& truth_path, double beta,
                 const std::filesystem::path& out_path) {
    ManifestWriter manifest(out_path.parent_path().empty()
                                ? "."
                                : out_path.parent_path(),
                            "evaluate");
    manifest.add_input("predicted", pred_path);
    manifest.add_input("truth", truth_path);
    try {
        const auto predicted = telem::load_events_csv(pred_path);
        const auto truth = telem::load_events_csv(truth_path);

        nlohmann::json report;
        auto score_json = [](const telem::EventScore& s) {
            return nlohmann::json{{"tp", s.tp},
                                  {"fp", s.fp},
                                  {"fn", s.fn},
                                  {"precision", s.precision},
                                  {"recall", s.recall},
                                  {"f_beta", s.f_beta},
                                  {"beta", s.beta}};
        };
        const auto aggregate = telem::eventwise_score(predicted, truth, beta);
        report["aggregate"] = score_json(aggregate);

        std::set<std::string> channel_ids;
        for (const auto& ev : truth)
            if (ev.channel_id) channel_ids.insert(*ev.channel_id);
        for (const auto& ev : predicted)
            if (ev.channel_id) channel_ids.insert(*ev.channel_id);
        for (const auto& cid : channel_ids) {
            auto filter = [&](const std::vector<telem::AnomalyEvent>& events) {
                std::vector<telem::AnomalyEvent> out;
                for (const auto& ev : events)
                    if (!ev.channel_id || *ev.channel_id == cid)
                        out.push_back(ev);
                return out;
            };
            report["per_channel"][cid] =
                score_json(telem::eventwise_score(filter(predicted),
                                                  filter(truth), beta));
        }
        std::ofstream out(out_path);
        out << report.dump(2) << '\n';

        char line[64];
        std::snprintf(line, sizeof(line), "F%.1f = %.1f", beta,
                      100.0 * aggregate.f_beta);
        std::cout << line << " (P = " << 100.0 * aggregate.precision
                  << ", R = " << 100.0 * aggregate.recall << ")\n";
        manifest.finish("ok");
        return 0;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        std::cerr << "evaluate failed: " << e.what() << '\n';
        return 1;
    }
}

int cmd_synth(const std::filesystem::path& config_path,
              const std::filesystem::path& out_dir, std::uint64_t seed) {
    ManifestWriter manifest(out_dir, "synth");
    manifest.add_input("config", config_path);
    try {
        const auto config = telem::synth_config_from_file(config_path);
        const auto result = telem::generate_synthetic(config, seed);
        telem::save_dataset(result.dataset, out_dir);
        telem::save_events_csv(result.truth_events, out_dir / "events.csv");
        manifest.j["seed"] = seed;
        manifest.j["channels"] = config.channel_count;
        manifest.finish("ok");
        return 0;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        std::cerr << "synth failed: " << e.what() << '\n';
        return 1;
    }
}

int cmd_mine_shapelets(const std::filesystem::path& config_path,
                       const std::filesystem::path& data_dir,
                       const std::string& channel_id,
                       const std::filesystem::path& out_path,
                       std::uint64_t seed_flag) {
    ManifestWriter manifest(out_path.parent_path().empty()
                                ? "."
                                : out_path.parent_path(),
                            "mine-shapelets");
    manifest.add_input("config", config_path);
    try {
        const auto config = telem::PipelineConfig::from_file(config_path);
        const auto dataset = load_and_resample(data_dir, config.grid_step);
        const auto* series = dataset.find_channel(channel_id);
        if (!series)
            throw std::runtime_error("channel '" + channel_id + "' not found");

        // Mirror the training path for configuration (n=1, m=1).
        const auto& lc = config.lengths.front();
        const auto plan = telem::build_masking_plan(
            static_cast<std::int64_t>(series->size()), config.n_level1,
            config.m_level2, config.cca_len, lc.seg_len);
        const auto v = telem::view(plan, 1, 1);
        const std::uint64_t seed = seed_flag != 0 ? seed_flag : config.seed;
        const auto pool = telem::mine_shapelets(
            *series, v.xhat_nm, config.mining_config(lc), seed);
        std::ofstream out(out_path);
        out << pool.to_json().dump(2) << '\n';
        manifest.finish("ok");
        return 0;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        std::cerr << "mine-shapelets failed: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical ensemble anomaly detection for telemetry"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, data_dir, out_dir, model_dir, channel_id;
    std::string pred_path, truth_path, out_path;
    double beta = 0.5, theta = -1.0;
    std::uint64_t seed = 0;
    int workers = 0;

    auto* train = app.add_subcommand("train", "Train the layered ensemble");
    train->add_option("--config", config_path)->required();
    train->add_option("--data", data_dir)->required();
    train->add_option("--out", out_dir)->required();
    train->add_option("--workers", workers);

    auto* predict = app.add_subcommand("predict", "Run inference");
    predict->add_option("--model", model_dir)->required();
    predict->add_option("--data", data_dir)->required();
    predict->add_option("--out", out_dir)->required();
    predict->add_option("--threshold", theta);
    predict->add_option("--workers", workers);

    auto* evaluate = app.add_subcommand("evaluate", "Score event predictions");
    evaluate->add_option("--pred", pred_path)->required();
    evaluate->add_option("--truth", truth_path)->required();
    evaluate->add_option("--beta", beta);
    evaluate->add_option("--out", out_path)->required();

    auto* synth = app.add_subcommand("synth", "Generate synthetic telemetry");
    synth->add_option("--config", config_path)->required();
    synth->add_option("--out", out_dir)->required();
    synth->add_option("--seed", seed)->required();

    auto* mine = app.add_subcommand("mine-shapelets",
                                    "Mine one channel's shapelet pool");
    mine->add_option("--config", config_path)->required();
    mine->add_option("--data", data_dir)->required();
    mine->add_option("--channel", channel_id)->required();
    mine->add_option("--out", out_path)->required();
    mine->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) return cmd_train(config_path, data_dir, out_dir, workers);
    if (predict->parsed())
        return cmd_predict(model_dir, data_dir, out_dir, theta,
                           workers > 0 ? workers : 1);
    if (evaluate->parsed())
        return cmd_evaluate(pred_path, truth_path, beta, out_path);
    if (synth->parsed()) return cmd_synth(config_path, out_dir, seed);
    if (mine->parsed())
        return cmd_mine_shapelets(config_path, data_dir, channel_id, out_path,
                                  seed);
    return 1;
}
