#pragma once

#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "flucast/features.hpp"
#include "flucast/ingest.hpp"
#include "flucast/model_io.hpp"
#include "flucast/pipeline.hpp"

namespace flucast {

// Run configuration file (JSON). Documented keys mirror the pipeline and
// model decisions; anything omitted keeps its default. The cache directory
// can be overridden with the FLUCAST_CACHE_DIR environment variable.
struct RunConfig {
    // data
    SourceSchema schema = SourceSchema::DailyHosp;
    std::map<std::string, std::string> sources;  // season label -> csv path
    std::vector<std::string> seasons;            // chronological include list
    std::string populations_path;
    std::vector<std::string> flusurv_member_states;
    std::int64_t national_population = 0;

    // run
    EnsembleKind ensemble = EnsembleKind::Forest;
    PipelineParams params;
    std::string cache_dir = "cache";
    std::string output_dir = "out";

    std::string config_dir;  // directory of the config file, for relative paths

    std::string resolve(const std::string& path) const {
        if (path.empty() || path.front() == '/' || config_dir.empty()) return path;
        return config_dir + "/" + path;
    }
};

namespace detail {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline RunConfig load_run_config(const std::string& path) {
    const nlohmann::json j = detail::read_json_file(path);
    RunConfig config;

    const auto slash = path.find_last_of('/');
    config.config_dir = slash == std::string::npos ? std::string(".") : path.substr(0, slash);

    if (j.contains("data")) {
        const auto& data = j.at("data");
        if (data.contains("schema")) config.schema = parse_schema(data.at("schema").get<std::string>());
        detail::read_if(data, "sources", config.sources);
        detail::read_if(data, "populations", config.populations_path);
        detail::read_if(data, "flusurv_member_states", config.flusurv_member_states);
        detail::read_if(data, "national_population", config.national_population);
    }
    detail::read_if(j, "seasons", config.seasons);
    if (config.seasons.empty())
        for (const auto& [label, source] : config.sources) config.seasons.push_back(label);

    if (j.contains("grid")) {
        const auto& grid = j.at("grid");
        detail::read_if(grid, "alphas", config.params.grid.alphas);
        detail::read_if(grid, "lags", config.params.grid.lags);
        detail::read_if(grid, "mus", config.params.grid.mus);
    }
    if (j.contains("sikjalpha")) {
        const auto& base = j.at("sikjalpha");
        detail::read_if(base, "k", config.params.base.k);
        detail::read_if(base, "bin_days", config.params.base.bin_days);
    }
    if (j.contains("forest")) {
        const auto& forest = j.at("forest");
        detail::read_if(forest, "n_trees", config.params.forest.n_trees);
        detail::read_if(forest, "bootstrap", config.params.forest.bootstrap);
        detail::read_if(forest, "max_depth", config.params.forest.max_depth);
        detail::read_if(forest, "min_leaf", config.params.forest.min_leaf);
        detail::read_if(forest, "feature_subsample", config.params.forest.feature_subsample);
    }
    if (j.contains("lsboost")) {
        const auto& boost = j.at("lsboost");
        detail::read_if(boost, "n_stages", config.params.boost.n_stages);
        detail::read_if(boost, "learn_rate", config.params.boost.learn_rate);
        detail::read_if(boost, "max_depth", config.params.boost.max_depth);
        detail::read_if(boost, "min_leaf", config.params.boost.min_leaf);
    }
    if (j.contains("trajectory")) {
        const auto& trajectory = j.at("trajectory");
        detail::read_if(trajectory, "alpha", config.params.trajectory.alpha);
        detail::read_if(trajectory, "lags", config.params.trajectory.lags);
        detail::read_if(trajectory, "mus", config.params.trajectory.mus);
        detail::read_if(trajectory, "samples_per_beta", config.params.trajectory.n_samples);
        detail::read_if(trajectory, "confidence_level", config.params.trajectory.confidence_level);
    }
    if (j.contains("mode"))
        config.params.mode = parse_feature_mode(j.at("mode").get<std::string>());
    if (j.contains("ensemble"))
        config.ensemble = parse_ensemble_kind(j.at("ensemble").get<std::string>());
    detail::read_if(j, "seed", config.params.seed);
    detail::read_if(j, "quantile_levels", config.params.levels);
    detail::read_if(j, "cache_dir", config.cache_dir);
    detail::read_if(j, "output_dir", config.output_dir);

    // Input paths resolve against the config file; cache and output stay
    // relative to the invocation directory.
    if (const char* env_cache = std::getenv("FLUCAST_CACHE_DIR")) config.cache_dir = env_cache;

    if (config.sources.empty()) throw InvalidConfigError(path + ": no data.sources configured");
    if (config.populations_path.empty())
        throw InvalidConfigError(path + ": data.populations is required");
    return config;
}

// Ingest one configured season and apply the reporting adjustment, so every
// downstream consumer sees a single prepared view of the data.
inline SeasonData load_one_season(const RunConfig& config, const std::string& label,
                                  const PopulationTable& populations) {
    const auto it = config.sources.find(label);
    if (it == config.sources.end())
        throw InvalidConfigError("season '" + label + "' has no configured source");
    const std::string source = config.resolve(it->second);
    std::map<std::string, RegionSeries> regions;
    switch (config.schema) {
        case SourceSchema::DailyHosp: regions = ingest_daily_hosp(source, populations); break;
        case SourceSchema::WeeklyIli: regions = ingest_weekly_ili(source, populations); break;
        case SourceSchema::FluSurv:
            regions = ingest_flusurv(source, populations, config.flusurv_member_states,
                                     config.national_population);
            break;
    }
    SeasonData season;
    season.label = label;
    for (auto& [region, series] : regions)
        season.regions.emplace(region, adjust_for_reporting(series));
    return season;
}

inline std::vector<SeasonData> load_seasons(const RunConfig& config) {
    const PopulationTable populations = load_populations(config.resolve(config.populations_path));
    std::vector<SeasonData> seasons;
    for (const auto& label : config.seasons)
        seasons.push_back(load_one_season(config, label, populations));
    return seasons;
}

}  // namespace flucast
