#include "core/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "core/binio.hpp"
#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/heatmap.hpp"
#include "core/model.hpp"
#include "core/pipeline.hpp"
#include "core/train.hpp"
#include "core/transforms.hpp"

namespace fs = std::filesystem;

namespace bvoc {

namespace {

uint64_t require_u64(const RunConfig& cfg, const std::string& key)
{
    cfg.require_str(key);
    return cfg.get_u64(key, 0);
}

double require_f64(const RunConfig& cfg, const std::string& key)
{
    cfg.require_str(key);
    return cfg.get_f64(key, 0);
}

void write_stamp(const RunConfig& cfg, const std::string& path)
{
    binio::write_file(path, reproducibility_stamp(cfg));
}

Preproc load_preproc(const RunConfig& cfg)
{
    Preproc p;
    p.kind = transform_kind_from_name(cfg.require_str("transform"));
    if (p.kind == TransformKind::quantile)
        p.quantile = read_quantile_transform(cfg.require_str("transform_path"));
    return p;
}

ModelConfig model_config_from(const RunConfig& cfg)
{
    ModelConfig mc;
    mc.arch = arch_from_name(cfg.get_str("arch", "resnet"));
    mc.alpha = static_cast<uint32_t>(cfg.get_u64("alpha", 4));
    mc.activation = cfg.get_str("activation", "prelu") == "relu" ? Activation::relu
                                                                 : Activation::prelu;
    if (const std::string a = cfg.get_str("activation", "prelu");
        a != "relu" && a != "prelu")
        throw ConfigError("activation must be relu or prelu, got '" + a + "'");
    mc.base_width = static_cast<uint32_t>(cfg.get_u64("base_width", 32));
    mc.n_blocks = static_cast<uint32_t>(cfg.get_u64("n_blocks", 4));
    mc.f1 = static_cast<uint32_t>(cfg.get_u64("f1", 64));
    mc.f2 = static_cast<uint32_t>(cfg.get_u64("f2", 32));
    mc.k1 = static_cast<uint32_t>(cfg.get_u64("k1", 9));
    mc.k2 = static_cast<uint32_t>(cfg.get_u64("k2", 1));
    mc.k3 = static_cast<uint32_t>(cfg.get_u64("k3", 5));
    mc.init_seed = cfg.get_u64("init_seed", 1);
    validate_config(mc);
    return mc;
}

ScheduleConfig schedule_from(const RunConfig& cfg)
{
    ScheduleConfig s;
    s.total_iterations = require_u64(cfg, "iterations");
    s.lr_max = cfg.get_f64("lr_max", 1e-4);
    s.lr_min = cfg.get_f64("lr_min", 1e-7);
    const std::string restarts = cfg.get_str("restarts", "auto");
    if (restarts == "auto") {
        s.restart_iterations = scaled_restarts(s.total_iterations);
    } else if (restarts != "none") {
        size_t pos = 0;
        while (pos < restarts.size()) {
            size_t comma = restarts.find(',', pos);
            if (comma == std::string::npos)
                comma = restarts.size();
            try {
                s.restart_iterations.push_back(
                    std::stoull(restarts.substr(pos, comma - pos)));
            } catch (const std::exception&) {
                throw ConfigError("restarts must be auto, none or a comma list: '" +
                                  restarts + "'");
            }
            pos = comma + 1;
        }
    }
    validate_schedule(s);
    return s;
}

std::string basename_of(const std::string& path)
{
    return fs::path(path).filename().string();
}

} // namespace

void cmd_synth(const RunConfig& cfg)
{
    check_known_keys(cfg, {"out_dir", "seed", "n_maps", "height", "width", "compound"});
    const std::string out_dir = cfg.require_str("out_dir");
    const uint64_t seed = cfg.get_u64("seed", 0);
    const uint64_t n_maps = require_u64(cfg, "n_maps");
    const size_t height = cfg.get_u64("height", 96);
    const size_t width = cfg.get_u64("width", 192);
    const Compound compound = compound_from_name(cfg.get_str("compound", "isoprene"));

    const std::vector<EmissionGrid> maps =
        synth_emissions(seed, n_maps, height, width, compound);

    fs::create_directories(fs::path(out_dir) / "maps");
    std::string index;
    for (size_t i = 0; i < maps.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "maps/map_%04zu.emg1", i);
        write_grid(maps[i], (fs::path(out_dir) / name).string());
        index += name;
        index += '\n';
    }
    binio::write_file((fs::path(out_dir) / "maps.txt").string(), index);
    write_stamp(cfg, (fs::path(out_dir) / "synth.stamp").string());
    std::printf("wrote %zu maps under %s\n", maps.size(), out_dir.c_str());
}

void cmd_prepare(const RunConfig& cfg)
{
    check_known_keys(cfg, {"corpus_dir", "out_dir", "alpha", "patch", "protocol",
                           "min_fraction", "antialias", "seed", "region_lat_min",
                           "region_lat_max", "region_lon_min", "region_lon_max"});
    const std::string corpus_dir = cfg.require_str("corpus_dir");
    const std::string out_dir = cfg.require_str("out_dir");
    const uint32_t alpha = static_cast<uint32_t>(cfg.get_u64("alpha", 4));
    const size_t patch = cfg.get_u64("patch", 64);
    const Protocol protocol = protocol_from_name(cfg.get_str("protocol", "random"));
    const double min_fraction = cfg.get_f64("min_fraction", 0.05);
    const bool antialias = cfg.get_bool("antialias", false);
    const uint64_t seed = cfg.get_u64("seed", 0);
    Region region{0, 0, 0, 0};
    if (protocol == Protocol::time_and_area)
        region = Region{require_f64(cfg, "region_lat_min"),
                        require_f64(cfg, "region_lat_max"),
                        require_f64(cfg, "region_lon_min"),
                        require_f64(cfg, "region_lon_max")};
    if (alpha < 2)
        throw ConfigError("alpha must be at least 2");
    if (patch % alpha != 0)
        throw ConfigError("patch must be a multiple of alpha");
    if (!(min_fraction >= 0.0 && min_fraction <= 1.0))
        throw ConfigError("min_fraction must lie in [0,1]");

    const std::string index =
        binio::read_text_file((fs::path(corpus_dir) / "maps.txt").string());
    std::vector<std::string> map_paths;
    size_t pos = 0;
    while (pos < index.size()) {
        size_t nl = index.find('\n', pos);
        if (nl == std::string::npos)
            nl = index.size();
        if (nl > pos)
            map_paths.push_back(index.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (map_paths.empty())
        throw DomainError("empty corpus: " + corpus_dir);

    size_t sliced = 0, retained = 0;
    std::vector<PatchPair> pairs;
    for (const std::string& rel : map_paths) {
        const EmissionGrid map = read_grid((fs::path(corpus_dir) / rel).string());
        std::vector<Patch> kept;
        for (Patch& p : slice_patches(map, patch)) {
            ++sliced;
            if (sparsity_filter(p.grid, min_fraction))
                kept.push_back(std::move(p));
        }
        retained += kept.size();
        const std::string stem = fs::path(rel).stem().string();
        for (PatchPair& pp : make_pairs(stem, kept, alpha, antialias))
            pairs.push_back(std::move(pp));
    }

    DatasetSplit split;
    switch (protocol) {
    case Protocol::random_70_20_10: split = split_random(std::move(pairs), seed); break;
    case Protocol::time: split = split_time(std::move(pairs)); break;
    case Protocol::time_and_area: split = split_time_area(std::move(pairs), region); break;
    }

    fs::create_directories(fs::path(out_dir) / "pairs");
    std::vector<ManifestEntry> entries;
    const auto emit = [&](const std::vector<PatchPair>& list, const char* label) {
        for (const PatchPair& pp : list) {
            ManifestEntry e;
            e.pair_id = pp.id;
            e.lr_path = "pairs/" + pp.id + "_lr.emg1";
            e.hr_path = "pairs/" + pp.id + "_hr.emg1";
            e.alpha = pp.alpha;
            e.ts = pp.hr.timestamp();
            e.compound = pp.hr.compound();
            e.split = label;
            write_grid(pp.lr, (fs::path(out_dir) / e.lr_path).string());
            write_grid(pp.hr, (fs::path(out_dir) / e.hr_path).string());
            entries.push_back(std::move(e));
        }
    };
    emit(split.train, "train");
    emit(split.validation, "validation");
    emit(split.test, "test");
    write_manifest(entries, (fs::path(out_dir) / "manifest.csv").string());
    write_stamp(cfg, (fs::path(out_dir) / "prepare.stamp").string());

    std::printf("sliced %zu patches from %zu maps\n", sliced, map_paths.size());
    std::printf("retained %zu, discarded %zu below the sparsity threshold\n", retained,
                sliced - retained);
    std::printf("train %zu, validation %zu, test %zu\n", split.train.size(),
                split.validation.size(), split.test.size());
}

void cmd_fit_transform(const RunConfig& cfg)
{
    check_known_keys(cfg, {"manifest", "out", "n_quantiles"});
    const std::string manifest = cfg.require_str("manifest");
    const std::string out = cfg.require_str("out");
    const uint32_t n_quantiles =
        static_cast<uint32_t>(cfg.get_u64("n_quantiles", 1000));

    const std::vector<ManifestEntry> entries = read_manifest(manifest);
    const fs::path base = fs::path(manifest).parent_path();
    std::vector<double> samples;
    size_t n_train = 0;
    for (const ManifestEntry& e : entries) {
        if (e.split != "train")
            continue;
        ++n_train;
        const EmissionGrid hr = read_grid((base / e.hr_path).string());
        samples.insert(samples.end(), hr.values().v.begin(), hr.values().v.end());
    }
    if (n_train == 0)
        throw StateError("manifest has no train split: " + manifest);

    const QuantileTransform t = fit_quantile_transform(samples, n_quantiles);
    write_quantile_transform(t, out);
    write_stamp(cfg, out + ".stamp");
    std::printf("fitted %u quantiles on %zu cells from %zu train pairs\n",
                n_quantiles, samples.size(), n_train);
}

void cmd_train(const RunConfig& cfg)
{
    check_known_keys(cfg,
                     {"manifest", "protocol", "transform", "transform_path", "arch",
                      "alpha", "activation", "base_width", "n_blocks", "f1", "f2",
                      "k1", "k2", "k3", "init_seed", "seed", "batch_size",
                      "iterations", "lr_max", "lr_min", "restarts",
                      "validation_interval", "validation_max_pairs", "checkpoint",
                      "log"});
    const std::string manifest = cfg.require_str("manifest");
    const std::string checkpoint = cfg.require_str("checkpoint");
    const Protocol protocol = protocol_from_name(cfg.get_str("protocol", "random"));
    const ModelConfig mc = model_config_from(cfg);

    TrainConfig tc;
    tc.schedule = schedule_from(cfg);
    tc.batch_size = static_cast<uint32_t>(cfg.get_u64("batch_size", 16));
    tc.seed = cfg.get_u64("seed", 0);
    tc.validation_interval = cfg.get_u64("validation_interval", 100);
    tc.validation_max_pairs = cfg.get_u64("validation_max_pairs", 64);
    tc.checkpoint_path = checkpoint;
    tc.log_path = cfg.get_str("log", checkpoint + ".log");

    const Preproc preproc = load_preproc(cfg);
    const DatasetSplit split = load_split(manifest, protocol);

    const TrainResult res = train_model(Model(mc), split, preproc, tc);
    write_stamp(cfg, checkpoint + ".stamp");
    std::printf("trained %llu iterations; best val ssim %.6g at iteration %llu\n",
                static_cast<unsigned long long>(tc.schedule.total_iterations),
                res.best_val_ssim,
                static_cast<unsigned long long>(res.best_iteration));
}

void cmd_evaluate(const RunConfig& cfg)
{
    check_known_keys(cfg, {"manifest", "protocol", "checkpoint", "transform",
                           "transform_path", "out_table", "out_pairs", "subset"});
    const std::string manifest = cfg.require_str("manifest");
    const std::string checkpoint = cfg.require_str("checkpoint");
    const std::string out_table = cfg.require_str("out_table");
    const std::string out_pairs = cfg.get_str("out_pairs", "");
    const std::string subset = cfg.get_str("subset", "test");
    const Protocol protocol = protocol_from_name(cfg.get_str("protocol", "random"));
    if (subset != "train" && subset != "validation" && subset != "test")
        throw ConfigError("subset must be train, validation or test");

    const Preproc preproc = load_preproc(cfg);
    const Model model = read_model(checkpoint);
    const DatasetSplit split = load_split(manifest, protocol);
    const std::vector<PatchPair>& pairs = subset == "train"        ? split.train
                                          : subset == "validation" ? split.validation
                                                                   : split.test;
    if (pairs.empty())
        throw DegenerateSplitError("subset '" + subset + "' has no pairs");

    const EvalReport r = evaluate_pairs(model, preproc, pairs,
                                        protocol_name(protocol),
                                        basename_of(checkpoint));
    write_report_table({r}, out_table);
    if (!out_pairs.empty())
        write_report_pairs(r, out_pairs);
    write_stamp(cfg, out_table + ".stamp");
    std::printf("%s %s: mean ssim %.6g (baseline %.6g), mean nmse %.6g dB\n",
                r.protocol.c_str(), subset.c_str(), r.mean_ssim,
                r.mean_ssim_baseline, r.mean_nmse_db);
}

void cmd_super_resolve(const RunConfig& cfg)
{
    check_known_keys(cfg,
                     {"checkpoint", "transform", "transform_path", "input", "output"});
    const std::string checkpoint = cfg.require_str("checkpoint");
    const std::string input = cfg.require_str("input");
    const std::string output = cfg.require_str("output");

    const Preproc preproc = load_preproc(cfg);
    const Model model = read_model(checkpoint);
    const EmissionGrid lr = read_grid(input);
    const EmissionGrid sr = super_resolve(model, preproc, lr);
    write_grid(sr, output);
    write_stamp(cfg, output + ".stamp");
    std::printf("super-resolved %zux%zu -> %zux%zu\n", lr.height(), lr.width(),
                sr.height(), sr.width());
}

void cmd_report(const RunConfig& cfg)
{
    check_known_keys(cfg, {"manifest", "protocol", "checkpoint", "transform",
                           "transform_path", "out_dir", "n_triptychs"});
    const std::string manifest = cfg.require_str("manifest");
    const std::string checkpoint = cfg.require_str("checkpoint");
    const std::string out_dir = cfg.require_str("out_dir");
    const size_t n_triptychs = cfg.get_u64("n_triptychs", 4);
    const Protocol protocol = protocol_from_name(cfg.get_str("protocol", "random"));

    const Preproc preproc = load_preproc(cfg);
    const Model model = read_model(checkpoint);
    const DatasetSplit split = load_split(manifest, protocol);
    if (split.test.empty())
        throw DegenerateSplitError("manifest has no test pairs");

    const EvalReport r = evaluate_pairs(model, preproc, split.test,
                                        protocol_name(protocol),
                                        basename_of(checkpoint));
    fs::create_directories(out_dir);
    write_report_table({r}, (fs::path(out_dir) / "table.csv").string());
    write_report_pairs(r, (fs::path(out_dir) / "pairs.csv").string());
    for (size_t i = 0; i < std::min(n_triptychs, split.test.size()); ++i) {
        const PatchPair& pp = split.test[i];
        const EmissionGrid sr = super_resolve(model, preproc, pp.lr);
        char name[40];
        std::snprintf(name, sizeof name, "triptych_%03zu.ppm", i);
        render_triptych(pp.hr, pp.lr, sr, (fs::path(out_dir) / name).string());
    }
    write_stamp(cfg, (fs::path(out_dir) / "report.stamp").string());
    std::printf("report for %zu test pairs under %s\n", r.pairs.size(),
                out_dir.c_str());
}

void run_command(const std::string& name, const RunConfig& cfg)
{
    const auto ctx = [&](const char* what) { return name + ": " + what; };
    try {
        if (name == "synth")
            cmd_synth(cfg);
        else if (name == "prepare")
            cmd_prepare(cfg);
        else if (name == "fit-transform")
            cmd_fit_transform(cfg);
        else if (name == "train")
            cmd_train(cfg);
        else if (name == "evaluate")
            cmd_evaluate(cfg);
        else if (name == "super-resolve")
            cmd_super_resolve(cfg);
        else if (name == "report")
            cmd_report(cfg);
        else
            throw ConfigError("unknown command '" + name + "'");
    } catch (const DomainError& e) {
        throw DomainError(ctx(e.what()));
    } catch (const FormatError& e) {
        throw FormatError(ctx(e.what()));
    } catch (const IoError& e) {
        throw IoError(ctx(e.what()));
    } catch (const ShapeError& e) {
        throw ShapeError(ctx(e.what()));
    } catch (const ConfigError& e) {
        throw ConfigError(ctx(e.what()));
    } catch (const StateError& e) {
        throw StateError(ctx(e.what()));
    } catch (const InsufficientDataError& e) {
        throw InsufficientDataError(ctx(e.what()));
    } catch (const DegenerateInputError& e) {
        throw DegenerateInputError(ctx(e.what()));
    } catch (const DegenerateSplitError& e) {
        throw DegenerateSplitError(ctx(e.what()));
    } catch (const NumericsError& e) {
        throw NumericsError(ctx(e.what()));
    }
}

} // namespace bvoc
