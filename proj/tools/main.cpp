#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maskfuse/coco.hpp"
#include "maskfuse/copy_paste.hpp"
#include "maskfuse/eval.hpp"
#include "maskfuse/nms.hpp"
#include "maskfuse/parallel.hpp"
#include "maskfuse/rng.hpp"
#include "maskfuse/synth.hpp"
#include "maskfuse/tta.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace maskfuse;

namespace {

// ------------------------------------------------------------ shared options

struct NmsCliOptions {
    std::string kernel = "gaussian";
    double sigma = 2.0;
    double score_thr = 0.05;
    int max_keep = 100;
    bool class_agnostic = false;
    int pre_top_k = 0;  // 0 = unlimited
};

void add_nms_options(CLI::App* cmd, NmsCliOptions& o) {
    cmd->add_option("--kernel", o.kernel, "decay kernel: gaussian | linear")
        ->check(CLI::IsMember({"gaussian", "linear"}))
        ->capture_default_str();
    cmd->add_option("--sigma", o.sigma, "gaussian kernel width")->capture_default_str();
    cmd->add_option("--score-thr", o.score_thr, "drop decayed scores below this")
        ->capture_default_str();
    cmd->add_option("--max-keep", o.max_keep, "survivor cap per image")
        ->capture_default_str();
    cmd->add_flag("--class-agnostic", o.class_agnostic,
                  "suppress across categories instead of per category");
    cmd->add_option("--pre-top-k", o.pre_top_k,
                    "cap inputs before decay (0 = unlimited)");
}

NmsConfig to_nms_config(const NmsCliOptions& o) {
    NmsConfig cfg;
    cfg.kernel = o.kernel == "linear" ? NmsKernel::linear : NmsKernel::gaussian;
    cfg.sigma = o.sigma;
    cfg.score_threshold = o.score_thr;
    cfg.max_keep = o.max_keep;
    cfg.category_mode =
        o.class_agnostic ? CategoryMode::agnostic : CategoryMode::per_category;
    if (o.pre_top_k > 0) cfg.pre_top_k = o.pre_top_k;
    return cfg;
}

ResizeMethod parse_resize_method(const std::string& name) {
    return name == "nearest" ? ResizeMethod::nearest : ResizeMethod::bilinear_threshold;
}

// Stable per-file source tags: file stem, disambiguated by index on collision.
std::vector<std::string> source_tags(const std::vector<std::string>& paths) {
    std::vector<std::string> tags;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::string tag = fs::path(paths[i]).stem().string();
        if (tag.empty() || !seen.insert(tag).second)
            tag += "#" + std::to_string(i);
        tags.push_back(tag);
    }
    return tags;
}

// Loads one results file per source and indexes the per-image sets by id.
struct LoadedModels {
    std::vector<std::string> tags;
    std::vector<std::map<std::int64_t, PredictionSet>> per_model;
    std::vector<std::int64_t> image_ids;  // sorted union
};

LoadedModels load_models(const std::vector<std::string>& paths) {
    LoadedModels out;
    out.tags = source_tags(paths);
    std::set<std::int64_t> ids;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto results = read_results_json(paths[i]);
        std::map<std::int64_t, PredictionSet> by_image;
        for (auto& set : results_to_prediction_sets(results, out.tags[i])) {
            ids.insert(set.image_id);
            by_image.emplace(set.image_id, std::move(set));
        }
        out.per_model.push_back(std::move(by_image));
    }
    out.image_ids.assign(ids.begin(), ids.end());
    return out;
}

void write_sets_as_results(const std::vector<PredictionSet>& sets, const fs::path& path) {
    write_results_json(prediction_sets_to_results(sets), path);
}

// ------------------------------------------------------------------ reports

ordered_json report_to_json(const ApReport& report,
                            const std::map<int, std::string>& names) {
    ordered_json j;
    j["map"] = report.map;
    j["iou_thresholds"] = report.iou_thresholds;
    j["per_threshold_ap"] = report.per_threshold_ap;
    ordered_json cats = ordered_json::object();
    for (const auto& [cat, ap] : report.per_category_ap) {
        ordered_json c;
        auto it = names.find(cat);
        c["name"] = it == names.end() ? "" : it->second;
        c["ap"] = ap;
        c["gt_count"] = report.gt_counts.at(cat);
        c["per_threshold"] = report.per_category_per_threshold.at(cat);
        cats[std::to_string(cat)] = std::move(c);
    }
    j["per_category"] = std::move(cats);
    return j;
}

void print_report(const ApReport& report, const std::map<int, std::string>& names) {
    std::printf("%-16s %8s %10s\n", "category", "gt", "AP");
    for (const auto& [cat, ap] : report.per_category_ap) {
        auto it = names.find(cat);
        const std::string label =
            std::to_string(cat) + (it == names.end() || it->second.empty()
                                       ? ""
                                       : " (" + it->second + ")");
        std::printf("%-16s %8lld %10.4f\n", label.c_str(),
                    static_cast<long long>(report.gt_counts.at(cat)), ap);
    }
    std::printf("mAP(0.50:0.95) over %zu categories: %.4f\n",
                report.per_category_ap.size(), report.map);
}

std::map<int, std::string> category_names(const CocoDataset& ds) {
    std::map<int, std::string> names;
    for (const auto& c : ds.categories) names[c.id] = c.name;
    return names;
}

std::array<std::uint8_t, 3> overlay_color(int key) {
    Rng rng(mix_seed(0x6f766572ull, static_cast<std::uint64_t>(key)));
    return {static_cast<std::uint8_t>(80 + rng.uniform_index(176)),
            static_cast<std::uint8_t>(80 + rng.uniform_index(176)),
            static_cast<std::uint8_t>(80 + rng.uniform_index(176))};
}

void dump_overlays(const std::vector<PredictionSet>& preds,
                   const std::vector<GroundTruth>& gts, const fs::path& dir) {
    fs::create_directories(dir);
    std::map<std::int64_t, const PredictionSet*> by_image;
    for (const auto& p : preds) by_image[p.image_id] = &p;
    for (const auto& gt : gts) {
        Image canvas(gt.width, gt.height, {0, 0, 0});
        auto it = by_image.find(gt.image_id);
        if (it != by_image.end()) {
            int i = 0;
            for (const auto& p : it->second->predictions)
                blend_mask(canvas, p.mask, overlay_color(p.category_id * 101 + i++),
                           0.6);
        }
        for (const auto& inst : gt.instances)
            draw_mask_outline(canvas, inst.mask, {255, 255, 255});
        char name[32];
        std::snprintf(name, sizeof(name), "overlay_%06lld.ppm",
                      static_cast<long long>(gt.image_id));
        write_ppm(canvas, dir / name);
    }
}

// ------------------------------------------------------------------ commands

void run_nms(const std::string& input, const std::string& output,
             const NmsCliOptions& nms_opts, int threads) {
    const auto results = read_results_json(input);
    auto sets = results_to_prediction_sets(results, "");
    const NmsConfig cfg = to_nms_config(nms_opts);
    std::vector<PredictionSet> out(sets.size());
    parallel_for(static_cast<std::int64_t>(sets.size()), threads, [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] =
            matrix_nms(sets[static_cast<std::size_t>(i)], cfg);
    });
    write_sets_as_results(out, output);
}

void run_ensemble(const std::vector<std::string>& inputs,
                  const std::vector<double>& weights, const std::string& output,
                  const NmsCliOptions& nms_opts, int threads) {
    if (!weights.empty() && weights.size() != inputs.size())
        throw std::runtime_error("--weights must list one value per input file");
    const LoadedModels models = load_models(inputs);
    CalibrationConfig calibration;
    for (std::size_t i = 0; i < weights.size(); ++i)
        calibration.source_multipliers[models.tags[i]] = weights[i];

    const NmsConfig cfg = to_nms_config(nms_opts);
    std::vector<PredictionSet> out(models.image_ids.size());
    parallel_for(static_cast<std::int64_t>(models.image_ids.size()), threads,
                 [&](std::int64_t i) {
                     const std::int64_t image = models.image_ids[static_cast<std::size_t>(i)];
                     std::vector<PredictionSet> sets;
                     for (const auto& by_image : models.per_model) {
                         auto it = by_image.find(image);
                         if (it != by_image.end()) sets.push_back(it->second);
                     }
                     out[static_cast<std::size_t>(i)] = ensemble(sets, calibration, cfg);
                 });
    write_sets_as_results(out, output);
}

void run_tta_merge(const std::vector<std::string>& inputs,
                   const std::vector<double>& scales, const std::vector<int>& flips,
                   const std::string& dataset_path, const std::string& output,
                   const std::string& resize_method, const NmsCliOptions& nms_opts,
                   int threads) {
    if (scales.size() != inputs.size())
        throw std::runtime_error("--scales must list one value per input file");
    if (!flips.empty() && flips.size() != inputs.size())
        throw std::runtime_error("--flips must list one value per input file");

    const CocoDataset ds = read_dataset_json(dataset_path);
    std::map<std::int64_t, std::pair<int, int>> geometry;
    for (const auto& im : ds.images) geometry[im.id] = {im.width, im.height};

    const LoadedModels legs = load_models(inputs);
    const NmsConfig cfg = to_nms_config(nms_opts);
    const ResizeMethod method = parse_resize_method(resize_method);

    std::vector<PredictionSet> out(legs.image_ids.size());
    parallel_for(static_cast<std::int64_t>(legs.image_ids.size()), threads,
                 [&](std::int64_t i) {
                     const std::int64_t image = legs.image_ids[static_cast<std::size_t>(i)];
                     auto geo = geometry.find(image);
                     if (geo == geometry.end())
                         throw std::runtime_error("image " + std::to_string(image) +
                                                  " missing from --dataset");
                     std::vector<TtaPrediction> tta;
                     for (std::size_t leg = 0; leg < legs.per_model.size(); ++leg) {
                         auto it = legs.per_model[leg].find(image);
                         if (it == legs.per_model[leg].end()) continue;
                         TtaPrediction t;
                         t.predictions = it->second;
                         t.transform.scale = scales[leg];
                         t.transform.hflip = !flips.empty() && flips[leg] != 0;
                         t.original_width = geo->second.first;
                         t.original_height = geo->second.second;
                         tta.push_back(std::move(t));
                     }
                     out[static_cast<std::size_t>(i)] = tta_merge(tta, cfg, method);
                 });
    write_sets_as_results(out, output);
}

void run_eval(const std::string& gt_path, const std::string& results_path,
              const std::string& output, int max_dets, const std::string& overlay_dir,
              int threads) {
    const CocoDataset ds = read_dataset_json(gt_path);
    const auto gts = dataset_to_ground_truth(ds);
    const auto preds = results_to_prediction_sets(read_results_json(results_path), "");
    EvalConfig cfg;
    cfg.max_dets = max_dets;
    const ApReport report = evaluate(preds, gts, cfg, threads);
    const auto names = category_names(ds);
    print_report(report, names);
    if (!output.empty()) {
        std::ofstream outf(output);
        if (!outf) throw std::runtime_error("cannot open " + output + " for writing");
        outf << report_to_json(report, names).dump(1) << "\n";
    }
    if (!overlay_dir.empty()) dump_overlays(preds, gts, overlay_dir);
}

void run_augment(const std::string& gt_path, const std::string& images_dir,
                 const std::string& out_dataset, const std::string& out_images,
                 const BalanceConfig& cfg, const std::string& report_path,
                 std::uint64_t seed, int threads) {
    const CocoDataset ds = read_dataset_json(gt_path);
    const auto samples = load_dataset_samples(ds, images_dir);
    AugmentReport report;
    const auto augmented = augment_dataset(samples, cfg, seed, &report, threads);

    fs::create_directories(out_images);
    std::vector<std::string> file_names;
    for (const auto& im : ds.images) file_names.push_back(im.file_name);
    for (std::size_t i = 0; i < augmented.size(); ++i)
        write_ppm(augmented[i].image, fs::path(out_images) / file_names[i]);

    write_dataset_json(build_dataset(augmented, ds.categories, file_names), out_dataset);

    if (!report_path.empty()) {
        ordered_json j;
        auto counts = [](const std::map<int, std::int64_t>& m) {
            ordered_json o = ordered_json::object();
            for (const auto& [cat, n] : m) o[std::to_string(cat)] = n;
            return o;
        };
        j["mode"] = cfg.mode == PasteMode::balanced ? "balanced" : "simple";
        j["beta"] = cfg.beta;
        j["pastes_per_image"] = cfg.pastes_per_image;
        j["before_counts"] = counts(report.before_counts);
        j["after_counts"] = counts(report.after_counts);
        j["pasted_counts"] = counts(report.pasted_counts);
        std::ofstream outf(report_path);
        if (!outf)
            throw std::runtime_error("cannot open " + report_path + " for writing");
        outf << j.dump(1) << "\n";
    }
}

void run_synth(const std::string& out_dir, const SynthConfig& cfg, int threads) {
    const SynthOutput out = synth(cfg, threads);
    const fs::path dir(out_dir);
    fs::create_directories(dir / "images");

    std::vector<std::string> file_names;
    for (const auto& sample : out.dataset) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%06lld.ppm",
                      static_cast<long long>(sample.image_id));
        file_names.emplace_back(name);
        write_ppm(sample.image, dir / "images" / name);
    }
    const auto cats = synth_categories(cfg);
    write_dataset_json(build_dataset(out.dataset, cats, file_names),
                       dir / "dataset.json");

    for (std::size_t m = 0; m < out.model_predictions.size(); ++m) {
        char name[32];
        std::snprintf(name, sizeof(name), "model_%zu.json", m);
        write_sets_as_results(out.model_predictions[m], dir / name);
    }
}

void run_report(const std::string& gt_path, const std::vector<std::string>& inputs,
                const std::string& output, const NmsCliOptions& nms_opts, int threads) {
    const CocoDataset ds = read_dataset_json(gt_path);
    const auto gts = dataset_to_ground_truth(ds);
    const LoadedModels models = load_models(inputs);
    const EvalConfig eval_cfg;

    auto eval_sets = [&](const std::vector<PredictionSet>& sets) {
        return evaluate(sets, gts, eval_cfg, threads).map;
    };

    ordered_json j;
    j["models"] = ordered_json::array();
    std::printf("%-24s %-10s %8s\n", "method", "kernel", "mAP");
    for (std::size_t m = 0; m < models.per_model.size(); ++m) {
        std::vector<PredictionSet> sets;
        for (const auto& [id, set] : models.per_model[m]) sets.push_back(set);
        const double map = eval_sets(sets);
        std::printf("%-24s %-10s %8.4f\n", models.tags[m].c_str(), "-", map);
        ordered_json entry;
        entry["name"] = models.tags[m];
        entry["map"] = map;
        j["models"].push_back(std::move(entry));
    }

    // One command, both kernels: the ensemble rows differ only in the kernel.
    ordered_json ens = ordered_json::object();
    for (const std::string kernel : {"linear", "gaussian"}) {
        NmsCliOptions opts = nms_opts;
        opts.kernel = kernel;
        const NmsConfig cfg = to_nms_config(opts);
        std::vector<PredictionSet> fused(models.image_ids.size());
        parallel_for(static_cast<std::int64_t>(models.image_ids.size()), threads,
                     [&](std::int64_t i) {
                         const std::int64_t image =
                             models.image_ids[static_cast<std::size_t>(i)];
                         std::vector<PredictionSet> sets;
                         for (const auto& by_image : models.per_model) {
                             auto it = by_image.find(image);
                             if (it != by_image.end()) sets.push_back(it->second);
                         }
                         fused[static_cast<std::size_t>(i)] =
                             ensemble(sets, CalibrationConfig{}, cfg);
                     });
        const double map = eval_sets(fused);
        std::printf("%-24s %-10s %8.4f\n", "ensemble", kernel.c_str(), map);
        ens[kernel] = map;
    }
    j["ensemble"] = std::move(ens);

    if (!output.empty()) {
        std::ofstream outf(output);
        if (!outf) throw std::runtime_error("cannot open " + output + " for writing");
        outf << j.dump(1) << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"instance-mask fusion, augmentation and evaluation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI key=value file");

    int threads = 0;
    std::uint64_t seed = 0;
    app.add_option("--threads", threads, "worker threads (0 = auto)")
        ->capture_default_str();
    app.add_option("--seed", seed, "root seed for every random sub-stream")
        ->capture_default_str();

    // nms ------------------------------------------------------------------
    auto* nms_cmd = app.add_subcommand("nms", "matrix NMS over one results file");
    nms_cmd->fallthrough();
    std::string nms_input, nms_output;
    NmsCliOptions nms_opts;
    nms_cmd->add_option("--input", nms_input, "COCO results JSON")->required();
    nms_cmd->add_option("--output", nms_output, "output results JSON")->required();
    add_nms_options(nms_cmd, nms_opts);
    nms_cmd->callback([&] { run_nms(nms_input, nms_output, nms_opts, threads); });

    // tta-merge -------------------------------------------------------------
    auto* tta_cmd = app.add_subcommand(
        "tta-merge", "invert per-transform predictions and fuse them");
    tta_cmd->fallthrough();
    std::vector<std::string> tta_inputs;
    std::vector<double> tta_scales{0.75, 1.0, 1.25};  // placeholder default scales
    std::vector<int> tta_flips;
    std::string tta_dataset, tta_output, tta_resize = "bilinear";
    NmsCliOptions tta_nms;
    tta_cmd->add_option("--inputs", tta_inputs, "one results JSON per transform")
        ->required();
    tta_cmd->add_option("--scales", tta_scales, "scale factor per input")
        ->delimiter(',')
        ->capture_default_str();
    tta_cmd->add_option("--flips", tta_flips, "0/1 horizontal flip per input")
        ->delimiter(',');
    tta_cmd->add_option("--dataset", tta_dataset,
                        "dataset JSON supplying original image geometry")
        ->required();
    tta_cmd->add_option("--output", tta_output, "output results JSON")->required();
    tta_cmd->add_option("--resize-method", tta_resize, "bilinear | nearest")
        ->check(CLI::IsMember({"bilinear", "nearest"}))
        ->capture_default_str();
    add_nms_options(tta_cmd, tta_nms);
    tta_cmd->callback([&] {
        run_tta_merge(tta_inputs, tta_scales, tta_flips, tta_dataset, tta_output,
                      tta_resize, tta_nms, threads);
    });

    // ensemble ---------------------------------------------------------------
    auto* ens_cmd =
        app.add_subcommand("ensemble", "pool multiple models and fuse with matrix NMS");
    ens_cmd->fallthrough();
    std::vector<std::string> ens_inputs;
    std::vector<double> ens_weights;
    std::string ens_output;
    NmsCliOptions ens_nms;
    ens_cmd->add_option("--inputs", ens_inputs, "one results JSON per model")
        ->required();
    ens_cmd->add_option("--weights", ens_weights,
                        "per-model score multiplier (default 1)")
        ->delimiter(',');
    ens_cmd->add_option("--output", ens_output, "output results JSON")->required();
    add_nms_options(ens_cmd, ens_nms);
    ens_cmd->callback(
        [&] { run_ensemble(ens_inputs, ens_weights, ens_output, ens_nms, threads); });

    // augment ----------------------------------------------------------------
    auto* aug_cmd = app.add_subcommand(
        "augment", "offline copy-paste augmentation over a dataset");
    aug_cmd->fallthrough();
    std::string aug_gt, aug_images, aug_out_dataset, aug_out_images, aug_report;
    std::string aug_mode = "balanced";
    BalanceConfig aug_cfg;
    std::vector<double> aug_jitter;
    aug_cmd->add_option("--dataset", aug_gt, "input dataset JSON")->required();
    aug_cmd->add_option("--images", aug_images, "input image directory (PPM)")
        ->required();
    aug_cmd->add_option("--output-dataset", aug_out_dataset, "augmented dataset JSON")
        ->required();
    aug_cmd->add_option("--output-images", aug_out_images, "augmented image directory")
        ->required();
    aug_cmd->add_option("--mode", aug_mode, "simple | balanced")
        ->check(CLI::IsMember({"simple", "balanced"}))
        ->capture_default_str();
    aug_cmd->add_option("--beta", aug_cfg.beta, "effective-number parameter")
        ->capture_default_str();
    aug_cmd->add_option("--pastes", aug_cfg.pastes_per_image, "crops pasted per image")
        ->capture_default_str();
    aug_cmd
        ->add_option("--min-visible", aug_cfg.min_visible_fraction,
                     "occlusion survival threshold")
        ->capture_default_str();
    aug_cmd->add_option("--hflip-prob", aug_cfg.hflip_prob, "crop flip probability")
        ->capture_default_str();
    aug_cmd->add_option("--scale-jitter", aug_jitter,
                        "lo,hi uniform crop scale jitter (default off)")
        ->delimiter(',');
    aug_cmd->add_option("--report", aug_report, "augmentation report JSON");
    aug_cmd->callback([&] {
        aug_cfg.mode = aug_mode == "simple" ? PasteMode::simple : PasteMode::balanced;
        if (!aug_jitter.empty()) {
            if (aug_jitter.size() != 2)
                throw std::runtime_error("--scale-jitter needs exactly lo,hi");
            aug_cfg.scale_jitter_min = aug_jitter[0];
            aug_cfg.scale_jitter_max = aug_jitter[1];
        }
        run_augment(aug_gt, aug_images, aug_out_dataset, aug_out_images, aug_cfg,
                    aug_report, seed, threads);
    });

    // eval --------------------------------------------------------------------
    auto* eval_cmd =
        app.add_subcommand("eval", "COCO-convention mask mAP of a results file");
    eval_cmd->fallthrough();
    std::string eval_gt, eval_results, eval_output, eval_overlays;
    int eval_max_dets = 100;
    eval_cmd->add_option("--gt", eval_gt, "ground-truth dataset JSON")->required();
    eval_cmd->add_option("--results", eval_results, "results JSON")->required();
    eval_cmd->add_option("--output", eval_output, "report JSON");
    eval_cmd->add_option("--max-dets", eval_max_dets, "per-image detection cap")
        ->capture_default_str();
    eval_cmd->add_option("--dump-overlays", eval_overlays,
                         "directory for static overlay images");
    eval_cmd->callback([&] {
        run_eval(eval_gt, eval_results, eval_output, eval_max_dets, eval_overlays,
                 threads);
    });

    // synth -------------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand(
        "synth", "generate a synthetic dataset plus simulated noisy models");
    synth_cmd->fallthrough();
    std::string synth_dir;
    SynthConfig synth_cfg;
    std::string synth_shapes = "mixed";
    synth_cmd->add_option("--output-dir", synth_dir, "output directory")->required();
    synth_cmd->add_option("--images", synth_cfg.image_count, "image count")
        ->capture_default_str();
    synth_cmd->add_option("--width", synth_cfg.width, "image width")
        ->capture_default_str();
    synth_cmd->add_option("--height", synth_cfg.height, "image height")
        ->capture_default_str();
    synth_cmd->add_option("--categories", synth_cfg.category_count, "category count")
        ->capture_default_str();
    synth_cmd
        ->add_option("--longtail", synth_cfg.longtail_exponent,
                     "category frequency decay exponent")
        ->capture_default_str();
    synth_cmd->add_option("--min-instances", synth_cfg.min_instances,
                          "min instances per image")
        ->capture_default_str();
    synth_cmd->add_option("--max-instances", synth_cfg.max_instances,
                          "max instances per image")
        ->capture_default_str();
    synth_cmd->add_option("--shapes", synth_shapes, "rectangles | ellipses | mixed")
        ->check(CLI::IsMember({"rectangles", "ellipses", "mixed"}))
        ->capture_default_str();
    synth_cmd->add_option("--models", synth_cfg.model_count, "simulated model count")
        ->capture_default_str();
    synth_cmd->add_option("--jitter", synth_cfg.noise.jitter_px,
                          "mask boundary jitter in pixels")
        ->capture_default_str();
    synth_cmd->add_option("--drop-prob", synth_cfg.noise.drop_prob,
                          "instance drop probability")
        ->capture_default_str();
    synth_cmd->add_option("--dup-prob", synth_cfg.noise.duplicate_prob,
                          "duplicate emission probability")
        ->capture_default_str();
    synth_cmd->add_option("--score-noise", synth_cfg.noise.score_noise,
                          "score noise standard deviation")
        ->capture_default_str();
    synth_cmd->callback([&] {
        synth_cfg.seed = seed;
        synth_cfg.shapes = synth_shapes == "rectangles" ? ShapeFamily::rectangles
                           : synth_shapes == "ellipses" ? ShapeFamily::ellipses
                                                        : ShapeFamily::mixed;
        run_synth(synth_dir, synth_cfg, threads);
    });

    // report ------------------------------------------------------------------
    auto* report_cmd = app.add_subcommand(
        "report", "per-model vs ensemble comparison table (linear and gaussian)");
    report_cmd->fallthrough();
    std::string report_gt, report_output;
    std::vector<std::string> report_inputs;
    NmsCliOptions report_nms;
    report_cmd->add_option("--gt", report_gt, "ground-truth dataset JSON")->required();
    report_cmd->add_option("--inputs", report_inputs, "one results JSON per model")
        ->required();
    report_cmd->add_option("--output", report_output, "report JSON");
    report_cmd->add_option("--sigma", report_nms.sigma, "gaussian kernel width")
        ->capture_default_str();
    report_cmd->add_option("--score-thr", report_nms.score_thr,
                           "drop decayed scores below this")
        ->capture_default_str();
    report_cmd->add_option("--max-keep", report_nms.max_keep, "survivor cap per image")
        ->capture_default_str();
    report_cmd->add_flag("--class-agnostic", report_nms.class_agnostic,
                         "suppress across categories");
    report_cmd->callback(
        [&] { run_report(report_gt, report_inputs, report_output, report_nms, threads); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
