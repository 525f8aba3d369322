#include "maskfuse/coco.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace maskfuse {

using ordered_json = nlohmann::ordered_json;

std::string rle_to_string(const RleMask& rle) {
    std::string s;
    s.reserve(rle.counts.size() * 3);
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        std::int64_t x = static_cast<std::int64_t>(rle.counts[i]);
        if (i > 2) x -= static_cast<std::int64_t>(rle.counts[i - 2]);
        bool more = true;
        while (more) {
            int c = static_cast<int>(x & 0x1f);
            x >>= 5;
            more = (c & 0x10) ? x != -1 : x != 0;
            if (more) c |= 0x20;
            s.push_back(static_cast<char>(c + 48));
        }
    }
    return s;
}

RleMask rle_from_string(const std::string& counts, int height, int width) {
    RleMask rle;
    rle.height = height;
    rle.width = width;
    std::size_t p = 0;
    while (p < counts.size()) {
        std::int64_t x = 0;
        int k = 0;
        bool more = true;
        while (more) {
            if (p >= counts.size())
                throw std::runtime_error("rle_from_string: truncated counts string");
            const int c = static_cast<int>(counts[p]) - 48;
            if (c < 0 || c > 63)
                throw std::runtime_error(
                    "rle_from_string: character out of range at position " +
                    std::to_string(p));
            x |= static_cast<std::int64_t>(c & 0x1f) << (5 * k);
            more = (c & 0x20) != 0;
            ++p;
            ++k;
            if (!more && (c & 0x10)) x |= ~std::int64_t{0} << (5 * k);
        }
        if (rle.counts.size() > 2)
            x += static_cast<std::int64_t>(rle.counts[rle.counts.size() - 2]);
        if (x < 0)
            throw std::runtime_error("rle_from_string: negative run length decoded");
        rle.counts.push_back(static_cast<std::uint64_t>(x));
    }
    validate_rle(rle);
    return rle;
}

namespace {

ordered_json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_file(const ordered_json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump();
    out << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw std::runtime_error(where + ": " + what);
}

RleMask parse_segmentation(const ordered_json& seg, const std::string& where) {
    if (!seg.is_object()) schema_error(where, "segmentation must be an RLE object");
    if (!seg.contains("size") || !seg["size"].is_array() || seg["size"].size() != 2)
        schema_error(where, "segmentation.size must be [height, width]");
    const int h = seg["size"][0].get<int>();
    const int w = seg["size"][1].get<int>();
    if (!seg.contains("counts")) schema_error(where, "segmentation.counts missing");
    const auto& counts = seg["counts"];
    try {
        if (counts.is_string()) {
            return rle_from_string(counts.get<std::string>(), h, w);
        }
        if (counts.is_array()) {
            RleMask rle;
            rle.height = h;
            rle.width = w;
            for (const auto& c : counts) rle.counts.push_back(c.get<std::uint64_t>());
            validate_rle(rle);
            return rle;
        }
    } catch (const std::exception& e) {
        schema_error(where, e.what());
    }
    schema_error(where, "segmentation.counts must be a string or an array");
}

ordered_json segmentation_json(const RleMask& rle) {
    ordered_json seg;
    seg["size"] = {rle.height, rle.width};
    seg["counts"] = rle_to_string(rle);
    return seg;
}

}  // namespace

CocoDataset read_dataset_json(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    if (!j.is_object()) throw std::runtime_error(path.string() + ": root must be an object");
    CocoDataset ds;
    for (const char* key : {"images", "annotations", "categories"})
        if (!j.contains(key) || !j[key].is_array())
            throw std::runtime_error(path.string() + ": missing array '" + key + "'");

    std::size_t i = 0;
    for (const auto& im : j["images"]) {
        const std::string where = path.string() + ": images[" + std::to_string(i++) + "]";
        if (!im.is_object() || !im.contains("id") || !im.contains("width") ||
            !im.contains("height"))
            schema_error(where, "needs id, width, height");
        CocoImage out;
        out.id = im["id"].get<std::int64_t>();
        out.width = im["width"].get<int>();
        out.height = im["height"].get<int>();
        if (im.contains("file_name")) out.file_name = im["file_name"].get<std::string>();
        if (out.width < 1 || out.height < 1) schema_error(where, "bad dimensions");
        ds.images.push_back(std::move(out));
    }
    i = 0;
    for (const auto& an : j["annotations"]) {
        const std::string where =
            path.string() + ": annotations[" + std::to_string(i++) + "]";
        if (!an.is_object() || !an.contains("id") || !an.contains("image_id") ||
            !an.contains("category_id") || !an.contains("segmentation"))
            schema_error(where, "needs id, image_id, category_id, segmentation");
        CocoAnnotation out;
        out.id = an["id"].get<std::int64_t>();
        out.image_id = an["image_id"].get<std::int64_t>();
        out.category_id = an["category_id"].get<int>();
        out.segmentation = parse_segmentation(an["segmentation"], where);
        ds.annotations.push_back(std::move(out));
    }
    i = 0;
    for (const auto& cat : j["categories"]) {
        const std::string where =
            path.string() + ": categories[" + std::to_string(i++) + "]";
        if (!cat.is_object() || !cat.contains("id")) schema_error(where, "needs id");
        CocoCategory out;
        out.id = cat["id"].get<int>();
        if (cat.contains("name")) out.name = cat["name"].get<std::string>();
        ds.categories.push_back(std::move(out));
    }
    return ds;
}

void write_dataset_json(const CocoDataset& dataset, const std::filesystem::path& path) {
    ordered_json j;
    j["images"] = ordered_json::array();
    for (const auto& im : dataset.images) {
        ordered_json o;
        o["id"] = im.id;
        o["width"] = im.width;
        o["height"] = im.height;
        o["file_name"] = im.file_name;
        j["images"].push_back(std::move(o));
    }
    j["annotations"] = ordered_json::array();
    for (const auto& an : dataset.annotations) {
        ordered_json o;
        o["id"] = an.id;
        o["image_id"] = an.image_id;
        o["category_id"] = an.category_id;
        o["segmentation"] = segmentation_json(an.segmentation);
        o["area"] = mask_area(an.segmentation);
        o["iscrowd"] = 0;
        j["annotations"].push_back(std::move(o));
    }
    j["categories"] = ordered_json::array();
    for (const auto& cat : dataset.categories) {
        ordered_json o;
        o["id"] = cat.id;
        o["name"] = cat.name;
        j["categories"].push_back(std::move(o));
    }
    write_file(j, path);
}

std::vector<CocoResult> read_results_json(const std::filesystem::path& path) {
    const ordered_json j = parse_file(path);
    if (!j.is_array()) throw std::runtime_error(path.string() + ": root must be an array");
    std::vector<CocoResult> out;
    out.reserve(j.size());
    std::size_t i = 0;
    for (const auto& r : j) {
        const std::string where = path.string() + ": results[" + std::to_string(i++) + "]";
        if (!r.is_object() || !r.contains("image_id") || !r.contains("category_id") ||
            !r.contains("score") || !r.contains("segmentation"))
            schema_error(where, "needs image_id, category_id, score, segmentation");
        CocoResult res;
        res.image_id = r["image_id"].get<std::int64_t>();
        res.category_id = r["category_id"].get<int>();
        res.score = r["score"].get<double>();
        if (res.score < 0.0 || res.score > 1.0) schema_error(where, "score outside [0,1]");
        res.segmentation = parse_segmentation(r["segmentation"], where);
        out.push_back(std::move(res));
    }
    return out;
}

void write_results_json(std::span<const CocoResult> results,
                        const std::filesystem::path& path) {
    ordered_json j = ordered_json::array();
    for (const auto& r : results) {
        ordered_json o;
        o["image_id"] = r.image_id;
        o["category_id"] = r.category_id;
        o["score"] = r.score;
        o["segmentation"] = segmentation_json(r.segmentation);
        j.push_back(std::move(o));
    }
    write_file(j, path);
}

std::vector<PredictionSet> results_to_prediction_sets(std::span<const CocoResult> results,
                                                      const std::string& source_tag) {
    std::map<std::int64_t, PredictionSet> by_image;
    for (const auto& r : results) {
        auto [it, fresh] = by_image.try_emplace(r.image_id);
        PredictionSet& set = it->second;
        if (fresh) {
            set.image_id = r.image_id;
            set.width = r.segmentation.width;
            set.height = r.segmentation.height;
        } else if (set.width != r.segmentation.width ||
                   set.height != r.segmentation.height) {
            throw std::runtime_error("results disagree on geometry for image " +
                                     std::to_string(r.image_id));
        }
        InstancePrediction p;
        p.mask = rle_decode(r.segmentation);
        p.category_id = r.category_id;
        p.score = r.score;
        p.source = source_tag;
        set.predictions.push_back(std::move(p));
    }
    std::vector<PredictionSet> out;
    out.reserve(by_image.size());
    for (auto& [id, set] : by_image) out.push_back(std::move(set));
    return out;
}

std::vector<CocoResult> prediction_sets_to_results(std::span<const PredictionSet> sets) {
    std::vector<CocoResult> out;
    for (const auto& set : sets) {
        for (const auto& p : set.predictions) {
            CocoResult r;
            r.image_id = set.image_id;
            r.category_id = p.category_id;
            r.score = p.score;
            r.segmentation = rle_encode(p.mask);
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<GroundTruth> dataset_to_ground_truth(const CocoDataset& dataset) {
    std::vector<GroundTruth> out;
    out.reserve(dataset.images.size());
    std::map<std::int64_t, std::size_t> index;
    for (const auto& im : dataset.images) {
        if (index.count(im.id))
            throw std::runtime_error("dataset has duplicate image id " +
                                     std::to_string(im.id));
        index[im.id] = out.size();
        GroundTruth gt;
        gt.image_id = im.id;
        gt.width = im.width;
        gt.height = im.height;
        out.push_back(std::move(gt));
    }
    for (const auto& an : dataset.annotations) {
        auto it = index.find(an.image_id);
        if (it == index.end())
            throw std::runtime_error("annotation " + std::to_string(an.id) +
                                     " references unknown image " +
                                     std::to_string(an.image_id));
        GroundTruth& gt = out[it->second];
        if (an.segmentation.width != gt.width || an.segmentation.height != gt.height)
            throw std::runtime_error("annotation " + std::to_string(an.id) +
                                     " mask size differs from its image");
        gt.instances.push_back({rle_decode(an.segmentation), an.category_id, an.id});
    }
    return out;
}

std::vector<DatasetSample> load_dataset_samples(const CocoDataset& dataset,
                                                const std::filesystem::path& image_dir) {
    std::vector<GroundTruth> gts = dataset_to_ground_truth(dataset);
    std::vector<DatasetSample> out;
    out.reserve(gts.size());
    for (std::size_t i = 0; i < gts.size(); ++i) {
        const auto& im = dataset.images[i];
        if (im.file_name.empty())
            throw std::runtime_error("image " + std::to_string(im.id) +
                                     " has no file_name; cannot load pixels");
        DatasetSample s;
        s.image_id = im.id;
        s.image = read_ppm(image_dir / im.file_name);
        if (s.image.width != im.width || s.image.height != im.height)
            throw std::runtime_error("image file " + im.file_name +
                                     " size differs from dataset entry");
        s.instances = std::move(gts[i].instances);
        out.push_back(std::move(s));
    }
    return out;
}

CocoDataset build_dataset(std::span<const DatasetSample> samples,
                          std::span<const CocoCategory> categories,
                          std::span<const std::string> file_names) {
    if (file_names.size() != samples.size())
        throw std::invalid_argument("build_dataset: file_names must align with samples");
    CocoDataset ds;
    ds.categories.assign(categories.begin(), categories.end());
    std::int64_t next_ann = 1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        ds.images.push_back(
            {s.image_id, s.image.width, s.image.height, file_names[i]});
        for (const auto& inst : s.instances)
            ds.annotations.push_back(
                {next_ann++, s.image_id, inst.category_id, rle_encode(inst.mask)});
    }
    return ds;
}

}  // namespace maskfuse
