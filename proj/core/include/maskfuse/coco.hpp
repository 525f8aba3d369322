#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "maskfuse/copy_paste.hpp"
#include "maskfuse/eval.hpp"
#include "maskfuse/mask.hpp"
#include "maskfuse/prediction.hpp"

namespace maskfuse {

// COCO compressed counts string: 6 bits per character (ascii 48..111), LEB128
// style continuation, runs from the fourth onward stored as deltas against the
// run two back. Used only at the file boundary; all in-memory math stays on
// plain run sequences.
std::string rle_to_string(const RleMask& rle);
RleMask rle_from_string(const std::string& counts, int height, int width);

struct CocoCategory {
    int id = 0;
    std::string name;
};

struct CocoImage {
    std::int64_t id = 0;
    int width = 0;
    int height = 0;
    std::string file_name;
};

struct CocoAnnotation {
    std::int64_t id = 0;
    std::int64_t image_id = 0;
    int category_id = 0;
    RleMask segmentation;
};

struct CocoDataset {
    std::vector<CocoImage> images;
    std::vector<CocoAnnotation> annotations;
    std::vector<CocoCategory> categories;
};

struct CocoResult {
    std::int64_t image_id = 0;
    int category_id = 0;
    double score = 0.0;
    RleMask segmentation;
};

// Readers accept `counts` both as a compressed string and as a plain array of
// run lengths; writers always emit the compressed string. Schema violations
// surface as std::runtime_error with the offending element's position.
CocoDataset read_dataset_json(const std::filesystem::path& path);
void write_dataset_json(const CocoDataset& dataset, const std::filesystem::path& path);
std::vector<CocoResult> read_results_json(const std::filesystem::path& path);
void write_results_json(std::span<const CocoResult> results,
                        const std::filesystem::path& path);

// Groups results by ascending image_id, preserving file order within an
// image; geometry comes from the segmentation sizes, which must agree within
// an image. Every decoded prediction gets `source_tag` as its source.
std::vector<PredictionSet> results_to_prediction_sets(std::span<const CocoResult> results,
                                                      const std::string& source_tag);

std::vector<CocoResult> prediction_sets_to_results(std::span<const PredictionSet> sets);

std::vector<GroundTruth> dataset_to_ground_truth(const CocoDataset& dataset);

// Pairs dataset annotations with image pixels read from `image_dir`.
std::vector<DatasetSample> load_dataset_samples(const CocoDataset& dataset,
                                                const std::filesystem::path& image_dir);

// Reassembles a dataset from samples; file_names must align with samples.
// Annotation ids are renumbered sequentially from 1.
CocoDataset build_dataset(std::span<const DatasetSample> samples,
                          std::span<const CocoCategory> categories,
                          std::span<const std::string> file_names);

}  // namespace maskfuse
