#include <string>

#include "underloc/common/errors.hpp"
#include "underloc/common/parallel.hpp"
#include "underloc/dataio/image.hpp"
#include "underloc/dataio/resize.hpp"
#include "underloc/matching/features.hpp"

namespace underloc::matching {

void extract_dataset_features(dataio::DatasetManifest& manifest, const FeatureOptions& options,
                              unsigned threads) {
    const auto dir = manifest.resolve(manifest.image_dir.value_or("images"));
    const std::size_t n = manifest.size();
    dataio::DescriptorSet descriptors;
    descriptors.dimension = kGlobalGrid * kGlobalGrid;
    descriptors.items.resize(n);
    std::vector<dataio::KeypointSet> keypoints(n);

    parallel_for(n, threads, [&](std::size_t i) {
        const auto& rec = manifest.records[i];
        const auto path = dir / (rec.image_id + ".pgm");
        dataio::GrayImage img = dataio::load_pgm(path);
        if (img.width != rec.width_px || img.height != rec.height_px) {
            const auto target = dataio::resize_policy(img.width, img.height);
            if (target.width != rec.width_px || target.height != rec.height_px) {
                throw ConsistencyError(path.string() + ": image is " + std::to_string(img.width) +
                                       "x" + std::to_string(img.height) + " but record '" +
                                       rec.image_id + "' declares " +
                                       std::to_string(rec.width_px) + "x" +
                                       std::to_string(rec.height_px));
            }
            img = dataio::resample_area(img, target.width, target.height);
        }
        descriptors.items[i] = extract_global(img);
        descriptors.items[i].image_id = rec.image_id;
        keypoints[i] = extract_features(img, options);
        keypoints[i].image_id = rec.image_id;
    });
    manifest.descriptors = std::move(descriptors);
    manifest.keypoints = std::move(keypoints);
}

}  // namespace underloc::matching
