#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "viewopt/env.hpp"
#include "viewopt/scene.hpp"

namespace viewopt {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kDatasetFormatVersion = 1;

// Scene seeds are partitioned by residue modulo 20 so the 70/15/15 split
// stays stable as the dataset grows: residues 0-13 train, 14-16 val, 17-19
// test.
enum class Split { Train, Val, Test };
const char* to_string(Split s);
Split split_of_seed(std::uint64_t seed);

// In-memory dataset: scene specs, visibility tables and lazily rendered
// sensor views over one shared lattice.
class Dataset {
  public:
    Dataset() = default;
    Dataset(double lattice_radius, const CameraIntrinsics& intrinsics);
    Dataset(Dataset&&) = default;
    Dataset& operator=(Dataset&&) = default;

    void add_scene(SceneSpec scene, VisibilityTable table);

    int scene_count() const { return static_cast<int>(scenes_.size()); }
    const SceneSpec& scene(int i) const { return scenes_[static_cast<std::size_t>(i)]; }
    const VisibilityTable& table(int i) const { return tables_[static_cast<std::size_t>(i)]; }
    const ViewpointLattice& lattice() const { return *lattice_; }
    double lattice_radius() const { return lattice_radius_; }
    const CameraIntrinsics& intrinsics() const { return lattice_->intrinsics; }

    SceneContext context(int i);  // view cache created on first use
    std::vector<int> split_indices(Split s) const;

  private:
    double lattice_radius_ = 0.0;
    std::unique_ptr<ViewpointLattice> lattice_;
    std::vector<SceneSpec> scenes_;
    std::vector<VisibilityTable> tables_;
    std::vector<std::unique_ptr<RenderedSceneViews>> views_;
};

// Generates scenes for the given seeds (deterministic per seed) and computes
// their visibility tables.
Dataset build_dataset(const std::vector<std::uint64_t>& seeds, const GeneratorConfig& config, double lattice_radius,
                      const CameraIntrinsics& intrinsics);

// Directory layout:
//   manifest.txt
//   scene_<k>/view_<a>_<e>_depth.pgm    16-bit millimeters
//   scene_<k>/view_<a>_<e>_label.pgm    8-bit object_id, 0 background
//   scene_<k>/amodal_<id>_<a>_<e>.pgm   8-bit binary, 255 inside the mask
//   scene_<k>/visibility.csv            per (object, viewpoint) pixel counts
void export_dataset(Dataset& dataset, const std::filesystem::path& out_dir);

// Validates the manifest version, the existence and dimensions of every
// referenced raster, and the consistency of each visibility file. Errors name
// the offending path.
Dataset import_dataset(const std::filesystem::path& dir);

// Content hash over the manifest and visibility files (FNV-1a).
std::uint64_t dataset_fingerprint(const std::filesystem::path& dir);

std::string manifest_text(const Dataset& dataset);

}  // namespace viewopt
