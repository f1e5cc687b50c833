#include "viewopt/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "viewopt/kv.hpp"
#include "viewopt/pgm.hpp"
#include "viewopt/render.hpp"

namespace viewopt {

namespace fs = std::filesystem;

const char* to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Split split_of_seed(std::uint64_t seed) {
    std::uint64_t r = seed % 20;
    if (r < 14) return Split::Train;
    if (r < 17) return Split::Val;
    return Split::Test;
}

Dataset::Dataset(double lattice_radius, const CameraIntrinsics& intrinsics)
    : lattice_radius_(lattice_radius),
      lattice_(std::make_unique<ViewpointLattice>(build_viewpoint_lattice(lattice_radius, intrinsics))) {}

void Dataset::add_scene(SceneSpec scene, VisibilityTable table) {
    scenes_.push_back(std::move(scene));
    tables_.push_back(std::move(table));
    views_.push_back(nullptr);
}

SceneContext Dataset::context(int i) {
    auto& slot = views_[static_cast<std::size_t>(i)];
    if (!slot) slot = std::make_unique<RenderedSceneViews>(scenes_[static_cast<std::size_t>(i)], *lattice_);
    return SceneContext{&scenes_[static_cast<std::size_t>(i)], &tables_[static_cast<std::size_t>(i)], lattice_.get(),
                        slot.get(), i};
}

std::vector<int> Dataset::split_indices(Split s) const {
    std::vector<int> out;
    for (int i = 0; i < scene_count(); ++i)
        if (split_of_seed(scenes_[static_cast<std::size_t>(i)].seed) == s) out.push_back(i);
    return out;
}

Dataset build_dataset(const std::vector<std::uint64_t>& seeds, const GeneratorConfig& config, double lattice_radius,
                      const CameraIntrinsics& intrinsics) {
    Dataset ds(lattice_radius, intrinsics);
    for (std::uint64_t seed : seeds) {
        VisibilityTable table;
        SceneSpec scene = generate_scene(seed, config, ds.lattice(), &table);
        ds.add_scene(std::move(scene), std::move(table));
    }
    return ds;
}

std::string manifest_text(const Dataset& dataset) {
    KvWriter w;
    w.add("format_version", kDatasetFormatVersion);
    w.add("lattice.radius", dataset.lattice_radius());
    const CameraIntrinsics& intr = dataset.intrinsics();
    w.add("intrinsics.fx", intr.fx);
    w.add("intrinsics.fy", intr.fy);
    w.add("intrinsics.cx", intr.cx);
    w.add("intrinsics.cy", intr.cy);
    w.add("intrinsics.width", intr.width);
    w.add("intrinsics.height", intr.height);
    w.add("scene_count", dataset.scene_count());
    for (int k = 0; k < dataset.scene_count(); ++k) {
        const SceneSpec& s = dataset.scene(k);
        std::string p = "scene." + std::to_string(k) + ".";
        w.add(p + "dir", "scene_" + std::to_string(k));
        w.add(p + "seed", s.seed);
        w.add(p + "split", to_string(split_of_seed(s.seed)));
        w.add(p + "target_id", s.target_id);
        w.add(p + "table_extent", s.table_extent);
        w.add(p + "object_count", static_cast<int>(s.primitives.size()));
        for (std::size_t i = 0; i < s.primitives.size(); ++i) {
            const Primitive& o = s.primitives[i];
            std::string q = p + "object." + std::to_string(i) + ".";
            w.add(q + "id", o.object_id);
            w.add(q + "kind", to_string(o.kind));
            w.add(q + "dims", format_double(o.dims.x) + " " + format_double(o.dims.y) + " " + format_double(o.dims.z));
            w.add(q + "position", format_double(o.position.x) + " " + format_double(o.position.y) + " " +
                                      format_double(o.position.z));
            w.add(q + "yaw", o.yaw);
        }
    }
    return w.str();
}

namespace {

std::string view_stem(ViewpointIndex vp) {
    return std::to_string(vp.azimuth_idx) + "_" + std::to_string(vp.elevation_idx);
}

Raster<std::uint16_t> depth_to_mm(const Raster<float>& depth) {
    Raster<std::uint16_t> out(depth.width(), depth.height());
    for (std::size_t i = 0; i < depth.size(); ++i) {
        double mm = std::nearbyint(static_cast<double>(depth[i]) * 1000.0);
        out[i] = static_cast<std::uint16_t>(std::min(mm, 65535.0));
    }
    return out;
}

void export_scene(Dataset& dataset, int k, const fs::path& dir) {
    fs::create_directories(dir);
    const SceneSpec& scene = dataset.scene(k);
    const VisibilityTable& table = dataset.table(k);

    std::ostringstream csv;
    csv << "object_id,azimuth_idx,elevation_idx,visible_px,amodal_px,psi\n";
    std::vector<std::vector<std::pair<long, long>>> counts(scene.primitives.size(),
                                                           std::vector<std::pair<long, long>>(kLatticeSize));

    for (int f = 0; f < kLatticeSize; ++f) {
        ViewpointIndex vp = ViewpointIndex::from_flat(f);
        RenderedView view = render_view(scene, vp, dataset.lattice());
        write_pgm16(dir / ("view_" + view_stem(vp) + "_depth.pgm"), depth_to_mm(view.depth));
        write_pgm8(dir / ("view_" + view_stem(vp) + "_label.pgm"), view.visible_labels);
        for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
            int id = scene.primitives[i].object_id;
            Raster<std::uint8_t> mask(view.depth.width(), view.depth.height());
            const Raster<float>& am = view.amodal_depth[i];
            for (std::size_t px = 0; px < am.size(); ++px) mask[px] = am[px] > 0.0f ? 255 : 0;
            write_pgm8(dir / ("amodal_" + std::to_string(id) + "_" + view_stem(vp) + ".pgm"), mask);
            counts[i][static_cast<std::size_t>(f)] = {view.visible_pixel_count(id), view.amodal_pixel_count(id)};
        }
    }

    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        int id = scene.primitives[i].object_id;
        for (int f = 0; f < kLatticeSize; ++f) {
            ViewpointIndex vp = ViewpointIndex::from_flat(f);
            auto [vis, amodal] = counts[i][static_cast<std::size_t>(f)];
            double psi = table.psi(id, vp);
            csv << id << ',' << vp.azimuth_idx << ',' << vp.elevation_idx << ',' << vis << ',' << amodal << ','
                << format_double(psi) << "\n";
        }
    }

    std::ofstream f(dir / "visibility.csv", std::ios::binary);
    if (!f) throw DatasetError("cannot write " + (dir / "visibility.csv").string());
    f << csv.str();
}

}  // namespace

void export_dataset(Dataset& dataset, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    KvWriter manifest;
    for (int k = 0; k < dataset.scene_count(); ++k) export_scene(dataset, k, out_dir / ("scene_" + std::to_string(k)));
    std::ofstream f(out_dir / "manifest.txt", std::ios::binary);
    if (!f) throw DatasetError("cannot write " + (out_dir / "manifest.txt").string());
    f << manifest_text(dataset);
}

namespace {

Vec3 parse_vec3(const std::string& s) {
    std::istringstream ss(s);
    Vec3 v;
    if (!(ss >> v.x >> v.y >> v.z)) throw DatasetError("manifest: malformed triple: " + s);
    return v;
}

void check_raster(const fs::path& path, int width, int height, int maxval) {
    if (!fs::exists(path)) throw DatasetError("missing raster file: " + path.string());
    PgmHeader h = read_pgm_header(path);
    if (h.width != width || h.height != height)
        throw DatasetError("raster dimension mismatch in " + path.string() + ": got " + std::to_string(h.width) + "x" +
                           std::to_string(h.height) + ", manifest declares " + std::to_string(width) + "x" +
                           std::to_string(height));
    if (h.maxval != maxval) throw DatasetError("raster sample depth mismatch in " + path.string());
}

VisibilityTable import_visibility(const fs::path& path, const SceneSpec& scene) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DatasetError("missing visibility file: " + path.string());
    VisibilityTable table;
    for (const auto& p : scene.primitives) table.add_object(p.object_id);

    std::string line;
    if (!std::getline(f, line) || line != "object_id,azimuth_idx,elevation_idx,visible_px,amodal_px,psi")
        throw DatasetError("unexpected visibility header in " + path.string());
    long rows = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        long id, az, el, vis, amodal;
        double psi;
        char c1, c2, c3, c4, c5;
        if (!(ss >> id >> c1 >> az >> c2 >> el >> c3 >> vis >> c4 >> amodal >> c5 >> psi))
            throw DatasetError("malformed visibility row in " + path.string() + ": " + line);
        double recomputed = amodal > 0 ? static_cast<double>(vis) / static_cast<double>(amodal) : 0.0;
        if (recomputed != psi)
            throw DatasetError("inconsistent psi in " + path.string() + " for object " + std::to_string(id));
        table.set_psi(static_cast<int>(id), ViewpointIndex{static_cast<int>(az), static_cast<int>(el)}, psi);
        ++rows;
    }
    if (rows != static_cast<long>(scene.primitives.size()) * kLatticeSize)
        throw DatasetError("visibility file " + path.string() + " has " + std::to_string(rows) + " rows, expected " +
                           std::to_string(scene.primitives.size() * kLatticeSize));
    return table;
}

}  // namespace

Dataset import_dataset(const fs::path& dir) {
    fs::path manifest_path = dir / "manifest.txt";
    if (!fs::exists(manifest_path)) throw DatasetError("missing manifest: " + manifest_path.string());
    KvMap kv = KvMap::load_file(manifest_path);

    long version = kv.get_long("format_version");
    if (version != kDatasetFormatVersion)
        throw DatasetError("manifest version mismatch in " + manifest_path.string() + ": found " +
                           std::to_string(version) + ", supported " + std::to_string(kDatasetFormatVersion));

    CameraIntrinsics intr{kv.get_double("intrinsics.fx"),       kv.get_double("intrinsics.fy"),
                          kv.get_double("intrinsics.cx"),       kv.get_double("intrinsics.cy"),
                          (int)kv.get_long("intrinsics.width"), (int)kv.get_long("intrinsics.height")};
    Dataset ds(kv.get_double("lattice.radius"), intr);

    long scene_count = kv.get_long("scene_count");
    for (long k = 0; k < scene_count; ++k) {
        std::string p = "scene." + std::to_string(k) + ".";
        SceneSpec scene;
        scene.seed = kv.get_u64(p + "seed");
        scene.target_id = static_cast<int>(kv.get_long(p + "target_id"));
        scene.table_extent = kv.get_double(p + "table_extent");
        long n = kv.get_long(p + "object_count");
        for (long i = 0; i < n; ++i) {
            std::string q = p + "object." + std::to_string(i) + ".";
            Primitive o;
            o.object_id = static_cast<int>(kv.get_long(q + "id"));
            o.kind = primitive_kind_from_string(kv.get(q + "kind"));
            o.dims = parse_vec3(kv.get(q + "dims"));
            o.position = parse_vec3(kv.get(q + "position"));
            o.yaw = kv.get_double(q + "yaw");
            scene.primitives.push_back(o);
        }
        scene.validate();

        fs::path scene_dir = dir / kv.get(p + "dir");
        for (int f = 0; f < kLatticeSize; ++f) {
            ViewpointIndex vp = ViewpointIndex::from_flat(f);
            check_raster(scene_dir / ("view_" + view_stem(vp) + "_depth.pgm"), intr.width, intr.height, 65535);
            check_raster(scene_dir / ("view_" + view_stem(vp) + "_label.pgm"), intr.width, intr.height, 255);
            for (const auto& o : scene.primitives)
                check_raster(scene_dir / ("amodal_" + std::to_string(o.object_id) + "_" + view_stem(vp) + ".pgm"),
                             intr.width, intr.height, 255);
        }

        VisibilityTable table = import_visibility(scene_dir / "visibility.csv", scene);
        ds.add_scene(std::move(scene), std::move(table));
    }
    return ds;
}

std::uint64_t dataset_fingerprint(const fs::path& dir) {
    auto fnv = [](std::uint64_t h, const std::string& bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        if (!f) throw DatasetError("cannot open: " + p.string());
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };

    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::string manifest = slurp(dir / "manifest.txt");
    h = fnv(h, manifest);
    KvMap kv = KvMap::parse(manifest);
    long scene_count = kv.get_long("scene_count");
    for (long k = 0; k < scene_count; ++k)
        h = fnv(h, slurp(dir / kv.get("scene." + std::to_string(k) + ".dir") / "visibility.csv"));
    return h;
}

}  // namespace viewopt
