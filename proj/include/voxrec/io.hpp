#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxrec/geometry.hpp"
#include "voxrec/losses.hpp"
#include "voxrec/metrics.hpp"
#include "voxrec/projection.hpp"
#include "voxrec/rng.hpp"
#include "voxrec/solver.hpp"
#include "voxrec/voxel.hpp"

namespace voxrec {

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

inline std::ifstream open_in(const std::filesystem::path& path, bool binary) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    return f;
}

template <class T>
void write_le(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_le(std::istream& in, const std::string& what) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated file while reading " + what);
    return value;
}

}  // namespace detail

// --- Voxel files -----------------------------------------------------------
//
// Binary, little-endian: magic "VOXF", u32 version = 1, u32 n, f64 lo,
// f64 hi, then n^3 f32 values with x slowest and z fastest.

inline void write_voxf(const std::filesystem::path& path, const VoxelGrid& grid) {
    auto out = detail::open_out(path, true);
    out.write("VOXF", 4);
    detail::write_le<std::uint32_t>(out, 1);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.n()));
    detail::write_le<double>(out, grid.lo());
    detail::write_le<double>(out, grid.hi());
    for (double v : grid.values()) detail::write_le<float>(out, static_cast<float>(v));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline VoxelGrid read_voxf(const std::filesystem::path& path) {
    auto in = detail::open_in(path, true);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "VOXF", 4) != 0)
        throw std::runtime_error("not a voxel file (bad magic): " + path.string());
    const auto version = detail::read_le<std::uint32_t>(in, "version");
    if (version != 1)
        throw std::runtime_error("unsupported voxel file version in " + path.string());
    const auto n = detail::read_le<std::uint32_t>(in, "resolution");
    const double lo = detail::read_le<double>(in, "extent");
    const double hi = detail::read_le<double>(in, "extent");
    GridGeometry geom{static_cast<int>(n), lo, hi};
    geom.validate();
    std::vector<double> values(geom.cells());
    for (double& v : values) {
        const float f = detail::read_le<float>(in, "voxel values");
        if (f < -1e-6f || f > 1.0f + 1e-6f)
            throw std::runtime_error("voxel value outside [0, 1] in " + path.string());
        v = std::clamp(static_cast<double>(f), 0.0, 1.0);
    }
    return VoxelGrid(geom, std::move(values));
}

// --- Mask images ------------------------------------------------------------
//
// Binary PGM (P5), maxval 255, pixel = round(p * 255).

inline void write_pgm(const std::filesystem::path& path, const MaskImage& mask) {
    auto out = detail::open_out(path, true);
    out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
    for (double v : mask.values())
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline MaskImage read_pgm(const std::filesystem::path& path) {
    auto in = detail::open_in(path, true);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("not a binary PGM: " + path.string());
    int width = 0, height = 0, maxval = 0;
    in >> width >> height >> maxval;
    if (!in || width <= 0 || height <= 0)
        throw std::runtime_error("malformed PGM header: " + path.string());
    if (maxval != 255) throw std::runtime_error("unsupported PGM maxval in " + path.string());
    in.get();  // single whitespace after the header
    std::vector<double> values(static_cast<std::size_t>(width) * height);
    for (double& v : values) {
        const int c = in.get();
        if (c == EOF) throw std::runtime_error("truncated PGM: " + path.string());
        v = static_cast<double>(c) / 255.0;
    }
    return MaskImage(width, height, std::move(values));
}

// --- Camera descriptors ------------------------------------------------------
//
// JSON object with width/height/fx/fy/cx/cy, R as 9 numbers row-major, and
// C as 3 numbers. R must be orthonormal within 1e-6; it is renormalized to
// the construction tolerance on read.

inline void write_camera_json(const std::filesystem::path& path, const Camera& cam) {
    nlohmann::json j;
    j["width"] = cam.width();
    j["height"] = cam.height();
    j["fx"] = cam.fx();
    j["fy"] = cam.fy();
    j["cx"] = cam.cx();
    j["cy"] = cam.cy();
    std::vector<double> r;
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) r.push_back(cam.rotation()(row, col));
    j["R"] = r;
    j["C"] = std::vector<double>{cam.center().x(), cam.center().y(), cam.center().z()};
    auto out = detail::open_out(path, false);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline Camera read_camera_json(const std::filesystem::path& path) {
    auto in = detail::open_in(path, false);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed camera file " + path.string() + ": " + e.what());
    }
    try {
        const auto r = j.at("R").get<std::vector<double>>();
        const auto c = j.at("C").get<std::vector<double>>();
        if (r.size() != 9 || c.size() != 3)
            throw std::runtime_error("camera file " + path.string() + ": R must have 9 and C 3 numbers");
        Mat3 rot;
        for (int row = 0; row < 3; ++row)
            for (int col = 0; col < 3; ++col) rot(row, col) = r[3 * row + col];
        const double ortho_err = (rot.transpose() * rot - Mat3::Identity()).cwiseAbs().maxCoeff();
        if (ortho_err > 1e-6 || rot.determinant() < 0.0)
            throw std::runtime_error("camera file " + path.string() + ": R is not a rotation");
        // Nearest rotation via Gram-Schmidt on the rows; within the 1e-6
        // gate this is well below the constructor tolerance.
        Vec3 r0 = rot.row(0).normalized();
        Vec3 r2 = rot.row(2);
        Vec3 r1 = (rot.row(1).transpose() - rot.row(1).dot(r0) * r0).normalized();
        r2 = r0.cross(r1);
        rot.row(0) = r0;
        rot.row(1) = r1;
        rot.row(2) = r2;
        return Camera(rot, Vec3(c[0], c[1], c[2]), j.at("fx").get<double>(),
                      j.at("fy").get<double>(), j.at("cx").get<double>(),
                      j.at("cy").get<double>(), j.at("width").get<int>(),
                      j.at("height").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("camera file " + path.string() + ": " + e.what());
    }
}

// --- Training log -------------------------------------------------------------
//
// CSV, one line per iteration: iter,reproj,penalty,disc_error,gated,lr.

inline void write_training_log(const std::filesystem::path& path,
                               std::span<const LogEntry> log) {
    auto out = detail::open_out(path, false);
    char line[160];
    for (const LogEntry& e : log) {
        std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%d,%.9g\n", e.iteration, e.reproj,
                      e.penalty, e.disc_error, e.gated ? 1 : 0, e.lr);
        out << line;
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// --- Colored point export -------------------------------------------------------

inline void write_point_cloud(const std::filesystem::path& path,
                              std::span<const ColoredVoxel> points) {
    auto out = detail::open_out(path, false);
    for (const ColoredVoxel& p : points)
        out << p.x << " " << p.y << " " << p.z << " " << p.r << " " << p.g << " " << p.b << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// --- Discriminator checkpoints ---------------------------------------------------
//
// Binary: magic "DISC", u32 version, u32 layer count, then per layer
// u32 rows, u32 cols, f32 weights row-major, f32 biases.

inline void write_discriminator(const std::filesystem::path& path, const Discriminator& d) {
    auto out = detail::open_out(path, true);
    out.write("DISC", 4);
    detail::write_le<std::uint32_t>(out, 1);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.layers().size()));
    for (const auto& layer : d.layers()) {
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weights.rows()));
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weights.cols()));
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                detail::write_le<float>(out, static_cast<float>(layer.weights(r, c)));
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            detail::write_le<float>(out, static_cast<float>(layer.bias[r]));
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Loads checkpoint weights into an existing discriminator of matching shape.
inline void read_discriminator(const std::filesystem::path& path, Discriminator& d) {
    auto in = detail::open_in(path, true);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DISC", 4) != 0)
        throw std::runtime_error("not a discriminator checkpoint: " + path.string());
    if (detail::read_le<std::uint32_t>(in, "version") != 1)
        throw std::runtime_error("unsupported checkpoint version in " + path.string());
    const auto layer_count = detail::read_le<std::uint32_t>(in, "layer count");
    if (layer_count != d.layers().size())
        throw std::runtime_error("checkpoint layer count mismatch in " + path.string());
    for (auto& layer : d.layers()) {
        const auto rows = detail::read_le<std::uint32_t>(in, "rows");
        const auto cols = detail::read_le<std::uint32_t>(in, "cols");
        if (static_cast<Eigen::Index>(rows) != layer.weights.rows() ||
            static_cast<Eigen::Index>(cols) != layer.weights.cols())
            throw std::runtime_error("checkpoint layer shape mismatch in " + path.string());
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                layer.weights(r, c) = detail::read_le<float>(in, "weights");
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            layer.bias[r] = detail::read_le<float>(in, "biases");
    }
}

// --- Dataset generation -----------------------------------------------------------

struct DatasetParams {
    ShapeKind kind = ShapeKind::cup;
    int n = 32;
    int views = 24;
    std::uint64_t seed = 7;
    Intrinsics intrinsics;
    double elevation = 3.14159265358979323846 / 6.0;  // 30 degrees
    double distance_factor = 2.5;                     // times the grid half-diagonal
};

struct DatasetFiles {
    std::filesystem::path ground_truth;
    std::vector<std::filesystem::path> cameras;
    std::vector<std::filesystem::path> masks;
    std::filesystem::path manifest;
};

inline Camera ring_camera(const GridGeometry& geom, int view_index, int view_count,
                          const Intrinsics& intr, double elevation = 3.14159265358979323846 / 6.0,
                          double distance_factor = 2.5) {
    const double azimuth = 2.0 * 3.14159265358979323846 * view_index / view_count;
    return spherical_camera(geom.center(), azimuth, elevation,
                            distance_factor * geom.half_diagonal(), intr.fx, intr.fy, intr.cx,
                            intr.cy, intr.width, intr.height);
}

/// Writes a ground-truth shape, a camera ring, and the rendered silhouettes
/// into `out_dir`: gt.vox, cam_XXX.json, mask_XXX.pgm, manifest.json.
inline DatasetFiles gen_data(const DatasetParams& params, const std::filesystem::path& out_dir) {
    if (params.views < 1) throw std::invalid_argument("gen_data: need at least 1 view");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + out_dir.string());

    Rng rng(params.seed);
    const ShapeParams shape_params = random_shape_params(params.kind, rng);
    const VoxelGrid shape = gen_shape(params.kind, params.n, shape_params);

    DatasetFiles files;
    files.ground_truth = out_dir / "gt.vox";
    write_voxf(files.ground_truth, shape);

    nlohmann::json manifest;
    manifest["shape"] = to_string(params.kind);
    manifest["n"] = params.n;
    manifest["seed"] = params.seed;
    manifest["ground_truth"] = "gt.vox";
    manifest["views"] = nlohmann::json::array();

    for (int v = 0; v < params.views; ++v) {
        const Camera cam = ring_camera(shape.geometry(), v, params.views, params.intrinsics,
                                       params.elevation, params.distance_factor);
        const MaskImage mask = rp_forward(shape, cam);
        char cam_name[32], mask_name[32];
        std::snprintf(cam_name, sizeof(cam_name), "cam_%03d.json", v);
        std::snprintf(mask_name, sizeof(mask_name), "mask_%03d.pgm", v);
        files.cameras.push_back(out_dir / cam_name);
        files.masks.push_back(out_dir / mask_name);
        write_camera_json(files.cameras.back(), cam);
        write_pgm(files.masks.back(), mask);
        manifest["views"].push_back({{"camera", cam_name}, {"mask", mask_name}});
    }

    files.manifest = out_dir / "manifest.json";
    auto out = detail::open_out(files.manifest, false);
    out << manifest.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + files.manifest.string());
    return files;
}

/// Loads every *.vox in a directory, sorted by filename.
inline std::vector<VoxelGrid> read_pool(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".vox") paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    std::vector<VoxelGrid> pool;
    pool.reserve(paths.size());
    for (const auto& p : paths) pool.push_back(read_voxf(p));
    return pool;
}

}  // namespace voxrec
