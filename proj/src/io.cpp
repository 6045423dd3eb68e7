// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/io.hpp"

#include "scenespace/errors.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace scenespace::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> read_png_pixels(const fs::path& path, png_uint_32 format, int& width, int& height) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
        throw DataError("cannot read PNG " + path.string() + ": " + image.message);
    }
    image.format = format;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr) == 0) {
        const std::string message = image.message;
        png_image_free(&image);
        throw DataError("cannot decode PNG " + path.string() + ": " + message);
    }
    width = static_cast<int>(image.width);
    height = static_cast<int>(image.height);
    return pixels;
}

void write_png_pixels(const fs::path& path, const std::uint8_t* pixels, int width, int height, png_uint_32 format) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (png_image_write_to_file(&image, path.c_str(), 0, pixels, 0, nullptr) == 0) {
        throw DataError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
}

} // namespace

std::string frame_filename(int frame_index, const std::string& extension) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d", frame_index);
    return std::string(buf) + extension;
}

Image8 read_png(const fs::path& path) {
    Image8 out;
    out.data = read_png_pixels(path, PNG_FORMAT_RGB, out.width, out.height);
    return out;
}

void write_png(const fs::path& path, const Image8& image) {
    ensure_parent(path);
    write_png_pixels(path, image.data.data(), image.width, image.height, PNG_FORMAT_RGB);
}

Mask read_mask(const fs::path& path) {
    Mask out;
    const auto gray = read_png_pixels(path, PNG_FORMAT_GRAY, out.width, out.height);
    out.data.resize(gray.size());
    std::transform(gray.begin(), gray.end(), out.data.begin(), [](std::uint8_t v) { return v > 127 ? 1 : 0; });
    return out;
}

void write_mask(const fs::path& path, const Mask& mask) {
    ensure_parent(path);
    std::vector<std::uint8_t> gray(mask.data.size());
    std::transform(mask.data.begin(), mask.data.end(), gray.begin(), [](std::uint8_t v) { return v != 0 ? 255 : 0; });
    write_png_pixels(path, gray.data(), mask.width, mask.height, PNG_FORMAT_GRAY);
}

void write_pfm(const fs::path& path, const DepthMap& depth) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "Pf\n" << depth.width << ' ' << depth.height << "\n-1.0\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(depth.width) * 4);
    for (int y = depth.height - 1; y >= 0; --y) {
        for (int x = 0; x < depth.width; ++x) {
            float v = depth.at(x, y);
            if (std::isnan(v)) {
                throw DataError("refusing to write NaN depth to " + path.string());
            }
            if (!DepthMap::is_valid(v)) {
                v = -1.0f;
            }
            const auto bits = std::bit_cast<std::uint32_t>(v);
            for (int b = 0; b < 4; ++b) {
                row[static_cast<std::size_t>(x) * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) {
        throw DataError("short write to " + path.string());
    }
}

DepthMap read_pfm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string magic;
    int width = 0;
    int height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    if (!in || magic != "Pf") {
        throw DataError(path.string() + ": not a grayscale PFM");
    }
    if (width <= 0 || height <= 0 || scale == 0.0) {
        throw DataError(path.string() + ": bad PFM header");
    }
    in.get(); // single whitespace byte before the raster
    const bool little = scale < 0.0;
    DepthMap depth(width, height);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * 4);
    for (int y = height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) {
            throw DataError(path.string() + ": truncated PFM raster");
        }
        for (int x = 0; x < width; ++x) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) {
                const int shift = little ? 8 * b : 8 * (3 - b);
                bits |= static_cast<std::uint32_t>(row[static_cast<std::size_t>(x) * 4 + b]) << shift;
            }
            const float v = std::bit_cast<float>(bits);
            if (std::isnan(v)) {
                throw DataError(path.string() + ": NaN depth");
            }
            depth.at(x, y) = v > 0.0f ? v : DepthMap::kInvalid;
        }
    }
    return depth;
}

std::vector<CameraPose> read_cameras(const fs::path& path) {
    const json doc = read_json(path);
    if (!doc.is_array()) {
        throw DataError(path.string() + ": expected an array of cameras");
    }
    std::vector<CameraPose> cams;
    try {
        for (const json& entry : doc) {
            CameraPose cam;
            cam.frame_index = entry.at("frame").get<int>();
            cam.fx = entry.at("fx").get<double>();
            cam.fy = entry.at("fy").get<double>();
            cam.cx = entry.at("cx").get<double>();
            cam.cy = entry.at("cy").get<double>();
            const json& m = entry.at("world_to_cam");
            if (!m.is_array() || m.size() != 16) {
                throw DataError(path.string() + ": world_to_cam must hold 16 numbers");
            }
            for (int i = 0; i < 16; ++i) {
                if (!m[i].is_number()) {
                    throw DataError(path.string() + ": non-numeric world_to_cam entry");
                }
                cam.world_to_cam(i / 4, i % 4) = m[i].get<double>();
            }
            cam.validate();
            cams.push_back(cam);
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed camera entry: " + e.what());
    }
    std::sort(cams.begin(), cams.end(), [](const CameraPose& a, const CameraPose& b) {
        return a.frame_index < b.frame_index;
    });
    return cams;
}

void write_cameras(const fs::path& path, std::span<const CameraPose> cams) {
    ensure_parent(path);
    json doc = json::array();
    for (const CameraPose& cam : cams) {
        json m = json::array();
        for (int i = 0; i < 16; ++i) {
            m.push_back(cam.world_to_cam(i / 4, i % 4));
        }
        doc.push_back({{"frame", cam.frame_index},
                       {"fx", cam.fx},
                       {"fy", cam.fy},
                       {"cx", cam.cx},
                       {"cy", cam.cy},
                       {"world_to_cam", m}});
    }
    write_json(path, doc);
}

std::optional<SceneScale> read_scale(const fs::path& path) {
    if (!fs::exists(path)) {
        return std::nullopt;
    }
    const json doc = read_json(path);
    if (!doc.contains("scale") || !doc["scale"].is_number() || !(doc["scale"].get<double>() > 0.0)) {
        throw DataError(path.string() + ": scale must be a positive number");
    }
    return SceneScale{doc["scale"].get<double>()};
}

void write_scale(const fs::path& path, const SceneScale& scale) {
    ensure_parent(path);
    write_json(path, json{{"scale", scale.scale}});
}

Dataset load_dataset(const fs::path& root, bool require_depth, const std::optional<fs::path>& mask_dir) {
    if (!fs::is_directory(root)) {
        throw DataError("dataset directory " + root.string() + " does not exist");
    }
    const fs::path cam_path = root / "cameras.json";
    if (!fs::exists(cam_path)) {
        throw DataError("missing cameras file " + cam_path.string());
    }
    Dataset ds;
    ds.cameras = read_cameras(cam_path);
    for (const CameraPose& cam : ds.cameras) {
        const fs::path frame_path = root / "frames" / frame_filename(cam.frame_index, ".png");
        if (!fs::exists(frame_path)) {
            throw DataError("missing frame " + std::to_string(cam.frame_index) + " (" + frame_path.string() + ")");
        }
        ds.frames.push_back(linearize(read_png(frame_path), cam.frame_index));
    }
    const fs::path depth_dir = root / "depth";
    if (require_depth || fs::is_directory(depth_dir)) {
        for (const CameraPose& cam : ds.cameras) {
            const fs::path depth_path = depth_dir / frame_filename(cam.frame_index, ".pfm");
            if (!fs::exists(depth_path)) {
                throw DataError("missing depth for frame " + std::to_string(cam.frame_index) + " (" +
                                depth_path.string() + ")");
            }
            ds.depths.push_back(read_pfm(depth_path));
        }
    }
    const fs::path masks = mask_dir.value_or(root / "masks");
    if (mask_dir || fs::is_directory(masks)) {
        for (const CameraPose& cam : ds.cameras) {
            const fs::path mask_path = masks / frame_filename(cam.frame_index, ".png");
            if (!fs::exists(mask_path)) {
                throw DataError("missing mask for frame " + std::to_string(cam.frame_index) + " (" +
                                mask_path.string() + ")");
            }
            ds.masks.push_back(read_mask(mask_path));
        }
    }
    ds.scale = read_scale(root / "scene_scale.json");
    ds.validate(require_depth);
    return ds;
}

void write_dataset(const fs::path& root, const Dataset& dataset) {
    fs::create_directories(root);
    write_png_sequence(root / "frames", dataset.frames);
    write_cameras(root / "cameras.json", dataset.cameras);
    for (std::size_t i = 0; i < dataset.depths.size(); ++i) {
        write_pfm(root / "depth" / frame_filename(dataset.frames[i].frame_index, ".pfm"), dataset.depths[i]);
    }
    for (std::size_t i = 0; i < dataset.masks.size(); ++i) {
        write_mask(root / "masks" / frame_filename(dataset.frames[i].frame_index, ".png"), dataset.masks[i]);
    }
    if (dataset.scale) {
        write_scale(root / "scene_scale.json", *dataset.scale);
    }
}

void write_png_sequence(const fs::path& dir, std::span<const Frame> frames) {
    fs::create_directories(dir);
    for (const Frame& f : frames) {
        write_png(dir / frame_filename(f.frame_index, ".png"), delinearize(f));
    }
}

std::vector<Image8> read_png_sequence(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw DataError("directory " + dir.string() + " does not exist");
    }
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("frame_") && entry.path().extension() == ".png") {
            paths.push_back(entry.path());
        }
    }
    std::sort(paths.begin(), paths.end());
    std::vector<Image8> images;
    for (const fs::path& p : paths) {
        images.push_back(read_png(p));
    }
    return images;
}

} // namespace scenespace::io
