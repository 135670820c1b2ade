#pragma once

// Command implementations behind the `continuum` executable. Each returns a
// process exit code: 0 ok, 2 validation, 3 runtime.

#include "continuum/bench.hpp"
#include "continuum/projection.hpp"
#include "continuum/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace continuum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// One entry of a camera script: the rig state for one rendered frame.
struct CameraKey {
    double time = 0.0;
    Vec3 position{};
    double yaw = 0.0;
    double pitch = 0.0;
    double w = 0.0;
    ProjectionMode mode = ProjectionMode::cross_section;
    std::optional<Pose4> detached; // explicit 4D camera pose
    double focal = kDefaultFocal;
    double near_w = kDefaultNearW;
};

// Parses a JSON array of camera keys. Throws ParseError.
std::vector<CameraKey> parse_camera_script(const std::string& text);
CameraRig rig_for(const CameraKey& key);

struct RenderOptions {
    std::filesystem::path scene;
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> camera_script;
    std::optional<std::filesystem::path> inputs;
    int ticks = 60;
    std::uint64_t seed = 0;
};

struct SimulateOptions {
    std::filesystem::path scene;
    std::optional<std::filesystem::path> inputs;
    std::optional<int> ticks;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> log;    // CSV state log
    std::optional<std::filesystem::path> events; // JSON Lines
};

struct SimulateResult {
    std::uint64_t final_hash = 0;
    std::uint64_t ticks = 0;
};

struct BenchOptions {
    std::vector<BenchMethod> methods{BenchMethod::cross_section, BenchMethod::frustum};
    std::vector<std::size_t> counts{1000, 5000, 10000, 50000, 100000};
    int reps = 5;
    std::optional<std::filesystem::path> out;
};

struct ServeOptions {
    std::filesystem::path scene;
    std::string host = "127.0.0.1";
    std::uint16_t port = 8765;
    bool lockstep = false;
    std::optional<std::filesystem::path> record;
    std::uint64_t seed = 0;
};

int cmd_render(const RenderOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err,
                 SimulateResult* result = nullptr);
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& scene, std::ostream& out, std::ostream& err);
int cmd_serve(const ServeOptions& options, std::ostream& out, std::ostream& err);

// Full command line, including argv[0].
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string hex64(std::uint64_t value);

} // namespace continuum::cli
