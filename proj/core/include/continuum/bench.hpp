#pragma once

// Projection-stage benchmark: arrays of continuously rotating tesseracts,
// timed per projection pass, with a least-squares fit of time against
// tetrahedron count.

#include "continuum/mesh.hpp"
#include "continuum/projection.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace continuum {

enum class BenchMethod { cross_section, frustum };

std::string_view to_string(BenchMethod method);
// Accepts "cross", "cross_section", "frustum".
std::optional<BenchMethod> parse_bench_method(std::string_view name);

struct BenchRecord {
    BenchMethod method = BenchMethod::cross_section;
    std::size_t tetra_count = 0;
    std::size_t objects_on_screen = 0;
    double wall_time_ms = 0.0; // median of the repetitions
    double throughput = 0.0;   // tetrahedra per ms
};

struct BenchScene {
    TetraMesh4 mesh;                 // one unit tesseract (48 tetrahedra)
    std::vector<Vec4> positions;     // one per object
    std::size_t tetra_count() const { return mesh.tetra_count() * positions.size(); }
};

// Grid of ceil(tetra_count / 48) tesseracts in the w = 0 hyperplane.
BenchScene make_bench_scene(std::size_t tetra_count);

// Projects every object once with all objects rotated by `angle` in the
// xw and yz planes; returns the number of output triangles.
std::size_t projection_pass(const BenchScene& scene, BenchMethod method, double angle);

// Throws InvalidArgument for repetitions < 1, an empty count list or a zero count.
std::vector<BenchRecord> run_bench(BenchMethod method, std::span<const std::size_t> counts, int repetitions);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares; throws InvalidArgument for fewer than two points
// or constant x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);
LinearFit fit_records(std::span<const BenchRecord> records);

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records, bool header = true);

} // namespace continuum
