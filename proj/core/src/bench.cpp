#include "continuum/bench.hpp"

#include "continuum/errors.hpp"
#include "continuum/geometry.hpp"
#include "continuum/mesh_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

namespace continuum {

std::string_view to_string(BenchMethod method) {
    return method == BenchMethod::cross_section ? "cross_section" : "frustum";
}

std::optional<BenchMethod> parse_bench_method(std::string_view name) {
    if (name == "cross" || name == "cross_section") return BenchMethod::cross_section;
    if (name == "frustum") return BenchMethod::frustum;
    return std::nullopt;
}

BenchScene make_bench_scene(std::size_t tetra_count) {
    if (tetra_count == 0) throw InvalidArgument("tetra count must be positive");
    BenchScene scene{make_primitive(PrimitiveKind::tesseract, 1.0), {}};
    const std::size_t per = scene.mesh.tetra_count();
    const std::size_t objects = (tetra_count + per - 1) / per;
    const auto side = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(objects))));
    constexpr double kSpacing = 2.0;
    for (std::size_t i = 0; i < objects; ++i) {
        const double x = static_cast<double>(i % side);
        const double y = static_cast<double>((i / side) % side);
        const double z = static_cast<double>(i / (side * side));
        scene.positions.push_back({x * kSpacing, y * kSpacing, z * kSpacing + 4.0, 0.0});
    }
    return scene;
}

std::size_t projection_pass(const BenchScene& scene, BenchMethod method, double angle) {
    PlaneAngles angles;
    angles.xw = angle;
    angles.yz = 0.5 * angle;
    const Rotation4 r = rotation_from_plane_angles(angles);
    Camera4 cam;
    cam.mode = BenchMethod::frustum == method ? ProjectionMode::frustum : ProjectionMode::cross_section;
    std::size_t triangles = 0;
    for (const Vec4& p : scene.positions) {
        const Transform4 model = Transform4::trs(p, r, {1, 1, 1, 1});
        const TriMesh3 out = method == BenchMethod::cross_section ? cross_section(scene.mesh, model, cam.slice_plane())
                                                                  : frustum_project(scene.mesh, model, cam);
        triangles += out.triangles.size();
    }
    return triangles;
}

std::vector<BenchRecord> run_bench(BenchMethod method, std::span<const std::size_t> counts, int repetitions) {
    if (repetitions < 1) throw InvalidArgument("repetitions must be at least 1");
    if (counts.empty()) throw InvalidArgument("at least one tetra count is required");
    std::vector<BenchRecord> out;
    for (std::size_t count : counts) {
        const BenchScene scene = make_bench_scene(count);
        projection_pass(scene, method, 0.0); // warm-up
        std::vector<double> times;
        for (int rep = 0; rep < repetitions; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            projection_pass(scene, method, 0.1 + 0.05 * rep);
            const auto stop = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        }
        std::sort(times.begin(), times.end());
        const std::size_t n = times.size();
        const double median = n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
        BenchRecord rec;
        rec.method = method;
        rec.tetra_count = scene.tetra_count();
        rec.objects_on_screen = scene.positions.size();
        rec.wall_time_ms = std::max(median, 1e-6);
        rec.throughput = static_cast<double>(rec.tetra_count) / rec.wall_time_ms;
        out.push_back(rec);
    }
    return out;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit needs at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("fit needs at least two distinct x values");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

LinearFit fit_records(std::span<const BenchRecord> records) {
    std::vector<double> x, y;
    for (const BenchRecord& r : records) {
        x.push_back(static_cast<double>(r.tetra_count));
        y.push_back(r.wall_time_ms);
    }
    return fit_line(x, y);
}

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records, bool header) {
    if (header) out << "method,tetra_count,objects_on_screen,wall_time_ms,throughput\n";
    for (const BenchRecord& r : records) {
        out << to_string(r.method) << ',' << r.tetra_count << ',' << r.objects_on_screen << ','
            << format_double(r.wall_time_ms) << ',' << format_double(r.throughput) << '\n';
    }
}

} // namespace continuum
