// Serial reference vs OpenMP kernel benchmarks. Each pair runs the identical
// workload so the reported ratio is the parallel speedup; the *_parallel
// variants sweep the thread count via the Args range.
#include <benchmark/benchmark.h>

#include <cstdlib>
#include <string>

#include "visgeom/fusion.hpp"
#include "visgeom/geometry.hpp"
#include "visgeom/metrics.hpp"
#include "visgeom/rng.hpp"
#include "visgeom/serial.hpp"
#include "visgeom/synth.hpp"

using namespace visgeom;

namespace {

struct Fixture {
  SynthScene scene = make_benchmark_scene(17, 4, 320, 240);
  CameraIntrinsics intr = scene.cameras[0].first;
  CameraExtrinsics extr = scene.cameras[0].second;
  DepthMap depth = serial::render_depth(scene, 0);
  RayMap rays = serial::build_ray_map(intr, extr);
  PointCloud cloud_a;
  PointCloud cloud_b;

  Fixture() {
    Xoshiro256 rng(5);
    for (int i = 0; i < 20000; ++i)
      cloud_a.points.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2),
                                  rng.uniform(-2, 2));
    for (int i = 0; i < 20000; ++i)
      cloud_b.points.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2),
                                  rng.uniform(-2, 2));
  }

  TsdfVolume fresh_volume() const {
    return tsdf_new(Vec3(-2, -2, 0), Vec3(2, 2, 4), 0.02);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void set_threads(int n) {
  setenv("GEOM_THREADS", std::to_string(n).c_str(), 1);
}

void bm_build_ray_map_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::build_ray_map(f.intr, f.extr));
}

void bm_build_ray_map_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(build_ray_map(f.intr, f.extr));
}

void bm_unproject_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::unproject(f.depth, f.rays));
}

void bm_unproject_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(unproject(f.depth, f.rays));
}

void bm_unproject_via_matrix_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        serial::unproject_via_matrix(f.depth, f.intr, f.extr));
}

void bm_unproject_via_matrix_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(unproject_via_matrix(f.depth, f.intr, f.extr));
}

void bm_tsdf_integrate_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    TsdfVolume vol = f.fresh_volume();
    serial::tsdf_integrate(vol, f.depth, f.intr, f.extr);
    benchmark::DoNotOptimize(vol.tsdf.data());
  }
}

void bm_tsdf_integrate_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    TsdfVolume vol = f.fresh_volume();
    tsdf_integrate(vol, f.depth, f.intr, f.extr);
    benchmark::DoNotOptimize(vol.tsdf.data());
  }
}

void bm_cloud_nn_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        serial::cloud_nn_distances(f.cloud_a, f.cloud_b));
}

void bm_cloud_nn_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(cloud_nn_distances(f.cloud_a, f.cloud_b));
}

void bm_render_depth_serial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::render_depth(f.scene, 0));
}

void bm_render_depth_parallel(benchmark::State& state) {
  const Fixture& f = fixture();
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(render_depth(f.scene, 0));
}

BENCHMARK(bm_build_ray_map_serial);
BENCHMARK(bm_build_ray_map_parallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(bm_unproject_serial);
BENCHMARK(bm_unproject_parallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(bm_unproject_via_matrix_serial);
BENCHMARK(bm_unproject_via_matrix_parallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(bm_tsdf_integrate_serial);
BENCHMARK(bm_tsdf_integrate_parallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(bm_cloud_nn_serial);
BENCHMARK(bm_cloud_nn_parallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(bm_render_depth_serial);
BENCHMARK(bm_render_depth_parallel)->Arg(1)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
