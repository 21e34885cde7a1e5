#include "regsum/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "regsum/error.hpp"
#include "regsum/parallel.hpp"

namespace regsum {

namespace {

constexpr std::size_t kKernels = 4;
constexpr double kStepTime = 0.5;
constexpr int kSubsteps = 8;
constexpr double kOmega = 1.0;
constexpr double kLift = 0.1;

// Portable mapping of 64 random bits to [0, 1).
double unit(std::uint64_t bits) noexcept { return static_cast<double>(bits >> 11) * 0x1p-53; }

std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Mildly stretched coordinates on [0, 1]; the derivative stays in [0.8, 1.2].
std::vector<double> stretched(std::uint32_t n) {
  std::vector<double> c(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    c[i] = u + 0.2 * std::sin(2.0 * std::numbers::pi * u) / (2.0 * std::numbers::pi);
  }
  c.front() = 0.0;
  c.back() = 1.0;
  return c;
}

std::uint32_t nearest(std::span<const double> c, double v) {
  auto it = std::lower_bound(c.begin(), c.end(), v);
  if (it == c.begin()) return 0;
  if (it == c.end()) return static_cast<std::uint32_t>(c.size() - 1);
  auto i = static_cast<std::uint32_t>(it - c.begin());
  return (v - c[i - 1] <= c[i] - v) ? i - 1 : i;
}

double wrap(double v) {
  v -= std::floor(v);
  return v >= 1.0 ? 0.0 : v;
}

}  // namespace

void SynthSpec::validate() const {
  for (auto d : dims) {
    if (d < 4) throw Error(ErrorCode::InvalidSpec, "synthetic dims must be at least 4 per axis");
  }
  if (timesteps < 1) throw Error(ErrorCode::InvalidSpec, "at least one timestep is required");
}

Synthesizer::Synthesizer(const SynthSpec& spec) : spec_(spec) {
  spec_.validate();
  axes_ = RectilinearAxes(stretched(spec.dims[0]), stretched(spec.dims[1]), stretched(spec.dims[2]));
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng()); };
  for (std::size_t k = 0; k < kKernels; ++k) {
    Kernel kern{};
    for (auto& c : kern.center) c = uniform(0.25, 0.75);
    for (auto& d : kern.drift) d = uniform(-0.05, 0.05);
    kern.amplitude = uniform(1e10, 3e10);
    kern.sigma = uniform(0.1, 0.2);
    kernels_.push_back(kern);
  }
}

std::vector<VariableInfo> Synthesizer::variables() {
  return {{"heat_release", "J/m^3/s"}, {"ch2o", "mass fraction"}, {"alpha_class", "1"}};
}

double Synthesizer::time(std::size_t t) const noexcept { return kStepTime * static_cast<double>(t); }

std::vector<std::vector<double>> Synthesizer::fields(std::size_t t) const {
  const Index3 d = spec_.dims;
  const std::size_t cells = std::size_t{d[0]} * d[1] * d[2];
  std::vector<std::vector<double>> out(3, std::vector<double>(cells));
  const double now = time(t);
  std::vector<Point3> centers;
  for (const auto& k : kernels_) {
    centers.push_back({k.center[0] + k.drift[0] * now, k.center[1] + k.drift[1] * now,
                       k.center[2] + k.drift[2] * now});
  }
  const auto cx = axes_.coords(0);
  const auto cy = axes_.coords(1);
  const auto cz = axes_.coords(2);
  const std::uint64_t step_key = splitmix(spec_.seed ^ splitmix(t + 1));
  parallel_for(d[2], [&](std::size_t z) {
    for (std::uint32_t y = 0; y < d[1]; ++y) {
      for (std::uint32_t x = 0; x < d[0]; ++x) {
        const std::size_t i = x + std::size_t{d[0]} * (y + std::size_t{d[1]} * z);
        double hr = 0.0;
        for (std::size_t k = 0; k < kernels_.size(); ++k) {
          const double dx = cx[x] - centers[k][0];
          const double dy = cy[y] - centers[k][1];
          const double dz = cz[z] - centers[k][2];
          const double s = kernels_[k].sigma;
          hr -= kernels_[k].amplitude * std::exp(-(dx * dx + dy * dy + dz * dz) / (s * s));
        }
        const double noise = unit(splitmix(step_key ^ i)) - 0.5;
        const double mag = std::fabs(hr);
        out[kHeatRelease][i] = hr;
        out[kCh2o][i] = std::max(0.0, 1e-3 * mag / 3e10 + 1e-4 * noise);
        out[kAlphaClass][i] = mag >= 1e10 ? 1.0 : (mag >= 1e9 ? 0.0 : -1.0);
      }
    }
  });
  return out;
}

std::vector<std::vector<ParticleRecord>> Synthesizer::particles() const {
  std::mt19937_64 rng(splitmix(spec_.seed ^ 0x7061727469636c65ull));
  std::vector<Point3> pos(spec_.particles);
  for (auto& p : pos) {
    for (auto& c : p) c = unit(rng());
  }
  const double h = kStepTime / kSubsteps;
  std::vector<std::vector<ParticleRecord>> steps;
  for (std::size_t t = 0; t < spec_.timesteps; ++t) {
    if (t > 0) {
      for (auto& p : pos) {
        for (int s = 0; s < kSubsteps; ++s) {
          const double u = -kOmega * (p[1] - 0.5);
          const double v = kOmega * (p[0] - 0.5);
          p = {wrap(p[0] + h * u), wrap(p[1] + h * v), wrap(p[2] + h * kLift)};
        }
      }
    }
    const auto f = fields(t);
    std::vector<ParticleRecord> recs(pos.size());
    for (std::size_t n = 0; n < pos.size(); ++n) {
      const Point3& p = pos[n];
      const std::size_t i = nearest(axes_.coords(0), p[0]) +
                            std::size_t{spec_.dims[0]} * (nearest(axes_.coords(1), p[1]) +
                                                          std::size_t{spec_.dims[1]} * nearest(axes_.coords(2), p[2]));
      recs[n].id = n;
      recs[n].pos = p;
      for (const auto& var : f) recs[n].values.push_back(static_cast<float>(var[i]));
    }
    steps.push_back(std::move(recs));
  }
  return steps;
}

void generate(const SynthSpec& spec, const std::string& field_path, const std::string& particle_path) {
  const Synthesizer synth(spec);
  {
    RawFieldWriter w(field_path, synth.axes(), Synthesizer::variables());
    for (std::size_t t = 0; t < spec.timesteps; ++t) w.append(synth.time(t), synth.fields(t));
    w.finish();
  }
  ParticleStoreWriter w(particle_path, ParticleStoreHeader{{1, 1, 1}, Synthesizer::variables()});
  const auto steps = synth.particles();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    ParticleIndexTable table{{0}, {steps[t].size()}};
    w.append(synth.time(t), steps[t], table);
  }
  w.finish();
}

}  // namespace regsum
