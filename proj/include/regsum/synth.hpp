#pragma once

// Deterministic combustion-flavored test data: a few drifting Gaussian heat
// release kernels, a correlated ch2o field, a three-zone classification
// variable, and tracer particles carried by a rotating flow.

#include <cstdint>
#include <string>
#include <vector>

#include "regsum/grid.hpp"
#include "regsum/particles.hpp"
#include "regsum/store.hpp"

namespace regsum {

struct SynthSpec {
  Index3 dims{64, 64, 64};
  std::uint32_t timesteps = 4;
  std::uint64_t seed = 7;
  std::uint64_t particles = 10000;

  /// Throws InvalidSpec unless dims >= 4 per axis and timesteps >= 1.
  void validate() const;
};

/// Variable order of every synthetic output.
enum SynthVar : VarId { kHeatRelease = 0, kCh2o = 1, kAlphaClass = 2 };

class Synthesizer {
 public:
  explicit Synthesizer(const SynthSpec& spec);

  const SynthSpec& spec() const noexcept { return spec_; }
  const RectilinearAxes& axes() const noexcept { return axes_; }
  static std::vector<VariableInfo> variables();

  double time(std::size_t t) const noexcept;
  /// Dense x-fastest arrays in SynthVar order.
  std::vector<std::vector<double>> fields(std::size_t t) const;
  /// Unsorted particles at every timestep; ids are stable across steps.
  std::vector<std::vector<ParticleRecord>> particles() const;

 private:
  struct Kernel {
    Point3 center;
    Point3 drift;
    double amplitude;
    double sigma;
  };

  SynthSpec spec_;
  RectilinearAxes axes_;
  std::vector<Kernel> kernels_;
};

/// Writes the fields as RFLD and the unsorted particles as an RPRT store
/// with a single 1x1x1 region per timestep.
void generate(const SynthSpec& spec, const std::string& field_path, const std::string& particle_path);

}  // namespace regsum
