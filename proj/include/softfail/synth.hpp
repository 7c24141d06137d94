// Copyright 2026 The softfail Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "softfail/dataset.hpp"
#include "softfail/noise.hpp"

namespace softfail {

/// Counter-based generator: value(stream, counter) is a pure function of
/// (seed, stream, counter), so any sample can be drawn independently.
///
///   mix(z):  z += 0x9E3779B97F4A7C15
///            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///            return z ^ (z >> 31)
///   key    = mix(seed ^ (stream * 0xD1B54A32D192ED03))
///   bits   = mix(key + counter)
///   uniform in [0, 1)  = (bits >> 11) * 2^-53
///   normal (Box-Muller) = sqrt(-2 ln u1) cos(2 pi u2),
///       u1 = ((bits(2c) >> 11) + 1) * 2^-53,  u2 = uniform(2c + 1)
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z);
  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const;
  double uniform(std::uint64_t stream, std::uint64_t counter) const;
  double normal(std::uint64_t stream, std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
};

/// Walking-cadence base noise: offset + |sum_h a_h sin(2 pi h f0 t + phi_h)|
/// plus white Gaussian noise of standard deviation `noise`.
struct GaitParams {
  double fundamental_hz = 1.2;
  std::size_t harmonics = 6;
  /// Per-harmonic amplitudes; empty means a_h = 0.5 / h.
  std::vector<double> amplitudes;
  double offset = 1.0;
  double noise = 0.02;

  double amplitude(std::size_t h) const;
};

enum class DefectKind { Oscillation, Impact, HighAcc };

FailureLabel defect_label(DefectKind kind);

/// An injected defect occupying [t_start, t_end). Unused fields are ignored
/// for the other kinds.
struct Defect {
  DefectKind kind = DefectKind::Oscillation;
  double t_start = 0.0;
  double t_end = 0.0;
  // oscillation: one sine per integer Hz in [band_lo, band_hi]; RMS of the
  // sum is amplitude / sqrt(2)
  double band_lo = 0.0;
  double band_hi = 0.0;
  double amplitude = 0.3;
  // impact: peak * exp(-(t - time) / decay) * sin(2 pi carrier (t - time))
  double time = 0.0;
  double peak = 10.0;
  double decay = 0.01;
  double carrier_hz = 1500.0;
  // high_acc: underdamped step response of height `step` from `time`,
  // faded out over the last `fade` seconds of the interval
  double step = 1.5;
  double natural_hz = 40.0;
  double damping = 0.25;
  double fade = 0.05;
};

struct ScenarioSpec {
  double duration = 10.0;
  double sample_rate = 10000.0;
  GaitParams base;
  std::vector<Defect> defects;
  std::uint64_t seed = 1;

  /// Intervals inside [0, duration], bands inside (0, rate/2), event times
  /// inside their interval, no overlap between defects of different kinds.
  void validate() const;
};

struct SynthOutput {
  NoiseTrace trace;
  std::vector<Annotation> annotations;
};

SynthOutput generate(const ScenarioSpec& spec);

/// The signal before rectification: base gait noise plus the given defects.
/// generate() returns max(0, raw_signal(spec, spec.defects)).
std::vector<double> raw_signal(const ScenarioSpec& spec, const std::vector<Defect>& defects);

/// Key-value scenario file:
///
///   duration = 20
///   sample_rate = 10000
///   seed = 7
///   [base]
///   fundamental = 1.2
///   harmonics = 6
///   amplitudes = 0.5 0.25 0.17
///   offset = 1.0
///   noise = 0.02
///   [defect]
///   kind = oscillation       # oscillation | impact | high_acc
///   start = 2.0
///   end = 3.5
///   band = 40 50
///   amplitude = 0.3
///
/// Each [defect] section adds one defect; '#' starts a comment.
ScenarioSpec parse_scenario(std::istream& in);
ScenarioSpec read_scenario(const std::string& path);
void write_scenario(const ScenarioSpec& spec, std::ostream& out);

}  // namespace softfail
