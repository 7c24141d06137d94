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

#include "softfail/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

namespace softfail {

namespace {

constexpr std::uint64_t kStreamBasePhase = 1;
constexpr std::uint64_t kStreamNoise = 2;
constexpr std::uint64_t kStreamDefect = 100;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t to_index(double t, double rate) {
  return static_cast<std::size_t>(std::llround(t * rate));
}

std::string_view kind_name(DefectKind k) {
  switch (k) {
    case DefectKind::Oscillation: return "oscillation";
    case DefectKind::Impact: return "impact";
    case DefectKind::HighAcc: return "high_acc";
  }
  return "?";
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t counter) const {
  const std::uint64_t key = mix(seed_ ^ (stream * 0xD1B54A32D192ED03ull));
  return mix(key + counter);
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter) const {
  return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const {
  const double u1 = static_cast<double>((bits(stream, 2 * counter) >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform(stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double GaitParams::amplitude(std::size_t h) const {
  if (h >= 1 && h <= amplitudes.size()) return amplitudes[h - 1];
  return amplitudes.empty() ? 0.5 / static_cast<double>(h) : 0.0;
}

FailureLabel defect_label(DefectKind kind) {
  switch (kind) {
    case DefectKind::Oscillation: return FailureLabel::Oscillations;
    case DefectKind::Impact: return FailureLabel::Impact;
    case DefectKind::HighAcc: return FailureLabel::HighAcc;
  }
  return FailureLabel::Ok;
}

void ScenarioSpec::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::InvalidArgument, m); };
  if (!(duration > 0.0) || !std::isfinite(duration)) bad("duration must be positive");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) bad("sample_rate must be positive");
  if (base.harmonics == 0) bad("base needs at least one harmonic");
  if (!(base.fundamental_hz > 0.0)) bad("base fundamental must be positive");
  if (base.noise < 0.0) bad("base noise must be non-negative");
  const double nyquist = sample_rate / 2.0;
  for (std::size_t i = 0; i < defects.size(); ++i) {
    const auto& d = defects[i];
    const auto where = "defect " + std::to_string(i + 1) + " (" + std::string(kind_name(d.kind)) + "): ";
    if (!(d.t_start >= 0.0 && d.t_end > d.t_start && d.t_end <= duration)) {
      bad(where + "interval must satisfy 0 <= start < end <= duration");
    }
    switch (d.kind) {
      case DefectKind::Oscillation:
        if (!(d.band_lo > 0.0 && d.band_hi >= d.band_lo && d.band_hi < nyquist)) {
          bad(where + "band must lie in (0, sample_rate/2)");
        }
        if (std::ceil(d.band_lo) > std::floor(d.band_hi)) bad(where + "band contains no integer Hz");
        break;
      case DefectKind::Impact:
        if (!(d.time >= d.t_start && d.time < d.t_end)) bad(where + "time must lie in the interval");
        if (!(d.decay > 0.0)) bad(where + "decay must be positive");
        if (!(d.carrier_hz > 0.0 && d.carrier_hz < nyquist)) bad(where + "carrier must lie in (0, sample_rate/2)");
        break;
      case DefectKind::HighAcc:
        if (!(d.time >= d.t_start && d.time < d.t_end)) bad(where + "time must lie in the interval");
        if (!(d.natural_hz > 0.0 && d.damping > 0.0 && d.damping < 1.0)) {
          bad(where + "needs natural_hz > 0 and 0 < damping < 1");
        }
        if (d.fade < 0.0) bad(where + "fade must be non-negative");
        break;
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = defects[j];
      if (o.kind != d.kind && d.t_start < o.t_end && o.t_start < d.t_end) {
        bad("defects " + std::to_string(j + 1) + " and " + std::to_string(i + 1) +
            " overlap with different kinds; a block must carry one label");
      }
    }
  }
}

std::vector<double> raw_signal(const ScenarioSpec& spec, const std::vector<Defect>& defects) {
  const CounterRng rng(spec.seed);
  const double rate = spec.sample_rate;
  const std::size_t n = to_index(spec.duration, rate);
  std::vector<double> x(n);

  std::vector<double> phase(spec.base.harmonics);
  for (std::size_t h = 0; h < phase.size(); ++h) phase[h] = kTwoPi * rng.uniform(kStreamBasePhase, h);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double s = 0.0;
    for (std::size_t h = 0; h < phase.size(); ++h) {
      const double f = spec.base.fundamental_hz * static_cast<double>(h + 1);
      s += spec.base.amplitude(h + 1) * std::sin(kTwoPi * f * t + phase[h]);
    }
    x[i] = spec.base.offset + std::abs(s) + spec.base.noise * rng.normal(kStreamNoise, i);
  }

  for (std::size_t di = 0; di < defects.size(); ++di) {
    const auto& d = defects[di];
    const std::size_t lo = std::min(n, to_index(d.t_start, rate));
    const std::size_t hi = std::min(n, to_index(d.t_end, rate));
    switch (d.kind) {
      case DefectKind::Oscillation: {
        const auto f0 = static_cast<std::int64_t>(std::ceil(d.band_lo));
        const auto f1 = static_cast<std::int64_t>(std::floor(d.band_hi));
        const auto k = static_cast<std::size_t>(f1 - f0 + 1);
        const double a = d.amplitude / std::sqrt(static_cast<double>(k));
        std::vector<double> ph(k);
        for (std::size_t c = 0; c < k; ++c) ph[c] = kTwoPi * rng.uniform(kStreamDefect + di, c);
        for (std::size_t i = lo; i < hi; ++i) {
          const double t = static_cast<double>(i) / rate;
          double s = 0.0;
          for (std::size_t c = 0; c < k; ++c) {
            s += std::sin(kTwoPi * static_cast<double>(f0 + static_cast<std::int64_t>(c)) * t + ph[c]);
          }
          x[i] += a * s;
        }
        break;
      }
      case DefectKind::Impact: {
        for (std::size_t i = std::max(lo, to_index(d.time, rate)); i < hi; ++i) {
          const double dt = static_cast<double>(i) / rate - d.time;
          x[i] += d.peak * std::exp(-dt / d.decay) * std::sin(kTwoPi * d.carrier_hz * dt);
        }
        break;
      }
      case DefectKind::HighAcc: {
        const double wn = kTwoPi * d.natural_hz;
        const double z = d.damping;
        const double wd = wn * std::sqrt(1.0 - z * z);
        const double fade_start = d.t_end - d.fade;
        for (std::size_t i = std::max(lo, to_index(d.time, rate)); i < hi; ++i) {
          const double t = static_cast<double>(i) / rate;
          const double dt = t - d.time;
          double v = d.step * (1.0 - std::exp(-z * wn * dt) *
                                         (std::cos(wd * dt) + z / std::sqrt(1.0 - z * z) * std::sin(wd * dt)));
          if (d.fade > 0.0 && t >= fade_start) {
            v *= 0.5 * (1.0 + std::cos(std::numbers::pi * (t - fade_start) / d.fade));
          }
          x[i] += v;
        }
        break;
      }
    }
  }
  return x;
}

SynthOutput generate(const ScenarioSpec& spec) {
  spec.validate();
  SynthOutput out;
  out.trace.sample_rate = spec.sample_rate;
  out.trace.samples = raw_signal(spec, spec.defects);
  for (auto& v : out.trace.samples) v = std::max(v, 0.0);

  // Defect intervals, same-kind overlaps merged, gaps labelled OK.
  std::vector<Annotation> marked;
  for (const auto& d : spec.defects) marked.push_back({d.t_start, d.t_end, defect_label(d.kind)});
  std::sort(marked.begin(), marked.end(),
            [](const Annotation& a, const Annotation& b) { return a.t_start < b.t_start; });
  std::vector<Annotation> merged;
  for (const auto& a : marked) {
    if (!merged.empty() && merged.back().label == a.label && a.t_start <= merged.back().t_end) {
      merged.back().t_end = std::max(merged.back().t_end, a.t_end);
    } else {
      merged.push_back(a);
    }
  }
  const double min_gap = 1.0 / spec.sample_rate;
  double cursor = 0.0;
  for (const auto& a : merged) {
    if (a.t_start - cursor >= min_gap) out.annotations.push_back({cursor, a.t_start, FailureLabel::Ok});
    out.annotations.push_back(a);
    cursor = a.t_end;
  }
  if (spec.duration - cursor >= min_gap) {
    out.annotations.push_back({cursor, spec.duration, FailureLabel::Ok});
  }
  return out;
}

namespace {

std::vector<double> parse_numbers(std::string_view value, std::size_t line_no) {
  std::vector<double> out;
  for (auto tok : split_ws(value)) {
    double v = 0.0;
    if (!parse_double(tok, v)) {
      fail(ErrorCode::Parse, "scenario line " + std::to_string(line_no) + ": invalid number '" +
                                 std::string(tok) + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

ScenarioSpec parse_scenario(std::istream& in) {
  ScenarioSpec spec;
  enum class Section { Top, Base, Defect } section = Section::Top;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto t = trim(std::string_view(line).substr(0, hash));
    if (t.empty()) continue;
    const auto where = "scenario line " + std::to_string(line_no) + ": ";
    if (t.front() == '[') {
      const auto name = to_lower(trim(t.substr(1, t.size() - (t.back() == ']' ? 2 : 1))));
      if (name == "scenario") {
        section = Section::Top;
      } else if (name == "base") {
        section = Section::Base;
      } else if (name == "defect") {
        section = Section::Defect;
        spec.defects.emplace_back();
      } else {
        fail(ErrorCode::Parse, where + "unknown section [" + name + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::Parse, where + "expected 'key = value'");
    const auto key = to_lower(trim(t.substr(0, eq)));
    const auto value = trim(t.substr(eq + 1));
    const auto nums = [&] { return parse_numbers(value, line_no); };
    const auto one = [&] {
      const auto v = nums();
      if (v.size() != 1) fail(ErrorCode::Parse, where + "'" + key + "' takes one number");
      return v[0];
    };
    const auto count = [&] {
      std::size_t v = 0;
      if (!parse_size(value, v)) fail(ErrorCode::Parse, where + "'" + key + "' takes a non-negative integer");
      return v;
    };
    switch (section) {
      case Section::Top:
        if (key == "duration") spec.duration = one();
        else if (key == "sample_rate") spec.sample_rate = one();
        else if (key == "seed") {
          if (!parse_u64(value, spec.seed)) fail(ErrorCode::Parse, where + "invalid seed");
        } else fail(ErrorCode::Parse, where + "unknown key '" + key + "'");
        break;
      case Section::Base:
        if (key == "fundamental") spec.base.fundamental_hz = one();
        else if (key == "harmonics") spec.base.harmonics = count();
        else if (key == "amplitudes") spec.base.amplitudes = nums();
        else if (key == "offset") spec.base.offset = one();
        else if (key == "noise") spec.base.noise = one();
        else fail(ErrorCode::Parse, where + "unknown key '" + key + "'");
        break;
      case Section::Defect: {
        auto& d = spec.defects.back();
        if (key == "kind") {
          const auto k = to_lower(value);
          if (k == "oscillation" || k == "oscillations") d.kind = DefectKind::Oscillation;
          else if (k == "impact") d.kind = DefectKind::Impact;
          else if (k == "high_acc" || k == "highacc") d.kind = DefectKind::HighAcc;
          else fail(ErrorCode::Parse, where + "unknown defect kind '" + std::string(value) + "'");
        } else if (key == "start") d.t_start = one();
        else if (key == "end") d.t_end = one();
        else if (key == "band") {
          const auto v = nums();
          if (v.size() != 2) fail(ErrorCode::Parse, where + "'band' takes two numbers");
          d.band_lo = v[0];
          d.band_hi = v[1];
        } else if (key == "amplitude") d.amplitude = one();
        else if (key == "time") d.time = one();
        else if (key == "peak") d.peak = one();
        else if (key == "decay") d.decay = one();
        else if (key == "carrier") d.carrier_hz = one();
        else if (key == "step") d.step = one();
        else if (key == "natural") d.natural_hz = one();
        else if (key == "damping") d.damping = one();
        else if (key == "fade") d.fade = one();
        else fail(ErrorCode::Parse, where + "unknown key '" + key + "'");
        break;
      }
    }
  }
  return spec;
}

ScenarioSpec read_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open scenario file: " + path);
  return parse_scenario(in);
}

void write_scenario(const ScenarioSpec& spec, std::ostream& out) {
  const auto f = [](double v) { return format_double(v); };
  out << "duration = " << f(spec.duration) << '\n'
      << "sample_rate = " << f(spec.sample_rate) << '\n'
      << "seed = " << spec.seed << '\n'
      << "[base]\n"
      << "fundamental = " << f(spec.base.fundamental_hz) << '\n'
      << "harmonics = " << spec.base.harmonics << '\n';
  if (!spec.base.amplitudes.empty()) {
    out << "amplitudes =";
    for (double a : spec.base.amplitudes) out << ' ' << f(a);
    out << '\n';
  }
  out << "offset = " << f(spec.base.offset) << '\n' << "noise = " << f(spec.base.noise) << '\n';
  for (const auto& d : spec.defects) {
    out << "[defect]\n"
        << "kind = " << kind_name(d.kind) << '\n'
        << "start = " << f(d.t_start) << '\n'
        << "end = " << f(d.t_end) << '\n';
    switch (d.kind) {
      case DefectKind::Oscillation:
        out << "band = " << f(d.band_lo) << ' ' << f(d.band_hi) << '\n'
            << "amplitude = " << f(d.amplitude) << '\n';
        break;
      case DefectKind::Impact:
        out << "time = " << f(d.time) << '\n' << "peak = " << f(d.peak) << '\n'
            << "decay = " << f(d.decay) << '\n' << "carrier = " << f(d.carrier_hz) << '\n';
        break;
      case DefectKind::HighAcc:
        out << "time = " << f(d.time) << '\n' << "step = " << f(d.step) << '\n'
            << "natural = " << f(d.natural_hz) << '\n' << "damping = " << f(d.damping) << '\n'
            << "fade = " << f(d.fade) << '\n';
        break;
    }
  }
}

}  // namespace softfail
