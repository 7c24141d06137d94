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

#include <softfail/noise.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

using namespace softfail;

namespace {

JointTrajectory make_traj(std::size_t rows, std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 2.0);
  JointTrajectory t;
  t.qdot = Matrix(rows, n);
  t.qdot_desired = Matrix(rows, m);
  for (std::size_t r = 0; r < rows; ++r) {
    t.timestamps.push_back(1.5 + r * 1e-4);
    for (std::size_t c = 0; c < n; ++c) t.qdot(r, c) = g(gen);
    for (std::size_t c = 0; c < m; ++c) t.qdot_desired(r, c) = g(gen);
  }
  return t;
}

JointTrajectory rows_of(std::vector<double> actual, std::vector<double> desired) {
  JointTrajectory t;
  t.timestamps = {0.0, 0.1};
  t.qdot = Matrix(2, actual.size());
  t.qdot_desired = Matrix(2, desired.size());
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < actual.size(); ++c) t.qdot(r, c) = actual[c];
    for (std::size_t c = 0; c < desired.size(); ++c) t.qdot_desired(r, c) = desired[c];
  }
  return t;
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)) || a == b;
}

}  // namespace

TEST_CASE("estimate_noise worked examples") {
  CHECK(estimate_noise(rows_of({3, 4}, {})).samples[0] == 5.0);
  CHECK(estimate_noise(rows_of({1, 1}, {1, 1})).samples[0] == 2.0);
  const auto z = estimate_noise(rows_of({0, 0, 0}, {0}));
  for (double v : z.samples) CHECK(v == 0.0);
  CHECK(estimate_noise(rows_of({3, 4}, {})).sample_rate == doctest::Approx(10.0));
}

TEST_CASE("zero column leaves the trace bit-identical") {
  auto t = make_traj(500, 7, 5, 1);
  const auto base = estimate_noise(t);
  JointTrajectory w = t;
  w.qdot = Matrix();
  for (std::size_t r = 0; r < t.qdot.rows(); ++r) {
    std::vector<double> row(t.qdot.row(r).begin(), t.qdot.row(r).end());
    row.insert(row.begin() + 3, 0.0);
    w.qdot.append_row(row);
  }
  CHECK(estimate_noise(w).samples == base.samples);
}

TEST_CASE("scaling and permuting columns") {
  auto t = make_traj(400, 30, 24, 2);
  const auto base = estimate_noise(t);
  for (double a : {-3.0, 0.1, 7.25}) {
    JointTrajectory s = t;
    for (auto& v : s.qdot.data()) v *= a;
    for (auto& v : s.qdot_desired.data()) v *= a;
    const auto scaled = estimate_noise(s);
    for (std::size_t i = 0; i < base.samples.size(); ++i) {
      REQUIRE(rel_close(scaled.samples[i], std::abs(a) * base.samples[i], 1e-12));
    }
  }
  std::mt19937_64 gen(5);
  std::vector<std::size_t> perm(30);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), gen);
  JointTrajectory p = t;
  for (std::size_t r = 0; r < t.qdot.rows(); ++r) {
    for (std::size_t c = 0; c < 30; ++c) p.qdot(r, c) = t.qdot(r, perm[c]);
  }
  const auto permuted = estimate_noise(p);
  for (std::size_t i = 0; i < base.samples.size(); ++i) {
    REQUIRE(rel_close(permuted.samples[i], base.samples[i], 1e-12));
    REQUIRE(base.samples[i] >= 0.0);
  }
}

TEST_CASE("trajectory validation") {
  auto t = make_traj(10, 2, 0, 3);
  t.timestamps[6] += 1e-6;
  CHECK_THROWS_WITH_AS(t.validate(), doctest::Contains("6"), Error);
  auto u = make_traj(10, 2, 0, 3);
  u.timestamps[4] += 1e-15;  // within the relative tolerance
  CHECK_NOTHROW(u.validate());
  JointTrajectory empty;
  CHECK_THROWS_AS(estimate_noise(empty), Error);
}

TEST_CASE("read_trajectory parses and subsets columns") {
  std::istringstream in("t\tqd0\tqd1\n0\t3\t4\n0.0001\t0\t0\n0.0002\t1\t1\n");
  const auto t = parse_trajectory(in, {{"qd0", "qd1"}, {}});
  CHECK(t.qdot.cols() == 2);
  CHECK(t.qdot_desired.cols() == 0);
  CHECK(t.qdot.rows() == 3);
  const auto n = estimate_noise(t);
  CHECK(n.samples[0] == 5.0);
  CHECK(n.sample_rate == doctest::Approx(10000.0));

  // 30 actual + 24 desired columns, select 4 actual ones.
  std::ostringstream file;
  file << "time";
  for (int i = 0; i < 30; ++i) file << "\tqd" << i;
  for (int i = 0; i < 24; ++i) file << "\tqdd" << i;
  file << '\n';
  for (int r = 0; r < 5; ++r) {
    file << r * 1e-4;
    for (int i = 0; i < 54; ++i) file << '\t' << (i + r) % 5;
    file << '\n';
  }
  std::istringstream big(file.str());
  const auto sub = parse_trajectory(big, {ColumnSpec::parse_list("qd3,qd4,qd5,qd6"), {}});
  CHECK(sub.qdot.cols() == 4);
  std::istringstream big2(file.str());
  const auto all = parse_trajectory(big2, {ColumnSpec::parse_list("1-30"), ColumnSpec::parse_list("31-54")});
  CHECK(all.qdot.cols() == 30);
  CHECK(all.qdot_desired.cols() == 24);
  std::istringstream big3(file.str());
  const auto dflt = parse_trajectory(big3, {{}, ColumnSpec::parse_list("31-54")});
  CHECK(dflt.qdot.cols() == 30);
}

TEST_CASE("read_trajectory errors") {
  std::istringstream dec("t\ta\n0\t1\n0.2\t1\n0.1\t1\n");
  CHECK_THROWS_WITH_AS(parse_trajectory(dec, {}), doctest::Contains("line 4"), Error);
  std::istringstream miss("t\ta\n0\t1\n0.1\t1\n");
  CHECK_THROWS_WITH_AS(parse_trajectory(miss, {{"knee_l"}, {}}), doctest::Contains("knee_l"), Error);
  std::istringstream bad("t\ta\n0\t1\n0.1\tx\n");
  CHECK_THROWS_WITH_AS(parse_trajectory(bad, {}), doctest::Contains("line 3"), Error);
  CHECK_THROWS_AS(read_trajectory("/nonexistent/traj.tsv", {}), Error);
}

TEST_CASE("trace files round-trip exactly") {
  NoiseTrace t{10000.0, {}};
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) t.samples.push_back(u(gen));
  std::stringstream s;
  write_trace(t, s);
  CHECK(parse_trace(s) == t);
  std::istringstream neg("rate=10\n1\n-1\n");
  CHECK_THROWS_AS(parse_trace(neg), Error);
  std::istringstream norate("1\n2\n");
  CHECK_THROWS_AS(parse_trace(norate), Error);
}
