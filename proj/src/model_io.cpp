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

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "softfail/svm.hpp"

namespace softfail {

namespace {

constexpr std::string_view kFormatTag = "softfail-model";
constexpr int kFormatVersion = 1;

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line, trimmed; throws at end of input.
  std::string_view next() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      const auto t = trim(line_);
      if (!t.empty()) return t;
    }
    fail(ErrorCode::Parse, "model file truncated after line " + std::to_string(line_no_));
  }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::Parse, "model file line " + std::to_string(line_no_) + ": " + what);
  }

  std::string_view value(std::string_view key) {
    const auto t = next();
    const auto fields = split_ws(t);
    if (fields.size() != 2 || fields[0] != key) error("expected '" + std::string(key) + " <value>'");
    return fields[1];
  }

  double number(std::string_view key) {
    double v = 0.0;
    if (!parse_double(value(key), v)) error("invalid number for '" + std::string(key) + "'");
    return v;
  }

  std::size_t count(std::string_view key) {
    std::size_t v = 0;
    if (!parse_size(value(key), v)) error("invalid count for '" + std::string(key) + "'");
    return v;
  }

  void expect(std::string_view exact) {
    if (next() != exact) error("expected '" + std::string(exact) + "'");
  }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_model(const MultiClassSvm& model, std::ostream& out) {
  const auto& p = model.preprocess;
  out << kFormatTag << '\n' << "version " << kFormatVersion << '\n';
  out << "[preprocess]\n"
      << "frame_size " << p.frame_size << '\n'
      << "frame_stride " << p.frame_stride << '\n'
      << "fft_size " << p.fft_size << '\n'
      << "fft_stride " << p.fft_stride << '\n'
      << "compression_factor " << p.compression_factor << '\n'
      << "log_epsilon " << format_double(p.log_epsilon) << '\n';
  out << "[svm]\n"
      << "kernel " << kernel_name(model.kernel.type) << '\n'
      << "gamma " << format_double(model.kernel.gamma) << '\n'
      << "c_hat " << format_double(model.c_hat) << '\n'
      << "class_weight_factor " << format_double(model.class_weight_factor) << '\n'
      << "feature_length " << model.feature_length << '\n';
  std::size_t present = 0;
  for (const auto& m : model.machines) present += m ? 1 : 0;
  out << "classes " << present << '\n';
  for (auto label : kAllLabels) {
    const auto& m = model.machines[label_index(label)];
    if (!m) continue;
    out << "[class " << label_name(label) << "]\n"
        << "kernel " << kernel_name(m->kernel.type) << '\n'
        << "gamma " << format_double(m->kernel.gamma) << '\n'
        << "c " << format_double(m->c) << '\n'
        << "bias " << format_double(m->bias) << '\n'
        << "converged " << (m->converged ? 1 : 0) << '\n'
        << "kkt_violation " << format_double(m->kkt_violation) << '\n'
        << "iterations " << m->iterations << '\n'
        << "support_vectors " << m->dual_coefs.size() << '\n';
    for (std::size_t s = 0; s < m->dual_coefs.size(); ++s) {
      out << format_double(m->dual_coefs[s]);
      for (double v : m->support_vectors.row(s)) out << '\t' << format_double(v);
      out << '\n';
    }
  }
  out << "[end]\n";
}

MultiClassSvm parse_model(std::istream& in) {
  LineReader r(in);
  if (r.next() != kFormatTag) r.error("not a softfail model file");
  {
    std::size_t version = 0;
    if (!parse_size(r.value("version"), version)) r.error("invalid version");
    if (version != kFormatVersion) r.error("unsupported model version " + std::to_string(version));
  }
  MultiClassSvm model;
  auto& p = model.preprocess;
  r.expect("[preprocess]");
  p.frame_size = r.count("frame_size");
  p.frame_stride = r.count("frame_stride");
  p.fft_size = r.count("fft_size");
  p.fft_stride = r.count("fft_stride");
  p.compression_factor = r.count("compression_factor");
  p.log_epsilon = r.number("log_epsilon");
  p.validate();

  r.expect("[svm]");
  const auto parse_type = [&](std::string_view text) {
    const auto t = parse_kernel_type(text);
    if (!t) r.error("unknown kernel '" + std::string(text) + "'");
    return *t;
  };
  model.kernel.type = parse_type(r.value("kernel"));
  model.kernel.gamma = r.number("gamma");
  model.c_hat = r.number("c_hat");
  model.class_weight_factor = r.number("class_weight_factor");
  model.feature_length = r.count("feature_length");
  if (model.feature_length != p.feature_length()) {
    r.error("feature_length " + std::to_string(model.feature_length) +
            " inconsistent with preprocessing (" + std::to_string(p.feature_length()) + ")");
  }
  const std::size_t classes = r.count("classes");
  if (classes > kNumLabels) r.error("too many classes");

  for (std::size_t k = 0; k < classes; ++k) {
    const auto header = r.next();
    if (header.size() < 8 || header.substr(0, 7) != "[class " || header.back() != ']') {
      r.error("expected '[class <label>]'");
    }
    const auto label = parse_label(header.substr(7, header.size() - 8));
    if (!label) r.error("unknown class label");
    if (model.machines[label_index(*label)]) r.error("duplicate class section");
    BinarySvm m;
    m.kernel.type = parse_type(r.value("kernel"));
    m.kernel.gamma = r.number("gamma");
    m.c = r.number("c");
    m.bias = r.number("bias");
    m.converged = r.count("converged") != 0;
    m.kkt_violation = r.number("kkt_violation");
    {
      std::uint64_t it = 0;
      if (!parse_u64(r.value("iterations"), it)) r.error("invalid iterations");
      m.iterations = it;
    }
    const std::size_t nsv = r.count("support_vectors");
    m.support_vectors = Matrix(0, model.feature_length);
    std::vector<double> row(model.feature_length);
    for (std::size_t s = 0; s < nsv; ++s) {
      const auto fields = split(r.next(), '\t');
      if (fields.size() != model.feature_length + 1) {
        r.error("support vector row has " + std::to_string(fields.size() - 1) +
                " values, expected " + std::to_string(model.feature_length));
      }
      double coef = 0.0;
      if (!parse_double(fields[0], coef)) r.error("invalid dual coefficient");
      for (std::size_t d = 0; d < model.feature_length; ++d) {
        if (!parse_double(fields[d + 1], row[d])) r.error("invalid support vector value");
      }
      m.dual_coefs.push_back(coef);
      m.support_vectors.append_row(row);
    }
    model.machines[label_index(*label)] = std::move(m);
  }
  r.expect("[end]");
  return model;
}

void save_model(const MultiClassSvm& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write model file: " + path);
  write_model(model, out);
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

MultiClassSvm load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open model file: " + path);
  return parse_model(in);
}

}  // namespace softfail
