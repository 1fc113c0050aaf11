// Copyright 2026 The bitsiege Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bitsiege/io.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>
#include <vector>

#include "bitsiege/error.h"

namespace bitsiege {
namespace {

constexpr std::string_view kModelTag = "bitsiege-model-v1";
constexpr std::string_view kQModelTag = "bitsiege-qmodel-v1";
constexpr std::string_view kPartialTag = "bitsiege-partial-v1";
constexpr std::string_view kDataTag = "bitsiege-data-v1";
constexpr std::string_view kTraceTag = "bitsiege-trace-v1";

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// ---- binary payload ----

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void dims(const Shape& shape) {
    u32(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) u32(static_cast<std::uint32_t>(d));
  }
  void f32_tensor(const Tensor& t) {
    dims(t.shape());
    for (double v : t.data()) f32(v);
  }
  void text(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++]))
           << (8 * i);
    }
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_++]))
           << (8 * i);
    }
    return v;
  }
  double f32() {
    const std::size_t at = pos_;
    const float v = std::bit_cast<float>(u32());
    if (!std::isfinite(v)) fail(at, "non-finite value");
    return v;
  }
  double f64() {
    const std::size_t at = pos_;
    const double v = std::bit_cast<double>(u64());
    if (!std::isfinite(v)) fail(at, "non-finite value");
    return v;
  }
  Shape dims(const Shape& expected) {
    const std::size_t at = pos_;
    const std::uint32_t rank = u32();
    if (rank > 8) fail(at, "implausible tensor rank " + std::to_string(rank));
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(u32());
    if (shape != expected) {
      fail(at, "tensor shape " + shape_string(shape) + ", expected " +
                   shape_string(expected));
    }
    return shape;
  }
  Tensor f32_tensor(const Shape& expected) {
    Shape shape = dims(expected);
    std::vector<double> data(shape_size(shape));
    for (double& v : data) v = f32();
    return Tensor(std::move(shape), std::move(data));
  }
  void expect_end() {
    if (pos_ != bytes_.size()) {
      fail(pos_, std::to_string(bytes_.size() - pos_) + " trailing bytes");
    }
  }
  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw ParseError("byte " + std::to_string(at), what);
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(pos_, "unexpected end of payload");
  }
  const std::string& bytes_;
  std::size_t pos_;
};

// ---- text header ----

struct HeaderLine {
  std::size_t number = 0;
  std::vector<std::string> words;
};

struct Header {
  std::vector<HeaderLine> lines;  // excluding tag and "end"
  std::size_t payload_offset = 0;
};

Header read_header(const std::string& bytes, std::string_view tag) {
  Header h;
  std::size_t pos = 0;
  std::size_t number = 0;
  bool saw_end = false;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) break;
    const std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    ++number;
    if (number == 1) {
      if (line != tag) {
        throw ParseError("line 1", "expected format tag '" + std::string(tag) +
                                       "', got '" + line.substr(0, 40) + "'");
      }
      continue;
    }
    if (line == "end") {
      saw_end = true;
      break;
    }
    HeaderLine hl{number, {}};
    std::istringstream in(line);
    for (std::string w; in >> w;) hl.words.push_back(w);
    if (hl.words.empty()) throw ParseError("line " + std::to_string(number), "empty header line");
    h.lines.push_back(std::move(hl));
  }
  if (number == 0) throw ParseError("line 1", "missing format tag");
  if (!saw_end) {
    throw ParseError("line " + std::to_string(number + 1),
                     "header not terminated by 'end'");
  }
  h.payload_offset = pos;
  return h;
}

[[noreturn]] void line_error(std::size_t number, const std::string& what) {
  throw ParseError("line " + std::to_string(number), what);
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    line_error(line, "expected an unsigned integer, got '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    line_error(line, "expected a number, got '" + s + "'");
  }
  return v;
}

// Cursor over header lines with keyed access.
class HeaderCursor {
 public:
  explicit HeaderCursor(const Header& h) : h_(h) {}

  const HeaderLine& next(std::string_view key) {
    if (i_ >= h_.lines.size()) {
      const std::size_t n = h_.lines.empty() ? 2 : h_.lines.back().number + 1;
      line_error(n, "missing '" + std::string(key) + "' record");
    }
    const HeaderLine& l = h_.lines[i_++];
    if (!key.empty() && l.words[0] != key) {
      line_error(l.number, "expected '" + std::string(key) + "', got '" +
                               l.words[0] + "'");
    }
    return l;
  }
  void expect_done() const {
    if (i_ < h_.lines.size()) {
      line_error(h_.lines[i_].number, "unexpected record '" +
                                          h_.lines[i_].words[0] + "'");
    }
  }

 private:
  const Header& h_;
  std::size_t i_ = 0;
};

Shape parse_shape_words(const HeaderLine& l) {
  if (l.words.size() < 2) line_error(l.number, "shape needs dimensions");
  Shape s;
  for (std::size_t i = 1; i < l.words.size(); ++i) {
    const auto d = parse_uint(l.words[i], l.number);
    if (d == 0) line_error(l.number, "dimension must be positive");
    s.push_back(d);
  }
  return s;
}

void write_architecture(Writer& w, const Architecture& arch) {
  w.text("input");
  for (std::size_t d : arch.input_shape) w.text(" " + std::to_string(d));
  w.text("\nclasses " + std::to_string(arch.num_classes) + "\n");
  w.text("layers " + std::to_string(arch.layers.size()) + "\n");
  for (const LayerSpec& layer : arch.layers) {
    if (const auto* c = std::get_if<Conv2D>(&layer)) {
      w.text("conv2d c_in=" + std::to_string(c->c_in) +
             " c_out=" + std::to_string(c->c_out) +
             " kernel=" + std::to_string(c->kernel) +
             " stride=" + std::to_string(c->stride) +
             " padding=" + std::to_string(c->padding) + "\n");
    } else if (const auto* d = std::get_if<Dense>(&layer)) {
      w.text("dense in=" + std::to_string(d->in_features) +
             " out=" + std::to_string(d->out_features) + "\n");
    } else if (std::holds_alternative<ReLU>(layer)) {
      w.text("relu\n");
    } else if (const auto* p = std::get_if<MaxPool>(&layer)) {
      w.text("maxpool window=" + std::to_string(p->window) + "\n");
    } else {
      w.text("flatten\n");
    }
  }
}

// Reads "name=value" fields in the given order.
std::vector<std::size_t> layer_fields(const HeaderLine& l,
                                      std::initializer_list<std::string_view> names) {
  if (l.words.size() != names.size() + 1) {
    line_error(l.number, "'" + l.words[0] + "' expects " +
                             std::to_string(names.size()) + " fields");
  }
  std::vector<std::size_t> out;
  std::size_t i = 1;
  for (std::string_view name : names) {
    const std::string& word = l.words[i++];
    const std::string prefix = std::string(name) + "=";
    if (word.rfind(prefix, 0) != 0) {
      line_error(l.number, "expected field '" + std::string(name) + "', got '" +
                               word + "'");
    }
    out.push_back(parse_uint(word.substr(prefix.size()), l.number));
  }
  return out;
}

Architecture read_architecture(HeaderCursor& cur) {
  Architecture arch;
  arch.input_shape = parse_shape_words(cur.next("input"));
  const HeaderLine& classes = cur.next("classes");
  if (classes.words.size() != 2) line_error(classes.number, "classes expects one value");
  arch.num_classes = parse_uint(classes.words[1], classes.number);
  const HeaderLine& layers = cur.next("layers");
  if (layers.words.size() != 2) line_error(layers.number, "layers expects one value");
  const auto count = parse_uint(layers.words[1], layers.number);
  for (std::uint64_t i = 0; i < count; ++i) {
    const HeaderLine& l = cur.next("");
    const std::string& kind = l.words[0];
    if (kind == "conv2d") {
      const auto f = layer_fields(l, {"c_in", "c_out", "kernel", "stride", "padding"});
      arch.layers.push_back(Conv2D{f[0], f[1], f[2], f[3], f[4]});
    } else if (kind == "dense") {
      const auto f = layer_fields(l, {"in", "out"});
      arch.layers.push_back(Dense{f[0], f[1]});
    } else if (kind == "relu") {
      layer_fields(l, {});
      arch.layers.push_back(ReLU{});
    } else if (kind == "maxpool") {
      arch.layers.push_back(MaxPool{layer_fields(l, {"window"})[0]});
    } else if (kind == "flatten") {
      layer_fields(l, {});
      arch.layers.push_back(Flatten{});
    } else {
      line_error(l.number, "unknown layer kind '" + kind + "'");
    }
  }
  try {
    arch.validate();
  } catch (const ShapeError& e) {
    throw ParseError("header", e.what());
  }
  return arch;
}

void encode_quant_body(Writer& w, const QuantModel& model) {
  for (const QuantLayer& l : model.layers) {
    w.u8(static_cast<std::uint8_t>(l.params.bits));
    w.f64(l.params.scale);
    w.dims(l.shape);
    for (std::int8_t c : l.codes) w.u8(static_cast<std::uint8_t>(c));
    w.f32_tensor(l.bias);
  }
}

QuantModel decode_quant_body(Reader& r, const Architecture& arch) {
  QuantModel model{arch, {}};
  for (std::size_t idx : arch.parametric_layers()) {
    const Shape shape = weight_shape(arch.layers[idx]);
    QuantLayer l;
    l.params.bits = r.u8();
    if (!is_supported_bitwidth(l.params.bits)) {
      throw ParseError("layer " + std::to_string(idx),
                       "unsupported bit width " + std::to_string(l.params.bits));
    }
    l.params.scale = r.f64();
    if (!(l.params.scale > 0.0)) {
      throw ParseError("layer " + std::to_string(idx), "scale must be positive");
    }
    l.shape = r.dims(shape);
    l.codes.resize(shape_size(shape));
    for (auto& c : l.codes) {
      c = static_cast<std::int8_t>(r.u8());
      if (c < code_min(l.params.bits) || c > code_max(l.params.bits)) {
        throw ParseError("layer " + std::to_string(idx),
                         "code " + std::to_string(c) + " outside bit width");
      }
    }
    l.bias = r.f32_tensor({shape[0]});
    model.layers.push_back(std::move(l));
  }
  return model;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path.string());
}

// ---- float model ----

std::string encode_model(const FloatModel& model) {
  model.validate();
  Writer w;
  w.text(std::string(kModelTag) + "\n");
  write_architecture(w, model.architecture);
  w.text("end\n");
  for (const ParamLayer& p : model.params) {
    w.f32_tensor(p.weights);
    w.f32_tensor(p.bias);
  }
  return w.take();
}

FloatModel decode_model(const std::string& bytes) {
  const Header h = read_header(bytes, kModelTag);
  HeaderCursor cur(h);
  FloatModel model{read_architecture(cur), {}};
  cur.expect_done();
  Reader r(bytes, h.payload_offset);
  for (std::size_t idx : model.architecture.parametric_layers()) {
    const Shape shape = weight_shape(model.architecture.layers[idx]);
    Tensor w = r.f32_tensor(shape);
    Tensor b = r.f32_tensor({shape[0]});
    model.params.push_back({std::move(w), std::move(b)});
  }
  r.expect_end();
  return model;
}

void save_model(const FloatModel& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}
FloatModel load_model(const std::filesystem::path& path) {
  return decode_model(read_file(path));
}

// ---- quantized model ----

std::string encode_qmodel(const QuantModel& model) {
  model.validate();
  Writer w;
  w.text(std::string(kQModelTag) + "\n");
  write_architecture(w, model.architecture);
  w.text("end\n");
  encode_quant_body(w, model);
  return w.take();
}

QuantModel decode_qmodel(const std::string& bytes) {
  const Header h = read_header(bytes, kQModelTag);
  HeaderCursor cur(h);
  const Architecture arch = read_architecture(cur);
  cur.expect_done();
  Reader r(bytes, h.payload_offset);
  QuantModel model = decode_quant_body(r, arch);
  r.expect_end();
  return model;
}

void save_qmodel(const QuantModel& model, const std::filesystem::path& path) {
  write_file(path, encode_qmodel(model));
}
QuantModel load_qmodel(const std::filesystem::path& path) {
  return decode_qmodel(read_file(path));
}

// ---- partial model ----

std::string encode_partial(const PartialModel& model) {
  model.validate();
  Writer w;
  w.text(std::string(kPartialTag) + "\n");
  write_architecture(w, model.architecture);
  w.text("end\n");
  QuantModel q{model.architecture, {}};
  for (const PartialLayer& l : model.layers) {
    q.layers.push_back({l.params, l.shape, l.codes, l.bias});
  }
  encode_quant_body(w, q);
  for (const PartialLayer& l : model.layers) {
    for (std::uint8_t m : l.masks) w.u8(m);
  }
  return w.take();
}

PartialModel decode_partial(const std::string& bytes) {
  const Header h = read_header(bytes, kPartialTag);
  HeaderCursor cur(h);
  const Architecture arch = read_architecture(cur);
  cur.expect_done();
  Reader r(bytes, h.payload_offset);
  QuantModel q = decode_quant_body(r, arch);
  PartialModel model{arch, {}};
  for (QuantLayer& l : q.layers) {
    PartialLayer p{l.params, l.shape, std::move(l.codes), {}, std::move(l.bias)};
    const unsigned full = (1u << p.params.bits) - 1u;
    p.masks.resize(p.codes.size());
    for (std::size_t i = 0; i < p.masks.size(); ++i) {
      p.masks[i] = r.u8();
      if (p.masks[i] & ~full) {
        throw ParseError("mask " + std::to_string(i), "bit above code width");
      }
    }
    model.layers.push_back(std::move(p));
  }
  r.expect_end();
  return model;
}

void save_partial(const PartialModel& model, const std::filesystem::path& path) {
  write_file(path, encode_partial(model));
}
PartialModel load_partial(const std::filesystem::path& path) {
  return decode_partial(read_file(path));
}

// ---- dataset ----

std::string encode_dataset(const Dataset& data, const Shape& shape,
                           std::size_t num_classes) {
  if (num_classes == 0 || num_classes > 256) {
    throw Error("dataset files hold between 1 and 256 classes");
  }
  data.validate(shape, num_classes);
  Writer w;
  w.text(std::string(kDataTag) + "\nshape");
  for (std::size_t d : shape) w.text(" " + std::to_string(d));
  w.text("\nclasses " + std::to_string(num_classes) + "\nsamples " +
         std::to_string(data.size()) + "\nend\n");
  for (const Tensor& x : data.inputs) {
    for (double v : x.data()) w.f32(v);
  }
  for (std::size_t label : data.labels) w.u8(static_cast<std::uint8_t>(label));
  return w.take();
}

LoadedDataset decode_dataset(const std::string& bytes) {
  const Header h = read_header(bytes, kDataTag);
  HeaderCursor cur(h);
  LoadedDataset out;
  out.shape = parse_shape_words(cur.next("shape"));
  const HeaderLine& classes = cur.next("classes");
  if (classes.words.size() != 2) line_error(classes.number, "classes expects one value");
  out.num_classes = parse_uint(classes.words[1], classes.number);
  if (out.num_classes == 0 || out.num_classes > 256) {
    line_error(classes.number, "class count must lie in [1, 256]");
  }
  const HeaderLine& samples = cur.next("samples");
  if (samples.words.size() != 2) line_error(samples.number, "samples expects one value");
  const auto n = parse_uint(samples.words[1], samples.number);
  cur.expect_done();

  Reader r(bytes, h.payload_offset);
  const std::size_t dim = shape_size(out.shape);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<double> x(dim);
    for (double& v : x) v = r.f32();
    out.data.inputs.emplace_back(out.shape, std::move(x));
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint8_t label = r.u8();
    if (label >= out.num_classes) {
      throw ParseError("label " + std::to_string(i),
                       "label " + std::to_string(label) + " out of range");
    }
    out.data.labels.push_back(label);
  }
  r.expect_end();
  return out;
}

void save_dataset(const Dataset& data, const Shape& shape,
                  std::size_t num_classes, const std::filesystem::path& path) {
  write_file(path, encode_dataset(data, shape, num_classes));
}
LoadedDataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_file(path));
}

// ---- attack trace ----

std::string encode_trace(const AttackTrace& trace) {
  const AttackConfig& c = trace.config;
  std::string out(kTraceTag);
  out += "\nnq " + std::to_string(c.bits);
  out += "\nrp " + format_double(c.recovery_rate);
  out += "\nseed " + std::to_string(c.seed);
  out += "\nranking " + c.ranking;
  out += "\nrecon " + c.reconstruction;
  out += "\nnbf " + std::to_string(c.n_flips);
  out += "\nflips " + std::to_string(trace.flips.size()) + "\n";
  for (const FlipRecord& f : trace.flips) {
    out += std::to_string(f.filter.layer) + " " +
           std::to_string(f.filter.filter) + " " + std::to_string(f.weight) +
           " " + std::to_string(f.bit) + "\n";
  }
  out += "accuracy " + std::to_string(trace.accuracy.size()) + "\n";
  for (double a : trace.accuracy) out += format_double(a) + "\n";
  out += "end\n";
  return out;
}

AttackTrace decode_trace(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  {
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      std::vector<std::string> words;
      std::istringstream ls(line);
      for (std::string w; ls >> w;) words.push_back(w);
      lines.push_back(std::move(words));
    }
  }
  std::size_t i = 0;
  auto next = [&](std::string_view key, std::size_t arity) -> const std::vector<std::string>& {
    if (i >= lines.size()) line_error(i + 1, "unexpected end of trace");
    const auto& words = lines[i++];
    if (words.size() != arity + (key.empty() ? 0 : 1) ||
        (!key.empty() && words[0] != key)) {
      line_error(i, key.empty() ? "malformed record"
                                : "expected '" + std::string(key) + "' record");
    }
    return words;
  };
  if (lines.empty() || lines[0].size() != 1 || lines[0][0] != kTraceTag) {
    line_error(1, "expected format tag '" + std::string(kTraceTag) + "'");
  }
  ++i;
  // Each `next` advances i, so the line number is read after the call.
  auto uint_field = [&](std::string_view key) {
    const std::string& v = next(key, 1)[1];
    return parse_uint(v, i);
  };
  AttackTrace t;
  t.config.bits = static_cast<int>(uint_field("nq"));
  {
    const std::string& v = next("rp", 1)[1];
    t.config.recovery_rate = parse_double(v, i);
  }
  t.config.seed = uint_field("seed");
  t.config.ranking = next("ranking", 1)[1];
  t.config.reconstruction = next("recon", 1)[1];
  t.config.n_flips = uint_field("nbf");
  const auto n_flips = uint_field("flips");
  for (std::uint64_t k = 0; k < n_flips; ++k) {
    const auto& w = next("", 4);
    t.flips.push_back({{parse_uint(w[0], i), parse_uint(w[1], i)},
                       parse_uint(w[2], i),
                       static_cast<int>(parse_uint(w[3], i))});
  }
  const auto n_acc = uint_field("accuracy");
  for (std::uint64_t k = 0; k < n_acc; ++k) {
    const std::string& v = next("", 1)[0];
    const double a = parse_double(v, i);
    if (a < 0.0 || a > 1.0) line_error(i, "accuracy outside [0, 1]");
    t.accuracy.push_back(a);
  }
  next("end", 0);
  return t;
}

void save_trace(const AttackTrace& trace, const std::filesystem::path& path) {
  write_file(path, encode_trace(trace));
}
AttackTrace load_trace(const std::filesystem::path& path) {
  return decode_trace(read_file(path));
}

}  // namespace bitsiege
