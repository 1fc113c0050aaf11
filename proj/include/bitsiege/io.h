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

#ifndef BITSIEGE_IO_H_
#define BITSIEGE_IO_H_

#include <filesystem>
#include <string>

#include "bitsiege/attack.h"
#include "bitsiege/model.h"
#include "bitsiege/quantization.h"
#include "bitsiege/recovery.h"

// File formats. Each file opens with a text header (format tag on the first
// line, then one "key value..." record per line, closed by a line "end").
// Binary payloads follow the header and are little-endian. A tensor in a
// payload is its rank as u32, its dimensions as u32, then its elements.
//
//   bitsiege-model-v1    header: input, classes, layers + one line per layer
//                        payload: per parametric layer, weights then bias
//                        tensors of f32
//   bitsiege-qmodel-v1   header as above; payload per parametric layer:
//                        bit width (u8), scale (f64), code tensor of i8
//                        (sign-extended), bias tensor of f32
//   bitsiege-partial-v1  qmodel payload followed by, per layer, one mask
//                        byte per weight (recovered bits in the low bits)
//   bitsiege-data-v1     header: shape, classes, samples; payload: f32
//                        samples then u8 labels
//   bitsiege-trace-v1    text only, see save_trace

namespace bitsiege {

std::string encode_model(const FloatModel& model);
FloatModel decode_model(const std::string& bytes);
void save_model(const FloatModel& model, const std::filesystem::path& path);
FloatModel load_model(const std::filesystem::path& path);

std::string encode_qmodel(const QuantModel& model);
QuantModel decode_qmodel(const std::string& bytes);
void save_qmodel(const QuantModel& model, const std::filesystem::path& path);
QuantModel load_qmodel(const std::filesystem::path& path);

std::string encode_partial(const PartialModel& model);
PartialModel decode_partial(const std::string& bytes);
void save_partial(const PartialModel& model, const std::filesystem::path& path);
PartialModel load_partial(const std::filesystem::path& path);

std::string encode_dataset(const Dataset& data, const Shape& shape,
                           std::size_t num_classes);
struct LoadedDataset {
  Dataset data;
  Shape shape;
  std::size_t num_classes = 0;
};
LoadedDataset decode_dataset(const std::string& bytes);
void save_dataset(const Dataset& data, const Shape& shape,
                  std::size_t num_classes, const std::filesystem::path& path);
LoadedDataset load_dataset(const std::filesystem::path& path);

/// Text record:
///   bitsiege-trace-v1
///   nq 8 / rp 0.7 / seed 3 / ranking fl2r / recon czr / nbf 100
///   flips <n>      then n lines "layer filter weight bit"
///   accuracy <n>   then n lines, one value each (%.17g)
///   end
std::string encode_trace(const AttackTrace& trace);
AttackTrace decode_trace(const std::string& text);
void save_trace(const AttackTrace& trace, const std::filesystem::path& path);
AttackTrace load_trace(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace bitsiege

#endif  // BITSIEGE_IO_H_
