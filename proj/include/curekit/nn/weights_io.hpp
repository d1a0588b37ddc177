#pragma once

#include <map>
#include <string>
#include <vector>

#include "curekit/nn/tensor.hpp"

namespace curekit::nn {

// Binary weights container. Layout, all integers little-endian:
//   magic "CKW1"
//   u32 config entry count, then per entry: u32 keylen, key, u32 vallen, val
//   u32 block count, then per block: u32 namelen, name, u32 ndim,
//     ndim x i64 dims, numel x f32 row-major
struct WeightsFile {
  std::map<std::string, std::string> config;
  struct Block {
    std::string name;
    std::vector<int64_t> shape;
    std::vector<float> data;
  };
  std::vector<Block> blocks;

  const Block& find(const std::string& name) const;
};

void save_weights(const std::string& path, const std::map<std::string, std::string>& config,
                  const ParamStore<float>& params);

// Same, with extra named blocks appended (e.g. optimizer state in a
// training checkpoint).
void save_weights(const std::string& path, const std::map<std::string, std::string>& config,
                  const ParamStore<float>& params, const std::vector<WeightsFile::Block>& extra);

WeightsFile load_weights(const std::string& path);

// Copies blocks into an already-built store; every store parameter must be
// present with a matching shape. Extra blocks in the file are ignored.
void fill_params(const WeightsFile& wf, ParamStore<float>& params);

// Same, restricted to store parameters whose names start with `prefix`
// (e.g. loading pre-trained language-model weights into a larger model).
void fill_params_prefix(const WeightsFile& wf, ParamStore<float>& params, const std::string& prefix);

}  // namespace curekit::nn
