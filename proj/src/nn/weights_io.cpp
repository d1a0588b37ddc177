#include "curekit/nn/weights_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "curekit/util/errors.hpp"

namespace curekit::nn {

namespace {

constexpr char kMagic[4] = {'C', 'K', 'W', '1'};

// The toolchain targets are little-endian; serialize via memcpy of native
// representation and verify at load with the magic check.
void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_i64(std::ostream& os, int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw DataError("weights file truncated");
  return v;
}
int64_t get_i64(std::istream& is) {
  int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  if (!is) throw DataError("weights file truncated");
  return v;
}
std::string get_str(std::istream& is) {
  uint32_t n = get_u32(is);
  if (n > (1u << 20)) throw DataError("weights file: string length " + std::to_string(n) + " implausible");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw DataError("weights file truncated");
  return s;
}

}  // namespace

const WeightsFile::Block& WeightsFile::find(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw DataError("weights file: missing block '" + name + "'");
}

void save_weights(const std::string& path, const std::map<std::string, std::string>& config,
                  const ParamStore<float>& params) {
  save_weights(path, config, params, {});
}

void save_weights(const std::string& path, const std::map<std::string, std::string>& config,
                  const ParamStore<float>& params, const std::vector<WeightsFile::Block>& extra) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write weights file: " + path);
  os.write(kMagic, 4);
  put_u32(os, static_cast<uint32_t>(config.size()));
  for (const auto& [k, v] : config) {
    put_str(os, k);
    put_str(os, v);
  }
  put_u32(os, static_cast<uint32_t>(params.size() + extra.size()));
  for (const auto& up : params) {
    put_str(os, up->name);
    put_u32(os, static_cast<uint32_t>(up->t.shape.size()));
    for (int64_t d : up->t.shape) put_i64(os, d);
    os.write(reinterpret_cast<const char*>(up->t.data.data()),
             static_cast<std::streamsize>(up->t.data.size() * sizeof(float)));
  }
  for (const auto& b : extra) {
    put_str(os, b.name);
    put_u32(os, static_cast<uint32_t>(b.shape.size()));
    for (int64_t d : b.shape) put_i64(os, d);
    os.write(reinterpret_cast<const char*>(b.data.data()),
             static_cast<std::streamsize>(b.data.size() * sizeof(float)));
  }
  if (!os) throw DataError("failed writing weights file: " + path);
}

WeightsFile load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open weights file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw DataError("not a weights file: " + path);
  WeightsFile wf;
  uint32_t nconf = get_u32(is);
  for (uint32_t i = 0; i < nconf; ++i) {
    std::string k = get_str(is);
    wf.config[k] = get_str(is);
  }
  uint32_t nblocks = get_u32(is);
  for (uint32_t i = 0; i < nblocks; ++i) {
    WeightsFile::Block b;
    b.name = get_str(is);
    uint32_t ndim = get_u32(is);
    if (ndim > 8) throw DataError("weights file: rank " + std::to_string(ndim) + " implausible");
    b.shape.resize(ndim);
    int64_t numel = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      b.shape[d] = get_i64(is);
      if (b.shape[d] <= 0) throw DataError("weights file: non-positive dim in '" + b.name + "'");
      numel *= b.shape[d];
    }
    b.data.resize(static_cast<size_t>(numel));
    is.read(reinterpret_cast<char*>(b.data.data()), static_cast<std::streamsize>(numel * sizeof(float)));
    if (!is) throw DataError("weights file truncated in block '" + b.name + "'");
    wf.blocks.push_back(std::move(b));
  }
  return wf;
}

void fill_params(const WeightsFile& wf, ParamStore<float>& params) {
  for (auto& up : params) {
    const auto& b = wf.find(up->name);
    if (b.shape != up->t.shape)
      throw DataError("weights file: block '" + up->name + "' has shape " + shape_str(b.shape) + ", expected " +
                      shape_str(up->t.shape));
    up->t.data = b.data;
  }
}

void fill_params_prefix(const WeightsFile& wf, ParamStore<float>& params, const std::string& prefix) {
  for (auto& up : params) {
    if (up->name.rfind(prefix, 0) != 0) continue;
    const auto& b = wf.find(up->name);
    if (b.shape != up->t.shape)
      throw DataError("weights file: block '" + up->name + "' has shape " + shape_str(b.shape) + ", expected " +
                      shape_str(up->t.shape));
    up->t.data = b.data;
  }
}

}  // namespace curekit::nn
