#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wad/core/error.hpp"
#include "wad/core/rng.hpp"
#include "wad/nn/network.hpp"

namespace wad::nn {

// Checkpoint file: 8-byte magic "WADCKPT1", an ASCII manifest (meta lines,
// then one line per parameter: name, shape, element count, byte offset into
// the payload), then the payload of little-endian float32 values. Round trips
// are bit-exact.

inline constexpr char kCheckpointMagic[8] = {'W', 'A', 'D', 'C', 'K', 'P', 'T', '1'};

struct ParamBag {
  std::map<std::string, std::string> meta;
  std::map<std::string, Tensor<float>> entries;
};

namespace detail {

inline void write_f32_le(std::ostream& os, const float* data, std::size_t n) {
  std::vector<unsigned char> buf(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t u;
    std::memcpy(&u, &data[i], 4);
    buf[4 * i + 0] = u & 0xff;
    buf[4 * i + 1] = (u >> 8) & 0xff;
    buf[4 * i + 2] = (u >> 16) & 0xff;
    buf[4 * i + 3] = (u >> 24) & 0xff;
  }
  os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

inline void read_f32_le(const unsigned char* buf, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t u = std::uint32_t(buf[4 * i]) | (std::uint32_t(buf[4 * i + 1]) << 8) |
                      (std::uint32_t(buf[4 * i + 2]) << 16) | (std::uint32_t(buf[4 * i + 3]) << 24);
    std::memcpy(&out[i], &u, 4);
  }
}

}  // namespace detail

inline void save_checkpoint(const std::vector<const Network<float>*>& nets, const std::string& path,
                            const std::map<std::string, std::string>& meta = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::io, "cannot open checkpoint for writing: " + path);
  os.write(kCheckpointMagic, 8);

  std::ostringstream manifest;
  for (const auto& [k, v] : meta) manifest << "meta " << k << "=" << v << "\n";
  std::uint64_t offset = 0, total = 0;
  for (const auto* net : nets)
    for (const auto& p : net->params()) {
      manifest << "param " << net->name() << "." << p.name << " " << p.value.shape.size();
      for (int d : p.value.shape) manifest << " " << d;
      manifest << " " << p.value.size() << " " << offset << "\n";
      offset += std::uint64_t(p.value.size()) * 4;
      total += std::uint64_t(p.value.size());
    }
  manifest << "payload " << total << "\n";
  const std::string m = manifest.str();
  os << m;
  for (const auto* net : nets)
    for (const auto& p : net->params()) detail::write_f32_le(os, p.value.ptr(), std::size_t(p.value.size()));
  if (!os) throw Error(ErrorCode::io, "short write on checkpoint: " + path);
}

inline ParamBag load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::io, "cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (is.gcount() != 8 || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw Error(ErrorCode::checkpoint_version, "bad magic in " + path);

  ParamBag bag;
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::uint64_t count, offset;
  };
  std::vector<Entry> entries;
  std::uint64_t payload_count = 0;
  std::string line;
  bool saw_payload = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string kv;
      std::getline(ls, kv);
      if (!kv.empty() && kv[0] == ' ') kv.erase(0, 1);
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::checkpoint_corrupt, "bad meta line");
      bag.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
    } else if (tag == "param") {
      Entry e;
      int ndim = 0;
      ls >> e.name >> ndim;
      if (!ls || ndim < 0 || ndim > 8) throw Error(ErrorCode::checkpoint_corrupt, "bad param line");
      e.shape.resize(ndim);
      for (int i = 0; i < ndim; ++i) ls >> e.shape[i];
      ls >> e.count >> e.offset;
      if (!ls) throw Error(ErrorCode::checkpoint_corrupt, "bad param line");
      if (std::uint64_t(shape_numel(e.shape)) != e.count)
        throw Error(ErrorCode::checkpoint_corrupt, "shape does not match element count for " + e.name);
      entries.push_back(std::move(e));
    } else if (tag == "payload") {
      ls >> payload_count;
      saw_payload = true;
      break;
    } else {
      throw Error(ErrorCode::checkpoint_corrupt, "unexpected manifest line: " + line);
    }
  }
  if (!saw_payload) throw Error(ErrorCode::checkpoint_corrupt, "manifest missing payload line");

  std::vector<unsigned char> payload(payload_count * 4);
  is.read(reinterpret_cast<char*>(payload.data()), std::streamsize(payload.size()));
  if (std::uint64_t(is.gcount()) != payload.size())
    throw Error(ErrorCode::checkpoint_corrupt, "truncated payload in " + path);

  for (const auto& e : entries) {
    if (e.offset + e.count * 4 > payload.size())
      throw Error(ErrorCode::checkpoint_corrupt, "payload overrun for " + e.name);
    Tensor<float> t(e.shape);
    detail::read_f32_le(payload.data() + e.offset, t.ptr(), e.count);
    bag.entries[e.name] = std::move(t);
  }
  return bag;
}

// Copies parameters for `net` out of the bag. Every parameter of the network
// must be present with the right shape; marks consumed entries.
inline void load_params(Network<float>& net, ParamBag& bag, std::vector<std::string>* consumed = nullptr) {
  for (auto& p : net.params()) {
    const std::string full = net.name() + "." + p.name;
    auto it = bag.entries.find(full);
    if (it == bag.entries.end())
      throw Error(ErrorCode::unknown_parameter, "checkpoint has no entry for " + full);
    if (!same_shape(it->second.shape, p.value.shape))
      throw Error(ErrorCode::dimension_mismatch, "checkpoint shape mismatch on " + full);
    p.value = it->second;
    if (consumed) consumed->push_back(full);
  }
}

// Content hash used by the encoder freeze guard and report metadata.
inline std::uint64_t params_hash(const std::vector<const Network<float>*>& nets) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto* net : nets)
    for (const auto& p : net->params()) {
      h = fnv1a(p.name.data(), p.name.size(), h);
      h = fnv1a(p.value.ptr(), std::size_t(p.value.size()) * sizeof(float), h);
    }
  return h;
}

}  // namespace wad::nn
