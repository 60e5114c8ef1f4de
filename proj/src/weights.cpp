#include "edn/weights.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace edn {

namespace {

constexpr char kMagic[4] = {'E', 'D', 'N', 'W'};

std::uint32_t to_le(std::uint32_t v) noexcept {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

void put_u32(std::string& out, std::uint32_t v) {
  v = to_le(v);
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(std::string("weights: truncated ") + what + ", need " + std::to_string(n) +
                            " bytes, have " + std::to_string(remaining()),
                        pos_);
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return to_le(v);
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

WeightsEntry entry(std::string name, std::vector<std::uint32_t> dims, std::vector<float> values) {
  return {std::move(name), std::move(dims), std::move(values)};
}

std::vector<std::uint32_t> dims_of(const Shape4& s) {
  return {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c), static_cast<std::uint32_t>(s.h),
          static_cast<std::uint32_t>(s.w)};
}

std::vector<std::uint32_t> dims_of(const std::vector<float>& v) { return {static_cast<std::uint32_t>(v.size())}; }

std::string dims_string(const std::vector<std::uint32_t>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s + "]";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace

std::vector<WeightsEntry> collect_entries(const ParamStore& params) {
  std::vector<WeightsEntry> out;
  for (const auto& [path, layer] : params) {
    const LayerParams& p = layer.params;
    out.push_back(entry(path + ".weight", dims_of(p.weight.shape()), p.weight.storage()));
    if (p.bias) out.push_back(entry(path + ".bias", dims_of(*p.bias), *p.bias));
    if (p.bn) {
      out.push_back(entry(path + ".bn_gamma", dims_of(p.bn->gamma), p.bn->gamma));
      out.push_back(entry(path + ".bn_beta", dims_of(p.bn->beta), p.bn->beta));
      out.push_back(entry(path + ".bn_mean", dims_of(p.bn->mean), p.bn->mean));
      out.push_back(entry(path + ".bn_var", dims_of(p.bn->var), p.bn->var));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

std::string encode_weights(const std::vector<WeightsEntry>& entries) {
  std::string out(kMagic, 4);
  put_u32(out, kWeightsVersion);
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    std::size_t count = 1;
    for (auto d : e.dims) count *= d;
    if (count != e.values.size()) {
      throw DimensionError("weights: entry '" + e.name + "' has " + std::to_string(e.values.size()) +
                           " values for dims " + dims_string(e.dims));
    }
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put_u32(out, static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims) put_u32(out, d);
    for (float f : e.values) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

std::vector<WeightsEntry> decode_weights(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(std::min<std::size_t>(4, bytes.size()), "magic") != std::string_view(kMagic, 4)) {
    throw FormatError("weights: bad magic, expected EDNW", 0);
  }
  const std::size_t version_at = r.pos();
  const std::uint32_t version = r.u32("version");
  if (version != kWeightsVersion) {
    throw FormatError("weights: unsupported version " + std::to_string(version), version_at);
  }
  const std::uint32_t count = r.u32("entry count");
  std::vector<WeightsEntry> out;
  std::map<std::string, std::size_t, std::less<>> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t entry_at = r.pos();
    const std::uint32_t name_len = r.u32("name length");
    WeightsEntry e;
    e.name = std::string(r.take(name_len, "name"));
    if (!seen.emplace(e.name, entry_at).second) {
      throw FormatError("weights: duplicate entry '" + e.name + "'", entry_at);
    }
    const std::uint32_t ndim = r.u32("ndim");
    r.need(static_cast<std::size_t>(ndim) * 4, "dims");
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      e.dims.push_back(r.u32("dims"));
      n *= e.dims.back();
      if (n > bytes.size()) break;  // the payload check below reports it
    }
    if (n > r.remaining() / 4) {
      throw FormatError("weights: truncated payload of '" + e.name + "', dims " + dims_string(e.dims), r.pos());
    }
    e.values.resize(static_cast<std::size_t>(n));
    for (auto& v : e.values) v = std::bit_cast<float>(r.u32("payload"));
    out.push_back(std::move(e));
  }
  if (r.remaining() != 0) {
    throw FormatError("weights: " + std::to_string(r.remaining()) + " trailing bytes after last entry", r.pos());
  }
  return out;
}

void apply_entries(ParamStore& params, const std::vector<WeightsEntry>& entries) {
  std::map<std::string_view, const WeightsEntry*, std::less<>> by_name;
  for (const auto& e : entries) {
    if (!by_name.emplace(e.name, &e).second) throw ValidationError("duplicate parameter '" + e.name + "'");
  }
  const std::vector<WeightsEntry> expected = collect_entries(params);
  for (const auto& want : expected) {
    const auto it = by_name.find(want.name);
    const std::string layer = want.name.substr(0, want.name.rfind('.'));
    if (it == by_name.end()) {
      throw ValidationError("missing parameter '" + want.name + "' for layer '" + layer + "'");
    }
    if (it->second->dims != want.dims) {
      throw ValidationError("mis-shaped parameter '" + want.name + "': file has " + dims_string(it->second->dims) +
                            ", layer '" + layer + "' expects " + dims_string(want.dims));
    }
  }
  if (by_name.size() != expected.size()) {
    for (const auto& e : entries) {
      const bool known = std::binary_search(expected.begin(), expected.end(), e,
                                            [](const auto& a, const auto& b) { return a.name < b.name; });
      if (!known) throw ValidationError("unknown parameter '" + e.name + "'");
    }
  }
  for (const auto& e : entries) {
    if (e.name.ends_with(".bn_var")) {
      for (float v : e.values) {
        if (!(v > 0.0f)) throw ValidationError("parameter '" + e.name + "': variance must be > 0");
      }
    }
  }
  for (auto& [path, layer] : params) {
    LayerParams& p = layer.params;
    const auto values = [&](const char* suffix) -> const std::vector<float>& {
      return by_name.find(path + suffix)->second->values;
    };
    p.weight = Tensor4(p.weight.shape(), values(".weight"));
    if (p.bias) *p.bias = values(".bias");
    if (p.bn) {
      p.bn->gamma = values(".bn_gamma");
      p.bn->beta = values(".bn_beta");
      p.bn->mean = values(".bn_mean");
      p.bn->var = values(".bn_var");
    }
  }
}

void save_weights(const EdnModel& model, const std::filesystem::path& path) {
  const std::string bytes = encode_weights(collect_entries(model.params));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void load_weights(EdnModel& model, const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::vector<WeightsEntry> entries;
  try {
    entries = decode_weights(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
  apply_entries(model.params, entries);
}

}  // namespace edn
