#include "havana/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "havana/io_util.hpp"

namespace havana {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'H', 'V', 'N', 'A'};
constexpr std::uint32_t kVersion = 1;

void append_u16(std::string& buf, std::uint16_t v) {
  buf.append(reinterpret_cast<const char*>(&v), 2);
}
void append_u32(std::string& buf, std::uint32_t v) {
  buf.append(reinterpret_cast<const char*>(&v), 4);
}
void append_f64(std::string& buf, double v) {
  buf.append(reinterpret_cast<const char*>(&v), 8);
}

struct Reader {
  const std::string& data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw FormatError("checkpoint: truncated file");
  }
  void bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, data.data() + pos, n);
    pos += n;
  }
  std::uint16_t u16() {
    std::uint16_t v;
    bytes(&v, 2);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = data.substr(pos, n);
    pos += n;
    return s;
  }
};

struct TensorRecord {
  std::uint8_t rank = 0;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

std::uint32_t crc_of(const std::string& buf) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(buf.data()),
            static_cast<uInt>(buf.size())));
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string buf;
  buf.append(kMagic, 4);
  append_u32(buf, ckpt.version);
  append_u32(buf, static_cast<std::uint32_t>(ckpt.config_json.size()));
  buf.append(ckpt.config_json);

  Parameters params = ckpt.params;  // tensor_refs needs mutable access
  for (const TensorRef& ref : tensor_refs(params)) {
    append_u16(buf, static_cast<std::uint16_t>(ref.name.size()));
    buf.append(ref.name);
    if (ref.mat) {
      buf.push_back(2);
      append_u32(buf, static_cast<std::uint32_t>(ref.mat->rows()));
      append_u32(buf, static_cast<std::uint32_t>(ref.mat->cols()));
      for (Eigen::Index r = 0; r < ref.mat->rows(); ++r) {
        for (Eigen::Index c = 0; c < ref.mat->cols(); ++c) {
          append_f64(buf, (*ref.mat)(r, c));
        }
      }
    } else {
      buf.push_back(1);
      append_u32(buf, static_cast<std::uint32_t>(ref.vec->size()));
      for (Eigen::Index i = 0; i < ref.vec->size(); ++i) {
        append_f64(buf, (*ref.vec)[i]);
      }
    }
  }
  append_u32(buf, crc_of(buf));

  atomic_write(path, [&](std::ostream& os) { os.write(buf.data(), static_cast<std::streamsize>(buf.size())); });
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();

  if (data.size() < 12) throw FormatError("checkpoint: truncated file");

  // Identify the file before checksumming so a wrong magic or version is
  // reported as such rather than as generic corruption.
  const std::string body = data.substr(0, data.size() - 4);
  Reader r{body};
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic bytes");
  }
  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != kVersion) {
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(ckpt.version));
  }

  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, data.data() + data.size() - 4, 4);
  if (crc_of(body) != stored_crc) {
    throw FormatError("checkpoint: CRC-32 mismatch");
  }
  ckpt.config_json = r.str(r.u32());

  std::map<std::string, TensorRecord> records;
  while (r.pos < body.size()) {
    const std::string name = r.str(r.u16());
    TensorRecord rec;
    std::uint8_t rank;
    r.bytes(&rank, 1);
    rec.rank = rank;
    if (rank < 1 || rank > 2) {
      throw FormatError("checkpoint: tensor '" + name + "' has bad rank");
    }
    std::size_t count = 1;
    for (int d = 0; d < rank; ++d) {
      rec.dims.push_back(r.u32());
      count *= rec.dims.back();
    }
    rec.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) rec.values[i] = r.f64();
    if (!records.emplace(name, std::move(rec)).second) {
      throw FormatError("checkpoint: duplicate tensor '" + name + "'");
    }
  }

  auto take_mat = [&](const std::string& name) {
    auto it = records.find(name);
    if (it == records.end() || it->second.rank != 2) {
      throw FormatError("checkpoint: missing matrix tensor '" + name + "'");
    }
    const TensorRecord& rec = it->second;
    MatX m(rec.dims[0], rec.dims[1]);
    std::size_t k = 0;
    for (Eigen::Index row = 0; row < m.rows(); ++row) {
      for (Eigen::Index col = 0; col < m.cols(); ++col) {
        m(row, col) = rec.values[k++];
      }
    }
    records.erase(it);
    return m;
  };
  auto take_vec = [&](const std::string& name) {
    auto it = records.find(name);
    if (it == records.end() || it->second.rank != 1) {
      throw FormatError("checkpoint: missing vector tensor '" + name + "'");
    }
    VecX v(it->second.dims[0]);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v[i] = it->second.values[static_cast<std::size_t>(i)];
    }
    records.erase(it);
    return v;
  };

  for (std::size_t s = 0; s < ckpt.params.stages.size(); ++s) {
    const std::string prefix = "encoder.stage" + std::to_string(s) + ".";
    ckpt.params.stages[s].w1 = take_mat(prefix + "w1");
    ckpt.params.stages[s].b1 = take_vec(prefix + "b1");
    ckpt.params.stages[s].w2 = take_mat(prefix + "w2");
    ckpt.params.stages[s].b2 = take_vec(prefix + "b2");
  }
  ckpt.params.out_w = take_mat("encoder.out.w");
  ckpt.params.out_b = take_vec("encoder.out.b");
  if (records.count("head.w") || records.count("head.b")) {
    HeadParams head;
    head.w = take_mat("head.w");
    head.b = take_vec("head.b");
    ckpt.params.head = std::move(head);
  }
  if (!records.empty()) {
    throw FormatError("checkpoint: unexpected tensor '" +
                      records.begin()->first + "'");
  }
  return ckpt;
}

}  // namespace havana
