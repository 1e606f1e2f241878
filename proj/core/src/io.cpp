#include "orn/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "config_json.hpp"
#include "orn/error.hpp"
#include "orn/model.hpp"

namespace orn::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kShardMagic[4] = {'O', 'R', 'N', 'V'};
constexpr char kCheckpointMagic[4] = {'O', 'R', 'N', 'C'};
constexpr std::uint32_t kShardVersion = 1;
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put(out, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  void magic(const char (&m)[4]) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, m, 4) != 0) throw FormatError(what_ + ": bad magic");
    pos_ += 4;
  }
  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError(what_ + ": truncated file");
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::uint8_t* here() const { return bytes_.data() + pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::u8: return 1;
    case DType::f32: return 4;
  }
  return 0;
}

json annotation_json(const InstanceAnnotation& a) {
  return {{"instance", a.instance_index},
          {"class_distribution", a.class_distribution},
          {"score", a.score},
          {"rle", rle_encode(a.mask)}};
}

InstanceAnnotation annotation_from(const json& j, std::size_t h, std::size_t w) {
  InstanceAnnotation a;
  a.instance_index = j.at("instance").get<std::size_t>();
  a.class_distribution = j.at("class_distribution").get<std::vector<float>>();
  a.score = j.at("score").get<float>();
  const auto counts = j.at("rle").get<std::vector<std::uint32_t>>();
  a.mask = rle_decode(counts, h, w);
  a.validate(a.class_distribution.size());
  return a;
}

}  // namespace

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw FormatError("write failed for " + path.string());
}

void write_shard(const fs::path& path, const Shard& shard) {
  std::uint64_t n = 1;
  for (auto d : shard.shape) n *= d;
  if (n * dtype_size(shard.dtype) != shard.bytes.size()) throw FormatError("shard payload does not match its shape");
  std::vector<std::uint8_t> out(kShardMagic, kShardMagic + 4);
  put(out, kShardVersion);
  put(out, static_cast<std::uint32_t>(shard.dtype));
  put(out, static_cast<std::uint32_t>(shard.shape.size()));
  for (auto d : shard.shape) put(out, d);
  out.insert(out.end(), shard.bytes.begin(), shard.bytes.end());
  write_file(path, out);
}

Shard read_shard(const fs::path& path) {
  const auto bytes = read_file(path);
  Reader r(bytes, path.string());
  r.magic(kShardMagic);
  if (auto v = r.get<std::uint32_t>(); v != kShardVersion) {
    throw FormatError(path.string() + ": unsupported shard version " + std::to_string(v));
  }
  Shard s;
  const auto dtype = r.get<std::uint32_t>();
  if (dtype != static_cast<std::uint32_t>(DType::u8) && dtype != static_cast<std::uint32_t>(DType::f32)) {
    throw FormatError(path.string() + ": unknown dtype " + std::to_string(dtype));
  }
  s.dtype = static_cast<DType>(dtype);
  const auto rank = r.get<std::uint32_t>();
  std::uint64_t n = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    s.shape.push_back(r.get<std::uint64_t>());
    n *= s.shape.back();
  }
  const std::uint64_t size = n * dtype_size(s.dtype);
  if (r.remaining() != size) throw FormatError(path.string() + ": payload size does not match the shape");
  s.bytes.assign(r.here(), r.here() + size);
  return s;
}

void write_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir / "shards");
  json videos = json::array();
  for (const auto& v : data.videos) {
    char name[48];
    std::snprintf(name, sizeof(name), "shards/video_%06llu.ornv", static_cast<unsigned long long>(v.index));
    write_shard(dir / name, {DType::u8, {3, v.frames, v.height, v.width}, v.pixels});
    json events = json::array();
    for (const auto& e : v.events) {
      events.push_back({{"kind", world::to_string(e.kind)}, {"frame", e.frame}, {"actor", e.actor}, {"target", e.target}});
    }
    json frames = json::array();
    for (const auto& f : v.annotations) {
      json anns = json::array();
      for (const auto& a : f) anns.push_back(annotation_json(a));
      frames.push_back(std::move(anns));
    }
    json jv = {{"id", "video_" + std::to_string(v.index)},
               {"index", v.index},
               {"shard", name},
               {"frames", v.frames},
               {"height", v.height},
               {"width", v.width},
               {"events", std::move(events)},
               {"annotations", std::move(frames)}};
    if (data.world.multi_label()) {
      jv["labels"] = v.label.multi_hot;
    } else {
      jv["label"] = v.label.label;
    }
    videos.push_back(std::move(jv));
  }
  json manifest = {{"format", "orn-dataset"},
                   {"version", 1},
                   {"world", data.world},
                   {"num_activities", data.world.num_activities()},
                   {"multi_label", data.world.multi_label()},
                   {"videos", std::move(videos)}};
  const std::string text = manifest.dump(1);
  write_file(dir / "manifest.json", std::vector<std::uint8_t>(text.begin(), text.end()));
}

Dataset read_dataset(const fs::path& manifest) {
  const auto bytes = read_file(manifest);
  json m;
  try {
    m = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(manifest.string() + ": " + e.what());
  }
  Dataset d;
  try {
    if (m.at("format") != "orn-dataset" || m.at("version") != 1) {
      throw FormatError(manifest.string() + ": not an orn dataset manifest");
    }
    d.world = m.at("world").get<WorldConfig>();
    const fs::path root = manifest.parent_path();
    for (const auto& jv : m.at("videos")) {
      world::Video v;
      v.index = jv.at("index").get<std::uint64_t>();
      v.frames = jv.at("frames").get<std::size_t>();
      v.height = jv.at("height").get<std::size_t>();
      v.width = jv.at("width").get<std::size_t>();
      auto shard = read_shard(root / jv.at("shard").get<std::string>());
      if (shard.dtype != DType::u8 || shard.shape != std::vector<std::uint64_t>{3, v.frames, v.height, v.width}) {
        throw FormatError("shard of video " + std::to_string(v.index) + " does not match the manifest");
      }
      v.pixels = std::move(shard.bytes);
      if (jv.contains("labels")) {
        v.label.multi_hot = jv.at("labels").get<std::vector<float>>();
      } else {
        v.label.label = jv.at("label").get<std::size_t>();
      }
      for (const auto& je : jv.at("events")) {
        v.events.push_back({world::event_kind_from_string(je.at("kind").get<std::string>()),
                            je.at("frame").get<std::size_t>(), je.at("actor").get<std::size_t>(),
                            je.at("target").get<std::size_t>()});
      }
      for (const auto& jf : jv.at("annotations")) {
        std::vector<InstanceAnnotation> frame;
        for (const auto& ja : jf) frame.push_back(annotation_from(ja, v.height, v.width));
        v.annotations.push_back(std::move(frame));
      }
      if (v.annotations.size() != v.frames) {
        throw FormatError("video " + std::to_string(v.index) + " has " + std::to_string(v.annotations.size()) +
                          " annotation frames for " + std::to_string(v.frames) + " frames");
      }
      d.videos.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    throw FormatError(manifest.string() + ": " + e.what());
  }
  return d;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const auto& t = ckpt.params.value(i);
    tensors.push_back({{"name", ckpt.params.name(i)}, {"shape", t.shape()}, {"offset", offset}});
    offset += 4 * t.size();
  }
  const json header = {{"config", json::parse(to_json(ckpt.config))}, {"tensors", tensors}, {"payload_bytes", offset}};
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + 4);
  put(out, kCheckpointVersion);
  put(out, static_cast<std::uint64_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    for (float v : ckpt.params.value(i).data()) put_f32(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "checkpoint");
  r.magic(kCheckpointMagic);
  if (auto v = r.get<std::uint32_t>(); v != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(v));
  }
  const auto header_size = r.get<std::uint64_t>();
  json header;
  try {
    header = json::parse(r.string(header_size));
  } catch (const json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint header: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.config = experiment_from_json(header.at("config").dump());
  const std::size_t base = r.position();
  const auto payload = header.at("payload_bytes").get<std::uint64_t>();
  if (r.remaining() != payload) throw FormatError("checkpoint payload size does not match its header");
  for (const auto& jt : header.at("tensors")) {
    const Shape shape = jt.at("shape").get<Shape>();
    const auto offset = jt.at("offset").get<std::uint64_t>();
    const std::size_t n = numel(shape);
    if (offset + 4 * n > payload) throw FormatError("tensor " + jt.at("name").get<std::string>() + " out of range");
    Reader tr(bytes, "checkpoint");
    tr.skip(base + offset);
    std::vector<float> data(n);
    for (auto& v : data) v = tr.get_f32();
    ckpt.params.add(jt.at("name").get<std::string>(), Tensorf(shape, std::move(data)));
  }
  check_compatible(ckpt.config.model, ckpt.params);
  return ckpt;
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, bytes);
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) { return decode_checkpoint(read_file(path)); }

void check_compatible(const ModelConfig& cfg, const ParamStore<float>& params) {
  const auto expected = init_params<float>(cfg, 0);
  if (expected.size() != params.size()) {
    throw ConfigError("checkpoint has " + std::to_string(params.size()) + " tensors, config needs " +
                      std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected.name(i) != params.name(i) || expected.value(i).shape() != params.value(i).shape()) {
      throw ConfigError("checkpoint tensor " + params.name(i) + " " + to_string(params.value(i).shape()) +
                        " does not match " + expected.name(i) + " " + to_string(expected.value(i).shape()));
    }
  }
}

}  // namespace orn::io
