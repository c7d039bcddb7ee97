#include "tiglab/checkpoint.hpp"

#include "tiglab/errors.hpp"

#include <nlohmann/json.hpp>
#include <openssl/sha.h>

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace tiglab {

namespace {

constexpr char kMagic[8] = {'T', 'I', 'G', 'L', 'A', 'B', 'A', 'R'};

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw CheckpointError("archive truncated");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string sha1_hex(std::string_view bytes) {
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
  std::ostringstream os;
  for (unsigned char c : digest) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return os.str();
}

std::string content_hash(std::string_view bytes) {
  std::string blob = "blob " + std::to_string(bytes.size());
  blob.push_back('\0');
  blob.append(bytes);
  return sha1_hex(blob);
}

std::string content_hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return content_hash(ss.str());
}

const Mat* Archive::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

std::string encode_archive(const Archive& archive) {
  nlohmann::json header;
  header["kind"] = archive.kind;
  header["tag"] = archive.tag;
  header["config_hash"] = archive.config_hash;
  header["rng_state"] = archive.rng_state;
  header["tensors"] = nlohmann::json::array();
  for (const auto& t : archive.tensors) {
    header["tensors"].push_back({{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}});
  }
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, Archive::kVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& t : archive.tensors) {
    out.append(reinterpret_cast<const char*>(t.value.data()), sizeof(double) * static_cast<std::size_t>(t.value.size()));
  }
  return out;
}

Archive decode_archive(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a tiglab archive");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != Archive::kVersion) throw CheckpointError("unsupported archive version " + std::to_string(version));
  const auto len = take<std::uint64_t>(bytes, pos);
  if (pos + len > bytes.size()) throw CheckpointError("archive header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("archive header: ") + e.what());
  }
  pos += len;

  Archive a;
  a.kind = header.value("kind", "");
  a.tag = header.value("tag", "");
  a.config_hash = header.value("config_hash", "");
  a.rng_state = header.value("rng_state", "");
  for (const auto& t : header.at("tensors")) {
    const Index rows = t.at("rows").get<Index>(), cols = t.at("cols").get<Index>();
    const std::size_t n = sizeof(double) * static_cast<std::size_t>(rows * cols);
    if (pos + n > bytes.size()) throw CheckpointError("archive payload truncated");
    Mat m(rows, cols);
    std::memcpy(m.data(), bytes.data() + pos, n);
    pos += n;
    a.tensors.push_back({t.at("name").get<std::string>(), std::move(m)});
  }
  if (pos != bytes.size()) throw CheckpointError("trailing bytes after archive payload");
  return a;
}

void write_archive(const std::filesystem::path& path, const Archive& archive) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  const std::string bytes = encode_archive(archive);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Archive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_archive(ss.str());
}

std::string serialize_parameters(const ag::ParamList& params) {
  Archive a;
  a.kind = "parameters";
  for (const ag::Parameter* p : params) a.tensors.push_back({p->name, p->value});
  return encode_archive(a);
}

void load_parameters(const Archive& archive, const ag::ParamList& params) {
  for (ag::Parameter* p : params) {
    const Mat* m = archive.find(p->name);
    if (m == nullptr) throw CheckpointError("archive lacks tensor '" + p->name + "'");
    if (m->rows() != p->value.rows() || m->cols() != p->value.cols()) {
      throw CheckpointError("tensor '" + p->name + "' has shape " + std::to_string(m->rows()) + "x" +
                            std::to_string(m->cols()) + ", expected " + std::to_string(p->value.rows()) + "x" +
                            std::to_string(p->value.cols()));
    }
    p->value = *m;
  }
}

std::string backbone_config_hash(const BackboneSpec& spec, int d_n, int d_e) {
  const auto& c = spec.config;
  const nlohmann::json j = {{"name", spec.name}, {"d_mem", c.d_mem}, {"d_emb", c.d_emb}, {"d_t", c.d_t},
                            {"n_heads", c.n_heads}, {"K", c.K}, {"dropout", c.dropout}, {"d_n", d_n},
                            {"d_e", d_e}};
  return sha1_hex(j.dump());
}

void save_checkpoint(const std::filesystem::path& path, Artifacts& artifacts, const BackboneSpec& spec, int d_n,
                     int d_e, const std::string& rng_state) {
  Archive a;
  a.kind = "backbone";
  a.tag = spec.name;
  a.config_hash = backbone_config_hash(spec, d_n, d_e);
  a.rng_state = rng_state;
  for (const ag::Parameter* p : artifacts.backbone_parameters()) a.tensors.push_back({p->name, p->value});
  const MemoryState& mem = artifacts.memory;
  for (const auto& buf : mem.pending) {
    if (!buf.empty()) throw CheckpointError("memory must be flushed before checkpointing");
  }
  a.tensors.push_back({"memory.rows", mem.memory});
  Mat last(static_cast<Index>(mem.last_update.size()), 1);
  for (std::size_t i = 0; i < mem.last_update.size(); ++i) last(static_cast<Index>(i), 0) = mem.last_update[i];
  a.tensors.push_back({"memory.last_update", last});
  write_archive(path, a);
}

Artifacts load_checkpoint(const std::filesystem::path& path, const BackboneSpec& spec, int d_n, int d_e, bool force) {
  const Archive a = read_archive(path);
  if (a.kind != "backbone") throw CheckpointError(path.string() + " is not a backbone checkpoint");
  const std::string expected = backbone_config_hash(spec, d_n, d_e);
  if (a.config_hash != expected && !force) {
    throw CheckpointError("checkpoint config hash " + a.config_hash + " does not match " + expected +
                          " (use --force to override)");
  }
  Artifacts art;
  art.backbone = make_backbone(spec.name, spec.config, d_n, d_e, 0);
  load_parameters(a, art.backbone_parameters());
  const Mat* rows = a.find("memory.rows");
  const Mat* last = a.find("memory.last_update");
  if (rows == nullptr || last == nullptr || last->rows() != rows->rows()) {
    throw CheckpointError("checkpoint memory snapshot missing or inconsistent");
  }
  art.memory = init_state(rows->rows(), static_cast<int>(rows->cols()));
  art.memory.memory = *rows;
  for (Index i = 0; i < last->rows(); ++i) art.memory.last_update[static_cast<std::size_t>(i)] = (*last)(i, 0);
  return art;
}

}  // namespace tiglab
