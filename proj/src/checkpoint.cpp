// Checkpoint layout (all integers and floats little-endian):
//
//   magic     8 bytes  "DDXMODEL"
//   version   u32      kFormatVersion
//   hdr_len   u64
//   header    hdr_len bytes of JSON: dims, vocabulary, block shapes
//   blocks    float64 arrays, row-major, in header "blocks" order
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ddx/error.hpp"
#include "ddx/model.hpp"

namespace ddx {

namespace {

constexpr char kMagic[8] = {'D', 'D', 'X', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::string_view in, std::size_t& offset) {
  if (offset + sizeof(T) > in.size()) throw Error("checkpoint truncated");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  offset += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename M>
void put_block(std::string& out, const M& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) put_le<double>(out, m.data()[i]);
}

template <typename M>
void get_block(std::string_view in, std::size_t& offset, M& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get_le<double>(in, offset);
}

}  // namespace

std::string serialize_checkpoint(const ModelParameters& p) {
  const auto dims = p.dims();
  nlohmann::ordered_json header;
  header["format"] = "ddx-checkpoint";
  header["byte_order"] = "little";
  header["dtype"] = "float64";
  header["dims"] = {{"findings", dims.findings},
                    {"diseases", dims.diseases},
                    {"embedding", dims.embedding},
                    {"demographics", dims.demographics}};
  header["vocab"]["findings"] = p.vocab.findings();
  header["vocab"]["diseases"] = p.vocab.diseases();
  header["vocab"]["demographic_ids"] = p.vocab.demographic_ids();
  auto groups = nlohmann::ordered_json::object();
  for (const auto& [f, g] : p.vocab.mutex_groups()) {
    if (g) groups[f] = *g;
  }
  header["vocab"]["mutex_groups"] = groups;
  const auto& w = p.weights;
  header["blocks"] = {
      {{"name", "finding_embeddings"}, {"rows", w.finding_embeddings.rows()}, {"cols", w.finding_embeddings.cols()}},
      {{"name", "projection"}, {"rows", w.projection.rows()}, {"cols", w.projection.cols()}},
      {{"name", "bias"}, {"rows", w.bias.size()}, {"cols", 1}},
      {{"name", "demographic_embeddings"},
       {"rows", w.demographic_embeddings.rows()},
       {"cols", w.demographic_embeddings.cols()}}};
  const auto text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  put_block(out, w.finding_embeddings);
  put_block(out, w.projection);
  put_block(out, w.bias);
  put_block(out, w.demographic_embeddings);
  return out;
}

ModelParameters deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a model checkpoint (bad magic)");
  }
  std::size_t offset = sizeof(kMagic);
  const auto version = get_le<std::uint32_t>(bytes, offset);
  if (version != kFormatVersion) {
    throw Error("unsupported checkpoint format version " + std::to_string(version) + " (reader expects " +
                std::to_string(kFormatVersion) + ")");
  }
  const auto len = get_le<std::uint64_t>(bytes, offset);
  if (offset + len > bytes.size()) throw Error("checkpoint truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(offset, len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("corrupt checkpoint header: ") + e.what());
  }
  offset += len;

  try {
    std::map<std::string, std::optional<std::string>> groups;
    for (const auto& [f, g] : header.at("vocab").at("mutex_groups").items()) groups[f] = g.get<std::string>();
    Vocabulary vocab(header.at("vocab").at("findings").get<std::vector<std::string>>(),
                     header.at("vocab").at("diseases").get<std::vector<std::string>>(),
                     header.at("vocab").at("demographic_ids").get<std::set<std::string>>(), std::move(groups));
    const auto& d = header.at("dims");
    ModelDims dims{d.at("findings").get<std::size_t>(), d.at("diseases").get<std::size_t>(),
                   d.at("embedding").get<std::size_t>(), d.at("demographics").get<std::size_t>()};
    if (dims.findings != vocab.finding_count() || dims.diseases != vocab.disease_count() ||
        dims.demographics != vocab.demographic_ids().size()) {
      throw Error("checkpoint dims disagree with its vocabulary");
    }
    auto w = ParameterBlocks::zeros(dims);
    get_block(bytes, offset, w.finding_embeddings);
    get_block(bytes, offset, w.projection);
    get_block(bytes, offset, w.bias);
    get_block(bytes, offset, w.demographic_embeddings);
    if (offset != bytes.size()) throw Error("checkpoint has trailing bytes");
    return ModelParameters(std::move(vocab), std::move(w));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("corrupt checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const ModelParameters& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  const auto bytes = serialize_checkpoint(p);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

ModelParameters load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace ddx
