#include "sinhq/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sinhq {

namespace {

constexpr char kMagic[8] = {'S', 'I', 'N', 'H', 'Q', 'F', '0', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

}  // namespace

void write_field(const std::string& path, const Field& f) {
  nlohmann::json meta;
  meta["rank"] = f.shape.rank;
  meta["n"] = std::vector<int>(f.shape.n.begin(), f.shape.n.begin() + f.shape.rank);
  meta["h"] = std::vector<double>(f.shape.h.begin(), f.shape.h.begin() + f.shape.rank);
  meta["endianness"] = "little";
  meta["dtype"] = "float64";
  std::string js = meta.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  char header[32] = {};
  std::memcpy(header, kMagic, 8);
  std::uint32_t ver = kVersion, jlen = std::uint32_t(js.size());
  std::memcpy(header + 8, &ver, 4);
  std::memcpy(header + 12, &jlen, 4);
  out.write(header, 32);
  out.write(js.data(), std::streamsize(js.size()));
  out.write(reinterpret_cast<const char*>(f.v.data()),
            std::streamsize(f.v.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write to " + path);
}

Field read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char header[32];
  in.read(header, 32);
  if (!in || std::memcmp(header, kMagic, 8) != 0)
    throw std::runtime_error(path + ": bad snapshot magic");
  std::uint32_t ver, jlen;
  std::memcpy(&ver, header + 8, 4);
  std::memcpy(&jlen, header + 12, 4);
  if (ver != kVersion) throw std::runtime_error(path + ": unsupported snapshot version");
  std::string js(jlen, '\0');
  in.read(js.data(), jlen);
  if (!in) throw std::runtime_error(path + ": truncated preamble");
  nlohmann::json meta = nlohmann::json::parse(js);
  if (meta.at("endianness") != "little" || meta.at("dtype") != "float64")
    throw std::runtime_error(path + ": unsupported data layout");

  Shape s;
  s.rank = meta.at("rank").get<int>();
  if (s.rank != 2 && s.rank != 4) throw std::runtime_error(path + ": bad rank");
  auto nv = meta.at("n").get<std::vector<int>>();
  auto hv = meta.at("h").get<std::vector<double>>();
  if (int(nv.size()) != s.rank || int(hv.size()) != s.rank)
    throw std::runtime_error(path + ": inconsistent dims");
  for (int a = 0; a < s.rank; ++a) {
    s.n[a] = nv[a];
    s.h[a] = hv[a];
  }
  Field f(s);
  in.read(reinterpret_cast<char*>(f.v.data()),
          std::streamsize(f.v.size() * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated payload");
  return f;
}

}  // namespace sinhq
