#include <bit>
#include <cstring>
#include <fstream>

#include "df/errors.hpp"
#include "df/model.hpp"

namespace df::model {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts are unsupported");

constexpr char kMagic[8] = {'D', 'F', 'M', 'O', 'D', 'E', 'L', '\0'};
constexpr std::uint32_t kSchemaVersion = 1;
constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 8;

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

struct Writer {
  std::vector<std::uint8_t> bytes;

  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  void u32(std::uint32_t x) { raw(&x, 4); }
  void u64(std::uint64_t x) { raw(&x, 8); }
  void i32(std::int32_t x) { raw(&x, 4); }
  void f64(double x) { raw(&x, 8); }
  void matrix(const Matrix& a) {
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        f64(a(r, c).real());
        f64(a(r, c).imag());
      }
  }
};

struct Reader {
  const std::uint8_t* p;
  std::size_t left;

  void raw(void* out, std::size_t n) {
    if (n > left) throw ChecksumMismatch("model file ends inside a field");
    std::memcpy(out, p, n);
    p += n;
    left -= n;
  }
  std::uint32_t u32() { std::uint32_t x; raw(&x, 4); return x; }
  std::uint64_t u64() { std::uint64_t x; raw(&x, 8); return x; }
  std::int32_t i32() { std::int32_t x; raw(&x, 4); return x; }
  double f64() { double x; raw(&x, 8); return x; }
  Matrix matrix(int rows, int cols) {
    Matrix a(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double re = f64();
        const double im = f64();
        a(r, c) = Complex(re, im);
      }
    return a;
  }
};

} // namespace

std::vector<std::uint8_t> serialize_model(const ModelSpace& m) {
  Writer payload;
  payload.i32(m.dim);
  payload.f64(m.alpha);
  payload.f64(m.z);
  payload.f64(m.q);
  payload.u32(static_cast<std::uint32_t>(m.factors.size()));
  const std::string meta = m.basis_meta.dump();
  payload.u32(static_cast<std::uint32_t>(meta.size()));
  payload.raw(meta.data(), meta.size());
  payload.matrix(m.d);
  payload.matrix(m.v);
  payload.matrix(m.weight_half);
  for (const Matrix& l : m.factors) payload.matrix(l);

  Writer out;
  out.raw(kMagic, 8);
  out.u32(kSchemaVersion);
  out.u32(0); // reserved
  out.u64(payload.bytes.size());
  out.raw(payload.bytes.data(), payload.bytes.size());
  out.u64(fnv1a64(out.bytes.data(), out.bytes.size()));
  return out.bytes;
}

std::uint64_t model_checksum(const ModelSpace& m) {
  const auto bytes = serialize_model(m);
  std::uint64_t sum = 0;
  std::memcpy(&sum, bytes.data() + bytes.size() - 8, 8);
  return sum;
}

void save_model(const ModelSpace& m, const std::string& path) {
  const auto bytes = serialize_model(m);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("save_model: cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("save_model: short write to " + path);
}

ModelSpace load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_model: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw IoError("load_model: not a model file");
  if (bytes.size() < kHeaderBytes + 8)
    throw ChecksumMismatch("load_model: file shorter than header");

  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  if (version != kSchemaVersion)
    throw SchemaMismatch("load_model: unsupported schema version " +
                         std::to_string(version));

  std::uint64_t payload_len = 0;
  std::memcpy(&payload_len, bytes.data() + 16, 8);
  const std::size_t expect = kHeaderBytes + payload_len + 8;
  if (bytes.size() != expect)
    throw ChecksumMismatch("load_model: size does not match declared payload");
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + expect - 8, 8);
  if (fnv1a64(bytes.data(), expect - 8) != stored)
    throw ChecksumMismatch("load_model: checksum mismatch");

  Reader in{bytes.data() + kHeaderBytes, payload_len};
  ModelSpace m;
  m.dim = in.i32();
  if (m.dim <= 0 || m.dim > 100000)
    throw SchemaMismatch("load_model: implausible dimension");
  m.alpha = in.f64();
  m.z = in.f64();
  m.q = in.f64();
  const std::uint32_t nfac = in.u32();
  const std::uint32_t meta_len = in.u32();
  std::string meta(meta_len, '\0');
  in.raw(meta.data(), meta_len);
  try {
    m.basis_meta = nlohmann::ordered_json::parse(meta);
  } catch (const nlohmann::json::exception&) {
    throw SchemaMismatch("load_model: basis metadata is not valid JSON");
  }
  m.d = in.matrix(m.dim, m.dim);
  m.v = in.matrix(m.dim, m.dim);
  m.weight_half = in.matrix(m.dim, m.dim);
  m.factors.reserve(nfac);
  for (std::uint32_t a = 0; a < nfac; ++a)
    m.factors.push_back(in.matrix(m.dim, m.dim));
  if (in.left != 0)
    throw SchemaMismatch("load_model: trailing bytes in payload");
  validate_model(m);
  return m;
}

} // namespace df::model
