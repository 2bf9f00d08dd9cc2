#include "fsel/embedding.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <unordered_set>

#include "fsel/fileio.hpp"

namespace fsel {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'E', 'L'};
constexpr unsigned char kBinaryVersion = 0x01;

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

// --- little-endian primitives -------------------------------------------

void append_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void append_f32le(std::string& out, float v) {
  append_u32le(out, std::bit_cast<std::uint32_t>(v));
}

struct Cursor {
  const unsigned char* ptr;
  std::size_t remaining;
  const std::string& context;

  void need(std::size_t n, const char* what) const {
    if (remaining < n)
      fail(context + ": unexpected end of file while reading " +
           std::string(what));
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    const std::uint8_t v = *ptr;
    ++ptr;
    --remaining;
    return v;
  }
  std::uint32_t u32le(const char* what) {
    need(4, what);
    const std::uint32_t v = static_cast<std::uint32_t>(ptr[0]) |
                            (static_cast<std::uint32_t>(ptr[1]) << 8) |
                            (static_cast<std::uint32_t>(ptr[2]) << 16) |
                            (static_cast<std::uint32_t>(ptr[3]) << 24);
    ptr += 4;
    remaining -= 4;
    return v;
  }
  float f32le(const char* what) {
    return std::bit_cast<float>(u32le(what));
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(ptr), n);
    ptr += n;
    remaining -= n;
    return s;
  }
};

// --- number formatting/parsing -------------------------------------------

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    fail(where + ": cannot parse value '" + std::string(field) + "'");
  return v;
}

Index parse_count(std::string_view field, const std::string& where) {
  long long v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || v < 0)
    fail(where + ": cannot parse count '" + std::string(field) + "'");
  return static_cast<Index>(v);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

void check_finite(double v, const std::string& context, Index row) {
  if (!std::isfinite(v))
    fail(context + ": non-finite value at row " + std::to_string(row + 1));
}

void check_distinct_ids(const std::vector<std::string>& ids,
                        const std::string& context) {
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!seen.insert(ids[i]).second)
      fail(context + ": duplicate id '" + ids[i] + "' at row " +
           std::to_string(i + 1));
  }
}

// --- binary format ---------------------------------------------------------

EmbeddingMatrix load_binary(const std::string& bytes,
                            const std::string& context) {
  Cursor cur{reinterpret_cast<const unsigned char*>(bytes.data()),
             bytes.size(), context};
  const std::string magic = cur.bytes(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    fail(context + ": malformed header: bad magic bytes");
  if (cur.u8("version") != kBinaryVersion)
    fail(context + ": malformed header: unsupported version");
  const std::uint32_t n = cur.u32le("row count");
  const std::uint32_t d = cur.u32le("dimension");
  if (n == 0 || d == 0)
    fail(context + ": malformed header: n and d must be at least 1");
  cur.need(static_cast<std::size_t>(n) * d * 4, "matrix values");

  EmbeddingMatrix m;
  m.data.resize(static_cast<Index>(n), static_cast<Index>(d));
  for (Index i = 0; i < m.data.rows(); ++i)
    for (Index j = 0; j < m.data.cols(); ++j) {
      const double v = static_cast<double>(cur.f32le("matrix value"));
      check_finite(v, context, i);
      m.data(i, j) = v;
    }

  const std::uint8_t flag = cur.u8("id flag");
  if (flag == 1) {
    m.ids.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t len = cur.u32le("id length");
      m.ids.push_back(cur.bytes(len, "id bytes"));
    }
    check_distinct_ids(m.ids, context);
  } else if (flag != 0) {
    fail(context + ": malformed id flag (expected 0 or 1)");
  }
  if (cur.remaining != 0) fail(context + ": trailing bytes after id block");
  return m;
}

std::string encode_binary(const EmbeddingMatrix& m) {
  std::string out;
  out.reserve(16 + static_cast<std::size_t>(m.rows()) * m.cols() * 4);
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kBinaryVersion));
  append_u32le(out, static_cast<std::uint32_t>(m.rows()));
  append_u32le(out, static_cast<std::uint32_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      append_f32le(out, static_cast<float>(m.data(i, j)));
  out.push_back(m.has_ids() ? 1 : 0);
  if (m.has_ids()) {
    for (const auto& id : m.ids) {
      append_u32le(out, static_cast<std::uint32_t>(id.size()));
      out.append(id);
    }
  }
  return out;
}

// --- text format ------------------------------------------------------------

EmbeddingMatrix load_text(const std::string& bytes,
                          const std::string& context) {
  const auto lines = split_lines(bytes);
  if (lines.empty()) fail(context + ": empty file");
  const auto header = split_fields(lines[0]);
  if (header.size() != 2)
    fail(context + ": malformed header: expected 'n d'");
  const Index n = parse_count(header[0], context + ": header");
  const Index d = parse_count(header[1], context + ": header");
  if (n < 1 || d < 1)
    fail(context + ": malformed header: n and d must be at least 1");
  if (static_cast<Index>(lines.size()) - 1 < n)
    fail(context + ": unexpected end of file: expected " + std::to_string(n) +
         " rows, found " + std::to_string(lines.size() - 1));

  EmbeddingMatrix m;
  m.data.resize(n, d);
  bool with_ids = false;
  for (Index i = 0; i < n; ++i) {
    const std::string row_ctx = context + ": row " + std::to_string(i + 1);
    const auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1]);
    if (i == 0) {
      if (static_cast<Index>(fields.size()) == d + 1)
        with_ids = true;
      else if (static_cast<Index>(fields.size()) != d)
        fail(context + ": dimension mismatch at row 1: expected " +
             std::to_string(d) + " values, found " +
             std::to_string(fields.size()));
      if (with_ids) m.ids.reserve(static_cast<std::size_t>(n));
    }
    const Index expected = d + (with_ids ? 1 : 0);
    if (static_cast<Index>(fields.size()) != expected)
      fail(context + ": dimension mismatch at row " + std::to_string(i + 1) +
           ": expected " + std::to_string(expected) + " fields, found " +
           std::to_string(fields.size()));
    Index offset = 0;
    if (with_ids) {
      m.ids.emplace_back(fields[0]);
      offset = 1;
    }
    for (Index j = 0; j < d; ++j) {
      const double v =
          parse_double(fields[static_cast<std::size_t>(j + offset)], row_ctx);
      check_finite(v, context, i);
      m.data(i, j) = v;
    }
  }
  for (std::size_t l = static_cast<std::size_t>(n) + 1; l < lines.size(); ++l)
    if (!split_fields(lines[l]).empty())
      fail(context + ": trailing content after row " + std::to_string(n));
  if (with_ids) check_distinct_ids(m.ids, context);
  return m;
}

std::string encode_text(const EmbeddingMatrix& m) {
  std::string out;
  out += std::to_string(m.rows());
  out += ' ';
  out += std::to_string(m.cols());
  out += '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    if (m.has_ids()) {
      out += m.ids[static_cast<std::size_t>(i)];
      out += ' ';
    }
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += format_double(m.data(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

void validate(const EmbeddingMatrix& m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw std::invalid_argument("embedding matrix must be at least 1x1");
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m.data(i, j)))
        throw std::invalid_argument("non-finite value at row " +
                                    std::to_string(i + 1));
  if (m.has_ids()) {
    if (static_cast<Index>(m.ids.size()) != m.rows())
      throw std::invalid_argument("id count does not match row count");
    check_distinct_ids(m.ids, "embedding matrix");
  }
}

EmbeddingMatrix load_matrix(const std::filesystem::path& path,
                            MatrixFormat format) {
  const std::string bytes = read_file(path);
  EmbeddingMatrix m = format == MatrixFormat::kBinary
                          ? load_binary(bytes, path.string())
                          : load_text(bytes, path.string());
  return m;
}

void write_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path,
                  MatrixFormat format) {
  validate(m);
  write_file_atomic(path, format == MatrixFormat::kBinary ? encode_binary(m)
                                                          : encode_text(m));
}

MatrixFormat detect_matrix_format(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0)
    return MatrixFormat::kBinary;
  return MatrixFormat::kText;
}

WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  const std::string context = path.string();
  const std::string bytes = read_file(path);
  const auto lines = split_lines(bytes);
  if (lines.empty()) fail(context + ": empty file");
  const auto header = split_fields(lines[0]);
  if (header.size() != 2)
    fail(context + ": malformed header: expected 'V d'");
  const Index v_count = parse_count(header[0], context + ": header");
  const Index d = parse_count(header[1], context + ": header");
  if (v_count < 1) fail(context + ": empty vocabulary");
  if (d < 1) fail(context + ": malformed header: d must be at least 1");
  if (static_cast<Index>(lines.size()) - 1 < v_count)
    fail(context + ": unexpected end of file: expected " +
         std::to_string(v_count) + " entries, found " +
         std::to_string(lines.size() - 1));

  WordVectorTable table;
  table.dim = d;
  table.vocab.reserve(static_cast<std::size_t>(v_count));
  for (Index i = 0; i < v_count; ++i) {
    const std::string row_ctx = context + ": entry " + std::to_string(i + 1);
    const auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1]);
    if (static_cast<Index>(fields.size()) != d + 1)
      fail(row_ctx + ": inconsistent dimension: expected " + std::to_string(d) +
           " values, found " + std::to_string(fields.size() - 1));
    Vector vec(d);
    for (Index j = 0; j < d; ++j) {
      const double x =
          parse_double(fields[static_cast<std::size_t>(j) + 1], row_ctx);
      if (!std::isfinite(x)) fail(row_ctx + ": non-finite value");
      vec(j) = x;
    }
    const std::string token(fields[0]);
    if (!table.vocab.emplace(token, std::move(vec)).second)
      fail(row_ctx + ": duplicate token '" + token + "'");
  }
  for (std::size_t l = static_cast<std::size_t>(v_count) + 1; l < lines.size();
       ++l)
    if (!split_fields(lines[l]).empty())
      fail(context + ": trailing content after entry " +
           std::to_string(v_count));
  return table;
}

namespace {

// Unicode whitespace code points (White_Space=yes).
bool is_unicode_space(std::uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x20: case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_ascii_punct(unsigned char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

// Decodes one UTF-8 code point; malformed bytes pass through as single-byte
// opaque values so tokenization never fails on arbitrary input.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  std::uint32_t cp = b0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return cp;
  }
  if (i + len > s.size()) {
    ++i;
    return b0;
  }
  for (std::size_t j = 1; j < len; ++j) {
    const auto bj = static_cast<unsigned char>(s[i + j]);
    if ((bj & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bj & 0x3F);
  }
  i += len;
  return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    std::size_t begin = 0, end = current.size();
    while (begin < end &&
           is_ascii_punct(static_cast<unsigned char>(current[begin])))
      ++begin;
    while (end > begin &&
           is_ascii_punct(static_cast<unsigned char>(current[end - 1])))
      --end;
    if (end > begin) tokens.push_back(current.substr(begin, end - begin));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    const std::uint32_t cp = decode_utf8(text, i);
    if (is_unicode_space(cp)) {
      flush();
    } else {
      for (std::size_t j = start; j < i; ++j) {
        char c = text[j];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        current.push_back(c);
      }
    }
  }
  flush();
  return tokens;
}

EmbeddingMatrix embed_instances(const std::vector<std::string>& texts,
                                const WordVectorTable& table,
                                PoolingMode mode) {
  if (texts.empty())
    throw std::invalid_argument("embed_instances: no instances given");
  if (table.vocab.empty() || table.dim < 1)
    throw std::invalid_argument("embed_instances: empty word-vector table");

  EmbeddingMatrix m;
  m.data.resize(static_cast<Index>(texts.size()), table.dim);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Vector acc = Vector::Zero(table.dim);
    Index in_vocab = 0;
    for (const auto& token : tokenize(texts[i])) {
      const auto it = table.vocab.find(token);
      if (it == table.vocab.end()) continue;  // OOV tokens are skipped
      acc += it->second;
      ++in_vocab;
    }
    if (in_vocab == 0)
      throw std::runtime_error("instance " + std::to_string(i + 1) +
                               " has no in-vocabulary tokens");
    if (mode == PoolingMode::kMean) acc /= static_cast<double>(in_vocab);
    m.data.row(static_cast<Index>(i)) = acc.transpose();
  }
  return m;
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  EmbeddingMatrix out = m;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.data.row(i).norm();
    if (norm == 0.0)
      throw std::runtime_error("normalize_rows: zero-norm row " +
                               std::to_string(i + 1));
    out.data.row(i) /= norm;
  }
  return out;
}

}  // namespace fsel
