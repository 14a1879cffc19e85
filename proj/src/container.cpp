#include "xtd/container.hpp"

#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xtd/error.hpp"

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace xtd {

namespace {

constexpr std::string_view magic = "XTD1\n";

const char* type_name(Container::Type t) {
  switch (t) {
    case Container::Type::f64: return "f64";
    case Container::Type::u64: return "u64";
    case Container::Type::bytes: return "bytes";
  }
  return "?";
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_u64(const std::string& s, int base, const std::string& where) {
  if (s.empty()) fail(ErrorKind::io, where + ": empty number");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, base);
  if (errno || *end != '\0' || s[0] == '-') fail(ErrorKind::io, where + ": bad number '" + s + "'");
  return v;
}

bool valid_name(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (c == ' ' || c == '\n' || c == '\r' || c == ':') return false;
  }
  return true;
}

void write_file(const std::string& path, const std::string& data) {
  // Write to a sibling temporary so a failure never leaves a partial file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) fail(ErrorKind::io, "write failed for '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::io, "cannot write '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& where) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE) fail(ErrorKind::io, where + ": bad number '" + text + "'");
  return v;
}

void Container::set(const std::string& key, const std::string& value) {
  if (!valid_name(key) || key == "block" || key == "format_version" || key == "header_checksum") {
    fail(ErrorKind::io, "invalid header key '" + key + "'");
  }
  if (value.find('\n') != std::string::npos) fail(ErrorKind::io, "header value for '" + key + "' spans lines");
  for (auto& kv : meta_) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  meta_.emplace_back(key, value);
}

bool Container::has(const std::string& key) const {
  for (const auto& kv : meta_) {
    if (kv.first == key) return true;
  }
  return false;
}

const std::string& Container::get(const std::string& key) const {
  for (const auto& kv : meta_) {
    if (kv.first == key) return kv.second;
  }
  fail(ErrorKind::io, "container header has no '" + key + "'");
}

void Container::add(Block b) {
  if (!valid_name(b.name)) fail(ErrorKind::io, "invalid block name '" + b.name + "'");
  if (index_.count(b.name)) fail(ErrorKind::io, "duplicate block '" + b.name + "'");
  index_[b.name] = blocks_.size();
  blocks_.push_back(std::move(b));
}

void Container::add_f64(const std::string& name, std::vector<double> values) {
  Block b;
  b.name = name;
  b.type = Type::f64;
  b.f = std::move(values);
  add(std::move(b));
}

void Container::add_u64(const std::string& name, std::vector<std::uint64_t> values) {
  Block b;
  b.name = name;
  b.type = Type::u64;
  b.u = std::move(values);
  add(std::move(b));
}

void Container::add_bytes(const std::string& name, std::string bytes) {
  Block b;
  b.name = name;
  b.type = Type::bytes;
  b.b = std::move(bytes);
  add(std::move(b));
}

bool Container::has_block(const std::string& name) const { return index_.count(name) > 0; }

const Container::Block& Container::block(const std::string& name, Type type) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::io, "container has no block '" + name + "'");
  const Block& b = blocks_[it->second];
  if (b.type != type) {
    fail(ErrorKind::io, "block '" + name + "' is " + type_name(b.type) + ", expected " + type_name(type));
  }
  return b;
}

const std::vector<double>& Container::f64(const std::string& name) const { return block(name, Type::f64).f; }
const std::vector<std::uint64_t>& Container::u64(const std::string& name) const { return block(name, Type::u64).u; }
const std::string& Container::bytes(const std::string& name) const { return block(name, Type::bytes).b; }

std::vector<std::string> Container::block_names() const {
  std::vector<std::string> out;
  for (const auto& b : blocks_) out.push_back(b.name);
  return out;
}

std::string Container::serialize() const {
  std::string payload;
  std::ostringstream head;
  head << magic << "format_version: " << container_format_version << "\n";
  for (const auto& [k, v] : meta_) head << k << ": " << v << "\n";
  for (const auto& b : blocks_) {
    const std::size_t offset = payload.size();
    std::size_t count = 0;
    switch (b.type) {
      case Type::f64:
        count = b.f.size();
        payload.append(reinterpret_cast<const char*>(b.f.data()), b.f.size() * 8);
        break;
      case Type::u64:
        count = b.u.size();
        payload.append(reinterpret_cast<const char*>(b.u.data()), b.u.size() * 8);
        break;
      case Type::bytes:
        count = b.b.size();
        payload.append(b.b);
        break;
    }
    const std::size_t length = payload.size() - offset;
    head << "block: " << b.name << ' ' << type_name(b.type) << ' ' << count << ' ' << offset << ' ' << length << ' '
         << hex(fnv1a64(std::string_view(payload).substr(offset, length))) << "\n";
  }
  std::string header = head.str();
  header += "header_checksum: " + hex(fnv1a64(header)) + "\n\n";
  return header + payload;
}

Container Container::parse(std::string_view data, const std::string& source) {
  if (data.substr(0, magic.size()) != magic) fail(ErrorKind::io, source + ": bad magic, not an XTD1 container");
  const std::size_t end = data.find("\n\n");
  if (end == std::string_view::npos) fail(ErrorKind::io, source + ": truncated header");
  const std::string_view header = data.substr(0, end + 1);
  const std::size_t ck = header.rfind("header_checksum: ");
  if (ck == std::string_view::npos || (ck > 0 && header[ck - 1] != '\n')) {
    fail(ErrorKind::io, source + ": header checksum missing");
  }
  const std::string stated(header.substr(ck + 17, header.size() - ck - 18));
  if (stated != hex(fnv1a64(header.substr(0, ck)))) fail(ErrorKind::io, source + ": header checksum mismatch");

  Container c;
  const std::string_view payload = data.substr(end + 2);
  std::istringstream lines{std::string(header.substr(magic.size(), ck - magic.size()))};
  std::string line;
  bool have_version = false;
  std::size_t expected_offset = 0;
  while (std::getline(lines, line)) {
    const std::size_t colon = line.find(": ");
    if (colon == std::string::npos) fail(ErrorKind::io, source + ": malformed header line '" + line + "'");
    const std::string key = line.substr(0, colon);
    const std::string value = line.substr(colon + 2);
    if (key == "format_version") {
      if (value != std::to_string(container_format_version)) {
        fail(ErrorKind::io, source + ": unsupported format version " + value + " (expected " +
                                std::to_string(container_format_version) + ")");
      }
      have_version = true;
    } else if (key == "block") {
      std::istringstream f(value);
      std::string name, type, count, offset, length, sum;
      if (!(f >> name >> type >> count >> offset >> length >> sum)) {
        fail(ErrorKind::io, source + ": malformed block line '" + line + "'");
      }
      const std::string where = source + ": block '" + name + "'";
      const std::uint64_t n = parse_u64(count, 10, where);
      const std::uint64_t off = parse_u64(offset, 10, where);
      const std::uint64_t len = parse_u64(length, 10, where);
      if (off != expected_offset) fail(ErrorKind::io, where + ": unexpected offset");
      if (off + len > payload.size()) fail(ErrorKind::io, source + ": truncated payload in block '" + name + "'");
      const std::string_view bytes = payload.substr(off, len);
      if (hex(fnv1a64(bytes)) != sum) fail(ErrorKind::io, source + ": checksum mismatch in block '" + name + "'");
      expected_offset = off + len;
      Block b;
      b.name = name;
      if (type == "f64" || type == "u64") {
        if (len != n * 8) fail(ErrorKind::io, where + ": length does not match count");
        if (type == "f64") {
          b.type = Type::f64;
          b.f.resize(n);
          if (n) std::memcpy(b.f.data(), bytes.data(), len);
        } else {
          b.type = Type::u64;
          b.u.resize(n);
          if (n) std::memcpy(b.u.data(), bytes.data(), len);
        }
      } else if (type == "bytes") {
        if (len != n) fail(ErrorKind::io, where + ": length does not match count");
        b.type = Type::bytes;
        b.b = std::string(bytes);
      } else {
        fail(ErrorKind::io, where + ": unknown type '" + type + "'");
      }
      c.add(std::move(b));
    } else {
      c.meta_.emplace_back(key, value);
    }
  }
  if (!have_version) fail(ErrorKind::io, source + ": missing format_version");
  if (expected_offset != payload.size()) {
    fail(ErrorKind::io, source + ": " + std::to_string(payload.size() - expected_offset) + " trailing payload bytes");
  }
  return c;
}

void Container::save(const std::string& path) const { write_file(path, serialize()); }

Container Container::load(const std::string& path) { return parse(read_file(path), path); }

void save_fields(const std::string& path, const std::map<std::string, DenseTensor>& fields) {
  Container c;
  c.set("kind", "fields");
  for (const auto& [name, t] : fields) {
    std::string shape;
    for (auto s : t.shape()) shape += (shape.empty() ? "" : " ") + std::to_string(s);
    c.set("shape." + name, shape);
    c.add_f64(name, t.storage());
  }
  c.save(path);
}

std::map<std::string, DenseTensor> load_fields(const std::string& path) {
  const Container c = Container::load(path);
  if (!c.has("kind") || c.get("kind") != "fields") fail(ErrorKind::io, path + ": not a field file");
  std::map<std::string, DenseTensor> out;
  for (const auto& name : c.block_names()) {
    std::istringstream in(c.get("shape." + name));
    Shape shape;
    std::string tok;
    while (in >> tok) shape.push_back(parse_u64(tok, 10, path + ": shape of '" + name + "'"));
    std::vector<double> values = c.f64(name);
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    if (shape.empty() || n != values.size()) fail(ErrorKind::io, path + ": shape of '" + name + "' does not match its data");
    out.emplace(name, DenseTensor(shape, std::move(values)));
  }
  return out;
}

std::string format_curve(const Curve& curve) {
  if (curve.names.size() != curve.values.size()) fail(ErrorKind::io, "curve: names and columns differ");
  std::string out = "s";
  for (const auto& n : curve.names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < curve.s.size(); ++i) {
    out += format_double(curve.s[i]);
    for (const auto& col : curve.values) out += "," + format_double(col.at(i));
    out += "\n";
  }
  return out;
}

void save_curve(const std::string& path, const Curve& curve) { write_file(path, format_curve(curve)); }

Curve parse_curve(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) fail(ErrorKind::io, source + ": empty curve file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto head = split(line);
  if (head.empty() || head[0] != "s") fail(ErrorKind::io, source + ": first column must be 's'");
  Curve c;
  c.names.assign(head.begin() + 1, head.end());
  c.values.resize(c.names.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = source + ":" + std::to_string(row);
    if (cells.size() != head.size()) fail(ErrorKind::io, where + ": expected " + std::to_string(head.size()) + " columns");
    c.s.push_back(parse_double(cells[0], where));
    for (std::size_t k = 1; k < cells.size(); ++k) c.values[k - 1].push_back(parse_double(cells[k], where));
  }
  return c;
}

Curve load_curve(const std::string& path) { return parse_curve(read_file(path), path); }

}  // namespace xtd
