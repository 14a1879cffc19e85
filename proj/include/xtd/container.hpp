#pragma once

// Binary container shared by model files and field files.
//
//   XTD1
//   format_version: 1
//   <key>: <value>             free-form metadata, one per line
//   block: <name> <type> <count> <offset> <length> <fnv1a64 hex>
//   header_checksum: <fnv1a64 hex of every byte above this line>
//   <blank line>
//   <payload: blocks back to back, little-endian>
//
// Block offsets are relative to the payload start. Types are f64, u64 and
// bytes.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xtd/tensor.hpp"

namespace xtd {

inline constexpr int container_format_version = 1;

std::uint64_t fnv1a64(std::string_view bytes);

class Container {
 public:
  enum class Type { f64, u64, bytes };

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // io error when missing
  const std::vector<std::pair<std::string, std::string>>& meta() const { return meta_; }

  void add_f64(const std::string& name, std::vector<double> values);
  void add_u64(const std::string& name, std::vector<std::uint64_t> values);
  void add_bytes(const std::string& name, std::string bytes);

  bool has_block(const std::string& name) const;
  const std::vector<double>& f64(const std::string& name) const;
  const std::vector<std::uint64_t>& u64(const std::string& name) const;
  const std::string& bytes(const std::string& name) const;
  std::vector<std::string> block_names() const;

  std::string serialize() const;
  // `source` only labels error messages.
  static Container parse(std::string_view data, const std::string& source = "container");

  void save(const std::string& path) const;
  static Container load(const std::string& path);

 private:
  struct Block {
    std::string name;
    Type type = Type::f64;
    std::vector<double> f;
    std::vector<std::uint64_t> u;
    std::string b;
  };
  const Block& block(const std::string& name, Type type) const;
  void add(Block block);

  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<Block> blocks_;
  std::map<std::string, std::size_t> index_;
};

// Field file: one f64 block per field, shape recorded as "shape.<name>".
void save_fields(const std::string& path, const std::map<std::string, DenseTensor>& fields);
std::map<std::string, DenseTensor> load_fields(const std::string& path);

// Curve CSV: header `s,<f1>,<f2>,...`, one row per sample, %.17g.
struct Curve {
  std::vector<double> s;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // one column per name
};
void save_curve(const std::string& path, const Curve& curve);
std::string format_curve(const Curve& curve);
Curve parse_curve(const std::string& text, const std::string& source = "curve");
Curve load_curve(const std::string& path);

std::string format_double(double v);  // %.17g
double parse_double(const std::string& text, const std::string& where);

}  // namespace xtd
