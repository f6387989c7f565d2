#pragma once

#include "pupo/pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace pupo {

/// `[section]` headers and `key = value` lines; '#' and ';' start comments.
/// Keys before any header belong to section "".
class ConfigFile
{
public:
  static ConfigFile parse(std::istream &in, std::string const &origin = "<config>");
  static ConfigFile load(std::filesystem::path const &path);

  /// Throws std::invalid_argument naming the first "section.key" not in `allowed`.
  void require_known(std::set<std::string> const &allowed) const;

  bool has(std::string const &section, std::string const &key) const;
  std::optional<std::string> get(std::string const &section, std::string const &key) const;
  void set(std::string const &section, std::string const &key, std::string value);

  std::optional<double> get_double(std::string const &section, std::string const &key) const;
  std::optional<std::size_t> get_size(std::string const &section, std::string const &key) const;
  std::optional<bool> get_bool(std::string const &section, std::string const &key) const;

  std::map<std::string, std::map<std::string, std::string>> const &sections() const noexcept { return sections_; }

  /// Canonical text form (sorted sections and keys).
  std::string to_text() const;
  void save(std::filesystem::path const &path) const;

private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Keys understood in the [train] and [constraint] sections.
std::set<std::string> const &train_config_keys();

/// Overlay [train] and [constraint] keys onto `base`.
TrainConfig train_config_from(ConfigFile const &file, TrainConfig base = {});
/// Inverse of train_config_from; every field is written.
ConfigFile to_config(TrainConfig const &cfg);

/// Comma-separated list of doubles.
std::vector<double> parse_double_list(std::string const &text);
std::vector<std::string> parse_string_list(std::string const &text);

} // namespace pupo
