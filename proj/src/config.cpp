#include "pupo/config.hpp"

#include "pupo/io.hpp"

#include <fstream>
#include <sstream>

namespace pupo {

namespace {

std::string trim(std::string const &s)
{
  auto const b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return {};
  }
  auto const e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string dotted(std::string const &section, std::string const &key)
{
  return section.empty() ? key : section + "." + key;
}

} // namespace

ConfigFile ConfigFile::parse(std::istream &in, std::string const &origin)
{
  ConfigFile file;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto cut = line.find_first_of("#;"); cut != std::string::npos) {
      line.erase(cut);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    auto where = [&] { return origin + ":" + std::to_string(lineno) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument(where() + "unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto const eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(where() + "expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument(where() + "empty key");
    }
    if (file.has(section, key)) {
      throw std::invalid_argument(where() + "duplicate key " + dotted(section, key));
    }
    file.sections_[section][key] = trim(line.substr(eq + 1));
  }
  return file;
}

ConfigFile ConfigFile::load(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open config: " + path.string());
  }
  return parse(in, path.string());
}

void ConfigFile::require_known(std::set<std::string> const &allowed) const
{
  for (auto const &[section, keys] : sections_) {
    for (auto const &[key, value] : keys) {
      if (!allowed.contains(dotted(section, key))) {
        throw std::invalid_argument("unknown config key: " + dotted(section, key));
      }
    }
  }
}

bool ConfigFile::has(std::string const &section, std::string const &key) const
{
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.contains(key);
}

std::optional<std::string> ConfigFile::get(std::string const &section, std::string const &key) const
{
  auto it = sections_.find(section);
  if (it == sections_.end()) {
    return std::nullopt;
  }
  auto kt = it->second.find(key);
  if (kt == it->second.end()) {
    return std::nullopt;
  }
  return kt->second;
}

void ConfigFile::set(std::string const &section, std::string const &key, std::string value)
{
  sections_[section][key] = std::move(value);
}

std::optional<double> ConfigFile::get_double(std::string const &section, std::string const &key) const
{
  auto v = get(section, key);
  if (!v) {
    return std::nullopt;
  }
  try {
    return io::parse_double(*v);
  } catch (std::exception const &) {
    throw std::invalid_argument("config key " + dotted(section, key) + ": not a number: " + *v);
  }
}

std::optional<std::size_t> ConfigFile::get_size(std::string const &section, std::string const &key) const
{
  auto v = get(section, key);
  if (!v) {
    return std::nullopt;
  }
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(*v, &pos);
  } catch (std::exception const &) {
    pos = 0;
  }
  if (pos != v->size() || v->empty() || v->front() == '-') {
    throw std::invalid_argument("config key " + dotted(section, key) + ": not a non-negative integer: " + *v);
  }
  return static_cast<std::size_t>(n);
}

std::optional<bool> ConfigFile::get_bool(std::string const &section, std::string const &key) const
{
  auto v = get(section, key);
  if (!v) {
    return std::nullopt;
  }
  if (*v == "true" || *v == "1" || *v == "yes") {
    return true;
  }
  if (*v == "false" || *v == "0" || *v == "no") {
    return false;
  }
  throw std::invalid_argument("config key " + dotted(section, key) + ": not a boolean: " + *v);
}

std::string ConfigFile::to_text() const
{
  std::ostringstream out;
  bool first = true;
  for (auto const &[section, keys] : sections_) {
    if (!first) {
      out << '\n';
    }
    first = false;
    if (!section.empty()) {
      out << '[' << section << "]\n";
    }
    for (auto const &[key, value] : keys) {
      out << key << " = " << value << '\n';
    }
  }
  return out.str();
}

void ConfigFile::save(std::filesystem::path const &path) const
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write config: " + path.string());
  }
  out << to_text();
}

std::set<std::string> const &train_config_keys()
{
  static std::set<std::string> const keys{
    "train.lambda1",        "train.lambda2",       "train.batch_size",     "train.epochs",
    "train.initial_lr",     "train.lr_decay",      "train.decay_step",     "train.min_lr",
    "train.weight_decay",   "train.beta1",         "train.beta2",          "train.adam_eps",
    "train.depth",          "train.channels",      "train.prob_lr",        "train.prob_optimizer",
    "train.seed",           "train.threads",       "constraint.rate",      "constraint.epsilon",
    "constraint.region_size", "constraint.p_min",  "constraint.p_max",     "constraint.seed",
  };
  return keys;
}

TrainConfig train_config_from(ConfigFile const &file, TrainConfig cfg)
{
  auto d = [&](char const *key, double &field) {
    if (auto v = file.get_double("train", key)) field = *v;
  };
  auto z = [&](char const *key, std::size_t &field) {
    if (auto v = file.get_size("train", key)) field = *v;
  };
  d("lambda1", cfg.lambda1);
  d("lambda2", cfg.lambda2);
  z("batch_size", cfg.batch_size);
  z("epochs", cfg.max_epochs);
  d("initial_lr", cfg.initial_lr);
  d("lr_decay", cfg.lr_decay_factor);
  z("decay_step", cfg.decay_step);
  d("min_lr", cfg.min_lr);
  d("weight_decay", cfg.weight_decay);
  d("beta1", cfg.beta1);
  d("beta2", cfg.beta2);
  d("adam_eps", cfg.adam_eps);
  z("depth", cfg.recnet_depth);
  z("channels", cfg.recnet_channels);
  d("prob_lr", cfg.prob_lr);
  if (auto v = file.get("train", "prob_optimizer")) cfg.prob_optimizer = parse_optimizer(*v);
  if (auto v = file.get_size("train", "seed")) cfg.seed = *v;
  z("threads", cfg.threads);

  auto& c = cfg.constraint;
  if (auto v = file.get_double("constraint", "rate")) c.target_rate = *v;
  if (auto v = file.get_double("constraint", "epsilon")) c.epsilon = *v;
  if (auto v = file.get_size("constraint", "region_size")) c.region_size = *v;
  if (auto v = file.get_double("constraint", "p_min")) c.p_min = *v;
  if (auto v = file.get_double("constraint", "p_max")) c.p_max = *v;
  if (auto v = file.get_size("constraint", "seed")) c.seed = *v;
  return cfg;
}

ConfigFile to_config(TrainConfig const &cfg)
{
  ConfigFile f;
  auto d = [&](char const *section, char const *key, double v) { f.set(section, key, io::format_double(v)); };
  auto z = [&](char const *section, char const *key, std::uint64_t v) { f.set(section, key, std::to_string(v)); };
  d("train", "lambda1", cfg.lambda1);
  d("train", "lambda2", cfg.lambda2);
  z("train", "batch_size", cfg.batch_size);
  z("train", "epochs", cfg.max_epochs);
  d("train", "initial_lr", cfg.initial_lr);
  d("train", "lr_decay", cfg.lr_decay_factor);
  z("train", "decay_step", cfg.decay_step);
  d("train", "min_lr", cfg.min_lr);
  d("train", "weight_decay", cfg.weight_decay);
  d("train", "beta1", cfg.beta1);
  d("train", "beta2", cfg.beta2);
  d("train", "adam_eps", cfg.adam_eps);
  z("train", "depth", cfg.recnet_depth);
  z("train", "channels", cfg.recnet_channels);
  d("train", "prob_lr", cfg.prob_lr);
  f.set("train", "prob_optimizer", std::string(optimizer_name(cfg.prob_optimizer)));
  z("train", "seed", cfg.seed);
  z("train", "threads", cfg.threads);
  d("constraint", "rate", cfg.constraint.target_rate);
  d("constraint", "epsilon", cfg.constraint.epsilon);
  z("constraint", "region_size", cfg.constraint.region_size);
  d("constraint", "p_min", cfg.constraint.p_min);
  d("constraint", "p_max", cfg.constraint.p_max);
  z("constraint", "seed", cfg.constraint.seed);
  return f;
}

std::vector<double> parse_double_list(std::string const &text)
{
  std::vector<double> out;
  for (auto const &item : parse_string_list(text)) {
    out.push_back(io::parse_double(item));
  }
  return out;
}

std::vector<std::string> parse_string_list(std::string const &text)
{
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

} // namespace pupo
