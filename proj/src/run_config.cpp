#include "edn/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace edn {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a non-negative integer");
  }
  return v;
}

template <std::size_t N>
std::array<std::size_t, N> parse_list(std::string_view key, std::string_view text) {
  std::array<std::size_t, N> out{};
  std::size_t i = 0;
  while (true) {
    const auto comma = text.find(',');
    if (i == N) throw ConfigError(std::string(key) + ": expected " + std::to_string(N) + " values");
    out[i++] = parse_uint(key, text.substr(0, comma));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (i != N) throw ConfigError(std::string(key) + ": expected " + std::to_string(N) + " values");
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not true or false");
}

template <std::size_t N>
std::string join(const std::array<std::size_t, N>& v) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

NetworkConfig parse_run_config(std::string_view text) {
  NetworkConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) throw ConfigError(std::string(key) + ": given more than once");

    if (key == "backbone_widths") {
      cfg.backbone_widths = parse_list<kStages>(key, value);
    } else if (key == "decoder_width") {
      cfg.decoder_width = parse_uint(key, value);
    } else if (key == "edb_width") {
      cfg.edb_width = parse_uint(key, value);
    } else if (key == "rates_L") {
      cfg.rates.low = parse_list<kScpcBranches>(key, value);
    } else if (key == "rates_H") {
      cfg.rates.high = parse_list<kScpcBranches>(key, value);
    } else if (key == "rates_EH") {
      cfg.rates.extra_high = parse_list<kScpcBranches>(key, value);
    } else if (key == "lite") {
      cfg.lite = parse_bool(key, value);
    } else if (key == "input_side") {
      cfg.input_side = parse_uint(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_uint(key, value);
    } else {
      throw ConfigError(std::string(key) + ": unknown key");
    }
  }
  validate(cfg);
  return cfg;
}

NetworkConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string format_run_config(const NetworkConfig& cfg) {
  std::ostringstream out;
  out << "backbone_widths = " << join(cfg.backbone_widths) << "\n"
      << "decoder_width = " << cfg.decoder_width << "\n"
      << "edb_width = " << cfg.edb_width << "\n"
      << "rates_L = " << join(cfg.rates.low) << "\n"
      << "rates_H = " << join(cfg.rates.high) << "\n"
      << "rates_EH = " << join(cfg.rates.extra_high) << "\n"
      << "lite = " << (cfg.lite ? "true" : "false") << "\n"
      << "input_side = " << cfg.input_side << "\n"
      << "seed = " << cfg.seed << "\n";
  return out.str();
}

}  // namespace edn
