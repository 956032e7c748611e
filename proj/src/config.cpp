#include "aaerec/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "aaerec/error.hpp"

namespace aaerec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(value);
  while (std::getline(in, part, ',')) out.push_back(trim(part));
  return out;
}

class LineContext {
 public:
  LineContext(const std::string& source, std::size_t line, const std::string& key)
      : source_(source), line_(line), key_(key) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": key '" + key_ + "': " + what);
  }

  unsigned long long unsigned_value(const std::string& text) const {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
      fail("expected a non-negative integer, got '" + text + "'");
    }
    try {
      return std::stoull(text);
    } catch (const std::out_of_range&) {
      fail("value '" + text + "' is out of range");
    }
  }

  int int_value(const std::string& text) const {
    const auto v = unsigned_value(text);
    if (v > 1'000'000'000ULL) fail("value '" + text + "' is out of range");
    return static_cast<int>(v);
  }

 private:
  const std::string& source_;
  std::size_t line_;
  const std::string& key_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const LineContext ctx(source, lineno, key);
    if (!seen.insert(key).second) ctx.fail("given more than once");
    if (value.empty()) ctx.fail("empty value");

    if (key == "ratings") {
      cfg.ratings = resolve(base_dir, value);
    } else if (key == "meta") {
      cfg.meta = resolve(base_dir, value);
    } else if (key == "out") {
      cfg.out = resolve(base_dir, value);
    } else if (key == "split_year") {
      cfg.split_year = ctx.int_value(value);
    } else if (key == "alphas") {
      cfg.alphas.clear();
      for (const auto& a : split_list(value)) {
        const int alpha = ctx.int_value(a);
        if (alpha < 1) ctx.fail("thresholds must be >= 1");
        cfg.alphas.push_back(alpha);
      }
    } else if (key == "models") {
      cfg.models.clear();
      for (const auto& m : split_list(value)) {
        try {
          cfg.models.push_back(parse_model_kind(m));
        } catch (const ConfigError& e) {
          ctx.fail(e.what());
        }
      }
    } else if (key == "modality") {
      cfg.modalities.clear();
      for (const auto& m : split_list(value)) {
        try {
          cfg.modalities.push_back(parse_modality(m));
        } catch (const ConfigError& e) {
          ctx.fail(e.what());
        }
      }
    } else if (key == "runs") {
      cfg.runs = ctx.unsigned_value(value);
      if (cfg.runs < 1) ctx.fail("must be >= 1");
    } else if (key == "seed") {
      cfg.seed = ctx.unsigned_value(value);
    } else if (key == "epochs") {
      cfg.epochs = ctx.unsigned_value(value);
      if (cfg.epochs < 1) ctx.fail("must be >= 1");
    } else if (key == "svd_rank") {
      cfg.svd_rank = ctx.unsigned_value(value);
      if (cfg.svd_rank < 1) ctx.fail("must be >= 1");
    } else if (key == "batch_size") {
      cfg.batch_size = ctx.unsigned_value(value);
      if (cfg.batch_size < 1) ctx.fail("must be >= 1");
    } else if (key == "embeddings") {
      cfg.embeddings = value.starts_with("builtin:") ? value : resolve(base_dir, value).string();
    } else {
      ctx.fail("unknown key (valid: ratings, meta, split_year, alphas, models, modality, runs, seed, "
               "epochs, embeddings, out, svd_rank, batch_size)");
    }
  }
  for (const char* required : {"ratings", "meta", "split_year", "out"}) {
    if (!seen.count(required)) throw ConfigError(source + ": missing required key '" + required + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), path.parent_path());
}

}  // namespace aaerec
