#pragma once

#include <filesystem>
#include <string>

#include "aaerec/evalharness.hpp"

namespace aaerec {

/// Parses a `key = value` experiment file. Blank lines and lines starting
/// with '#' are ignored. Relative paths (ratings, meta, out, embedding files)
/// resolve against the config file's directory.
///
/// Required: ratings, meta, split_year, out. Optional with defaults: alphas
/// (1), models (all), modality (both; a comma list is accepted), runs (3),
/// seed (1), epochs (20), embeddings (builtin:hash:50:1), svd_rank (1000),
/// batch_size (100).
///
/// Errors name the key and line; unreadable files name the path.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Same grammar over in-memory text; `source` is used in messages and
/// `base_dir` anchors relative paths.
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::filesystem::path& base_dir);

}  // namespace aaerec
