#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvplan::vision {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestRow {
  std::filesystem::path image;
  /// One entry per mask column; empty cells give nullopt.
  std::vector<std::optional<std::filesystem::path>> masks;
};

struct CsvManifest {
  std::string image_column;
  std::vector<std::string> mask_columns;
  std::vector<ManifestRow> rows;

  /// Index of a mask column, if present.
  std::optional<std::size_t> mask_index(const std::string& column) const;
};

/// Column names from a header_params value: "image,mask", "[image, mask]".
std::vector<std::string> parse_header_params(const std::string& text);

/// Comma-separated, header row first, no quoting. `columns[0]` names the image
/// column and the rest name mask columns (absent ones are skipped). With no
/// columns the image column is `image` (else the first) and every other column
/// is a mask column. Relative paths resolve against the CSV's directory.
CsvManifest load_manifest(const std::filesystem::path& csv, const std::vector<std::string>& columns = {});

}  // namespace cvplan::vision
