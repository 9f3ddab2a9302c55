#include "cvplan/vision/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cvplan::vision {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::optional<std::size_t> CsvManifest::mask_index(const std::string& column) const {
  const auto it = std::find(mask_columns.begin(), mask_columns.end(), column);
  if (it == mask_columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - mask_columns.begin());
}

std::vector<std::string> parse_header_params(const std::string& text) {
  std::string body = trim(text);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::vector<std::string> names;
  for (auto cell : split(body)) {
    cell.erase(std::remove_if(cell.begin(), cell.end(), [](char c) { return c == '\'' || c == '"'; }), cell.end());
    cell = trim(cell);
    if (!cell.empty()) names.push_back(cell);
  }
  return names;
}

CsvManifest load_manifest(const std::filesystem::path& csv, const std::vector<std::string>& columns) {
  std::ifstream in(csv);
  if (!in) throw ManifestError("cannot open manifest '" + csv.string() + "'");
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split(trim(line));
      break;
    }
  }
  if (header.empty()) throw ManifestError("manifest '" + csv.string() + "' is empty");

  const auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };

  CsvManifest manifest;
  std::size_t image_col = 0;
  std::vector<std::size_t> mask_cols;
  if (columns.empty()) {
    image_col = column_of("image").value_or(0);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == image_col) continue;
      mask_cols.push_back(i);
      manifest.mask_columns.push_back(header[i]);
    }
  } else {
    const auto found = column_of(columns.front());
    if (!found)
      throw ManifestError("manifest '" + csv.string() + "' has no image column '" + columns.front() + "'");
    image_col = *found;
    for (std::size_t i = 1; i < columns.size(); ++i) {
      if (const auto c = column_of(columns[i])) {
        mask_cols.push_back(*c);
        manifest.mask_columns.push_back(columns[i]);
      }
    }
  }
  manifest.image_column = header[image_col];

  const auto base = csv.parent_path();
  const auto resolve = [&](const std::string& cell) {
    std::filesystem::path p(cell);
    return p.is_absolute() ? p : base / p;
  };
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line));
    if (cells.size() != header.size()) {
      throw ManifestError("manifest '" + csv.string() + "' line " + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    if (cells[image_col].empty())
      throw ManifestError("manifest '" + csv.string() + "' line " + std::to_string(line_no) + ": empty image path");
    ManifestRow row;
    row.image = resolve(cells[image_col]);
    if (!std::filesystem::exists(row.image))
      throw ManifestError("manifest '" + csv.string() + "': missing file '" + row.image.string() + "'");
    for (const auto c : mask_cols) {
      if (cells[c].empty()) {
        row.masks.emplace_back();
        continue;
      }
      auto p = resolve(cells[c]);
      if (!std::filesystem::exists(p))
        throw ManifestError("manifest '" + csv.string() + "': missing file '" + p.string() + "'");
      row.masks.emplace_back(std::move(p));
    }
    manifest.rows.push_back(std::move(row));
  }
  if (manifest.rows.empty()) throw ManifestError("manifest '" + csv.string() + "' has no rows");
  return manifest;
}

}  // namespace cvplan::vision
