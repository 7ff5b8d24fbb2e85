#pragma once

#include "mulreg/bayes.hpp"
#include "mulreg/experiments.hpp"
#include "mulreg/lepski.hpp"
#include "mulreg/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mulreg {

using Json = nlohmann::ordered_json;

//! 17 significant digits: round-trips every double.
std::string format_double(double x);

//! Rows of already formatted cells; the first row is the header.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(const std::vector<double>& values);
  CsvTable& row(const std::vector<std::string>& cells);
  std::string str() const;

private:
  std::size_t width_;
  std::string text_;
};

//! Writes the file, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

//! Header x_1,...,x_d,y; one row per design point.
std::string sample_csv(const Sample& s);
//! {seed, n, d, function_id}
Json sample_sidecar(const Sample& s);

Json to_json(const SelectionTrace& t);
Json to_json(const PosteriorEstimate& e);
Json to_json(const IntegratorConfig& c);
Json to_json(const RiskReport& r);
Json to_json(const OracleResult& r);
Json to_json(const F4Report& r);
Json to_json(const RateFit& r);
Json to_json(const TailCurve& c);

std::string table_csv(const std::vector<TableRow>& rows);
std::string table_points_csv(const std::vector<TableRow>& rows);
std::string oracle_csv(const OracleResult& r);
std::string rate_csv(const RateFit& r);
std::string tail_csv(const TailCurve& c);
//! (h, count) pairs.
std::string histogram_csv(const std::map<double, std::size_t>& h);

//! Git blob id: SHA-1 over "blob <size>\0" followed by the content.
std::string git_blob_sha1(const std::string& content);

//! Collects written outputs and emits a manifest listing their hashes.
class Manifest {
public:
  Manifest(std::string command, Json config, std::uint64_t master_seed);

  //! Writes `text` to dir / name and records its hash.
  void write(const std::filesystem::path& dir, const std::string& name, const std::string& text);
  Json json() const;

private:
  std::string command_;
  Json config_;
  std::uint64_t seed_;
  Json outputs_ = Json::array();
};

inline constexpr int kManifestVersion = 1;

} // namespace mulreg
