#include "mulreg/serialize.hpp"

#include "mulreg/error.hpp"
#include "mulreg/rng.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mulreg {

std::string format_double(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", x);
  return buf.data();
}

namespace {

//! JSON has no inf/nan; keep them readable as strings.
Json num(double x)
{
  if (std::isfinite(x))
    return x;
  return format_double(x);
}

} // namespace

CsvTable::CsvTable(std::vector<std::string> header)
  : width_(header.size())
{
  row(header);
}

CsvTable& CsvTable::row(const std::vector<double>& values)
{
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values)
    cells.push_back(format_double(v));
  return row(cells);
}

CsvTable& CsvTable::row(const std::vector<std::string>& cells)
{
  if (cells.size() != width_)
    throw Error(ErrorKind::InvalidArgument, "csv row has " + std::to_string(cells.size()) + " cells, expected "
                                              + std::to_string(width_));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i)
      text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  return *this;
}

std::string CsvTable::str() const
{
  return text_;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::Config, "cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Config, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sample_csv(const Sample& s)
{
  const int d = s.grid->dim();
  std::vector<std::string> header;
  for (int j = 1; j <= d; ++j)
    header.push_back("x_" + std::to_string(j));
  header.push_back("y");
  CsvTable t(header);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto x = s.x(i);
    std::vector<double> row(x.begin(), x.end());
    row.push_back(s.y_values[i]);
    t.row(row);
  }
  return t.str();
}

Json sample_sidecar(const Sample& s)
{
  return Json{{"seed", s.seed}, {"n", s.size()}, {"d", s.grid->dim()}, {"function_id", s.function_id}};
}

Json to_json(const SelectionTrace& t)
{
  Json est = Json::array();
  for (const auto& e : t.estimates)
    est.push_back({{"k", e.k}, {"h", num(e.h)}, {"f_hat", num(e.f_hat)}, {"lambda", num(e.lambda)},
                   {"S_n", num(e.s_n)}, {"window_count", e.window_count}, {"fallback", e.fallback}});
  Json cmp = Json::array();
  for (const auto& c : t.comparisons)
    cmp.push_back({{"k", c.k}, {"l", c.l}, {"difference", num(c.difference)}, {"threshold", num(c.bound)},
                   {"pass", c.pass}});
  return Json{{"estimates", est},
              {"comparisons", cmp},
              {"k_hat", t.k_hat},
              {"f_hat", num(t.f_hat())},
              {"h_hat", num(t.h_hat())},
              {"bounds", {{"A_hat", num(t.a_hat)}, {"M_hat", num(t.m_hat)}}},
              {"mode", to_string(t.params.mode)},
              {"C_thr", num(t.params.c_thr)},
              {"q", num(t.params.q)}};
}

Json to_json(const IntegratorConfig& c)
{
  return Json{{"method", to_string(c.method)},
              {"nodes_per_axis", c.nodes_per_axis},
              {"proposal_count", c.proposal_count},
              {"seed", c.seed}};
}

Json to_json(const PosteriorEstimate& e)
{
  Json theta = Json::array();
  for (double v : e.theta_hat.values)
    theta.push_back(num(v));
  const auto& r = e.report;
  return Json{{"f_hat", num(e.f_hat)},
              {"theta_hat", theta},
              {"constrained", e.constrained},
              {"iterations", e.iterations},
              {"integrator",
               {{"method", r.method},
                {"node_count", r.node_count},
                {"effective_sample_size", num(r.effective_sample_size)},
                {"min_spacing", num(r.min_spacing)},
                {"max_spacing", num(r.max_spacing)},
                {"support_fraction", num(r.support_fraction)}}}};
}

namespace {

Json histogram_json(const std::map<double, std::size_t>& h)
{
  Json out = Json::array();
  for (const auto& [bw, count] : h)
    out.push_back({{"h", num(bw)}, {"count", count}});
  return out;
}

Json array_of(const std::vector<double>& v)
{
  Json out = Json::array();
  for (double x : v)
    out.push_back(num(x));
  return out;
}

} // namespace

Json to_json(const RiskReport& r)
{
  return Json{{"function_id", r.function_id},
              {"estimator", r.estimator},
              {"n", r.n},
              {"y", array_of(r.y)},
              {"reps", r.reps},
              {"risk", num(r.risk)},
              {"standard_error", num(r.se)},
              {"failures", r.failures},
              {"mean_bandwidth", num(r.mean_bandwidth)},
              {"bandwidth_histogram", histogram_json(r.bandwidth_histogram)}};
}

Json to_json(const OracleResult& r)
{
  return Json{{"h_tilde", num(r.h_tilde)},
              {"risk", num(r.risk)},
              {"candidates", array_of(r.candidates)},
              {"risks", array_of(r.risks)},
              {"standard_errors", array_of(r.ses)},
              {"failures", r.failures}};
}

Json to_json(const F4Report& r)
{
  return Json{{"reps", r.reps},
              {"parametric_risk", num(r.parametric_risk)},
              {"parametric_se", num(r.parametric_se)},
              {"adaptive_risk", num(r.adaptive_risk)},
              {"adaptive_se", num(r.adaptive_se)},
              {"mean_bandwidth", num(r.mean_bandwidth)},
              {"bandwidth_histogram", histogram_json(r.bandwidth_histogram)},
              {"failures", r.failures}};
}

Json to_json(const RateFit& r)
{
  Json ns = Json::array();
  for (auto n : r.ns)
    ns.push_back(n);
  return Json{{"ns", ns},
              {"risks", array_of(r.risks)},
              {"standard_errors", array_of(r.ses)},
              {"oracle_h", array_of(r.oracle_h)},
              {"baseline_risks", array_of(r.baseline_risks)},
              {"baseline_standard_errors", array_of(r.baseline_ses)},
              {"baseline_h", array_of(r.baseline_h)},
              {"slope", num(r.slope)},
              {"baseline_slope", num(r.baseline_slope)},
              {"target", num(r.target)},
              {"baseline_target", num(r.baseline_target)}};
}

Json to_json(const TailCurve& c)
{
  return Json{{"eps", array_of(c.eps)},
              {"prob", array_of(c.prob)},
              {"fit", {{"slope", num(c.fit.slope)}, {"intercept", num(c.fit.intercept)}, {"r2", num(c.fit.r2)}}},
              {"fit_points", c.fit_points},
              {"fit_range", {kTailFitLow, kTailFitHigh}},
              {"failures", c.failures}};
}

std::string table_csv(const std::vector<TableRow>& rows)
{
  CsvTable t({"function", "n", "points", "adaptive_risk", "adaptive_se", "oracle_risk", "oracle_se", "ratio",
              "ratio_se", "mean_h_hat", "failures", "fallbacks"});
  for (const auto& r : rows)
    t.row(std::vector<std::string>{r.function_id, std::to_string(r.n), std::to_string(r.points),
                                   format_double(r.adaptive_risk), format_double(r.adaptive_se),
                                   format_double(r.oracle_risk), format_double(r.oracle_se), format_double(r.ratio),
                                   format_double(r.ratio_se), format_double(r.mean_h_hat),
                                   std::to_string(r.failures), std::to_string(r.fallbacks)});
  return t.str();
}

std::string table_points_csv(const std::vector<TableRow>& rows)
{
  CsvTable t({"function", "n", "y", "f", "adaptive_risk", "oracle_risk", "oracle_h"});
  for (const auto& r : rows)
    for (const auto& p : r.per_point)
      t.row(std::vector<std::string>{r.function_id, std::to_string(r.n), format_double(p[0]), format_double(p[1]),
                                     format_double(p[2]), format_double(p[3]), format_double(p[4])});
  return t.str();
}

std::string oracle_csv(const OracleResult& r)
{
  CsvTable t({"h", "risk", "se"});
  for (std::size_t i = 0; i < r.candidates.size(); ++i)
    t.row(std::vector<double>{r.candidates[i], r.risks[i], r.ses[i]});
  return t.str();
}

std::string rate_csv(const RateFit& r)
{
  CsvTable t({"n", "bayes_risk", "bayes_se", "bayes_h", "lse_risk", "lse_se", "lse_h"});
  for (std::size_t i = 0; i < r.ns.size(); ++i)
    t.row(std::vector<std::string>{std::to_string(r.ns[i]), format_double(r.risks[i]), format_double(r.ses[i]),
                                   format_double(r.oracle_h[i]), format_double(r.baseline_risks[i]),
                                   format_double(r.baseline_ses[i]), format_double(r.baseline_h[i])});
  return t.str();
}

std::string tail_csv(const TailCurve& c)
{
  CsvTable t({"eps", "prob"});
  for (std::size_t i = 0; i < c.eps.size(); ++i)
    t.row(std::vector<double>{c.eps[i], c.prob[i]});
  return t.str();
}

std::string histogram_csv(const std::map<double, std::size_t>& h)
{
  CsvTable t({"h", "count"});
  for (const auto& [bw, count] : h)
    t.row(std::vector<std::string>{format_double(bw), std::to_string(count)});
  return t.str();
}

std::string git_blob_sha1(const std::string& content)
{
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1
    && EVP_DigestUpdate(ctx, header.data(), header.size()) == 1
    && EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 && EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok)
    throw Error(ErrorKind::InvalidArgument, "SHA-1 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    const unsigned char c = digest[i];
    out += hex[c >> 4];
    out += hex[c & 15];
  }
  return out;
}

Manifest::Manifest(std::string command, Json config, std::uint64_t master_seed)
  : command_(std::move(command))
  , config_(std::move(config))
  , seed_(master_seed)
{}

void Manifest::write(const std::filesystem::path& dir, const std::string& name, const std::string& text)
{
  write_text(dir / name, text);
  outputs_.push_back({{"path", name}, {"sha1", git_blob_sha1(text)}, {"bytes", text.size()}});
}

Json Manifest::json() const
{
  return Json{{"manifest_version", kManifestVersion},
              {"tool", "mulreg"},
              {"command", command_},
              {"config", config_},
              {"master_seed", seed_},
              {"rng", kRngVersion},
              {"outputs", outputs_}};
}

} // namespace mulreg
