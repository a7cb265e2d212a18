#include "kplex/trace.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace kplex {

FeatureContext FeatureContext::make(const Graph& g_prime, int k, int lb) {
  const GraphStats s = stats(g_prime);
  FeatureContext ctx;
  ctx.lb = lb;
  ctx.ub = static_cast<double>(g_prime.vertex_count());
  ctx.k = k;
  ctx.avg_deg = s.avg_degree;
  ctx.max_deg = static_cast<double>(s.max_degree);
  return ctx;
}

FeatureVector extract_features(const FeatureContext& ctx, const SearchState& st) {
  FeatureVector f;
  f[kLb] = ctx.lb;
  f[kUb] = ctx.ub;
  f[kK] = ctx.k;
  f[kVsSize] = static_cast<double>(st.vs_size());
  f[kNvsMax] = static_cast<double>(st.max_deg_in_vs());
  f[kNvsSum] = static_cast<double>(st.sum_deg_in_vs());
  f[kVaSize] = static_cast<double>(st.va_size());
  f[kInterEdge] = static_cast<double>(st.inter_edge_total());
  f[kAvgDeg] = ctx.avg_deg;
  f[kMaxDeg] = ctx.max_deg;
  return f;
}

FeatureVector extract_features(const Graph& g_prime, const SearchState& st, const SearchConfig& cfg) {
  return extract_features(FeatureContext::make(g_prime, cfg.k, cfg.lb), st);
}

namespace {

using ojson = nlohmann::ordered_json;

// Integral values go out as JSON integers; the rest as shortest round-trip doubles.
ojson number(double v) {
  if (std::floor(v) == v && std::fabs(v) < 9007199254740992.0) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

ojson header() {
  ojson order = ojson::array();
  for (auto name : kFeatureNames) order.push_back(std::string(name));
  return {{"schema", kFeatureSchemaVersion}, {"order", order}};
}

}  // namespace

TraceWriter::TraceWriter(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open trace file for writing: " + path.string());
  if (fresh) out_ << header().dump() << '\n';
}

void TraceWriter::write(const Example& e) {
  ojson f = ojson::array();
  for (double v : e.features) f.push_back(number(v));
  ojson line = {{"f", std::move(f)},
                {"y", e.label ? 1 : 0},
                {"g", e.meta.graph_id},
                {"k", e.meta.k},
                {"lb", e.meta.lb}};
  if (e.count != 1) line["m"] = e.count;
  out_ << line.dump() << '\n';
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
  ++written_;
}

void TraceWriter::flush() {
  out_.flush();
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

std::size_t write_trace(std::span<const Example> examples, const std::filesystem::path& path) {
  TraceWriter w(path);
  for (const auto& e : examples) w.write(e);
  w.flush();
  return w.written();
}

std::vector<Example> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw TraceError(path.string() + ":" + std::to_string(line_no) + ": " + why, line_no);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("expected a JSON object");
    if (j.contains("schema")) {
      if (j["schema"] != kFeatureSchemaVersion) fail("unsupported trace schema version");
      const auto& order = j.value("order", nlohmann::json::array());
      if (order.size() != kFeatureCount) fail("feature order length mismatch");
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (!order[i].is_string() || order[i].get<std::string>() != kFeatureNames[i]) {
          fail("feature order mismatch at position " + std::to_string(i));
        }
      }
      continue;
    }
    for (const char* key : {"f", "y", "g", "k", "lb"}) {
      if (!j.contains(key)) fail(std::string("missing field \"") + key + "\"");
    }
    const auto& f = j["f"];
    if (!f.is_array() || f.size() != kFeatureCount) {
      fail("expected " + std::to_string(kFeatureCount) + " features");
    }
    Example e;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (!f[i].is_number()) fail("non-numeric feature");
      e.features[i] = f[i].get<double>();
    }
    const auto& y = j["y"];
    if (!y.is_number_integer() || (y != 0 && y != 1)) fail("label must be 0 or 1");
    e.label = y == 1;
    if (!j["g"].is_number_integer() || !j["k"].is_number_integer() || !j["lb"].is_number_integer()) {
      fail("g, k and lb must be integers");
    }
    e.meta.graph_id = j["g"].get<std::int64_t>();
    e.meta.k = j["k"].get<int>();
    e.meta.lb = j["lb"].get<int>();
    if (j.contains("m")) {
      if (!j["m"].is_number_unsigned() || j["m"] == 0) fail("multiplicity must be a positive integer");
      e.count = j["m"].get<std::uint64_t>();
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace kplex
