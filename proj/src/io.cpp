#include "slnlink/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace slnlink {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

[[noreturn]] void row_error(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

// Find a week value whose division by `duration` reproduces `t` exactly.
// t * duration is almost always already a preimage; if rounding moved it
// off by an ulp, probe the immediate neighbors.
double exact_week(double t, double duration) {
  double w = t * duration;
  if (w / duration == t) return w;
  double lo = w, hi = w;
  for (int k = 0; k < 8; ++k) {
    lo = std::nextafter(lo, -1.0);
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
    if (lo / duration == t) return lo;
    if (hi / duration == t) return hi;
  }
  return w;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

TemporalGraph load_edge_csv(const std::string& path, const DatasetManifest& manifest) {
  if (manifest.duration_weeks <= 0.0) {
    throw std::invalid_argument("manifest for '" + manifest.tag + "': duration_weeks must be positive");
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge CSV: " + path);

  struct RawEvent {
    long long src, dst;
    double week;
  };
  std::vector<RawEvent> raw;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string row = trim(line);
    if (row.empty() || row[0] == '#') continue;
    if (!header_seen) {
      // First data-bearing line must be the header.
      std::string squashed;
      for (char c : row) {
        if (c != ' ' && c != '\t') squashed += c;
      }
      if (squashed != "src,dst,week") row_error(path, lineno, "expected header 'src,dst,week'");
      header_seen = true;
      continue;
    }
    std::istringstream ss(row);
    std::string f0, f1, f2, extra;
    if (!std::getline(ss, f0, ',') || !std::getline(ss, f1, ',') || !std::getline(ss, f2, ',')) {
      row_error(path, lineno, "malformed row '" + row + "'");
    }
    if (std::getline(ss, extra, ',')) row_error(path, lineno, "too many fields");
    RawEvent ev;
    try {
      std::size_t pos = 0;
      ev.src = std::stoll(trim(f0), &pos);
      if (pos != trim(f0).size()) throw std::invalid_argument("");
      ev.dst = std::stoll(trim(f1), &pos);
      if (pos != trim(f1).size()) throw std::invalid_argument("");
      ev.week = std::stod(trim(f2), &pos);
      if (pos != trim(f2).size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      row_error(path, lineno, "malformed row '" + row + "'");
    }
    if (ev.src < 0 || ev.dst < 0) row_error(path, lineno, "negative node index");
    if (ev.src == ev.dst) row_error(path, lineno, "self-loop at node " + std::to_string(ev.src));
    if (!(ev.week >= 0.0) || !std::isfinite(ev.week)) row_error(path, lineno, "bad week value");
    if (ev.week > manifest.duration_weeks) {
      row_error(path, lineno, "week " + format_double(ev.week) + " exceeds duration " +
                                  format_double(manifest.duration_weeks));
    }
    raw.push_back(ev);
  }
  if (!header_seen) throw std::runtime_error(path + ": missing 'src,dst,week' header");

  // Compact ids to [0, n) ordered by original id.
  std::map<long long, int> compact;
  for (const auto& ev : raw) {
    compact.emplace(ev.src, 0);
    compact.emplace(ev.dst, 0);
  }
  int next = 0;
  for (auto& [id, idx] : compact) idx = next++;

  std::vector<EdgeEvent> events;
  events.reserve(raw.size());
  for (const auto& ev : raw) {
    events.push_back(EdgeEvent{compact.at(ev.src), compact.at(ev.dst),
                               ev.week / manifest.duration_weeks});
  }
  TemporalGraph g = build_graph(next, std::move(events), manifest.duration_weeks,
                                manifest.tag.empty() ? path : manifest.tag);

  if (manifest.expected_nodes && g.num_nodes() != *manifest.expected_nodes) {
    throw std::runtime_error(path + ": manifest mismatch: expected " +
                             std::to_string(*manifest.expected_nodes) + " nodes, file has " +
                             std::to_string(g.num_nodes()));
  }
  if (manifest.expected_events && int(g.events().size()) != *manifest.expected_events) {
    throw std::runtime_error(path + ": manifest mismatch: expected " +
                             std::to_string(*manifest.expected_events) + " events, file has " +
                             std::to_string(g.events().size()));
  }
  return g;
}

void save_edge_csv(const TemporalGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge CSV: " + path);
  out << "src,dst,week\n";
  for (const auto& e : g.events()) {
    out << e.u << ',' << e.v << ',' << format_double(exact_week(e.timestamp, g.duration_weeks()))
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": manifest parse error: " + e.what());
  }
  DatasetManifest m;
  m.tag = j.at("tag").get<std::string>();
  m.path = j.at("path").get<std::string>();
  m.duration_weeks = j.at("duration_weeks").get<double>();
  if (j.contains("expected_nodes")) m.expected_nodes = j["expected_nodes"].get<int>();
  if (j.contains("expected_events")) m.expected_events = j["expected_events"].get<int>();
  if (m.tag.empty()) throw std::runtime_error(path + ": manifest tag must be non-empty");
  if (m.duration_weeks <= 0.0) throw std::runtime_error(path + ": duration_weeks must be positive");
  return m;
}

std::string stats_table(const std::vector<const TemporalGraph*>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("stats_table requires at least one graph");
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %8s %8s %9s %8s %10s\n", "dataset", "nodes", "edges",
                "duration", "posts", "density");
  out << buf;
  for (const TemporalGraph* g : graphs) {
    GraphStats s = graph_stats(*g);
    std::string tag;
    bool mixed_duration = false;
    for (const auto& r : g->provenance()) {
      if (!tag.empty()) tag += "+";
      tag += r.tag;
      if (r.duration_weeks != g->provenance().front().duration_weeks) mixed_duration = true;
    }
    std::string duration = mixed_duration ? "mixed" : format_double(s.duration_weeks);
    std::snprintf(buf, sizeof(buf), "%-12s %8d %8d %9s %8d %10.6f\n", tag.c_str(), s.num_nodes,
                  s.distinct_edges, duration.c_str(), s.num_events, s.density);
    out << buf;
  }
  return out.str();
}

std::string stats_table(const std::vector<TemporalGraph>& graphs) {
  std::vector<const TemporalGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  return stats_table(ptrs);
}

}  // namespace slnlink
