#include "adafleet/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace adafleet {

namespace {

constexpr const char* kMetricsHeader =
    "tick,requests_generated,requests_accepted,requests_rejected,"
    "fleet_distance_km,occupied_vehicles,utilized_fraction,total_profit,"
    "mean_idle_minutes,active_context,change_detected";

std::vector<std::string> split_csv_line(const std::string& line) {
  // RFC-style: fields may be double-quoted; embedded quotes double up.
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.push_back(std::move(field));
  return out;
}

double parse_field_double(const std::string& s) {
  double v = 0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), v);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size()) {
    throw std::runtime_error("metrics csv: bad number '" + s + "'");
  }
  return v;
}

long parse_field_long(const std::string& s) {
  long v = 0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), v);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size()) {
    throw std::runtime_error("metrics csv: bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string out(kMetricsHeader);
  out.push_back('\n');
  for (const auto& r : rows) {
    out += std::to_string(r.tick);
    out.push_back(',');
    out += std::to_string(r.requests_generated);
    out.push_back(',');
    out += std::to_string(r.requests_accepted);
    out.push_back(',');
    out += std::to_string(r.requests_rejected);
    out.push_back(',');
    out += format_double(r.fleet_distance_km);
    out.push_back(',');
    out += std::to_string(r.occupied_vehicles);
    out.push_back(',');
    out += format_double(r.utilized_fraction);
    out.push_back(',');
    out += format_double(r.total_profit);
    out.push_back(',');
    out += format_double(r.mean_idle_minutes);
    out.push_back(',');
    out += std::to_string(r.active_context);
    out.push_back(',');
    out += (r.change_detected ? "1" : "0");
    out.push_back('\n');
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != kMetricsHeader) {
    throw std::runtime_error("metrics csv: missing or unexpected header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 11) {
      throw std::runtime_error("metrics csv: wrong field count");
    }
    MetricsRow r;
    r.tick = parse_field_long(fields[0]);
    r.requests_generated = parse_field_long(fields[1]);
    r.requests_accepted = parse_field_long(fields[2]);
    r.requests_rejected = parse_field_long(fields[3]);
    r.fleet_distance_km = parse_field_double(fields[4]);
    r.occupied_vehicles = static_cast<int>(parse_field_long(fields[5]));
    r.utilized_fraction = parse_field_double(fields[6]);
    r.total_profit = parse_field_double(fields[7]);
    r.mean_idle_minutes = parse_field_double(fields[8]);
    r.active_context = static_cast<int>(parse_field_long(fields[9]));
    r.change_detected = parse_field_long(fields[10]) != 0;
    rows.push_back(r);
  }
  return rows;
}

std::string changes_csv(std::span<const ChangeEvent> events) {
  std::string out = "tick,old_context,new_context,score\n";
  for (const auto& e : events) {
    out += std::to_string(e.tick);
    out.push_back(',');
    out += std::to_string(e.old_context);
    out.push_back(',');
    out += std::to_string(e.new_context);
    out.push_back(',');
    out += format_double(e.score);
    out.push_back('\n');
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

}  // namespace adafleet
