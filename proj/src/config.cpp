#include "adafleet/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace adafleet {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config: bad integer for '" + key + "': " + value);
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config: bad integer for '" + key + "': " + value);
  }
}

unsigned long long parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config: bad unsigned integer for '" + key + "': " + value);
  }
}

double parse_double(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config: bad number for '" + key + "': " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + value);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(trim(part));
  return out;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  for (const auto& part : split(value, ',')) {
    out.push_back(parse_double(key, part));
  }
  return out;
}

// "duration:pattern,duration:pattern,..."
std::vector<ScheduleSegment> parse_schedule(const std::string& key,
                                            const std::string& value) {
  std::vector<ScheduleSegment> out;
  for (const auto& part : split(value, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("config: bad schedule segment for '" + key + "': " + part);
    }
    ScheduleSegment seg;
    seg.duration_ticks = parse_int(key, trim(part.substr(0, colon)));
    seg.pattern = parse_int(key, trim(part.substr(colon + 1)));
    out.push_back(seg);
  }
  if (out.empty()) throw ConfigError("config: empty schedule for '" + key + "'");
  return out;
}

}  // namespace

void apply_config_entry(Config& c, const std::string& key,
                        const std::string& value) {
  if (key == "grid.rows") c.grid_rows = parse_int(key, value);
  else if (key == "grid.cols") c.grid_cols = parse_int(key, value);
  else if (key == "grid.cell_length_km") c.grid_cell_length_km = parse_double(key, value);
  else if (key == "grid.minutes_per_cell") c.grid_minutes_per_cell = parse_double(key, value);
  else if (key == "match.radius_cells") c.match_radius_cells = parse_int(key, value);
  else if (key == "demand.k_true") c.demand_k_true = parse_int(key, value);
  else if (key == "demand.schedule") c.demand_schedule = parse_schedule(key, value);
  else if (key == "demand.patterns") c.demand_patterns = value;
  else if (key == "demand.rate_scale") c.demand_rate_scale = parse_double(key, value);
  else if (key == "demand.peak_contrast") c.demand_peak_contrast = parse_double(key, value);
  else if (key == "demand.seed") c.demand_seed = parse_u64(key, value);
  else if (key == "demand.forecast_window") c.demand_forecast_window = parse_int(key, value);
  else if (key == "fare.base") c.fare_base = parse_double(key, value);
  else if (key == "fare.per_km") c.fare_per_km = parse_double(key, value);
  else if (key == "routing.max_detour_ratio") c.routing_max_detour_ratio = parse_double(key, value);
  else if (key == "fleet.size") c.fleet_size = parse_int(key, value);
  else if (key == "fleet.capacity") c.fleet_capacity = parse_int(key, value);
  else if (key == "fleet.mileage") c.fleet_mileage = parse_double(key, value);
  else if (key == "fleet.max_working_minutes") c.fleet_max_working_minutes = parse_int(key, value);
  else if (key == "rl.beta") c.rl_beta = parse_double_list(key, value);
  else if (key == "rl.eta") c.rl_eta = parse_double(key, value);
  else if (key == "rl.k") c.rl_k = parse_int(key, value);
  else if (key == "rl.eps_steps") c.rl_eps_steps = parse_long(key, value);
  else if (key == "rl.gas_price") c.rl_gas_price = parse_double(key, value);
  else if (key == "cpd.enabled") c.cpd_enabled = parse_bool(key, value);
  else if (key == "cpd.threshold") c.cpd_threshold = parse_double(key, value);
  else if (key == "cpd.window_ticks") c.cpd_window_ticks = parse_int(key, value);
  else if (key == "cpd.min_segment") c.cpd_min_segment = parse_int(key, value);
  else if (key == "cpd.epsilon") c.cpd_epsilon = parse_double(key, value);
  else if (key == "cpd.max_window") c.cpd_max_window = parse_int(key, value);
  else if (key == "sim.ticks") c.sim_ticks = parse_long(key, value);
  else if (key == "sim.warmup_ticks") c.sim_warmup_ticks = parse_int(key, value);
  else if (key == "sim.entry_window") c.sim_entry_window = parse_int(key, value);
  else if (key == "sim.idle_trigger") c.sim_idle_trigger = parse_int(key, value);
  else if (key == "sim.request_ttl") c.sim_request_ttl = parse_int(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

Config parse_config_text(const std::string& text) {
  Config c;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not 'key = value'");
    }
    apply_config_entry(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate_config(c);
  return c;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void validate_config(const Config& c) {
  if (c.grid_rows <= 0 || c.grid_cols <= 0) {
    throw ConfigError("config: grid.rows and grid.cols must be positive");
  }
  if (c.grid_cell_length_km <= 0 || c.grid_minutes_per_cell <= 0) {
    throw ConfigError("config: grid.cell_length_km and grid.minutes_per_cell must be positive");
  }
  if (c.match_radius_cells < 0) throw ConfigError("config: match.radius_cells must be >= 0");
  if (c.demand_k_true <= 0) throw ConfigError("config: demand.k_true must be positive");
  if (c.demand_peak_contrast <= 0) throw ConfigError("config: demand.peak_contrast must be positive");
  for (const auto& seg : c.demand_schedule) {
    if (seg.duration_ticks <= 0) {
      throw ConfigError("config: demand.schedule durations must be positive");
    }
    if (seg.pattern < 0 || seg.pattern >= c.demand_k_true) {
      throw ConfigError("config: demand.schedule pattern index out of range");
    }
  }
  if (c.fleet_size < 0) throw ConfigError("config: fleet.size must be >= 0");
  if (c.fleet_capacity <= 0) throw ConfigError("config: fleet.capacity must be positive");
  if (c.fleet_mileage <= 0) throw ConfigError("config: fleet.mileage must be positive");
  if (c.rl_beta.size() != 5) throw ConfigError("config: rl.beta needs exactly 5 weights");
  for (double b : c.rl_beta) {
    if (b < 0 || !std::isfinite(b)) throw ConfigError("config: rl.beta weights must be finite and >= 0");
  }
  if (!(c.rl_eta > 0) || !(c.rl_eta < 1)) throw ConfigError("config: rl.eta must be in (0, 1)");
  if (c.rl_k <= 0) throw ConfigError("config: rl.k must be positive");
  if (c.cpd_window_ticks <= 0) throw ConfigError("config: cpd.window_ticks must be positive");
  if (c.cpd_epsilon <= 0) throw ConfigError("config: cpd.epsilon must be positive");
  if (c.cpd_max_window < 0) throw ConfigError("config: cpd.max_window must be >= 0");
  if (c.sim_ticks < 0) throw ConfigError("config: sim.ticks must be >= 0");
  if (c.sim_warmup_ticks < 0) throw ConfigError("config: sim.warmup_ticks must be >= 0");
  if (c.sim_entry_window <= 0) throw ConfigError("config: sim.entry_window must be positive");
  if (c.sim_request_ttl < 0) throw ConfigError("config: sim.request_ttl must be >= 0");
}

std::vector<DemandPattern> config_patterns(const Config& c) {
  const TravelModel m = c.travel_model();
  if (c.demand_patterns == "uniform" || c.demand_patterns == "two_peak") {
    return make_patterns(c.demand_patterns, m, c.demand_k_true, c.demand_rate_scale,
                         c.demand_peak_contrast);
  }
  auto patterns = load_patterns_json(c.demand_patterns, m);
  if (static_cast<int>(patterns.size()) < c.demand_k_true) {
    throw ConfigError("config: pattern file has fewer patterns than demand.k_true");
  }
  return patterns;
}

}  // namespace adafleet
